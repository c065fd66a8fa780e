// Copyright 2026 The qecseq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qecseq/circuit.h"

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qecseq {

const char *step_kind_name(StepKind k) {
    switch (k) {
        case StepKind::kInit:
            return "init";
        case StepKind::kGate:
            return "gate";
        case StepKind::kMeasure:
            return "measure";
        case StepKind::kCondGate:
            return "cond_gate";
        case StepKind::kPostSelect:
            return "post_select";
        case StepKind::kBeginBlock:
            return "begin_block";
        case StepKind::kEndBlock:
            return "end_block";
    }
    return "?";
}

const char *measure_role_name(MeasureRole r) {
    switch (r) {
        case MeasureRole::kSyndrome:
            return "syndrome";
        case MeasureRole::kVerification:
            return "verification";
        case MeasureRole::kData:
            return "data";
        case MeasureRole::kAncilla:
            return "ancilla";
    }
    return "?";
}

std::vector<uint32_t> CircuitFragment::new_wires(size_t count) {
    std::vector<uint32_t> w(count);
    for (auto &x : w) {
        x = new_wire();
    }
    return w;
}

void CircuitFragment::push(Step s) {
    if (s.noise_mask != 0) {
        s.location = num_locations_++;
    }
    steps_.push_back(std::move(s));
}

void CircuitFragment::init(uint32_t wire, bool noisy, const std::string &tag) {
    Step s;
    s.kind = StepKind::kInit;
    s.wires = {wire};
    s.noise_mask = noisy ? 1 : 0;
    s.tag = tag;
    push(std::move(s));
}

void CircuitFragment::gate(const Unitary &u, std::vector<uint32_t> wires, uint8_t noise_mask, const std::string &tag) {
    if (wires.size() != u.num_qubits()) {
        throw std::invalid_argument("gate '" + u.name() + "' applied to the wrong number of wires");
    }
    Step s;
    s.kind = StepKind::kGate;
    s.gate = &u;
    s.wires = std::move(wires);
    s.noise_mask = noise_mask;
    s.tag = tag;
    push(std::move(s));
}

void CircuitFragment::measure(uint32_t wire, MeasureRole role, std::vector<uint32_t> xor_into, bool noisy,
                              const std::string &tag) {
    Step s;
    s.kind = StepKind::kMeasure;
    s.wires = {wire};
    s.role = role;
    s.xor_into = std::move(xor_into);
    s.noise_mask = noisy ? 1 : 0;
    s.tag = tag;
    push(std::move(s));
}

void CircuitFragment::cond_gate(const Unitary &u, uint32_t wire, Condition cond, bool noisy, const std::string &tag) {
    if (u.num_qubits() != 1) {
        throw std::invalid_argument("conditional gates must be single-qubit");
    }
    Step s;
    s.kind = StepKind::kCondGate;
    s.gate = &u;
    s.wires = {wire};
    s.cond = std::move(cond);
    s.noise_mask = noisy ? 1 : 0;
    s.tag = tag;
    push(std::move(s));
}

void CircuitFragment::post_select(Condition cond, const std::string &tag) {
    Step s;
    s.kind = StepKind::kPostSelect;
    s.cond = std::move(cond);
    s.tag = tag;
    push(std::move(s));
}

void CircuitFragment::begin_block(const std::string &tag) {
    Step s;
    s.kind = StepKind::kBeginBlock;
    s.tag = tag;
    push(std::move(s));
}

void CircuitFragment::end_block(const std::string &tag) {
    Step s;
    s.kind = StepKind::kEndBlock;
    s.tag = tag;
    push(std::move(s));
}

std::vector<FaultLocation> CircuitFragment::locations() const {
    std::vector<FaultLocation> out;
    for (size_t i = 0; i < steps_.size(); i++) {
        const Step &s = steps_[i];
        if (!s.noisy()) {
            continue;
        }
        FaultLocation loc{s.location, i, {}};
        for (size_t k = 0; k < s.wires.size(); k++) {
            if (s.noise_mask & (1u << k)) {
                loc.wires.push_back(s.wires[k]);
            }
        }
        out.push_back(std::move(loc));
    }
    return out;
}

size_t CircuitFragment::num_slots() const {
    size_t n = 0;
    for (const auto &loc : locations()) {
        n += loc.wires.size();
    }
    return n;
}

std::vector<int> CircuitFragment::bit_last_use() const {
    std::vector<int> last(num_bits_, -1);
    for (size_t i = 0; i < steps_.size(); i++) {
        for (uint32_t b : steps_[i].cond.bits) {
            last[b] = static_cast<int>(i);
        }
    }
    for (uint32_t b : result_bits_) {
        last[b] = static_cast<int>(steps_.size());
    }
    return last;
}

std::vector<uint32_t> CircuitFragment::live_wires(size_t index) const {
    std::vector<uint8_t> live(num_wires_, 0);
    for (uint32_t w : inputs_) {
        live[w] = 1;
    }
    for (size_t i = 0; i < index && i < steps_.size(); i++) {
        if (steps_[i].kind == StepKind::kInit) {
            live[steps_[i].wires[0]] = 1;
        } else if (steps_[i].kind == StepKind::kMeasure) {
            live[steps_[i].wires[0]] = 0;
        }
    }
    std::vector<uint32_t> out;
    for (uint32_t w = 0; w < num_wires_; w++) {
        if (live[w]) {
            out.push_back(w);
        }
    }
    return out;
}

CircuitFragment CircuitFragment::slice(size_t begin, size_t end) const {
    if (begin > end || end > steps_.size()) {
        throw std::invalid_argument("bad slice range");
    }
    CircuitFragment f;
    f.num_wires_ = num_wires_;
    f.num_bits_ = num_bits_;
    f.inputs_ = begin == 0 ? inputs_ : live_wires(begin);
    f.outputs_ = end == steps_.size() ? outputs_ : live_wires(end);
    if (end == steps_.size()) {
        f.result_bits_ = result_bits_;
    }
    for (size_t i = begin; i < end; i++) {
        Step s = steps_[i];
        s.location = -1;
        f.push(std::move(s));
    }
    f.validate();
    return f;
}

CircuitFragment CircuitFragment::slice(size_t begin, size_t end, std::vector<uint32_t> inputs) const {
    if (begin > end || end > steps_.size()) {
        throw std::invalid_argument("bad slice range");
    }
    CircuitFragment f;
    f.num_wires_ = num_wires_;
    f.num_bits_ = num_bits_;
    f.inputs_ = inputs;
    std::vector<uint32_t> out = std::move(inputs);
    for (size_t i = begin; i < end; i++) {
        const Step &s = steps_[i];
        if (s.kind == StepKind::kInit) {
            out.push_back(s.wires[0]);
        } else if (s.kind == StepKind::kMeasure) {
            std::erase(out, s.wires[0]);
        }
        Step c = s;
        c.location = -1;
        f.push(std::move(c));
    }
    f.outputs_ = std::move(out);
    f.validate();
    return f;
}

void CircuitFragment::validate() const {
    std::vector<int> live(num_wires_, 0);
    for (uint32_t w : inputs_) {
        if (w >= num_wires_ || live[w]) {
            throw std::invalid_argument("bad input wire list");
        }
        live[w] = 1;
    }
    // Written bits, and the block depth at which each wire/bit was created.
    std::vector<int> bit_written(num_bits_, 0);
    std::vector<int> wire_depth(num_wires_, 0);
    std::vector<int> bit_depth(num_bits_, -1);
    int depth = 0;
    auto fail = [](size_t i, const std::string &msg) {
        throw std::invalid_argument("step " + std::to_string(i) + ": " + msg);
    };
    for (size_t i = 0; i < steps_.size(); i++) {
        const Step &s = steps_[i];
        for (uint32_t w : s.wires) {
            if (w >= num_wires_) {
                fail(i, "wire out of range");
            }
        }
        auto touch_bit = [&](uint32_t b) {
            if (b >= num_bits_) {
                fail(i, "classical bit out of range");
            }
            if (bit_depth[b] < 0) {
                bit_depth[b] = depth;
            } else if (bit_depth[b] != depth) {
                fail(i, "classical bit crosses a block boundary");
            }
        };
        switch (s.kind) {
            case StepKind::kInit:
                if (live[s.wires[0]]) {
                    fail(i, "init of a live wire");
                }
                live[s.wires[0]] = 1;
                wire_depth[s.wires[0]] = depth;
                break;
            case StepKind::kGate:
            case StepKind::kCondGate:
                if (s.wires.size() == 2 && s.wires[0] == s.wires[1]) {
                    fail(i, "repeated wire");
                }
                for (uint32_t w : s.wires) {
                    if (!live[w]) {
                        fail(i, "gate on a dead wire");
                    }
                    if (wire_depth[w] < depth) {
                        fail(i, "block touches a wire created outside it");
                    }
                }
                if (s.kind == StepKind::kCondGate) {
                    for (uint32_t b : s.cond.bits) {
                        touch_bit(b);
                        if (!bit_written[b]) {
                            fail(i, "condition reads an unwritten bit");
                        }
                    }
                }
                break;
            case StepKind::kMeasure:
                if (!live[s.wires[0]]) {
                    fail(i, "measurement of a dead wire");
                }
                if (wire_depth[s.wires[0]] < depth) {
                    fail(i, "block measures a wire created outside it");
                }
                live[s.wires[0]] = 0;
                for (uint32_t b : s.xor_into) {
                    touch_bit(b);
                    bit_written[b] = 1;
                }
                break;
            case StepKind::kPostSelect:
                for (uint32_t b : s.cond.bits) {
                    touch_bit(b);
                    if (!bit_written[b]) {
                        fail(i, "post-selection reads an unwritten bit");
                    }
                }
                break;
            case StepKind::kBeginBlock:
                depth++;
                break;
            case StepKind::kEndBlock:
                if (depth == 0) {
                    fail(i, "unbalanced end_block");
                }
                depth--;
                for (uint32_t w = 0; w < num_wires_; w++) {
                    if (live[w] && wire_depth[w] > depth) {
                        wire_depth[w] = depth;
                    }
                }
                break;
        }
    }
    if (depth != 0) {
        throw std::invalid_argument("unterminated block");
    }
    std::set<uint32_t> final_live, outs(outputs_.begin(), outputs_.end());
    for (uint32_t w = 0; w < num_wires_; w++) {
        if (live[w]) {
            final_live.insert(w);
        }
    }
    if (final_live != outs || outs.size() != outputs_.size()) {
        throw std::invalid_argument("output wires do not match the live wires at the end of the fragment");
    }
}

namespace {

nlohmann::ordered_json step_json(const Step &s) {
    nlohmann::ordered_json j;
    j["op"] = step_kind_name(s.kind);
    if (s.gate != nullptr) {
        j["gate"] = s.gate->name();
    }
    if (!s.wires.empty()) {
        j["wires"] = s.wires;
    }
    if (s.kind == StepKind::kMeasure) {
        j["role"] = measure_role_name(s.role);
        j["xor_into"] = s.xor_into;
    }
    if (s.kind == StepKind::kCondGate || s.kind == StepKind::kPostSelect) {
        j["cond"] = {{"bits", s.cond.bits}, {"value", s.cond.value}};
    }
    if (s.location >= 0) {
        j["loc"] = s.location;
        if (s.wires.size() == 2 && s.noise_mask != 3) {
            j["noise_mask"] = s.noise_mask;
        }
    }
    if (!s.tag.empty()) {
        j["tag"] = s.tag;
    }
    return j;
}

}  // namespace

std::string CircuitFragment::to_json(int indent) const {
    nlohmann::ordered_json j;
    j["format"] = "qecseq.circuit";
    j["version"] = 1;
    j["num_wires"] = num_wires_;
    j["num_bits"] = num_bits_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    if (!result_bits_.empty()) {
        j["result_bits"] = result_bits_;
    }
    j["num_locations"] = num_locations_;
    j["num_slots"] = num_slots();
    auto arr = nlohmann::ordered_json::array();
    for (const Step &s : steps_) {
        arr.push_back(step_json(s));
    }
    j["steps"] = std::move(arr);
    return j.dump(indent);
}

std::string CircuitFragment::signature(size_t begin, size_t end) const {
    std::map<uint32_t, uint32_t> wmap, bmap;
    auto w = [&](uint32_t x) {
        auto it = wmap.find(x);
        if (it == wmap.end()) {
            it = wmap.emplace(x, static_cast<uint32_t>(wmap.size())).first;
        }
        return it->second;
    };
    auto b = [&](uint32_t x) {
        auto it = bmap.find(x);
        if (it == bmap.end()) {
            it = bmap.emplace(x, static_cast<uint32_t>(bmap.size())).first;
        }
        return it->second;
    };
    std::ostringstream out;
    for (size_t i = begin; i < end; i++) {
        const Step &s = steps_[i];
        out << static_cast<int>(s.kind) << ':' << (s.gate ? s.gate->name() : "") << ':' << int(s.noise_mask) << ':';
        for (uint32_t x : s.wires) {
            out << w(x) << ',';
        }
        out << ':';
        for (uint32_t x : s.xor_into) {
            out << b(x) << ',';
        }
        out << ':';
        for (uint32_t x : s.cond.bits) {
            out << b(x) << ',';
        }
        out << s.cond.value << ';';
    }
    return out.str();
}

}  // namespace qecseq
