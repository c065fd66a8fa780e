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

#include "qecseq/gadgets.h"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace qecseq {

using steane::ErrorKind;
using steane::kBlockSize;
using steane::kSupports;
using steane::LogicalGate;

namespace {

const char *recovery_name(GadgetOptions::Recovery r) {
    return r == GadgetOptions::Recovery::kCorrect ? "correct" : "postselect";
}

uint8_t cnot_mask(bool control_noisy, bool target_noisy) {
    return static_cast<uint8_t>((control_noisy ? 1 : 0) | (target_noisy ? 2 : 0));
}

std::string join(const std::string &a, const std::string &b) {
    return a + "/" + b;
}

}  // namespace

std::string GadgetOptions::describe() const {
    std::ostringstream out;
    out << "noisy_recovery=" << recovery_name(noisy_recovery) << ";perfect_recovery=" << recovery_name(perfect_recovery)
        << ";init_recovery=" << recovery_name(init_recovery)
        << ";cat_layout=" << (cat_layout == CatLayout::kFanout ? "fanout" : "chain")
        << ";phase_extraction=" << (phase_extraction == PhaseExtraction::kCatControl ? "cat_control" : "data_hadamard")
        << ";theta_ancilla_noise=" << theta_ancilla_noise << ";correction_noise=" << correction_noise
        << ";theta_verifications=" << theta_verifications << ";t_odd_correction=" << t_odd_correction;
    return out.str();
}

std::vector<uint32_t> append_cat(CircuitFragment &f, size_t width, bool shor, bool noisy, int verifications,
                                 const GadgetOptions &opt, const std::string &tag) {
    if (width < 2) {
        throw std::invalid_argument("cat width must be at least 2");
    }
    if (verifications < 0 || static_cast<size_t>(verifications) > width / 2) {
        throw std::invalid_argument("unsupported number of cat verifications");
    }
    std::string t = join(tag, "cat");
    f.begin_block(t);
    std::vector<uint32_t> cat = f.new_wires(width);
    for (uint32_t w : cat) {
        f.init(w, noisy, t);
    }
    f.gate(gates::H(), {cat[0]}, noisy, t);
    for (size_t k = 1; k < width; k++) {
        uint32_t control = opt.cat_layout == GadgetOptions::CatLayout::kFanout ? cat[0] : cat[k - 1];
        f.gate(gates::CNOT(), {control, cat[k]}, noisy, t);
    }
    // Verification v compares the parities of cat qubits v and width-1-v.
    for (int v = 0; v < verifications; v++) {
        uint32_t anc = f.new_wire();
        uint32_t bit = f.new_bit();
        std::string tv = join(tag, "verify");
        f.init(anc, noisy, tv);
        f.gate(gates::CNOT(), {cat[v], anc}, noisy, tv);
        f.gate(gates::CNOT(), {cat[width - 1 - v], anc}, noisy, tv);
        f.measure(anc, MeasureRole::kVerification, {bit}, noisy, tv);
        f.post_select({{bit}, 0}, tv);
    }
    if (shor) {
        for (uint32_t w : cat) {
            f.gate(gates::H(), {w}, noisy, join(tag, "shor"));
        }
    }
    f.end_block(t);
    return cat;
}

void append_syndrome_extraction(CircuitFragment &f, const std::vector<uint32_t> &data, ErrorKind kind, size_t index,
                                uint32_t bit, bool noisy, bool ancilla_noisy, const GadgetOptions &opt,
                                const std::string &tag) {
    if (index >= kSupports.size()) {
        throw std::invalid_argument("generator index must be 0, 1 or 2");
    }
    const auto &support = kSupports[index];
    std::string t = join(tag, std::string(kind == ErrorKind::kBitFlip ? "zsyn" : "xsyn") + std::to_string(index));
    bool cat_control =
        kind == ErrorKind::kPhase && opt.phase_extraction == GadgetOptions::PhaseExtraction::kCatControl;
    std::vector<uint32_t> anc = append_cat(f, support.size(), !cat_control, ancilla_noisy, 1, opt, t);
    for (size_t i = 0; i < support.size(); i++) {
        uint32_t d = data[support[i]];
        if (kind == ErrorKind::kBitFlip) {
            f.gate(gates::CNOT(), {d, anc[i]}, cnot_mask(noisy, ancilla_noisy), t);
        } else if (cat_control) {
            f.gate(gates::CNOT(), {anc[i], d}, cnot_mask(ancilla_noisy, noisy), t);
        } else {
            f.gate(gates::H(), {d}, noisy, t);
            f.gate(gates::CNOT(), {d, anc[i]}, cnot_mask(noisy, ancilla_noisy), t);
            f.gate(gates::H(), {d}, noisy, t);
        }
    }
    for (size_t i = 0; i < support.size(); i++) {
        if (cat_control) {
            f.gate(gates::H(), {anc[i]}, ancilla_noisy, t);
        }
        f.measure(anc[i], MeasureRole::kSyndrome, {bit}, ancilla_noisy, t);
    }
}

namespace {

void append_recovery(CircuitFragment &f, const std::vector<uint32_t> &data, ErrorKind kind,
                     const std::vector<uint32_t> &bits, GadgetOptions::Recovery recovery, bool gate_noisy,
                     const std::string &tag) {
    if (recovery == GadgetOptions::Recovery::kPostselect) {
        f.post_select({bits, 0}, tag);
        return;
    }
    const Unitary &fix = kind == ErrorKind::kBitFlip ? gates::X() : gates::Z();
    for (size_t q = 0; q < kBlockSize; q++) {
        f.cond_gate(fix, data[q], {bits, steane::syndrome_of_qubit(q)}, gate_noisy, tag);
    }
}

}  // namespace

void append_qec_cycle(CircuitFragment &f, const std::vector<uint32_t> &data, bool noisy, const GadgetOptions &opt) {
    std::string tag = noisy ? "qec" : "qec_perfect";
    auto recovery = noisy ? opt.noisy_recovery : opt.perfect_recovery;
    for (ErrorKind kind : {ErrorKind::kBitFlip, ErrorKind::kPhase}) {
        std::vector<uint32_t> bits;
        for (size_t k = 0; k < kSupports.size(); k++) {
            bits.push_back(f.new_bit());
            append_syndrome_extraction(f, data, kind, k, bits.back(), noisy, noisy, opt, tag);
        }
        append_recovery(f, data, kind, bits, recovery, noisy && opt.correction_noise,
                        join(tag, kind == ErrorKind::kBitFlip ? "xfix" : "zfix"));
    }
}

std::vector<uint32_t> append_logical_zero(CircuitFragment &f, bool noisy, bool ancilla_noisy,
                                          const GadgetOptions &opt, const std::string &tag) {
    std::string t = join(tag, tags::kInit);
    std::vector<uint32_t> block = f.new_wires(kBlockSize);
    for (uint32_t w : block) {
        f.init(w, noisy, t);
    }
    std::vector<uint32_t> bits;
    for (size_t k = 0; k < kSupports.size(); k++) {
        bits.push_back(f.new_bit());
        append_syndrome_extraction(f, block, ErrorKind::kPhase, k, bits.back(), noisy, ancilla_noisy, opt, t);
    }
    append_recovery(f, block, ErrorKind::kPhase, bits, opt.init_recovery, noisy && opt.correction_noise,
                    join(t, "zfix"));
    return block;
}

std::vector<uint32_t> append_theta(CircuitFragment &f, bool noisy, const GadgetOptions &opt) {
    std::string t = tags::kTheta;
    bool anc = noisy && opt.theta_ancilla_noise;
    f.begin_block(t);
    std::vector<uint32_t> block = append_logical_zero(f, noisy, anc, opt, t);
    std::vector<uint32_t> cat = append_cat(f, kBlockSize, false, anc, opt.theta_verifications, opt, t);
    for (size_t k = 0; k < kBlockSize; k++) {
        f.gate(gates::CZPX(), {cat[k], block[k]}, cnot_mask(anc, noisy), join(t, "czpx"));
    }
    uint32_t parity = f.new_bit();
    for (size_t k = 0; k < kBlockSize; k++) {
        f.gate(gates::H(), {cat[k]}, anc, join(t, "readout"));
        f.measure(cat[k], MeasureRole::kAncilla, {parity}, anc, join(t, "readout"));
    }
    f.post_select({{parity}, 0}, join(t, "readout"));
    f.end_block(t);
    return block;
}

std::vector<uint32_t> append_t_gate(CircuitFragment &f, const std::vector<uint32_t> &data, bool noisy,
                                    const GadgetOptions &opt) {
    std::vector<uint32_t> theta = append_theta(f, noisy, opt);
    std::string t = tags::kTGadget;
    for (size_t k = 0; k < kBlockSize; k++) {
        f.gate(gates::CNOT(), {theta[k], data[k]}, noisy, t);
    }
    std::vector<uint32_t> checks = {f.new_bit(), f.new_bit(), f.new_bit()};
    uint32_t parity = f.new_bit();
    for (size_t q = 0; q < kBlockSize; q++) {
        std::vector<uint32_t> into = {parity};
        for (size_t k = 0; k < kSupports.size(); k++) {
            if (std::find(kSupports[k].begin(), kSupports[k].end(), q) != kSupports[k].end()) {
                into.push_back(checks[k]);
            }
        }
        f.measure(data[q], MeasureRole::kData, into, noisy, t);
    }
    if (!opt.t_odd_correction) {
        f.post_select({{checks[0], checks[1], checks[2], parity}, 0}, t);
    } else {
        f.post_select({checks, 0}, t);
        bool gate_noisy = noisy && opt.correction_noise;
        for (uint32_t w : theta) {
            f.cond_gate(gates::X(), w, {{parity}, 1}, gate_noisy, join(t, "odd_fix"));
        }
        for (uint32_t w : theta) {
            f.cond_gate(steane::transversal_unitary(LogicalGate::kP), w, {{parity}, 1}, gate_noisy,
                        join(t, "odd_fix"));
        }
    }
    return theta;
}

void append_transversal(CircuitFragment &f, const std::vector<uint32_t> &data, LogicalGate g, bool noisy) {
    const Unitary &u = steane::transversal_unitary(g);
    std::string t = std::string(tags::kGate) + "/" + steane::gate_char(g);
    for (uint32_t w : data) {
        f.gate(u, {w}, noisy, t);
    }
}

namespace {

CircuitFragment with_data_block(std::vector<uint32_t> &data) {
    CircuitFragment f;
    data = f.new_wires(kBlockSize);
    f.set_inputs(data);
    return f;
}

}  // namespace

CircuitFragment shor_state_fragment(size_t width, const GadgetOptions &opt) {
    if (width != 4 && width != 7) {
        throw std::invalid_argument("Shor states are built with width 4 or 7");
    }
    CircuitFragment f;
    f.set_outputs(append_cat(f, width, true, true, 1, opt, "shor"));
    f.validate();
    return f;
}

CircuitFragment syndrome_extraction_fragment(ErrorKind kind, size_t index, const GadgetOptions &opt) {
    std::vector<uint32_t> data;
    CircuitFragment f = with_data_block(data);
    uint32_t bit = f.new_bit();
    append_syndrome_extraction(f, data, kind, index, bit, true, true, opt, "extract");
    f.set_outputs(data);
    f.set_result_bits({bit});
    f.validate();
    return f;
}

CircuitFragment qec_cycle_fragment(bool noisy, const GadgetOptions &opt) {
    std::vector<uint32_t> data;
    CircuitFragment f = with_data_block(data);
    append_qec_cycle(f, data, noisy, opt);
    f.set_outputs(data);
    f.validate();
    return f;
}

CircuitFragment logical_zero_init_fragment(bool noisy, const GadgetOptions &opt) {
    CircuitFragment f;
    f.set_outputs(append_logical_zero(f, noisy, noisy, opt, ""));
    f.validate();
    return f;
}

CircuitFragment theta_state_fragment(bool noisy, const GadgetOptions &opt) {
    CircuitFragment f;
    f.set_outputs(append_theta(f, noisy, opt));
    f.validate();
    return f;
}

CircuitFragment t_gate_fragment(bool noisy, const GadgetOptions &opt) {
    std::vector<uint32_t> data;
    CircuitFragment f = with_data_block(data);
    f.set_outputs(append_t_gate(f, data, noisy, opt));
    f.validate();
    return f;
}

CircuitFragment transversal_clifford(LogicalGate g, bool noisy) {
    std::vector<uint32_t> data;
    CircuitFragment f = with_data_block(data);
    append_transversal(f, data, g, noisy);
    f.set_outputs(data);
    f.validate();
    return f;
}

QecPolicy QecPolicy::parse(const std::string &text) {
    if (text == "none") {
        return none();
    }
    if (text == "perfect-final") {
        return perfect_final();
    }
    if (text == "noisy-final") {
        return noisy_final();
    }
    if (text == "noisy-after-each") {
        return noisy_after_each();
    }
    const std::string every = "noisy-every-";
    if (text.rfind(every, 0) == 0) {
        int k = 0;
        try {
            k = std::stoi(text.substr(every.size()));
        } catch (const std::exception &) {
            throw std::invalid_argument("bad QEC policy '" + text + "'");
        }
        if (k < 1) {
            throw std::invalid_argument("noisy-every-K needs K >= 1");
        }
        return noisy_every(k);
    }
    const std::string after = "after:";
    if (text.rfind(after, 0) == 0) {
        std::vector<int> list;
        std::stringstream ss(text.substr(after.size()));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                list.push_back(std::stoi(item));
            } catch (const std::exception &) {
                throw std::invalid_argument("bad QEC placement '" + item + "'");
            }
        }
        if (list.empty()) {
            throw std::invalid_argument("after: needs at least one gate index");
        }
        return explicit_after(std::move(list));
    }
    throw std::invalid_argument("unknown QEC policy '" + text + "'");
}

std::string QecPolicy::str() const {
    switch (mode) {
        case Mode::kNone:
            return "none";
        case Mode::kPerfectFinal:
            return "perfect-final";
        case Mode::kNoisyFinal:
            return "noisy-final";
        case Mode::kNoisyAfterEach:
            return "noisy-after-each";
        case Mode::kNoisyEveryK:
            return "noisy-every-" + std::to_string(k);
        case Mode::kExplicit: {
            std::string s = "after:";
            for (size_t i = 0; i < after.size(); i++) {
                s += (i ? "," : "") + std::to_string(after[i]);
            }
            return s;
        }
    }
    return "?";
}

std::vector<int> QecPolicy::placements(size_t num_gates) const {
    std::vector<int> out(num_gates, 0);
    if (num_gates == 0) {
        return out;
    }
    switch (mode) {
        case Mode::kNone:
            break;
        case Mode::kPerfectFinal:
            out.back() = 2;
            break;
        case Mode::kNoisyFinal:
            out.back() = 1;
            break;
        case Mode::kNoisyAfterEach:
            std::fill(out.begin(), out.end(), 1);
            break;
        case Mode::kNoisyEveryK:
            if (k < 1) {
                throw std::invalid_argument("noisy-every-K needs K >= 1");
            }
            for (size_t i = 0; i < num_gates; i++) {
                if ((i + 1) % static_cast<size_t>(k) == 0) {
                    out[i] = 1;
                }
            }
            break;
        case Mode::kExplicit:
            for (int a : after) {
                if (a < 1 || static_cast<size_t>(a) > num_gates) {
                    throw std::invalid_argument("QEC placement " + std::to_string(a) + " outside the sequence of " +
                                                std::to_string(num_gates) + " gates");
                }
                out[a - 1] = 1;
            }
            break;
    }
    return out;
}

GateSequence parse_sequence(const std::string &text) {
    GateSequence seq;
    for (char c : text) {
        if (c == ',' || c == ' ' || c == '-') {
            continue;
        }
        seq.push_back(steane::gate_from_char(static_cast<char>(std::toupper(static_cast<unsigned char>(c)))));
    }
    if (seq.empty()) {
        throw std::invalid_argument("gate sequence is empty");
    }
    return seq;
}

std::string sequence_str(const GateSequence &seq) {
    std::string s;
    for (auto g : seq) {
        s += steane::gate_char(g);
    }
    return s;
}

std::string product_label(const GateSequence &seq) {
    std::string s = sequence_str(seq);
    std::reverse(s.begin(), s.end());
    return s;
}

CircuitFragment build_sequence(const GateSequence &gates, const QecPolicy &policy, const GadgetOptions &opt) {
    if (gates.empty()) {
        throw std::invalid_argument("gate sequence is empty");
    }
    std::vector<int> place = policy.placements(gates.size());
    std::vector<uint32_t> data;
    CircuitFragment f = with_data_block(data);
    for (size_t i = 0; i < gates.size(); i++) {
        if (gates[i] == LogicalGate::kT) {
            data = append_t_gate(f, data, true, opt);
        } else {
            append_transversal(f, data, gates[i], true);
        }
        if (place[i] != 0) {
            append_qec_cycle(f, data, place[i] == 1, opt);
        }
    }
    f.set_outputs(data);
    f.validate();
    return f;
}

}  // namespace qecseq
