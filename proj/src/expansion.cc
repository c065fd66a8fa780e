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

#include "qecseq/expansion.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <unordered_map>

#include "qecseq/steane.h"

namespace qecseq {

void FaultPath::validate(const CircuitFragment &f) const {
    auto locs = f.locations();
    std::vector<std::pair<int, uint32_t>> seen;
    for (const auto &a : faults) {
        if (a.location < 0 || static_cast<size_t>(a.location) >= locs.size()) {
            throw std::invalid_argument("fault references unknown location " + std::to_string(a.location));
        }
        const auto &w = locs[a.location].wires;
        if (std::find(w.begin(), w.end(), a.wire) == w.end()) {
            throw std::invalid_argument("fault wire " + std::to_string(a.wire) + " is not a slot of location " +
                                        std::to_string(a.location));
        }
        if (a.pauli == Pauli::kI) {
            throw std::invalid_argument("fault Pauli must be X, Y or Z");
        }
        std::pair<int, uint32_t> key{a.location, a.wire};
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
            throw std::invalid_argument("two faults on the same slot");
        }
        seen.push_back(key);
    }
}

std::string FaultPath::str() const {
    std::ostringstream out;
    for (size_t i = 0; i < faults.size(); i++) {
        out << (i ? " " : "") << pauli_char(faults[i].pauli) << "@" << faults[i].location << ":" << faults[i].wire;
    }
    return out.str();
}

namespace {

struct Slot {
    int location;
    uint32_t wire;
};

std::vector<Slot> all_slots(const CircuitFragment &f) {
    std::vector<Slot> slots;
    for (const auto &loc : f.locations()) {
        for (uint32_t w : loc.wires) {
            slots.push_back({loc.id, w});
        }
    }
    return slots;
}

void enumerate_rec(const std::vector<Slot> &slots, size_t start, int remaining, FaultPath &path,
                   const std::function<void(const FaultPath &)> &visit) {
    visit(path);
    if (remaining == 0) {
        return;
    }
    for (size_t i = start; i < slots.size(); i++) {
        for (Pauli p : {Pauli::kX, Pauli::kY, Pauli::kZ}) {
            path.faults.push_back({slots[i].location, slots[i].wire, p});
            enumerate_rec(slots, i + 1, remaining - 1, path, visit);
            path.faults.pop_back();
        }
    }
}

/// (1 - px - py - pz)^n truncated, by binomial expansion.
ErrorPolynomial no_fault_power(size_t n, int order) {
    ErrorPolynomial q = ErrorPolynomial(order);
    for (int a = 0; a < 3; a++) {
        q -= ErrorPolynomial::variable(order, a);
    }
    ErrorPolynomial out = ErrorPolynomial::one(order);
    ErrorPolynomial term = ErrorPolynomial::one(order);
    double binom = 1;
    for (int k = 1; k <= order && static_cast<size_t>(k) <= n; k++) {
        binom = binom * static_cast<double>(n - k + 1) / k;
        term = term * q;
        out += term * binom;
    }
    return out;
}

}  // namespace

void enumerate_fault_paths(const CircuitFragment &f, int order, const std::function<void(const FaultPath &)> &visit) {
    std::vector<Slot> slots = all_slots(f);
    FaultPath path;
    enumerate_rec(slots, 0, order, path, visit);
}

ErrorPolynomial path_weight(const FaultPath &path, size_t num_slots, int order) {
    ErrorPolynomial w = no_fault_power(num_slots - path.order(), order);
    for (const auto &a : path.faults) {
        w *= ErrorPolynomial::variable(order, static_cast<int>(a.pauli) - 1);
    }
    return w;
}

ErrorPolynomial path_weight_sum(const CircuitFragment &f, int order) {
    size_t n = f.num_slots();
    // Paths with the same multiset of Pauli types share a weight; sum them in
    // enumeration order anyway so the check exercises the enumerator.
    std::vector<ErrorPolynomial> by_order;
    for (int k = 0; k <= order; k++) {
        by_order.push_back(no_fault_power(n >= static_cast<size_t>(k) ? n - k : 0, order));
    }
    ErrorPolynomial total(order);
    enumerate_fault_paths(f, order, [&](const FaultPath &p) {
        ErrorPolynomial w = by_order[p.order()];
        for (const auto &a : p.faults) {
            w *= ErrorPolynomial::variable(order, static_cast<int>(a.pauli) - 1);
        }
        total += w;
    });
    return total;
}

template <class W>
WeightedEnsemble<W> Ensemble<W>::weighted() const {
    WeightedEnsemble<W> out;
    for (const auto &b : branches) {
        out.members.push_back({b.weight, StateVector(wires.size(), b.amps)});
    }
    return out;
}

template struct Ensemble<ErrorPolynomial>;
template struct Ensemble<double>;

bool BlockCache::lookup(const std::string &key, PolyEnsemble &out) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = poly_.find(key);
    if (it == poly_.end()) {
        return false;
    }
    out = it->second;
    return true;
}

void BlockCache::store(const std::string &key, const PolyEnsemble &e) {
    std::lock_guard<std::mutex> lock(mu_);
    poly_.emplace(key, e);
}

bool BlockCache::lookup(const std::string &key, NumericEnsemble &out) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = numeric_.find(key);
    if (it == numeric_.end()) {
        return false;
    }
    out = it->second;
    return true;
}

void BlockCache::store(const std::string &key, const NumericEnsemble &e) {
    std::lock_guard<std::mutex> lock(mu_);
    numeric_.emplace(key, e);
}

size_t BlockCache::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return poly_.size() + numeric_.size();
}

void BlockCache::clear() {
    std::lock_guard<std::mutex> lock(mu_);
    poly_.clear();
    numeric_.clear();
}

namespace {

constexpr double kSameStateTol = 1e-10;
constexpr double kNegligibleWeight = 1e-15;

bool negligible(const ErrorPolynomial &w) {
    for (int i = 0; i < w.size(); i++) {
        if (std::abs(w[i]) > kNegligibleWeight) {
            return false;
        }
    }
    return true;
}

bool negligible(double w) {
    return std::abs(w) < kPruneThreshold;
}

uint64_t mix(uint64_t h, uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

template <class W>
uint64_t branch_hash(const Branch<W> &b) {
    uint64_t h = 1469598103934665603ULL;
    for (uint8_t bit : b.bits) {
        h = mix(h, bit);
    }
    size_t pivot = 0;
    while (pivot < b.amps.size() && std::norm(b.amps[pivot]) < 1e-8) {
        pivot++;
    }
    if (pivot == b.amps.size()) {
        return h;
    }
    Complex phase = std::conj(b.amps[pivot]) / std::abs(b.amps[pivot]);
    for (size_t j = pivot; j < b.amps.size(); j++) {
        Complex v = b.amps[j] * phase * 1e6;
        auto re = static_cast<int64_t>(std::floor(v.real() + 0.5));
        auto im = static_cast<int64_t>(std::floor(v.imag() + 0.5));
        if (re == 0 && im == 0) {
            continue;
        }
        h = mix(h, j);
        h = mix(h, static_cast<uint64_t>(re));
        h = mix(h, static_cast<uint64_t>(im));
    }
    return h;
}

bool same_state(const std::vector<Complex> &a, const std::vector<Complex> &b) {
    Complex t = 0;
    for (size_t i = 0; i < a.size(); i++) {
        t += std::conj(a[i]) * b[i];
    }
    return std::norm(t) >= 1 - kSameStateTol;
}

/// Merges branches holding the same state (up to phase) and classical bits.
template <class W>
void merge_branches(std::vector<Branch<W>> &branches) {
    if (branches.size() < 2) {
        return;
    }
    std::unordered_map<uint64_t, std::vector<size_t>> buckets;
    buckets.reserve(branches.size() * 2);
    std::vector<Branch<W>> out;
    out.reserve(branches.size());
    for (auto &b : branches) {
        if (negligible(b.weight)) {
            continue;
        }
        auto &bucket = buckets[branch_hash(b)];
        bool merged = false;
        for (size_t idx : bucket) {
            if (out[idx].bits == b.bits && same_state(out[idx].amps, b.amps)) {
                out[idx].weight += b.weight;
                merged = true;
                break;
            }
        }
        if (!merged) {
            bucket.push_back(out.size());
            out.push_back(std::move(b));
        }
    }
    branches = std::move(out);
}

/// Reorders amplitudes from the `from` wire layout to the `to` layout.
std::vector<Complex> permute_layout(const std::vector<Complex> &amps, const std::vector<uint32_t> &from,
                                    const std::vector<uint32_t> &to) {
    size_t n = from.size();
    std::vector<size_t> src_pos(n);
    for (size_t k = 0; k < n; k++) {
        src_pos[k] = static_cast<size_t>(std::find(from.begin(), from.end(), to[k]) - from.begin());
    }
    std::vector<Complex> out(amps.size());
    for (size_t i = 0; i < amps.size(); i++) {
        size_t j = 0;
        for (size_t k = 0; k < n; k++) {
            size_t bit = (i >> (n - 1 - src_pos[k])) & 1u;
            j |= bit << (n - 1 - k);
        }
        out[j] = amps[i];
    }
    return out;
}

template <class W>
class Engine {
   public:
    static constexpr bool kExpand = std::is_same_v<W, ErrorPolynomial>;

    Engine(const CircuitFragment &f, int order, size_t budget, bool ignore_ps, std::function<bool(int)> filter,
           BlockCache *cache, const FaultPath *fixed, EngineStats *stats)
        : f_(f),
          order_(order),
          budget_(budget),
          ignore_ps_(ignore_ps),
          filter_(std::move(filter)),
          cache_(cache),
          stats_(stats) {
        const auto &steps = f.steps();
        std::vector<size_t> stack;
        block_end_.assign(steps.size(), 0);
        loc_step_.assign(f.num_locations(), 0);
        for (size_t i = 0; i < steps.size(); i++) {
            if (steps[i].kind == StepKind::kBeginBlock) {
                stack.push_back(i);
            } else if (steps[i].kind == StepKind::kEndBlock) {
                block_end_[stack.back()] = i;
                stack.pop_back();
            }
            if (steps[i].location >= 0) {
                loc_step_[steps[i].location] = i;
            }
        }
        // Bits are zeroed after their last read so equivalent branches merge.
        dead_after_.assign(steps.size(), {});
        std::vector<int> last = f.bit_last_use();
        for (size_t i = 0; i < steps.size(); i++) {
            for (uint32_t b : steps[i].xor_into) {
                if (last[b] < 0) {
                    dead_after_[i].push_back(b);
                }
            }
        }
        for (uint32_t b = 0; b < last.size(); b++) {
            if (last[b] >= 0 && static_cast<size_t>(last[b]) < steps.size()) {
                dead_after_[last[b]].push_back(b);
            }
        }
        if (fixed != nullptr) {
            for (const auto &a : fixed->faults) {
                fixed_.emplace(std::make_pair(a.location, a.wire), a.pauli);
            }
        }
        for (int a = 0; a < 3; a++) {
            vars_[a] = ErrorPolynomial::variable(order, a);
        }
        clean_ = ErrorPolynomial::no_fault(order);
    }

    Ensemble<W> run_all(const StateVector &input) {
        if (input.dim() != (size_t{1} << f_.inputs().size())) {
            throw std::invalid_argument("input state has " + std::to_string(input.num_qubits()) +
                                        " qubits but the fragment expects " + std::to_string(f_.inputs().size()));
        }
        Ensemble<W> e;
        e.wires = f_.inputs();
        e.branches.push_back({one(), input.amplitudes(), std::vector<uint8_t>(f_.num_bits(), 0)});
        Ensemble<W> out = run(std::move(e), 0, f_.steps().size());
        if (out.wires != f_.outputs()) {
            for (auto &b : out.branches) {
                b.amps = permute_layout(b.amps, out.wires, f_.outputs());
            }
            out.wires = f_.outputs();
        }
        return out;
    }

   private:
    W one() const {
        if constexpr (kExpand) {
            return ErrorPolynomial::one(order_);
        } else {
            return 1.0;
        }
    }

    static size_t bytes(const Ensemble<W> &e) {
        return e.branches.size() * ((sizeof(Complex) << e.wires.size()) + sizeof(Branch<W>));
    }

    static size_t position(const Ensemble<W> &e, uint32_t wire) {
        auto it = std::find(e.wires.begin(), e.wires.end(), wire);
        if (it == e.wires.end()) {
            throw std::logic_error("wire " + std::to_string(wire) + " is not live");
        }
        return static_cast<size_t>(it - e.wires.begin());
    }

    /// Applies the fault channel of one (location, wire) slot. With `only`,
    /// branches whose flag is 0 are skipped.
    void fault_slot(Ensemble<W> &e, size_t pos, int loc, uint32_t wire, const std::vector<char> *only) {
        size_t n = e.wires.size();
        if constexpr (kExpand) {
            if (filter_ && !filter_(loc)) {
                return;
            }
            size_t count = e.branches.size();
            for (size_t i = 0; i < count; i++) {
                if (only != nullptr && !(*only)[i]) {
                    continue;
                }
                if (e.branches[i].weight.min_degree() < order_) {
                    for (int a = 0; a < 3; a++) {
                        Branch<W> nb = e.branches[i];
                        nb.weight = e.branches[i].weight * vars_[a];
                        kernels::apply_pauli(nb.amps, n, pos, static_cast<Pauli>(a + 1));
                        e.branches.push_back(std::move(nb));
                    }
                }
                e.branches[i].weight = e.branches[i].weight * clean_;
            }
        } else {
            auto it = fixed_.find({loc, wire});
            if (it == fixed_.end()) {
                return;
            }
            for (size_t i = 0; i < e.branches.size(); i++) {
                if (only != nullptr && !(*only)[i]) {
                    continue;
                }
                kernels::apply_pauli(e.branches[i].amps, n, pos, it->second);
            }
        }
    }

    bool has_fault_at(int loc) const {
        if constexpr (kExpand) {
            return !filter_ || filter_(loc);
        } else {
            for (const auto &[k, p] : fixed_) {
                if (k.first == loc) {
                    return true;
                }
            }
            return false;
        }
    }

    std::string block_key(size_t begin, size_t end) const {
        std::string key = f_.signature(begin + 1, end);
        key += "|order=" + std::to_string(order_) + "|ps=" + std::to_string(ignore_ps_);
        if constexpr (!kExpand) {
            int first = -1;
            for (size_t i = begin; i < end && first < 0; i++) {
                first = f_.steps()[i].location;
            }
            key += "|faults=";
            for (const auto &[k, p] : fixed_) {
                size_t s = loc_step_[k.first];
                if (s > begin && s < end) {
                    const auto &w = f_.steps()[s].wires;
                    size_t idx = static_cast<size_t>(std::find(w.begin(), w.end(), k.second) - w.begin());
                    key += std::to_string(k.first - first) + "." + std::to_string(idx) + pauli_char(p) + ",";
                }
            }
        }
        return key;
    }

    Ensemble<W> run_block(size_t begin, size_t end) {
        bool cacheable = cache_ != nullptr && !(kExpand && filter_);
        std::string key;
        Ensemble<W> blk;
        // Cached blocks are stored with wires renamed by first appearance.
        std::vector<uint32_t> order;
        for (size_t i = begin + 1; i < end; i++) {
            for (uint32_t w : f_.steps()[i].wires) {
                if (std::find(order.begin(), order.end(), w) == order.end()) {
                    order.push_back(w);
                }
            }
        }
        if (cacheable) {
            key = block_key(begin, end);
            if (cache_->lookup(key, blk)) {
                if (stats_) {
                    stats_->cache_hits++;
                }
                for (auto &w : blk.wires) {
                    w = order[w];
                }
                for (auto &b : blk.branches) {
                    b.bits.assign(f_.num_bits(), 0);
                }
                return blk;
            }
        }
        Ensemble<W> fresh;
        fresh.branches.push_back({one(), {Complex(1)}, std::vector<uint8_t>(f_.num_bits(), 0)});
        blk = run(std::move(fresh), begin + 1, end);
        if (cacheable) {
            Ensemble<W> canon = blk;
            for (auto &w : canon.wires) {
                w = static_cast<uint32_t>(std::find(order.begin(), order.end(), w) - order.begin());
            }
            cache_->store(key, canon);
        }
        return blk;
    }

    bool compatible(const W &a, const W &b) const {
        if constexpr (kExpand) {
            return a.min_degree() + b.min_degree() <= order_;
        } else {
            return true;
        }
    }

    Branch<W> combine(const Branch<W> &a, const Branch<W> &b) const {
        Branch<W> c;
        c.weight = a.weight * b.weight;
        c.amps.resize(a.amps.size() * b.amps.size());
        size_t k = 0;
        for (const Complex &x : a.amps) {
            for (const Complex &y : b.amps) {
                c.amps[k++] = x * y;
            }
        }
        c.bits = a.bits;
        return c;
    }

    Ensemble<W> finish(std::vector<Ensemble<W>> parts) {
        Ensemble<W> out;
        out.wires = parts.front().wires;
        for (auto &p : parts) {
            for (auto &b : p.branches) {
                out.branches.push_back(std::move(b));
            }
        }
        merge_branches(out.branches);
        return out;
    }

    void note(const Ensemble<W> &e) {
        if (stats_) {
            stats_->peak_branches = std::max(stats_->peak_branches, e.branches.size());
        }
    }

    Ensemble<W> run(Ensemble<W> e, size_t pc, size_t end) {
        const auto &steps = f_.steps();
        while (pc < end) {
            note(e);
            if (bytes(e) > budget_ && e.branches.size() > 1) {
                if (stats_) {
                    stats_->splits++;
                }
                size_t half = e.branches.size() / 2;
                Ensemble<W> a{e.wires, {}}, b{e.wires, {}};
                for (size_t i = 0; i < e.branches.size(); i++) {
                    (i < half ? a : b).branches.push_back(std::move(e.branches[i]));
                }
                e.branches.clear();
                std::vector<Ensemble<W>> parts;
                parts.push_back(run(std::move(a), pc, end));
                parts.push_back(run(std::move(b), pc, end));
                return finish(std::move(parts));
            }
            const Step &s = steps[pc];
            bool changed = false;
            switch (s.kind) {
                case StepKind::kInit: {
                    for (auto &b : e.branches) {
                        b.amps = kernels::append_zero(b.amps);
                    }
                    e.wires.push_back(s.wires[0]);
                    if (s.noisy()) {
                        fault_slot(e, e.wires.size() - 1, s.location, s.wires[0], nullptr);
                        changed = kExpand;
                    }
                    break;
                }
                case StepKind::kGate: {
                    size_t n = e.wires.size();
                    std::vector<size_t> pos;
                    for (uint32_t w : s.wires) {
                        pos.push_back(position(e, w));
                    }
                    for (auto &b : e.branches) {
                        kernels::apply(b.amps, n, pos, *s.gate);
                    }
                    for (size_t k = 0; k < s.wires.size(); k++) {
                        if (s.noise_mask & (1u << k)) {
                            fault_slot(e, pos[k], s.location, s.wires[k], nullptr);
                            changed = kExpand;
                        }
                    }
                    break;
                }
                case StepKind::kCondGate: {
                    size_t n = e.wires.size();
                    size_t p = position(e, s.wires[0]);
                    std::vector<char> fired(e.branches.size(), 0);
                    for (size_t i = 0; i < e.branches.size(); i++) {
                        if (s.cond.holds(e.branches[i].bits)) {
                            fired[i] = 1;
                            kernels::apply_1q(e.branches[i].amps, n, p, *s.gate);
                        }
                    }
                    if (s.noisy()) {
                        fault_slot(e, p, s.location, s.wires[0], &fired);
                        changed = kExpand;
                    }
                    break;
                }
                case StepKind::kMeasure: {
                    size_t n = e.wires.size();
                    size_t p = position(e, s.wires[0]);
                    if (s.noisy()) {
                        fault_slot(e, p, s.location, s.wires[0], nullptr);
                    }
                    std::vector<Branch<W>> next;
                    next.reserve(e.branches.size() * 2);
                    for (auto &b : e.branches) {
                        for (int o = 0; o < 2; o++) {
                            double prob = kernels::outcome_probability(b.amps, n, p, o);
                            if (prob < kPruneThreshold) {
                                continue;
                            }
                            Branch<W> nb;
                            nb.weight = b.weight * prob;
                            nb.amps = kernels::project_out(b.amps, n, p, o, prob);
                            nb.bits = b.bits;
                            if (o) {
                                for (uint32_t bit : s.xor_into) {
                                    nb.bits[bit] ^= 1;
                                }
                            }
                            next.push_back(std::move(nb));
                        }
                    }
                    e.branches = std::move(next);
                    e.wires.erase(e.wires.begin() + static_cast<std::ptrdiff_t>(p));
                    changed = true;
                    break;
                }
                case StepKind::kPostSelect: {
                    if (!ignore_ps_) {
                        std::erase_if(e.branches, [&](const Branch<W> &b) { return !s.cond.holds(b.bits); });
                    }
                    break;
                }
                case StepKind::kBeginBlock: {
                    size_t bend = block_end_[pc];
                    Ensemble<W> blk = run_block(pc, bend);
                    std::vector<std::pair<size_t, size_t>> pairs;
                    for (size_t i = 0; i < e.branches.size(); i++) {
                        for (size_t j = 0; j < blk.branches.size(); j++) {
                            if (compatible(e.branches[i].weight, blk.branches[j].weight)) {
                                pairs.emplace_back(i, j);
                            }
                        }
                    }
                    std::vector<uint32_t> wires = e.wires;
                    wires.insert(wires.end(), blk.wires.begin(), blk.wires.end());
                    size_t per = (sizeof(Complex) << wires.size()) + sizeof(Branch<W>);
                    size_t chunk = std::max<size_t>(1, budget_ / 2 / per);
                    if (pairs.size() <= chunk) {
                        Ensemble<W> joined{wires, {}};
                        for (auto [i, j] : pairs) {
                            joined.branches.push_back(combine(e.branches[i], blk.branches[j]));
                        }
                        e = std::move(joined);
                        pc = bend + 1;
                        continue;
                    }
                    if (stats_) {
                        stats_->splits++;
                    }
                    std::vector<Ensemble<W>> parts;
                    for (size_t start = 0; start < pairs.size(); start += chunk) {
                        Ensemble<W> piece{wires, {}};
                        for (size_t k = start; k < std::min(pairs.size(), start + chunk); k++) {
                            piece.branches.push_back(combine(e.branches[pairs[k].first], blk.branches[pairs[k].second]));
                        }
                        parts.push_back(run(std::move(piece), bend + 1, end));
                    }
                    return finish(std::move(parts));
                }
                case StepKind::kEndBlock:
                    throw std::logic_error("unexpected end_block");
            }
            if (!dead_after_[pc].empty()) {
                for (auto &b : e.branches) {
                    for (uint32_t bit : dead_after_[pc]) {
                        b.bits[bit] = 0;
                    }
                }
                changed = true;
            }
            if (changed) {
                merge_branches(e.branches);
            }
            pc++;
        }
        note(e);
        return e;
    }

    const CircuitFragment &f_;
    int order_;
    size_t budget_;
    bool ignore_ps_;
    std::function<bool(int)> filter_;
    BlockCache *cache_;
    EngineStats *stats_;
    std::vector<size_t> block_end_;
    std::vector<size_t> loc_step_;
    std::vector<std::vector<uint32_t>> dead_after_;
    std::map<std::pair<int, uint32_t>, Pauli> fixed_;
    std::array<ErrorPolynomial, 3> vars_;
    ErrorPolynomial clean_;
};

}  // namespace

PolyEnsemble execute_expanded(const CircuitFragment &f, const StateVector &input, const ExpandOptions &opt,
                              EngineStats *stats) {
    if (opt.order < 0 || opt.order > poly_detail::kMaxOrder) {
        throw std::invalid_argument("truncation order must be in [0, 3]");
    }
    Engine<ErrorPolynomial> engine(f, opt.order, opt.memory_budget, opt.ignore_postselection, opt.location_filter,
                                   opt.cache.get(), nullptr, stats);
    return engine.run_all(input);
}

NumericEnsemble execute_with_faults(const CircuitFragment &f, const StateVector &input, const FaultPath &path,
                                    bool ignore_postselection, BlockCache *cache) {
    path.validate(f);
    Engine<double> engine(f, 0, size_t{1} << 30, ignore_postselection, nullptr, cache, &path, nullptr);
    return engine.run_all(input);
}

ErrorPolynomial acceptance(const PolyEnsemble &e, int order) {
    return e.total_weight(ErrorPolynomial(order));
}

ErrorPolynomial overlap_sum(const PolyEnsemble &e, const StateVector &reference, int order) {
    ErrorPolynomial total(order);
    for (const auto &b : e.branches) {
        Complex t = 0;
        for (size_t i = 0; i < b.amps.size(); i++) {
            t += std::conj(reference[i]) * b.amps[i];
        }
        total += b.weight * std::norm(t);
    }
    return total;
}

ErrorPolynomial truncated_quotient(const ErrorPolynomial &num, const ErrorPolynomial &acc) {
    if (std::abs(acc.constant()) < 1e-12) {
        throw DegenerateError("acceptance probability vanishes at zeroth order");
    }
    return num * acc.reciprocal();
}

ErrorPolynomial expand(const CircuitFragment &f, const StateVector &input, const Observable &obs,
                       const ExpandOptions &opt) {
    PolyEnsemble e = execute_expanded(f, input, opt);
    ErrorPolynomial acc = acceptance(e, opt.order);
    switch (obs.kind) {
        case ObservableKind::kAcceptance:
            return acc;
        case ObservableKind::kStateFidelity:
            if (obs.reference.num_qubits() != e.wires.size()) {
                throw std::invalid_argument("reference state does not match the fragment outputs");
            }
            return truncated_quotient(overlap_sum(e, obs.reference, opt.order), acc);
        case ObservableKind::kDecodedEntry: {
            if (e.wires.size() < steane::kBlockSize) {
                throw std::invalid_argument("decoded observable needs a 7-qubit output block");
            }
            std::vector<size_t> data = {0, 1, 2, 3, 4, 5, 6};
            PolyMatrix rho = steane::decode_ideal(e.weighted(), data);
            ComplexPolynomial entry = rho(obs.row, obs.col);
            ErrorPolynomial part = obs.imaginary ? imag_part(entry) : real_part(entry);
            return truncated_quotient(part, acc);
        }
    }
    throw std::logic_error("unknown observable");
}

}  // namespace qecseq
