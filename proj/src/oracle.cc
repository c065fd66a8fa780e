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

#include "qecseq/oracle.h"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>

#include "qecseq/expansion.h"
#include "qecseq/metrics.h"

namespace qecseq {

namespace {

// Inserts bit value v at position p (counted from the least significant bit).
inline size_t insert_bit(size_t x, size_t p, size_t v) {
    return ((x >> p) << (p + 1)) | (v << p) | (x & ((size_t{1} << p) - 1));
}

constexpr double kEigenFloor = 1e-15;

// Image of each Pauli string under conjugation by u (index p0 * 4 + p1 with
// p0 on the first wire), or -1 where the image is not a Pauli string.
const std::vector<int> &clifford_table(const Unitary &u) {
    static std::mutex mu;
    static std::map<const Unitary *, std::vector<int>> tables;
    std::lock_guard<std::mutex> lock(mu);
    auto it = tables.find(&u);
    if (it != tables.end()) {
        return it->second;
    }
    std::array<Eigen::Matrix2cd, 4> p;
    p[0] << 1, 0, 0, 1;
    p[1] << 0, 1, 1, 0;
    p[2] << 0, Complex(0, -1), Complex(0, 1), 0;
    p[3] << 1, 0, 0, -1;
    const size_t dim = u.dim();
    const size_t count = dim == 2 ? 4 : 16;
    Eigen::MatrixXcd um(dim, dim);
    for (size_t r = 0; r < dim; r++) {
        for (size_t c = 0; c < dim; c++) {
            um(r, c) = u.at(r, c);
        }
    }
    auto string_matrix = [&](size_t idx) -> Eigen::MatrixXcd {
        if (dim == 2) {
            return p[idx];
        }
        Eigen::MatrixXcd m(4, 4);
        const auto &a = p[idx >> 2], &b = p[idx & 3];
        for (int r = 0; r < 4; r++) {
            for (int c = 0; c < 4; c++) {
                m(r, c) = a(r >> 1, c >> 1) * b(r & 1, c & 1);
            }
        }
        return m;
    };
    std::vector<int> table(count, -1);
    for (size_t i = 0; i < count; i++) {
        Eigen::MatrixXcd img = um * string_matrix(i) * um.adjoint();
        for (size_t j = 0; j < count; j++) {
            if (std::abs(std::abs((string_matrix(j).adjoint() * img).trace()) - static_cast<double>(dim)) < 1e-9) {
                table[i] = static_cast<int>(j);
                break;
            }
        }
    }
    return tables.emplace(&u, std::move(table)).first->second;
}

// A Pauli string on live wires plus the classical bits whose value it flips.
struct Frame {
    std::map<uint32_t, Pauli> paulis;
    std::vector<uint32_t> flips;  // sorted, each at most once
};

// Rate-independent schedule for the density simulation.
//
// A fault channel can be moved past later Clifford gates and measurements as
// long as its Pauli string is conjugated along and measurement flips are
// carried in the classical bits. Where a block join would exceed the width
// limit, the following steps run as pure states on eigenvectors of the two
// factors; every channel in that range, and every earlier one that can be, is
// moved to its end so that the factors stay close to pure.
class DensityPlan {
   public:
    struct Segment {
        size_t join;      // kBeginBlock
        size_t join_end;  // its kEndBlock
        size_t last;      // last step evolved as pure states
    };
    struct Deferred {
        uint32_t wire;
        std::array<Frame, 3> frames;  // for X, Y, Z
    };

    DensityPlan(const CircuitFragment &f, size_t max_qubits) : f_(f), max_qubits_(max_qubits) {
        const auto &steps = f.steps();
        block_end_.assign(steps.size(), 0);
        ctx_end_.assign(steps.size(), steps.size());
        std::vector<size_t> open;
        for (size_t i = 0; i < steps.size(); i++) {
            if (!open.empty()) {
                ctx_end_[i] = open.back();
            }
            if (steps[i].kind == StepKind::kBeginBlock) {
                size_t j = matching_end(i);
                block_end_[i] = j;
                open.push_back(j);
            } else if (steps[i].kind == StepKind::kEndBlock) {
                open.pop_back();
                ctx_end_[i] = open.empty() ? steps.size() : open.back();
            }
        }
        analyze(0, steps.size(), f.inputs().size());
        apply_before_.resize(steps.size() + 1);
        for (size_t s = 0; s < steps.size(); s++) {
            const Step &st = steps[s];
            for (size_t k = 0; k < st.wires.size(); k++) {
                if (st.noise_mask & (1u << k)) {
                    schedule_slot(s, st.wires[k]);
                }
            }
        }
    }

    size_t block_end(size_t i) const {
        return block_end_[i];
    }
    const Segment *segment_at(size_t i) const {
        auto it = segments_.find(i);
        return it == segments_.end() ? nullptr : &it->second;
    }
    bool deferred(size_t step, uint32_t wire) const {
        return deferred_slots_.count({step, wire}) != 0;
    }
    const std::vector<size_t> &apply_before(size_t t) const {
        return apply_before_[t];
    }
    const Deferred &item(size_t k) const {
        return deferred_[k];
    }

   private:
    size_t matching_end(size_t i) const {
        int depth = 0;
        const auto &steps = f_.steps();
        for (size_t j = i; j < steps.size(); j++) {
            if (steps[j].kind == StepKind::kBeginBlock) {
                depth++;
            } else if (steps[j].kind == StepKind::kEndBlock && --depth == 0) {
                return j;
            }
        }
        throw std::logic_error("unterminated block");
    }

    // Width bookkeeping for the context [begin, end); returns the final width.
    size_t analyze(size_t begin, size_t end, size_t width) {
        const auto &steps = f_.steps();
        std::optional<Segment> open;
        size_t target = 0;
        for (size_t i = begin; i < end; i++) {
            const Step &s = steps[i];
            if (s.kind == StepKind::kInit) {
                width++;
            } else if (s.kind == StepKind::kMeasure) {
                width--;
            } else if (s.kind == StepKind::kBeginBlock) {
                size_t j = block_end_[i];
                size_t bw = analyze(i + 1, j, 0);
                if (!open && width + bw > max_qubits_) {
                    open = Segment{i, j, end - 1};
                    target = std::max(width, bw);
                }
                width += bw;
                i = j;
            }
            if (open && i > open->join_end && width <= target) {
                open->last = i;
                segments_[open->join] = *open;
                open.reset();
            }
        }
        if (open) {
            segments_[open->join] = *open;
        }
        return width;
    }

    bool reads_flip(const Step &s, const Frame &fr) const {
        for (uint32_t b : s.cond.bits) {
            if (std::binary_search(fr.flips.begin(), fr.flips.end(), b)) {
                return true;
            }
        }
        return false;
    }

    // Moves the frame from just before step t toward `target`; returns where it stopped.
    size_t push(Frame &fr, size_t t, size_t target) const {
        const auto &steps = f_.steps();
        while (t < target) {
            const Step &s = steps[t];
            if (s.kind == StepKind::kBeginBlock) {
                t = block_end_[t] + 1;
                continue;
            }
            if (reads_flip(s, fr)) {
                return t;
            }
            bool touches = false;
            for (uint32_t w : s.wires) {
                touches = touches || fr.paulis.count(w) != 0;
            }
            if (touches) {
                if (s.kind == StepKind::kCondGate) {
                    return t;
                }
                if (s.kind == StepKind::kGate) {
                    const auto &table = clifford_table(*s.gate);
                    auto get = [&](uint32_t w) {
                        auto it = fr.paulis.find(w);
                        return it == fr.paulis.end() ? 0 : static_cast<int>(it->second);
                    };
                    int idx = s.wires.size() == 1 ? get(s.wires[0]) : get(s.wires[0]) * 4 + get(s.wires[1]);
                    int img = table[static_cast<size_t>(idx)];
                    if (img < 0) {
                        return t;
                    }
                    auto put = [&](uint32_t w, int pauli) {
                        if (pauli == 0) {
                            fr.paulis.erase(w);
                        } else {
                            fr.paulis[w] = static_cast<Pauli>(pauli);
                        }
                    };
                    if (s.wires.size() == 1) {
                        put(s.wires[0], img);
                    } else {
                        put(s.wires[0], img >> 2);
                        put(s.wires[1], img & 3);
                    }
                } else if (s.kind == StepKind::kMeasure) {
                    Pauli p = fr.paulis[s.wires[0]];
                    if (p == Pauli::kX || p == Pauli::kY) {
                        for (uint32_t b : s.xor_into) {
                            auto it = std::lower_bound(fr.flips.begin(), fr.flips.end(), b);
                            if (it != fr.flips.end() && *it == b) {
                                fr.flips.erase(it);
                            } else {
                                fr.flips.insert(it, b);
                            }
                        }
                    }
                    fr.paulis.erase(s.wires[0]);
                }
            }
            t++;
        }
        return t;
    }

    void schedule_slot(size_t s, uint32_t wire) {
        const Step &st = f_.steps()[s];
        const size_t ctx = ctx_end_[s];
        const size_t start = st.kind == StepKind::kMeasure ? s : s + 1;
        size_t latest = ctx;
        if (st.kind == StepKind::kCondGate) {
            latest = s;
        } else {
            for (int a = 1; a <= 3; a++) {
                Frame fr;
                fr.paulis[wire] = static_cast<Pauli>(a);
                latest = std::min(latest, push(fr, start, ctx));
            }
        }
        // Applied during step s unless moved.
        std::optional<size_t> point;
        for (const auto &[join, seg] : segments_) {
            if (ctx_end_[join] != ctx) {
                if (s > seg.join_end && s <= seg.last) {
                    throw std::length_error("density-matrix oracle cannot defer a nested fault past a wide join");
                }
                continue;
            }
            bool inside = point ? (*point > join && *point <= seg.last) : (s > seg.join_end && s <= seg.last);
            bool before = point ? *point <= join : s < join;
            if (inside || before) {
                if (seg.last + 1 <= latest && seg.last + 1 <= ctx) {
                    point = seg.last + 1;
                } else if (inside) {
                    throw std::length_error("density-matrix oracle cannot move a fault past a wide join");
                }
            }
        }
        if (!point) {
            return;
        }
        Deferred d{wire, {}};
        for (int a = 1; a <= 3; a++) {
            Frame &fr = d.frames[static_cast<size_t>(a - 1)];
            fr.paulis[wire] = static_cast<Pauli>(a);
            if (push(fr, start, *point) != *point) {
                throw std::logic_error("fault frame stopped early");
            }
        }
        deferred_slots_.insert({s, wire});
        apply_before_[*point].push_back(deferred_.size());
        deferred_.push_back(std::move(d));
    }

    const CircuitFragment &f_;
    size_t max_qubits_;
    std::vector<size_t> block_end_;
    std::vector<size_t> ctx_end_;
    std::map<size_t, Segment> segments_;
    std::vector<std::vector<size_t>> apply_before_;
    std::vector<Deferred> deferred_;
    std::set<std::pair<size_t, uint32_t>> deferred_slots_;
};

// Density matrix over n wires stored as a 2n-qubit vector: index = row * 2^n + col.
struct Pattern {
    std::vector<uint8_t> bits;
    std::vector<Complex> rho;
};

struct BlockResult {
    std::vector<Pattern> patterns;
    std::vector<uint32_t> wires;
};

// Blocks are pure functions of their steps and the rates, so results are shared across runs.
class DensityBlockCache {
   public:
    static DensityBlockCache &instance() {
        static DensityBlockCache c;
        return c;
    }
    bool lookup(const std::string &key, BlockResult &out) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = map_.find(key);
        if (it == map_.end()) {
            return false;
        }
        out = it->second;
        return true;
    }
    void store(const std::string &key, const BlockResult &r) {
        std::lock_guard<std::mutex> lock(mu_);
        map_.emplace(key, r);
    }

   private:
    std::mutex mu_;
    std::map<std::string, BlockResult> map_;
};

class DensitySim {
   public:
    DensitySim(const CircuitFragment &f, const DensityPlan &plan, const ErrorRates &rates, size_t max_qubits,
               const std::vector<int> &last_use)
        : f_(f), plan_(plan), rates_(rates), max_qubits_(max_qubits), last_use_(last_use) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "|%.17g,%.17g,%.17g,%zu", rates.px, rates.py, rates.pz, max_qubits);
        rate_key_ = buf;
    }

    std::vector<uint32_t> wires;
    std::vector<Pattern> patterns;

    void start_empty() {
        wires.clear();
        patterns.assign(1, Pattern{std::vector<uint8_t>(f_.num_bits(), 0), {Complex(1, 0)}});
    }

    void run(size_t begin, size_t end) {
        const auto &steps = f_.steps();
        for (size_t i = begin; i < end; i++) {
            apply_deferred(i);
            const Step &s = steps[i];
            auto noisy_at = [&](size_t k) {
                return (s.noise_mask & (1u << k)) && !plan_.deferred(i, s.wires[k]);
            };
            switch (s.kind) {
                case StepKind::kInit:
                    for (auto &p : patterns) {
                        p.rho = append_wire(p.rho, wires.size());
                    }
                    wires.push_back(s.wires[0]);
                    check_width();
                    if (noisy_at(0)) {
                        channel_all(position(s.wires[0]));
                    }
                    break;
                case StepKind::kGate: {
                    std::vector<size_t> pos;
                    for (uint32_t w : s.wires) {
                        pos.push_back(position(w));
                    }
                    for (auto &p : patterns) {
                        apply_gate(p.rho, pos, *s.gate);
                    }
                    for (size_t k = 0; k < s.wires.size(); k++) {
                        if (noisy_at(k)) {
                            channel_all(pos[k]);
                        }
                    }
                    break;
                }
                case StepKind::kCondGate: {
                    std::vector<size_t> pos{position(s.wires[0])};
                    for (auto &p : patterns) {
                        if (s.cond.holds(p.bits)) {
                            apply_gate(p.rho, pos, *s.gate);
                            if (noisy_at(0)) {
                                channel(p.rho, wires.size(), pos[0]);
                            }
                        }
                    }
                    break;
                }
                case StepKind::kMeasure: {
                    size_t q = position(s.wires[0]);
                    if (noisy_at(0)) {
                        channel_all(q);
                    }
                    std::vector<Pattern> next;
                    for (auto &p : patterns) {
                        for (int o = 0; o < 2; o++) {
                            Pattern np{p.bits, project(p.rho, wires.size(), q, o)};
                            if (trace(np.rho, wires.size() - 1) <= 1e-24) {
                                continue;
                            }
                            for (uint32_t b : s.xor_into) {
                                np.bits[b] ^= static_cast<uint8_t>(o);
                            }
                            next.push_back(std::move(np));
                        }
                    }
                    patterns = std::move(next);
                    wires.erase(wires.begin() + static_cast<long>(q));
                    break;
                }
                case StepKind::kPostSelect:
                    std::erase_if(patterns, [&](const Pattern &p) { return !s.cond.holds(p.bits); });
                    break;
                case StepKind::kBeginBlock: {
                    if (const auto *seg = plan_.segment_at(i)) {
                        run_segment(*seg);
                        i = seg->last;
                    } else {
                        size_t j = plan_.block_end(i);
                        join(block_result(i, j));
                        i = j;
                    }
                    break;
                }
                case StepKind::kEndBlock:
                    break;
            }
            clear_dead_bits(i);
            merge();
        }
        apply_deferred(end);
    }

   private:
    size_t position(uint32_t w) const {
        auto it = std::find(wires.begin(), wires.end(), w);
        if (it == wires.end()) {
            throw std::logic_error("wire is not live in the density simulation");
        }
        return static_cast<size_t>(it - wires.begin());
    }

    void check_width() const {
        if (wires.size() > max_qubits_) {
            throw std::length_error("density-matrix oracle limited to " + std::to_string(max_qubits_) + " qubits");
        }
    }

    static std::vector<Complex> append_wire(const std::vector<Complex> &rho, size_t n) {
        size_t d = size_t{1} << n;
        std::vector<Complex> out(d * d * 4);
        for (size_t r = 0; r < d; r++) {
            for (size_t c = 0; c < d; c++) {
                out[(r << 1) * (d << 1) + (c << 1)] = rho[r * d + c];
            }
        }
        return out;
    }

    static std::vector<Complex> tensor(const std::vector<Complex> &a, size_t na, const std::vector<Complex> &b,
                                       size_t nb) {
        size_t da = size_t{1} << na, db = size_t{1} << nb, d = da * db;
        std::vector<Complex> out(d * d);
        for (size_t ra = 0; ra < da; ra++) {
            for (size_t ca = 0; ca < da; ca++) {
                Complex x = a[ra * da + ca];
                if (x == Complex(0)) {
                    continue;
                }
                for (size_t rb = 0; rb < db; rb++) {
                    for (size_t cb = 0; cb < db; cb++) {
                        out[(ra * db + rb) * d + ca * db + cb] = x * b[rb * db + cb];
                    }
                }
            }
        }
        return out;
    }

    const Unitary &conjugate(const Unitary &u) {
        auto it = conj_.find(&u);
        if (it == conj_.end()) {
            std::vector<Complex> e(u.dim() * u.dim());
            for (size_t r = 0; r < u.dim(); r++) {
                for (size_t c = 0; c < u.dim(); c++) {
                    e[r * u.dim() + c] = std::conj(u.at(r, c));
                }
            }
            it = conj_.emplace(&u, Unitary(u.name() + "*", u.dim(), e)).first;
        }
        return it->second;
    }

    void apply_gate(std::vector<Complex> &rho, const std::vector<size_t> &pos, const Unitary &u) {
        size_t n = wires.size();
        std::vector<size_t> rows(pos), cols;
        for (size_t q : pos) {
            cols.push_back(n + q);
        }
        kernels::apply(rho, 2 * n, rows, u);
        kernels::apply(rho, 2 * n, cols, conjugate(u));
    }

    void channel_all(size_t q) {
        for (auto &p : patterns) {
            channel(p.rho, wires.size(), q);
        }
    }

    // rho -> (1-s) rho + px X rho X + py Y rho Y + pz Z rho Z on qubit q.
    void channel(std::vector<Complex> &rho, size_t n, size_t q) const {
        const double px = rates_.px, py = rates_.py, pz = rates_.pz, s = px + py + pz;
        const double keep_diag = 1 - px - py, flip = px + py;
        const double keep_off = 1 - s - pz, swap_off = px - py;
        size_t bc = n - 1 - q, br = bc + n;
        size_t count = size_t{1} << (2 * n - 2);
        for (size_t k = 0; k < count; k++) {
            size_t i00 = insert_bit(insert_bit(k, bc, 0), br, 0);
            size_t i01 = i00 | (size_t{1} << bc), i10 = i00 | (size_t{1} << br), i11 = i01 | i10;
            Complex a = rho[i00], b = rho[i01], c = rho[i10], d = rho[i11];
            rho[i00] = keep_diag * a + flip * d;
            rho[i11] = keep_diag * d + flip * a;
            rho[i01] = keep_off * b + swap_off * c;
            rho[i10] = keep_off * c + swap_off * b;
        }
    }

    // Adds w * P rho P for a Pauli string with the given X and Z masks.
    static void add_conjugated(std::vector<Complex> &out, const std::vector<Complex> &rho, size_t n, size_t xm,
                               size_t zm, double w) {
        size_t d = size_t{1} << n;
        for (size_t r = 0; r < d; r++) {
            size_t rs = r ^ xm;
            double sr = (std::popcount(rs & zm) & 1) ? -w : w;
            for (size_t c = 0; c < d; c++) {
                size_t cs = c ^ xm;
                double sign = (std::popcount(cs & zm) & 1) ? -sr : sr;
                out[r * d + c] += sign * rho[rs * d + cs];
            }
        }
    }

    void apply_deferred(size_t t) {
        const auto &items = plan_.apply_before(t);
        if (items.empty()) {
            return;
        }
        const double probs[3] = {rates_.px, rates_.py, rates_.pz};
        const double keep = 1 - rates_.total();
        const size_t n = wires.size();
        for (size_t k : items) {
            const auto &d = plan_.item(k);
            std::vector<Pattern> next;
            for (auto &p : patterns) {
                Pattern base{p.bits, std::vector<Complex>(p.rho.size())};
                for (size_t e = 0; e < p.rho.size(); e++) {
                    base.rho[e] = keep * p.rho[e];
                }
                next.push_back(std::move(base));
                for (size_t a = 0; a < 3; a++) {
                    if (probs[a] == 0) {
                        continue;
                    }
                    const Frame &fr = d.frames[a];
                    size_t xm = 0, zm = 0;
                    for (const auto &[w, pauli] : fr.paulis) {
                        size_t bit = size_t{1} << (n - 1 - position(w));
                        if (pauli == Pauli::kX || pauli == Pauli::kY) {
                            xm |= bit;
                        }
                        if (pauli == Pauli::kZ || pauli == Pauli::kY) {
                            zm |= bit;
                        }
                    }
                    Pattern np{p.bits, std::vector<Complex>(p.rho.size())};
                    for (uint32_t b : fr.flips) {
                        if (last_use_[b] >= static_cast<int>(t)) {
                            np.bits[b] ^= 1;
                        }
                    }
                    add_conjugated(np.rho, p.rho, n, xm, zm, probs[a]);
                    next.push_back(std::move(np));
                }
            }
            patterns = std::move(next);
            merge();
        }
    }

    static std::vector<Complex> project(const std::vector<Complex> &rho, size_t n, size_t q, int o) {
        size_t m = n - 1, d = size_t{1} << m, full = size_t{1} << n;
        size_t p = n - 1 - q;
        std::vector<Complex> out(d * d);
        for (size_t r = 0; r < d; r++) {
            size_t ro = insert_bit(r, p, static_cast<size_t>(o));
            for (size_t c = 0; c < d; c++) {
                out[r * d + c] = rho[ro * full + insert_bit(c, p, static_cast<size_t>(o))];
            }
        }
        return out;
    }

    static double trace(const std::vector<Complex> &rho, size_t n) {
        size_t d = size_t{1} << n;
        double t = 0;
        for (size_t r = 0; r < d; r++) {
            t += rho[r * d + r].real();
        }
        return t;
    }

    BlockResult block_result(size_t begin, size_t end) {
        std::string key = f_.signature(begin, end + 1) + rate_key_;
        BlockResult r;
        if (DensityBlockCache::instance().lookup(key, r)) {
            // Cached results are stored in canonical wire order: by creation.
            std::vector<uint32_t> created;
            for (size_t i = begin; i < end; i++) {
                if (f_.steps()[i].kind == StepKind::kInit) {
                    created.push_back(f_.steps()[i].wires[0]);
                }
            }
            std::vector<uint32_t> canon = r.wires;  // wires of the cached copy, by creation index
            r.wires.clear();
            for (uint32_t idx : canon) {
                r.wires.push_back(created[idx]);
            }
            // Only all-zero bit patterns are cached; the storing fragment may have had fewer bits.
            for (auto &p : r.patterns) {
                p.bits.assign(f_.num_bits(), 0);
            }
            return r;
        }
        DensitySim sub(f_, plan_, rates_, max_qubits_, last_use_);
        sub.start_empty();
        sub.run(begin + 1, end);
        r.patterns = std::move(sub.patterns);
        r.wires = sub.wires;
        bool cacheable = std::all_of(r.patterns.begin(), r.patterns.end(), [](const Pattern &p) {
            return std::all_of(p.bits.begin(), p.bits.end(), [](uint8_t b) { return b == 0; });
        });
        if (cacheable) {
            std::vector<uint32_t> created;
            for (size_t i = begin; i < end; i++) {
                if (f_.steps()[i].kind == StepKind::kInit) {
                    created.push_back(f_.steps()[i].wires[0]);
                }
            }
            BlockResult canon{r.patterns, {}};
            for (auto &p : canon.patterns) {
                p.bits.clear();
            }
            bool ok = true;
            for (uint32_t w : r.wires) {
                auto it = std::find(created.begin(), created.end(), w);
                ok = ok && it != created.end() && std::count(created.begin(), created.end(), w) == 1;
                canon.wires.push_back(static_cast<uint32_t>(it - created.begin()));
            }
            if (ok) {
                DensityBlockCache::instance().store(key, canon);
            }
        }
        return r;
    }

    void join(const BlockResult &b) {
        size_t na = wires.size(), nb = b.wires.size();
        std::vector<Pattern> next;
        for (const auto &a : patterns) {
            for (const auto &bp : b.patterns) {
                Pattern p{a.bits, tensor(a.rho, na, bp.rho, nb)};
                for (size_t k = 0; k < p.bits.size(); k++) {
                    p.bits[k] ^= bp.bits[k];
                }
                next.push_back(std::move(p));
            }
        }
        patterns = std::move(next);
        wires.insert(wires.end(), b.wires.begin(), b.wires.end());
        check_width();
    }

    struct EigenTerm {
        double weight;
        Eigen::VectorXcd vec;
        const std::vector<uint8_t> *bits;
    };

    static std::vector<EigenTerm> eigen_terms(const std::vector<Pattern> &ps, size_t n) {
        std::vector<EigenTerm> out;
        Eigen::Index d = Eigen::Index{1} << n;
        for (const auto &p : ps) {
            Eigen::MatrixXcd m(d, d);
            for (Eigen::Index r = 0; r < d; r++) {
                for (Eigen::Index c = 0; c < d; c++) {
                    m(r, c) = p.rho[static_cast<size_t>(r * d + c)];
                }
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
            for (Eigen::Index k = 0; k < d; k++) {
                if (es.eigenvalues()(k) > kEigenFloor) {
                    out.push_back({es.eigenvalues()(k), es.eigenvectors().col(k), &p.bits});
                }
            }
        }
        return out;
    }

    // Joins a block whose tensor product is too wide and evolves the pure
    // products of eigenvectors up to the segment end.
    void run_segment(const DensityPlan::Segment &seg) {
        BlockResult b = block_result(seg.join, seg.join_end);
        std::vector<uint32_t> in = wires;
        in.insert(in.end(), b.wires.begin(), b.wires.end());
        CircuitFragment sf;
        try {
            sf = f_.slice(seg.join_end + 1, seg.last + 1, in);
        } catch (const std::invalid_argument &e) {
            throw std::length_error(std::string("density-matrix oracle cannot split a wide join: ") + e.what());
        }
        std::vector<uint32_t> keep;
        for (size_t i = seg.join_end + 1; i <= seg.last; i++) {
            for (uint32_t bit : f_.steps()[i].xor_into) {
                if (last_use_[bit] > static_cast<int>(seg.last) &&
                    std::find(keep.begin(), keep.end(), bit) == keep.end()) {
                    keep.push_back(bit);
                }
            }
        }
        sf.set_result_bits(keep);

        auto ta = eigen_terms(patterns, wires.size());
        auto tb = eigen_terms(b.patterns, b.wires.size());
        const size_t n_out = sf.outputs().size();
        const size_t d = size_t{1} << n_out;
        std::map<std::vector<uint8_t>, std::vector<Complex>> acc;
        const FaultPath none;
        for (const auto &x : ta) {
            for (const auto &y : tb) {
                double w = x.weight * y.weight;
                if (w <= kEigenFloor) {
                    continue;
                }
                std::vector<Complex> amps(static_cast<size_t>(x.vec.size() * y.vec.size()));
                for (Eigen::Index i = 0; i < x.vec.size(); i++) {
                    for (Eigen::Index j = 0; j < y.vec.size(); j++) {
                        amps[static_cast<size_t>(i * y.vec.size() + j)] = x.vec(i) * y.vec(j);
                    }
                }
                NumericEnsemble e = execute_with_faults(sf, StateVector(in.size(), std::move(amps)), none);
                if (e.wires != sf.outputs()) {
                    throw std::logic_error("unexpected wire order from the pure-state run");
                }
                for (const auto &br : e.branches) {
                    std::vector<uint8_t> key = br.bits;
                    for (size_t k = 0; k < key.size(); k++) {
                        key[k] ^= (*x.bits)[k] ^ (*y.bits)[k];
                    }
                    auto &rho = acc[key];
                    rho.resize(d * d);
                    double bw = w * br.weight;
                    for (size_t r = 0; r < d; r++) {
                        Complex ar = bw * br.amps[r];
                        if (ar == Complex(0)) {
                            continue;
                        }
                        for (size_t c = 0; c < d; c++) {
                            rho[r * d + c] += ar * std::conj(br.amps[c]);
                        }
                    }
                }
            }
        }
        wires = sf.outputs();
        check_width();
        patterns.clear();
        for (auto &[bits, rho] : acc) {
            patterns.push_back(Pattern{bits, std::move(rho)});
        }
        if (patterns.empty()) {
            patterns.push_back(Pattern{std::vector<uint8_t>(f_.num_bits(), 0), std::vector<Complex>(d * d)});
        }
    }

    void clear_dead_bits(size_t i) {
        for (size_t b = 0; b < last_use_.size(); b++) {
            if (last_use_[b] <= static_cast<int>(i)) {
                for (auto &p : patterns) {
                    p.bits[b] = 0;
                }
            }
        }
    }

    void merge() {
        if (patterns.size() < 2) {
            return;
        }
        std::map<std::vector<uint8_t>, std::vector<Complex>> m;
        for (auto &p : patterns) {
            auto it = m.find(p.bits);
            if (it == m.end()) {
                m.emplace(p.bits, std::move(p.rho));
            } else {
                for (size_t k = 0; k < p.rho.size(); k++) {
                    it->second[k] += p.rho[k];
                }
            }
        }
        patterns.clear();
        for (auto &[bits, rho] : m) {
            patterns.push_back(Pattern{bits, std::move(rho)});
        }
    }

    const CircuitFragment &f_;
    const DensityPlan &plan_;
    ErrorRates rates_;
    size_t max_qubits_;
    const std::vector<int> &last_use_;
    std::string rate_key_;
    std::map<const Unitary *, Unitary> conj_;
};

// Reorders a density matrix so that new qubit j is old qubit perm[j].
ComplexMatrix permute(const std::vector<Complex> &rho, const std::vector<size_t> &perm) {
    size_t n = perm.size(), d = size_t{1} << n;
    auto map_index = [&](size_t x) {
        size_t y = 0;
        for (size_t j = 0; j < n; j++) {
            size_t bit = (x >> (n - 1 - perm[j])) & 1u;
            y |= bit << (n - 1 - j);
        }
        return y;
    };
    std::vector<size_t> idx(d);
    for (size_t x = 0; x < d; x++) {
        idx[x] = map_index(x);
    }
    ComplexMatrix out(d, d);
    for (size_t r = 0; r < d; r++) {
        for (size_t c = 0; c < d; c++) {
            out(idx[r], idx[c]) = rho[r * d + c];
        }
    }
    return out;
}

void add_ensemble(ComplexMatrix &rho, const NumericEnsemble &e, double scale) {
    size_t d = rho.rows();
    for (const auto &b : e.branches) {
        double w = b.weight * scale;
        for (size_t r = 0; r < d; r++) {
            Complex x = w * b.amps[r];
            if (x == Complex(0)) {
                continue;
            }
            for (size_t c = 0; c < d; c++) {
                rho(r, c) += x * std::conj(b.amps[c]);
            }
        }
    }
}

struct Slot {
    int location;
    uint32_t wire;
};

std::vector<Slot> slots_of(const CircuitFragment &f) {
    std::vector<Slot> out;
    for (const auto &loc : f.locations()) {
        for (uint32_t w : loc.wires) {
            out.push_back({loc.id, w});
        }
    }
    return out;
}

double binomial_stratum(size_t n, size_t k, double q) {
    // C(n,k) q^k (1-q)^(n-k)
    double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    if (q == 0) {
        return k == 0 ? 1.0 : 0.0;
    }
    return std::exp(lc + k * std::log(q) + (n - k) * std::log1p(-q));
}

StateVector ideal_output(const GateSequence &gates, const steane::LogicalState &input) {
    ComplexMatrix u = ideal_logical_unitary(gates);
    auto a = input.amplitudes();
    return steane::encode_amplitudes(u(0, 0) * a[0] + u(0, 1) * a[1], u(1, 0) * a[0] + u(1, 1) * a[1]);
}

}  // namespace

double DensityResult::trace() const {
    double t = 0;
    for (size_t r = 0; r < rho.rows(); r++) {
        t += rho(r, r).real();
    }
    return t;
}

double DensityResult::overlap(const StateVector &psi) const {
    Complex t = 0;
    for (size_t r = 0; r < rho.rows(); r++) {
        Complex row = 0;
        for (size_t c = 0; c < rho.cols(); c++) {
            row += rho(r, c) * psi[c];
        }
        t += std::conj(psi[r]) * row;
    }
    return t.real();
}

ComplexMatrix pure_density(const StateVector &psi) {
    ComplexMatrix rho(psi.dim(), psi.dim());
    for (size_t r = 0; r < psi.dim(); r++) {
        for (size_t c = 0; c < psi.dim(); c++) {
            rho(r, c) = psi[r] * std::conj(psi[c]);
        }
    }
    return rho;
}

DensityResult density_matrix_run(const CircuitFragment &f, const ComplexMatrix &input, const ErrorRates &rates,
                                 size_t max_qubits) {
    rates.validate();
    f.validate();
    if (input.rows() != (size_t{1} << f.inputs().size()) || input.cols() != input.rows()) {
        throw std::invalid_argument("input density matrix does not match the fragment inputs");
    }
    std::vector<int> last_use = f.bit_last_use();
    DensityPlan plan(f, max_qubits);
    DensitySim sim(f, plan, rates, max_qubits, last_use);
    sim.wires = f.inputs();
    if (sim.wires.size() > max_qubits) {
        throw std::length_error("density-matrix oracle input too wide");
    }
    sim.patterns.assign(1, Pattern{std::vector<uint8_t>(f.num_bits(), 0), input.data()});
    sim.run(0, f.steps().size());

    size_t n = f.outputs().size();
    std::vector<Complex> total(size_t{1} << (2 * n));
    for (const auto &p : sim.patterns) {
        for (size_t k = 0; k < total.size(); k++) {
            total[k] += p.rho[k];
        }
    }
    std::vector<size_t> perm;
    for (uint32_t w : f.outputs()) {
        auto it = std::find(sim.wires.begin(), sim.wires.end(), w);
        perm.push_back(static_cast<size_t>(it - sim.wires.begin()));
    }
    return DensityResult{n, permute(total, perm)};
}

DensityResult exhaustive_run(const CircuitFragment &f, const StateVector &input, const ErrorRates &rates) {
    rates.validate();
    std::vector<Slot> slots = slots_of(f);
    if (slots.size() > 12) {
        throw std::length_error("exhaustive oracle limited to 12 fault slots");
    }
    const double p[4] = {1 - rates.total(), rates.px, rates.py, rates.pz};
    size_t d = size_t{1} << f.outputs().size();
    DensityResult out{f.outputs().size(), ComplexMatrix(d, d)};
    std::vector<int> digit(slots.size(), 0);
    auto cache = std::make_shared<BlockCache>();
    while (true) {
        double w = 1;
        FaultPath path;
        for (size_t k = 0; k < slots.size(); k++) {
            w *= p[digit[k]];
            if (digit[k] != 0) {
                path.faults.push_back({slots[k].location, slots[k].wire, static_cast<Pauli>(digit[k])});
            }
        }
        if (w > 0) {
            add_ensemble(out.rho, execute_with_faults(f, input, path, false, cache.get()), w);
        }
        size_t k = 0;
        while (k < slots.size() && ++digit[k] == 4) {
            digit[k++] = 0;
        }
        if (k == slots.size()) {
            break;
        }
    }
    return out;
}

SampledResult sampled_run(const CircuitFragment &f, const StateVector &input, const StateVector &reference,
                          const std::vector<double> &uniform_rates, const SamplingOptions &opt) {
    std::vector<Slot> slots = slots_of(f);
    const size_t n = slots.size();
    double p_max = 0;
    for (double p : uniform_rates) {
        if (p < 0 || 3 * p > 1) {
            throw std::invalid_argument("uniform rate out of range");
        }
        p_max = std::max(p_max, p);
    }

    // Sampled strata run from exact_strata + 1 up to where the remaining mass is negligible.
    int first_sampled = std::max(opt.exact_strata + 1, 0);
    size_t last = n;
    {
        double tail = 0;
        for (size_t k = n; k > static_cast<size_t>(first_sampled); k--) {
            tail += binomial_stratum(n, k, 3 * p_max);
            if (tail > 1e-14) {
                break;
            }
            last = k - 1;
        }
    }

    struct Stratum {
        size_t k = 0;
        bool exact = false;
        size_t draws = 0;
        std::map<std::vector<uint32_t>, uint32_t> configs;  // slot * 4 + pauli, sorted
    };
    std::vector<Stratum> strata;
    for (size_t k = 0; k <= last; k++) {
        Stratum s;
        s.k = k;
        s.exact = static_cast<int>(k) <= opt.exact_strata;
        strata.push_back(std::move(s));
    }

    // Exact strata: every path.
    for (auto &s : strata) {
        if (!s.exact) {
            continue;
        }
        std::vector<uint32_t> cur;
        auto rec = [&](auto &self, size_t start) -> void {
            if (cur.size() == s.k) {
                s.configs[cur] = 1;
                return;
            }
            for (size_t i = start; i < n; i++) {
                for (uint32_t a = 1; a <= 3; a++) {
                    cur.push_back(static_cast<uint32_t>(i) * 4 + a);
                    self(self, i + 1);
                    cur.pop_back();
                }
            }
        };
        rec(rec, 0);
        s.draws = s.configs.size();
    }

    // Sample allocation proportional to the stratum mass at the largest rate, at least 100 each.
    double sampled_mass = 0;
    for (const auto &s : strata) {
        if (!s.exact) {
            sampled_mass += binomial_stratum(n, s.k, 3 * p_max);
        }
    }
    std::mt19937_64 rng(opt.seed);
    size_t total_samples = 0;
    for (auto &s : strata) {
        if (s.exact) {
            continue;
        }
        double share = sampled_mass > 0 ? binomial_stratum(n, s.k, 3 * p_max) / sampled_mass : 0;
        s.draws = std::max<size_t>(100, static_cast<size_t>(std::ceil(share * static_cast<double>(opt.samples))));
        std::vector<uint32_t> idx(n);
        for (size_t t = 0; t < s.draws; t++) {
            std::iota(idx.begin(), idx.end(), 0u);
            std::vector<uint32_t> cfg;
            for (size_t j = 0; j < s.k; j++) {
                std::uniform_int_distribution<size_t> pick(j, n - 1);
                std::swap(idx[j], idx[pick(rng)]);
                std::uniform_int_distribution<uint32_t> pauli(1, 3);
                cfg.push_back(idx[j] * 4 + pauli(rng));
            }
            std::sort(cfg.begin(), cfg.end());
            s.configs[cfg]++;
        }
        total_samples += s.draws;
    }

    // Evaluate each distinct configuration once.
    size_t d = reference.dim();
    auto cache = std::make_shared<BlockCache>();
    struct Moments {
        ComplexMatrix mean;
        std::vector<std::pair<double, double>> values;  // (overlap, acceptance) per draw group
        std::vector<uint32_t> counts;
    };
    std::vector<Moments> moments(strata.size());
    size_t distinct = 0;
    for (size_t si = 0; si < strata.size(); si++) {
        auto &s = strata[si];
        Moments &m = moments[si];
        m.mean = ComplexMatrix(d, d);
        for (const auto &[cfg, count] : s.configs) {
            FaultPath path;
            for (uint32_t code : cfg) {
                const Slot &sl = slots[code / 4];
                path.faults.push_back({sl.location, sl.wire, static_cast<Pauli>(code % 4)});
            }
            NumericEnsemble e = execute_with_faults(f, input, path, false, cache.get());
            ComplexMatrix one(d, d);
            add_ensemble(one, e, 1.0);
            double scale = static_cast<double>(count) / static_cast<double>(s.draws);
            for (size_t k = 0; k < one.data().size(); k++) {
                m.mean.data()[k] += scale * one.data()[k];
            }
            DensityResult r{0, std::move(one)};
            m.values.emplace_back(r.overlap(reference), r.trace());
            m.counts.push_back(count);
            distinct++;
        }
    }

    SampledResult out;
    out.samples = total_samples;
    out.distinct_configs = distinct;
    for (double p : uniform_rates) {
        DensityResult r{reference.num_qubits(), ComplexMatrix(d, d)};
        std::vector<double> mass(strata.size());
        for (size_t si = 0; si < strata.size(); si++) {
            mass[si] = binomial_stratum(n, strata[si].k, 3 * p);
            for (size_t k = 0; k < r.rho.data().size(); k++) {
                r.rho.data()[k] += mass[si] * moments[si].mean.data()[k];
            }
        }
        double acc = r.trace();
        double fid = acc > 0 ? r.overlap(reference) / acc : 0;
        double var = 0;
        for (size_t si = 0; si < strata.size(); si++) {
            if (strata[si].exact || strata[si].draws < 2) {
                continue;
            }
            const auto &m = moments[si];
            double nd = static_cast<double>(strata[si].draws), mean = 0, sq = 0;
            for (size_t j = 0; j < m.values.size(); j++) {
                double z = m.values[j].first - fid * m.values[j].second;
                mean += m.counts[j] * z;
                sq += m.counts[j] * z * z;
            }
            mean /= nd;
            double sample_var = (sq - nd * mean * mean) / (nd - 1);
            var += mass[si] * mass[si] * sample_var / nd;
        }
        out.standard_error.push_back(acc > 0 ? std::sqrt(std::max(var, 0.0)) / acc : 0);
        out.states.push_back(std::move(r));
    }
    return out;
}

const char *oracle_method_name(OracleMethod m) {
    switch (m) {
        case OracleMethod::kAuto:
            return "auto";
        case OracleMethod::kExhaustive:
            return "exhaustive";
        case OracleMethod::kDensityMatrix:
            return "density-matrix";
        case OracleMethod::kSampled:
            return "monte-carlo";
    }
    return "?";
}

OracleMethod parse_oracle_method(const std::string &text) {
    for (auto m : {OracleMethod::kAuto, OracleMethod::kExhaustive, OracleMethod::kDensityMatrix,
                   OracleMethod::kSampled}) {
        if (text == oracle_method_name(m)) {
            return m;
        }
    }
    throw std::invalid_argument("unknown oracle method '" + text + "'");
}

OracleResult oracle_state_fidelity(const OracleRequest &req) {
    CircuitFragment f = build_sequence(req.gates, req.policy, req.gadgets);
    StateVector in = steane::encode_perfect(req.input);
    StateVector ref = ideal_output(req.gates, req.input);
    bool has_t = std::find(req.gates.begin(), req.gates.end(), steane::LogicalGate::kT) != req.gates.end();

    OracleResult res;
    res.method = req.method;
    if (res.method == OracleMethod::kAuto) {
        if (f.num_slots() <= req.max_exhaustive_slots) {
            res.method = OracleMethod::kExhaustive;
        } else {
            res.method = OracleMethod::kDensityMatrix;
        }
    }
    auto record = [&](const DensityResult &r, double se) {
        double acc = r.trace();
        if (acc <= 0) {
            throw DegenerateError("oracle acceptance is zero");
        }
        res.acceptance.push_back(acc);
        res.fidelity.push_back(r.overlap(ref) / acc);
        res.standard_error.push_back(se);
    };

    switch (res.method) {
        case OracleMethod::kExhaustive:
            for (const auto &r : req.rates) {
                record(exhaustive_run(f, in, r), 0);
            }
            break;
        case OracleMethod::kDensityMatrix:
            for (const auto &r : req.rates) {
                record(density_matrix_run(f, pure_density(in), r), 0);
            }
            break;
        case OracleMethod::kSampled: {
            std::vector<double> uniform;
            for (const auto &r : req.rates) {
                if (r.px != r.py || r.py != r.pz) {
                    throw std::invalid_argument("the sampled oracle needs px = py = pz");
                }
                uniform.push_back(r.px);
            }
            // Split after the last T gadget step (or sample the whole fragment).
            size_t split = f.steps().size();
            if (has_t) {
                for (size_t i = 0; i < f.steps().size(); i++) {
                    if (f.steps()[i].tag.rfind(tags::kTGadget, 0) == 0) {
                        split = i + 1;
                    }
                }
            }
            CircuitFragment prefix = f.slice(0, split);
            CircuitFragment suffix = f.slice(split, f.steps().size());
            prefix.set_outputs(suffix.inputs());
            size_t t_count = static_cast<size_t>(std::count(req.gates.begin(), req.gates.end(), steane::LogicalGate::kT));
            GateSequence head;
            for (auto g : req.gates) {
                if (t_count == 0) {
                    break;
                }
                head.push_back(g);
                if (g == steane::LogicalGate::kT) {
                    t_count--;
                }
            }
            if (!has_t) {
                head = req.gates;
            }
            StateVector mid = ideal_output(head, req.input);
            // Scenarios that differ only after the last T gadget share the sampled prefix.
            static std::mutex mu;
            static std::map<std::string, SampledResult> prefix_cache;
            char buf[160];
            std::snprintf(buf, sizeof buf, "|%.17g,%.17g|%zu,%llu,%d", req.input.alpha, req.input.beta,
                          req.sampling.samples, static_cast<unsigned long long>(req.sampling.seed),
                          req.sampling.exact_strata);
            std::string key = prefix.signature(0, prefix.steps().size()) + buf;
            for (double p : uniform) {
                std::snprintf(buf, sizeof buf, ",%.17g", p);
                key += buf;
            }
            SampledResult s;
            bool hit = false;
            {
                std::lock_guard<std::mutex> lock(mu);
                auto it = prefix_cache.find(key);
                if (it != prefix_cache.end()) {
                    s = it->second;
                    hit = true;
                }
            }
            if (!hit) {
                s = sampled_run(prefix, in, mid, uniform, req.sampling);
                std::lock_guard<std::mutex> lock(mu);
                prefix_cache.emplace(key, s);
            }
            res.samples = s.samples;
            res.distinct_configs = s.distinct_configs;
            for (size_t i = 0; i < req.rates.size(); i++) {
                DensityResult r = density_matrix_run(suffix, s.states[i].rho, req.rates[i]);
                record(r, s.standard_error[i]);
            }
            break;
        }
        case OracleMethod::kAuto:
            break;
    }
    return res;
}

}  // namespace qecseq
