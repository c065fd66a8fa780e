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

#include "qecseq/statevec.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qecseq {

namespace {

size_t mask_of(size_t n, size_t q) {
    return size_t{1} << (n - 1 - q);
}

void check_qubit(size_t n, size_t q) {
    if (q >= n) {
        throw std::invalid_argument("qubit index " + std::to_string(q) + " out of range for " + std::to_string(n) +
                                    " qubits");
    }
}

}  // namespace

StateVector::StateVector(size_t n_qubits) : n_(n_qubits), amps_(size_t{1} << n_qubits) {
    amps_[0] = 1;
}

StateVector::StateVector(size_t n_qubits, std::vector<Complex> amplitudes)
    : n_(n_qubits), amps_(std::move(amplitudes)) {
    if (amps_.size() != (size_t{1} << n_qubits)) {
        throw std::invalid_argument("amplitude vector length must be 2^n_qubits");
    }
}

StateVector StateVector::basis(size_t n_qubits, std::string_view bits) {
    if (bits.size() != n_qubits) {
        throw std::invalid_argument("bitstring length " + std::to_string(bits.size()) + " does not match " +
                                    std::to_string(n_qubits) + " qubits");
    }
    size_t index = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("bitstring may only contain '0' and '1'");
        }
        index = (index << 1) | static_cast<size_t>(c == '1');
    }
    StateVector s(n_qubits, std::vector<Complex>(size_t{1} << n_qubits));
    s.amps_[index] = 1;
    return s;
}

double StateVector::norm_squared() const {
    double t = 0;
    for (const Complex &a : amps_) {
        t += std::norm(a);
    }
    return t;
}

void StateVector::normalize() {
    double n = std::sqrt(norm_squared());
    if (n == 0) {
        throw std::domain_error("cannot normalize the zero vector");
    }
    for (Complex &a : amps_) {
        a /= n;
    }
}

StateVector StateVector::tensor(const StateVector &other) const {
    std::vector<Complex> out(amps_.size() * other.amps_.size());
    size_t k = 0;
    for (const Complex &a : amps_) {
        for (const Complex &b : other.amps_) {
            out[k++] = a * b;
        }
    }
    return StateVector(n_ + other.n_, std::move(out));
}

Complex StateVector::inner(const StateVector &other) const {
    if (other.n_ != n_) {
        throw std::invalid_argument("inner product of states with different qubit counts");
    }
    Complex t = 0;
    for (size_t i = 0; i < amps_.size(); i++) {
        t += std::conj(amps_[i]) * other.amps_[i];
    }
    return t;
}

Unitary::Unitary(std::string name, size_t dim, std::vector<Complex> entries) : name_(std::move(name)), dim_(dim) {
    if ((dim != 2 && dim != 4) || entries.size() != dim * dim) {
        throw std::invalid_argument("unitary must be 2x2 or 4x4");
    }
    std::copy(entries.begin(), entries.end(), m_.begin());
    for (size_t i = 0; i < dim; i++) {
        for (size_t j = 0; j < dim; j++) {
            Complex s = 0;
            for (size_t k = 0; k < dim; k++) {
                s += std::conj(at(k, i)) * at(k, j);
            }
            if (std::abs(s - Complex(i == j ? 1.0 : 0.0)) > 1e-12) {
                throw std::invalid_argument("matrix '" + name_ + "' is not unitary");
            }
        }
    }
}

Unitary Unitary::dagger() const {
    std::vector<Complex> e(dim_ * dim_);
    for (size_t r = 0; r < dim_; r++) {
        for (size_t c = 0; c < dim_; c++) {
            e[r * dim_ + c] = std::conj(at(c, r));
        }
    }
    return Unitary(name_ + "^dag", dim_, std::move(e));
}

bool Unitary::is_diagonal() const {
    for (size_t r = 0; r < dim_; r++) {
        for (size_t c = 0; c < dim_; c++) {
            if (r != c && at(r, c) != Complex(0)) {
                return false;
            }
        }
    }
    return true;
}

namespace gates {

namespace {
const Complex kI1(0, 1);
const double kS = std::numbers::sqrt2 / 2;
const Complex kW = std::polar(1.0, std::numbers::pi / 4);
}  // namespace

const Unitary &I() {
    static const Unitary u("I", 2, {1, 0, 0, 1});
    return u;
}
const Unitary &X() {
    static const Unitary u("X", 2, {0, 1, 1, 0});
    return u;
}
const Unitary &Y() {
    static const Unitary u("Y", 2, {0, -kI1, kI1, 0});
    return u;
}
const Unitary &Z() {
    static const Unitary u("Z", 2, {1, 0, 0, -1});
    return u;
}
const Unitary &H() {
    static const Unitary u("H", 2, {kS, kS, kS, -kS});
    return u;
}
const Unitary &P() {
    static const Unitary u("P", 2, {1, 0, 0, kI1});
    return u;
}
const Unitary &Pdag() {
    static const Unitary u("Pdag", 2, {1, 0, 0, -kI1});
    return u;
}
const Unitary &T() {
    static const Unitary u("T", 2, {1, 0, 0, kW});
    return u;
}
const Unitary &Tdag() {
    static const Unitary u("Tdag", 2, {1, 0, 0, std::conj(kW)});
    return u;
}
const Unitary &CNOT() {
    static const Unitary u("CNOT", 4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0});
    return u;
}
const Unitary &CZPX() {
    static const Unitary u("CZPX", 4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, kW, 0, 0, std::conj(kW), 0});
    return u;
}

const Unitary &by_name(std::string_view name) {
    static const std::array<const Unitary *, 11> all = {&I(), &X(),    &Y(),    &Z(),    &H(),   &P(),
                                                        &Pdag(), &T(), &Tdag(), &CNOT(), &CZPX()};
    for (const Unitary *u : all) {
        if (u->name() == name) {
            return *u;
        }
    }
    throw std::invalid_argument("unknown gate '" + std::string(name) + "'");
}

}  // namespace gates

char pauli_char(Pauli p) {
    return "IXYZ"[static_cast<int>(p)];
}

Pauli pauli_from_char(char c) {
    switch (c) {
        case 'I':
            return Pauli::kI;
        case 'X':
            return Pauli::kX;
        case 'Y':
            return Pauli::kY;
        case 'Z':
            return Pauli::kZ;
        default:
            throw std::invalid_argument(std::string("unknown Pauli '") + c + "'");
    }
}

namespace kernels {

void apply_1q(std::span<Complex> amps, size_t n, size_t q, const Unitary &u) {
    size_t m = mask_of(n, q);
    const Complex a = u.at(0, 0), b = u.at(0, 1), c = u.at(1, 0), d = u.at(1, 1);
    if (u.is_diagonal()) {
        for (size_t i = 0; i < amps.size(); i++) {
            amps[i] *= (i & m) ? d : a;
        }
        return;
    }
    for (size_t i = 0; i < amps.size(); i++) {
        if (i & m) {
            continue;
        }
        Complex x0 = amps[i], x1 = amps[i | m];
        amps[i] = a * x0 + b * x1;
        amps[i | m] = c * x0 + d * x1;
    }
}

void apply_2q(std::span<Complex> amps, size_t n, size_t q0, size_t q1, const Unitary &u) {
    size_t m0 = mask_of(n, q0), m1 = mask_of(n, q1);
    size_t lo = std::min(m0, m1), hi = std::max(m0, m1);
    const auto &e = u.entries();
    // Monomial matrices (CNOT, CZPX) move amplitudes without mixing them.
    int col[4];
    bool monomial = true;
    for (int r = 0; r < 4 && monomial; r++) {
        col[r] = -1;
        for (int c = 0; c < 4; c++) {
            if (e[r * 4 + c] != Complex(0)) {
                if (col[r] >= 0) {
                    monomial = false;
                    break;
                }
                col[r] = c;
            }
        }
    }
    size_t quarter = amps.size() / 4;
    bool cnot = monomial && col[0] == 0 && col[1] == 1 && col[2] == 3 && col[3] == 2 && e[0] == Complex(1) &&
                e[5] == Complex(1) && e[11] == Complex(1) && e[14] == Complex(1);
    if (cnot) {
        for (size_t k = 0; k < quarter; k++) {
            size_t i = k;
            i = ((i & ~(lo - 1)) << 1) | (i & (lo - 1));
            i = ((i & ~(hi - 1)) << 1) | (i & (hi - 1));
            std::swap(amps[i | m0], amps[i | m0 | m1]);
        }
        return;
    }
    for (size_t k = 0; k < quarter; k++) {
        // Spread k around the two target bits.
        size_t i = k;
        i = ((i & ~(lo - 1)) << 1) | (i & (lo - 1));
        i = ((i & ~(hi - 1)) << 1) | (i & (hi - 1));
        size_t idx[4] = {i, i | m1, i | m0, i | m0 | m1};
        Complex x[4] = {amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]};
        if (monomial) {
            for (int r = 0; r < 4; r++) {
                amps[idx[r]] = e[r * 4 + col[r]] * x[col[r]];
            }
        } else {
            for (int r = 0; r < 4; r++) {
                amps[idx[r]] = e[r * 4] * x[0] + e[r * 4 + 1] * x[1] + e[r * 4 + 2] * x[2] + e[r * 4 + 3] * x[3];
            }
        }
    }
}

void apply(std::span<Complex> amps, size_t n, std::span<const size_t> targets, const Unitary &u) {
    if (targets.size() != u.num_qubits()) {
        throw std::invalid_argument("gate '" + u.name() + "' expects " + std::to_string(u.num_qubits()) +
                                    " targets");
    }
    for (size_t t : targets) {
        check_qubit(n, t);
    }
    if (u.num_qubits() == 1) {
        apply_1q(amps, n, targets[0], u);
    } else {
        if (targets[0] == targets[1]) {
            throw std::invalid_argument("two-qubit gate targets must be distinct");
        }
        apply_2q(amps, n, targets[0], targets[1], u);
    }
}

void apply_pauli(std::span<Complex> amps, size_t n, size_t q, Pauli p) {
    size_t m = mask_of(n, q);
    switch (p) {
        case Pauli::kI:
            return;
        case Pauli::kX:
            for (size_t i = 0; i < amps.size(); i++) {
                if (!(i & m)) {
                    std::swap(amps[i], amps[i | m]);
                }
            }
            return;
        case Pauli::kZ:
            for (size_t i = 0; i < amps.size(); i++) {
                if (i & m) {
                    amps[i] = -amps[i];
                }
            }
            return;
        case Pauli::kY:
            // Y|0> = i|1>, Y|1> = -i|0>.
            for (size_t i = 0; i < amps.size(); i++) {
                if (!(i & m)) {
                    Complex a0 = amps[i], a1 = amps[i | m];
                    amps[i] = Complex(a1.imag(), -a1.real());
                    amps[i | m] = Complex(-a0.imag(), a0.real());
                }
            }
            return;
    }
}

double outcome_probability(std::span<const Complex> amps, size_t n, size_t q, int outcome) {
    size_t m = mask_of(n, q);
    double t = 0;
    for (size_t i = 0; i < amps.size(); i++) {
        if (((i & m) != 0) == (outcome != 0)) {
            t += std::norm(amps[i]);
        }
    }
    return t;
}

std::vector<Complex> project_out(std::span<const Complex> amps, size_t n, size_t q, int outcome, double prob) {
    size_t shift = n - 1 - q;
    size_t low_mask = (size_t{1} << shift) - 1;
    std::vector<Complex> out(amps.size() / 2);
    double scale = 1 / std::sqrt(prob);
    size_t bit = static_cast<size_t>(outcome != 0) << shift;
    for (size_t j = 0; j < out.size(); j++) {
        size_t i = ((j & ~low_mask) << 1) | bit | (j & low_mask);
        out[j] = amps[i] * scale;
    }
    return out;
}

std::vector<Complex> append_zero(std::span<const Complex> amps) {
    std::vector<Complex> out(amps.size() * 2);
    for (size_t i = 0; i < amps.size(); i++) {
        out[2 * i] = amps[i];
    }
    return out;
}

}  // namespace kernels

StateVector apply_unitary(const StateVector &state, const Unitary &u, std::span<const size_t> targets) {
    StateVector out = state;
    kernels::apply(out.amplitudes(), out.num_qubits(), targets, u);
    return out;
}

std::vector<MeasurementBranch> measure_z(const StateVector &state, size_t target) {
    size_t n = state.num_qubits();
    check_qubit(n, target);
    size_t m = mask_of(n, target);
    std::vector<MeasurementBranch> out;
    for (int o = 0; o < 2; o++) {
        double p = kernels::outcome_probability(state.amplitudes(), n, target, o);
        if (p < kPruneThreshold) {
            continue;
        }
        std::vector<Complex> amps = state.amplitudes();
        double scale = 1 / std::sqrt(p);
        for (size_t i = 0; i < amps.size(); i++) {
            amps[i] = (((i & m) != 0) == (o != 0)) ? amps[i] * scale : Complex(0);
        }
        out.push_back({o, p, StateVector(n, std::move(amps))});
    }
    return out;
}

double fidelity_pure(const StateVector &a, const StateVector &b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw std::invalid_argument("fidelity of states with different qubit counts");
    }
    return std::norm(a.inner(b));
}

namespace {

// Maps each basis index to (kept index, traced index).
struct Split {
    std::vector<size_t> kept;
    std::vector<size_t> traced;
};

Split split_indices(size_t n, std::span<const size_t> keep) {
    if (keep.empty()) {
        throw std::invalid_argument("partial trace needs at least one kept qubit");
    }
    std::vector<bool> is_kept(n, false);
    for (size_t q : keep) {
        check_qubit(n, q);
        if (is_kept[q]) {
            throw std::invalid_argument("duplicate kept qubit");
        }
        is_kept[q] = true;
    }
    std::vector<size_t> rest;
    for (size_t q = 0; q < n; q++) {
        if (!is_kept[q]) {
            rest.push_back(q);
        }
    }
    Split s;
    size_t dim = size_t{1} << n;
    s.kept.resize(dim);
    s.traced.resize(dim);
    for (size_t i = 0; i < dim; i++) {
        size_t k = 0, t = 0;
        for (size_t q : keep) {
            k = (k << 1) | ((i & mask_of(n, q)) ? 1 : 0);
        }
        for (size_t q : rest) {
            t = (t << 1) | ((i & mask_of(n, q)) ? 1 : 0);
        }
        s.kept[i] = k;
        s.traced[i] = t;
    }
    return s;
}

ComplexMatrix reduce_with(const StateVector &state, const Split &s, size_t keep_count) {
    size_t kd = size_t{1} << keep_count;
    size_t td = state.dim() / kd;
    // Reshape into psi[kept][traced], then rho = psi psi^dag.
    std::vector<Complex> psi(state.dim());
    for (size_t i = 0; i < state.dim(); i++) {
        psi[s.kept[i] * td + s.traced[i]] = state[i];
    }
    ComplexMatrix rho(kd, kd);
    for (size_t r = 0; r < kd; r++) {
        for (size_t c = 0; c < kd; c++) {
            Complex t = 0;
            for (size_t k = 0; k < td; k++) {
                t += psi[r * td + k] * std::conj(psi[c * td + k]);
            }
            rho(r, c) = t;
        }
    }
    return rho;
}

}  // namespace

ComplexMatrix reduced_density(const StateVector &state, std::span<const size_t> keep) {
    return reduce_with(state, split_indices(state.num_qubits(), keep), keep.size());
}

ComplexMatrix partial_trace(const WeightedEnsemble<double> &ensemble, std::span<const size_t> keep) {
    size_t kd = size_t{1} << keep.size();
    ComplexMatrix total(kd, kd);
    if (ensemble.members.empty()) {
        return total;
    }
    Split s = split_indices(ensemble.members[0].state.num_qubits(), keep);
    for (const auto &m : ensemble.members) {
        ComplexMatrix r = reduce_with(m.state, s, keep.size());
        for (size_t i = 0; i < r.data().size(); i++) {
            total.data()[i] += m.weight * r.data()[i];
        }
    }
    return total;
}

PolyMatrix partial_trace(const WeightedEnsemble<ErrorPolynomial> &ensemble, std::span<const size_t> keep) {
    size_t kd = size_t{1} << keep.size();
    if (ensemble.members.empty()) {
        return PolyMatrix(kd, kd, ComplexPolynomial(0));
    }
    int order = ensemble.members[0].weight.order();
    PolyMatrix total(kd, kd, ComplexPolynomial(order));
    Split s = split_indices(ensemble.members[0].state.num_qubits(), keep);
    for (const auto &m : ensemble.members) {
        ComplexMatrix r = reduce_with(m.state, s, keep.size());
        ComplexPolynomial w = to_complex(m.weight);
        for (size_t i = 0; i < r.data().size(); i++) {
            total.data()[i] += w * r.data()[i];
        }
    }
    return total;
}

}  // namespace qecseq
