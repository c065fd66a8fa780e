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

#ifndef QECSEQ_STATEVEC_H
#define QECSEQ_STATEVEC_H

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qecseq/polynomial.h"

namespace qecseq {

/// Branches with probability below this are dropped.
inline constexpr double kPruneThreshold = 1e-14;

/// Dense pure state over n qubits. Qubit 0 is the most significant bit of the
/// basis-state index, so |q0 q1 ... q_{n-1}> sits at index sum_k q_k 2^(n-1-k).
class StateVector {
   public:
    StateVector() = default;
    /// |0...0> on n qubits.
    explicit StateVector(size_t n_qubits);
    StateVector(size_t n_qubits, std::vector<Complex> amplitudes);

    static StateVector basis(size_t n_qubits, std::string_view bits);

    size_t num_qubits() const {
        return n_;
    }
    size_t dim() const {
        return amps_.size();
    }
    const std::vector<Complex> &amplitudes() const {
        return amps_;
    }
    std::vector<Complex> &amplitudes() {
        return amps_;
    }
    const Complex &operator[](size_t i) const {
        return amps_[i];
    }
    Complex &operator[](size_t i) {
        return amps_[i];
    }

    double norm_squared() const;
    void normalize();
    /// this (x) other, with `other` occupying the least significant qubits.
    StateVector tensor(const StateVector &other) const;
    Complex inner(const StateVector &other) const;  // <this|other>

   private:
    size_t n_ = 0;
    std::vector<Complex> amps_;
};

/// A 2x2 or 4x4 unitary. Two-qubit matrices act on |t0 t1> with t0 the more
/// significant index bit.
class Unitary {
   public:
    Unitary() = default;
    /// Row-major entries; throws unless U^dag U = I within 1e-12.
    Unitary(std::string name, size_t dim, std::vector<Complex> entries);

    const std::string &name() const {
        return name_;
    }
    size_t dim() const {
        return dim_;
    }
    size_t num_qubits() const {
        return dim_ == 2 ? 1 : 2;
    }
    const Complex &at(size_t r, size_t c) const {
        return m_[r * dim_ + c];
    }
    const std::array<Complex, 16> &entries() const {
        return m_;
    }
    Unitary dagger() const;
    /// True when the matrix is diagonal (enables a faster kernel).
    bool is_diagonal() const;

   private:
    std::string name_;
    size_t dim_ = 0;
    std::array<Complex, 16> m_{};
};

namespace gates {
const Unitary &I();
const Unitary &X();
const Unitary &Y();
const Unitary &Z();
const Unitary &H();
const Unitary &P();
const Unitary &Pdag();
const Unitary &T();
const Unitary &Tdag();
const Unitary &CNOT();
/// Controlled (T^dag X T): control is the first target, the matrix of the
/// seven-fold Theta projection.
const Unitary &CZPX();
/// Looks a gate up by name ("H", "P", "Pdag", "CNOT", "CZPX", ...).
const Unitary &by_name(std::string_view name);
}  // namespace gates

enum class Pauli : uint8_t { kI = 0, kX = 1, kY = 2, kZ = 3 };
char pauli_char(Pauli p);
Pauli pauli_from_char(char c);

struct MeasurementBranch {
    int outcome;
    double probability;
    StateVector post_state;
};

StateVector apply_unitary(const StateVector &state, const Unitary &u, std::span<const size_t> targets);
std::vector<MeasurementBranch> measure_z(const StateVector &state, size_t target);
double fidelity_pure(const StateVector &a, const StateVector &b);

// In-place kernels on raw amplitudes, used by the simulation engines.
namespace kernels {
void apply_1q(std::span<Complex> amps, size_t n, size_t q, const Unitary &u);
void apply_2q(std::span<Complex> amps, size_t n, size_t q0, size_t q1, const Unitary &u);
void apply(std::span<Complex> amps, size_t n, std::span<const size_t> targets, const Unitary &u);
void apply_pauli(std::span<Complex> amps, size_t n, size_t q, Pauli p);
/// Squared norm of the component with qubit q in state `outcome`.
double outcome_probability(std::span<const Complex> amps, size_t n, size_t q, int outcome);
/// Keeps the `outcome` component of qubit q, removes that qubit and rescales by 1/sqrt(prob).
std::vector<Complex> project_out(std::span<const Complex> amps, size_t n, size_t q, int outcome, double prob);
/// Appends a fresh |0> as the new least significant qubit.
std::vector<Complex> append_zero(std::span<const Complex> amps);
}  // namespace kernels

/// Small dense row-major matrix.
template <class T>
class DenseMatrix {
   public:
    DenseMatrix() = default;
    DenseMatrix(size_t rows, size_t cols, const T &fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    }
    size_t rows() const {
        return rows_;
    }
    size_t cols() const {
        return cols_;
    }
    T &operator()(size_t r, size_t c) {
        return data_[r * cols_ + c];
    }
    const T &operator()(size_t r, size_t c) const {
        return data_[r * cols_ + c];
    }
    std::vector<T> &data() {
        return data_;
    }
    const std::vector<T> &data() const {
        return data_;
    }

   private:
    size_t rows_ = 0;
    size_t cols_ = 0;
    std::vector<T> data_;
};

using ComplexMatrix = DenseMatrix<Complex>;
using PolyMatrix = DenseMatrix<ComplexPolynomial>;

/// Mixture of pure states with weights that are either numbers or polynomials.
template <class W>
struct WeightedEnsemble {
    struct Member {
        W weight;
        StateVector state;
    };
    std::vector<Member> members;
};

/// Reduced density matrix on `keep` (in the given order), summed over the
/// ensemble with numeric weights.
ComplexMatrix partial_trace(const WeightedEnsemble<double> &ensemble, std::span<const size_t> keep);
/// Same, carrying the weights symbolically.
PolyMatrix partial_trace(const WeightedEnsemble<ErrorPolynomial> &ensemble, std::span<const size_t> keep);

/// |psi><psi| reduced to `keep` for a single pure state.
ComplexMatrix reduced_density(const StateVector &state, std::span<const size_t> keep);

}  // namespace qecseq

#endif
