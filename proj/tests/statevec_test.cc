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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qecseq/statevec.h"

namespace qecseq {
namespace {

// Oracle: explicit 2^n x 2^n matrix built from index arithmetic.
std::vector<Complex> full_matrix(const Unitary &u, size_t n, std::vector<size_t> t) {
    size_t dim = size_t{1} << n;
    std::vector<Complex> m(dim * dim);
    for (size_t col = 0; col < dim; col++) {
        size_t sub = 0;
        for (size_t q : t) {
            sub = (sub << 1) | ((col >> (n - 1 - q)) & 1);
        }
        for (size_t r = 0; r < u.dim(); r++) {
            size_t row = col;
            for (size_t k = 0; k < t.size(); k++) {
                size_t bit = (r >> (t.size() - 1 - k)) & 1;
                size_t mask = size_t{1} << (n - 1 - t[k]);
                row = bit ? (row | mask) : (row & ~mask);
            }
            m[row * dim + col] += u.at(r, sub);
        }
    }
    return m;
}

StateVector random_state(size_t n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<Complex> a(size_t{1} << n);
    for (auto &x : a) {
        x = {g(rng), g(rng)};
    }
    StateVector s(n, a);
    s.normalize();
    return s;
}

TEST(StateVector, BasisIndexingPutsQubitZeroFirst) {
    StateVector s = StateVector::basis(3, "100");
    EXPECT_EQ(s[4], Complex(1, 0));
    EXPECT_DOUBLE_EQ(s.norm_squared(), 1.0);
}

TEST(StateVector, GatesMatchExplicitMatrices) {
    const size_t n = 4;
    StateVector psi = random_state(n, 7);
    std::vector<std::pair<const Unitary *, std::vector<size_t>>> cases = {
        {&gates::H(), {2}}, {&gates::T(), {0}}, {&gates::P(), {3}}, {&gates::CNOT(), {3, 1}}, {&gates::CNOT(), {0, 2}},
        {&gates::Y(), {1}}};
    for (const auto &[u, t] : cases) {
        StateVector got = apply_unitary(psi, *u, t);
        auto m = full_matrix(*u, n, t);
        size_t dim = psi.dim();
        for (size_t r = 0; r < dim; r++) {
            Complex want = 0;
            for (size_t c = 0; c < dim; c++) {
                want += m[r * dim + c] * psi[c];
            }
            EXPECT_NEAR(std::abs(got[r] - want), 0.0, 1e-12) << u->name();
        }
    }
}

TEST(StateVector, UnitaryRejectsNonUnitary) {
    EXPECT_THROW(Unitary("bad", 2, {1, 1, 0, 1}), std::invalid_argument);
}

TEST(StateVector, MeasurementBranchesSumToOne) {
    StateVector psi = random_state(3, 3);
    auto branches = measure_z(psi, 1);
    double total = 0;
    for (const auto &b : branches) {
        total += b.probability;
        EXPECT_NEAR(b.post_state.norm_squared(), 1.0, 1e-12);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(StateVector, BellPairReducesToMaximallyMixed) {
    StateVector s(2);
    size_t q0[] = {0}, q01[] = {0, 1};
    s = apply_unitary(s, gates::H(), q0);
    s = apply_unitary(s, gates::CNOT(), q01);
    ComplexMatrix rho = reduced_density(s, std::span<const size_t>(q0, 1));
    EXPECT_NEAR(rho(0, 0).real(), 0.5, 1e-12);
    EXPECT_NEAR(rho(1, 1).real(), 0.5, 1e-12);
    EXPECT_NEAR(std::abs(rho(0, 1)), 0.0, 1e-12);
}

TEST(StateVector, PauliProductsAreConsistent) {
    // Y = i X Z.
    StateVector psi = random_state(2, 11);
    StateVector a = psi, b = psi;
    kernels::apply_pauli(a.amplitudes(), 2, 1, Pauli::kY);
    kernels::apply_pauli(b.amplitudes(), 2, 1, Pauli::kZ);
    kernels::apply_pauli(b.amplitudes(), 2, 1, Pauli::kX);
    EXPECT_NEAR(fidelity_pure(a, b), 1.0, 1e-12);
}

}  // namespace
}  // namespace qecseq
