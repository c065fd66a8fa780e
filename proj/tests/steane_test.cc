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
#include <set>

#include "qecseq/steane.h"

namespace qecseq::steane {
namespace {

constexpr size_t kAll[7] = {0, 1, 2, 3, 4, 5, 6};

// Oracle: |0_L> as the uniform superposition over the span of the generator supports.
StateVector codeword_zero() {
    std::set<unsigned> words;
    for (unsigned m = 0; m < 8; m++) {
        unsigned w = 0;
        for (size_t g = 0; g < 3; g++) {
            if ((m >> g) & 1) {
                for (size_t q : kSupports[g]) {
                    w ^= 1u << (6 - q);
                }
            }
        }
        words.insert(w);
    }
    std::vector<Complex> a(128);
    for (unsigned w : words) {
        a[w] = 1 / std::sqrt(8.0);
    }
    return StateVector(7, a);
}

StateVector apply_string(StateVector s, std::span<const size_t> q, Pauli p) {
    apply_pauli_string(s, q, p);
    return s;
}

TEST(Steane, LogicalZeroMatchesHammingConstruction) {
    auto [zero, one] = logical_basis_states();
    StateVector ref = codeword_zero();
    EXPECT_NEAR(fidelity_pure(zero, ref), 1.0, 1e-12);
    EXPECT_NEAR(fidelity_pure(one, apply_string(ref, kAll, Pauli::kX)), 1.0, 1e-12);
}

TEST(Steane, GeneratorsStabilizeCodewords) {
    auto [zero, one] = logical_basis_states();
    for (const auto &g : generators()) {
        Pauli p = g.kind == StabilizerKind::kX ? Pauli::kX : Pauli::kZ;
        for (const StateVector &s : {zero, one}) {
            StateVector t = apply_string(s, g.support, p);
            EXPECT_NEAR(s.inner(t).real(), 1.0, 1e-12);
        }
    }
}

TEST(Steane, SingleQubitSyndromesAreDistinct) {
    std::set<unsigned> seen;
    for (size_t q = 0; q < 7; q++) {
        unsigned s = syndrome_of_qubit(q);
        EXPECT_NE(s, 0u);
        seen.insert(s);
        for (auto kind : {ErrorKind::kBitFlip, ErrorKind::kPhase}) {
            auto c = syndrome_lookup(kind, s);
            ASSERT_TRUE(c.has_value());
            EXPECT_EQ(c->qubit, q);
        }
    }
    EXPECT_EQ(seen.size(), 7u);
    EXPECT_FALSE(syndrome_lookup(ErrorKind::kBitFlip, 0).has_value());
}

TEST(Steane, EncoderAgreesWithProjectorEncoding) {
    LogicalState in{0.3, 1.1};
    StateVector s = in.bare().tensor(StateVector(6));
    for (const auto &g : encoder_circuit()) {
        if (g.gate->num_qubits() == 1) {
            size_t t[] = {g.a};
            s = apply_unitary(s, *g.gate, t);
        } else {
            size_t t[] = {g.a, g.b};
            s = apply_unitary(s, *g.gate, t);
        }
    }
    EXPECT_NEAR(fidelity_pure(s, encode_perfect(in)), 1.0, 1e-12);
}

TEST(Steane, DecoderRecoversLogicalState) {
    LogicalState in{0.7, -0.4};
    ComplexMatrix rho = decode_ideal(encode_perfect(in), kAll);
    auto a = in.amplitudes();
    for (size_t r = 0; r < 2; r++) {
        for (size_t c = 0; c < 2; c++) {
            EXPECT_NEAR(std::abs(rho(r, c) - a[r] * std::conj(a[c])), 0.0, 1e-12);
        }
    }
}

TEST(Steane, TransversalGatesActLogically) {
    for (LogicalGate g : {LogicalGate::kH, LogicalGate::kP}) {
        LogicalState in{0.4, 0.9};
        StateVector s = encode_perfect(in);
        for (size_t q = 0; q < 7; q++) {
            size_t t[] = {q};
            s = apply_unitary(s, transversal_unitary(g), t);
        }
        auto a = in.amplitudes();
        const Unitary &u = logical_unitary(g);
        Complex c0 = u.at(0, 0) * a[0] + u.at(0, 1) * a[1];
        Complex c1 = u.at(1, 0) * a[0] + u.at(1, 1) * a[1];
        EXPECT_NEAR(fidelity_pure(s, encode_amplitudes(c0, c1)), 1.0, 1e-12) << gate_char(g);
    }
}

TEST(Steane, ReadoutClassification) {
    EXPECT_EQ(classify_readout(0).checks, 0u);
    EXPECT_EQ(classify_readout(0).parity, 0);
    EXPECT_EQ(classify_readout(0x7f).parity, 1);
    EXPECT_NE(classify_readout(1).checks, 0u);
}

}  // namespace
}  // namespace qecseq::steane
