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

#include <bit>

#include "qecseq/expansion.h"
#include "qecseq/gadgets.h"
#include "test_util.h"

namespace qecseq {
namespace {

using steane::LogicalGate;
using steane::LogicalState;

TEST(Policy, ParseAndPrintRoundTrip) {
    for (const char *s : {"none", "perfect-final", "noisy-final", "noisy-after-each", "noisy-every-2", "after:1,3"}) {
        EXPECT_EQ(QecPolicy::parse(s).str(), s);
    }
    EXPECT_THROW(QecPolicy::parse("sometimes"), std::invalid_argument);
    EXPECT_THROW(QecPolicy::parse("noisy-every-0"), std::invalid_argument);
    EXPECT_THROW(QecPolicy::parse("after:"), std::invalid_argument);
}

TEST(Policy, Placements) {
    EXPECT_EQ(QecPolicy::noisy_every(2).placements(5), (std::vector<int>{0, 1, 0, 1, 0}));
    EXPECT_EQ(QecPolicy::perfect_final().placements(3), (std::vector<int>{0, 0, 2}));
    EXPECT_EQ(QecPolicy::explicit_after({1, 2}).placements(2), (std::vector<int>{1, 1}));
    EXPECT_THROW(QecPolicy::explicit_after({3}).placements(2), std::invalid_argument);
}

TEST(Sequence, TimeOrderAndProductLabel) {
    GateSequence s = parse_sequence("h-p t");
    EXPECT_EQ(sequence_str(s), "HPT");
    EXPECT_EQ(product_label(s), "TPH");
    EXPECT_THROW(parse_sequence(""), std::invalid_argument);
    EXPECT_THROW(parse_sequence("HX"), std::invalid_argument);
}

TEST(Gadgets, ShorStateIsEvenParitySuperposition) {
    CircuitFragment f = shor_state_fragment(4);
    NumericEnsemble e = execute_with_faults(f, StateVector(0), FaultPath{});
    ASSERT_FALSE(e.branches.empty());
    for (const auto &b : e.branches) {
        for (size_t i = 0; i < b.amps.size(); i++) {
            double want = std::popcount(i) % 2 == 0 ? 1.0 / 8 : 0.0;
            EXPECT_NEAR(std::norm(b.amps[i]), want, 1e-12);
        }
    }
}

TEST(Gadgets, NoiselessLogicalZero) {
    CircuitFragment f = logical_zero_init_fragment(false);
    NumericEnsemble e = execute_with_faults(f, StateVector(0), FaultPath{});
    auto r = testing::accepted_fidelity(e, steane::logical_basis_states().first);
    EXPECT_NEAR(r.weight, 1.0, 1e-12);
    EXPECT_NEAR(r.fidelity, 1.0, 1e-12);
}

TEST(Gadgets, NoiselessSequencesActAsTheirLogicalGates) {
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"H", "none"}, {"P", "noisy-final"}, {"T", "none"}, {"HPT", "noisy-after-each"}, {"TT", "perfect-final"}};
    const LogicalState in{0.37, 0.81};
    for (const auto &[seq, pol] : cases) {
        GateSequence g = parse_sequence(seq);
        CircuitFragment f = build_sequence(g, QecPolicy::parse(pol));
        // Faults are placed only by paths; with an empty path the fragment is ideal.
        NumericEnsemble e = execute_with_faults(f, steane::encode_perfect(in), FaultPath{});
        auto r = testing::accepted_fidelity(e, testing::ideal_encoded(g, in));
        EXPECT_GT(r.weight, 0.0) << seq << " " << pol;
        EXPECT_NEAR(r.fidelity, 1.0, 1e-12) << seq << " " << pol;
    }
}

TEST(Gadgets, OneCycleCorrectsEverySingleQubitPauli) {
    GadgetOptions opt;
    opt.perfect_recovery = GadgetOptions::Recovery::kCorrect;
    CircuitFragment f = qec_cycle_fragment(false, opt);
    const LogicalState in{0.6, 0.2};
    StateVector ref = steane::encode_perfect(in);
    for (size_t q = 0; q < 7; q++) {
        for (Pauli p : {Pauli::kX, Pauli::kY, Pauli::kZ}) {
            StateVector s = ref;
            size_t t[] = {q};
            steane::apply_pauli_string(s, t, p);
            auto r = testing::accepted_fidelity(execute_with_faults(f, s, FaultPath{}), ref);
            EXPECT_NEAR(r.weight, 1.0, 1e-12);
            EXPECT_NEAR(r.fidelity, 1.0, 1e-12) << pauli_char(p) << q;
        }
    }
}

TEST(Gadgets, TwoQubitErrorsAreNotAlwaysCorrected) {
    GadgetOptions opt;
    opt.perfect_recovery = GadgetOptions::Recovery::kCorrect;
    CircuitFragment f = qec_cycle_fragment(false, opt);
    StateVector ref = steane::encode_perfect({0.0, 0.0});
    StateVector s = ref;
    size_t t[] = {0, 1};
    steane::apply_pauli_string(s, t, Pauli::kX);
    auto r = testing::accepted_fidelity(execute_with_faults(f, s, FaultPath{}), ref);
    EXPECT_LT(r.fidelity, 0.5);
}

TEST(Gadgets, DescribeListsEveryOption) {
    std::string d = GadgetOptions{}.describe();
    for (const char *k : {"noisy_recovery", "perfect_recovery", "cat_layout", "phase_extraction", "theta_verifications"}) {
        EXPECT_NE(d.find(k), std::string::npos) << k;
    }
}

}  // namespace
}  // namespace qecseq
