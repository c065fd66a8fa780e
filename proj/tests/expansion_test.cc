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

#include "qecseq/expansion.h"
#include "qecseq/gadgets.h"
#include "qecseq/oracle.h"
#include "test_util.h"

namespace qecseq {
namespace {

using steane::LogicalGate;
using steane::LogicalState;

Observable fidelity_of(const StateVector &ref) {
    Observable o;
    o.kind = ObservableKind::kStateFidelity;
    o.reference = ref;
    return o;
}

TEST(Expansion, EnumerationCountsPaths) {
    CircuitFragment f = transversal_clifford(LogicalGate::kH, true);
    size_t count = 0;
    enumerate_fault_paths(f, 2, [&](const FaultPath &) { count++; });
    const size_t n = 7;
    EXPECT_EQ(count, 1 + 3 * n + 9 * n * (n - 1) / 2);
}

TEST(Expansion, PathWeightsSumToOne) {
    for (const CircuitFragment &f : {transversal_clifford(LogicalGate::kP, true), qec_cycle_fragment(true),
                                     t_gate_fragment(true)}) {
        for (int order = 1; order <= 3; order++) {
            EXPECT_TRUE(path_weight_sum(f, order).approx_equal(ErrorPolynomial::one(order), 1e-12));
        }
    }
}

TEST(Expansion, FaultPathValidation) {
    CircuitFragment f = transversal_clifford(LogicalGate::kH, true);
    auto loc = f.locations().front();
    FaultPath twice{{{loc.id, loc.wires[0], Pauli::kX}, {loc.id, loc.wires[0], Pauli::kZ}}};
    EXPECT_THROW(twice.validate(f), std::invalid_argument);
    FaultPath missing{{{999, 0, Pauli::kX}}};
    EXPECT_THROW(missing.validate(f), std::invalid_argument);
}

TEST(Expansion, TransversalGateMatchesExhaustiveOracle) {
    // The oracle sums all 4^7 fault configurations exactly; the truncated
    // expansion must differ from it by O(p^(order+1)).
    const LogicalState in{0.3, 0.5};
    CircuitFragment f = transversal_clifford(LogicalGate::kH, true);
    StateVector ref = testing::ideal_encoded({LogicalGate::kH}, in);
    StateVector input = steane::encode_perfect(in);
    for (int order = 1; order <= 3; order++) {
        ExpandOptions opt;
        opt.order = order;
        ErrorPolynomial p = expand(f, input, fidelity_of(ref), opt);
        double res[2];
        for (int k = 0; k < 2; k++) {
            ErrorRates r{1e-3 * (k + 1), 0.7e-3 * (k + 1), 1.3e-3 * (k + 1)};
            DensityResult d = exhaustive_run(f, input, r);
            res[k] = std::abs(d.overlap(ref) / d.trace() - p(r));
        }
        double want = std::pow(2.0, order + 1);
        EXPECT_GT(res[1] / res[0], 0.75 * want) << order;
        EXPECT_LT(res[1] / res[0], 1.25 * want) << order;
    }
}

TEST(Expansion, SingleGateFirstOrderCoefficients) {
    ExpandOptions opt;
    opt.order = 1;
    CircuitFragment f = transversal_clifford(LogicalGate::kH, true);
    const LogicalState in{0.9, 0.1};
    ErrorPolynomial p =
        expand(f, steane::encode_perfect(in), fidelity_of(testing::ideal_encoded({LogicalGate::kH}, in)), opt);
    EXPECT_TRUE(p.approx_equal(parse_polynomial("1 - 7px - 7py - 7pz", 1), 1e-12));
}

TEST(Expansion, MemorySplittingAndCachingDoNotChangeResults) {
    const LogicalState in{0.4, 1.2};
    GateSequence g = {LogicalGate::kH};
    CircuitFragment f = build_sequence(g, QecPolicy::noisy_final());
    Observable obs = fidelity_of(testing::ideal_encoded(g, in));
    StateVector input = steane::encode_perfect(in);
    ExpandOptions base;
    base.order = 1;
    ErrorPolynomial a = expand(f, input, obs, base);
    ExpandOptions small = base;
    small.memory_budget = 1 << 16;
    small.cache = std::make_shared<BlockCache>();
    ErrorPolynomial b = expand(f, input, obs, small);
    ErrorPolynomial c = expand(f, input, obs, small);
    EXPECT_TRUE(a.approx_equal(b, 1e-11));
    EXPECT_EQ(b, c);
}

TEST(Expansion, LocationFilterRestrictsFaults) {
    ExpandOptions opt;
    opt.order = 2;
    opt.location_filter = [](int) { return false; };
    CircuitFragment f = transversal_clifford(LogicalGate::kP, true);
    const LogicalState in{0.2, 0.3};
    ErrorPolynomial p =
        expand(f, steane::encode_perfect(in), fidelity_of(testing::ideal_encoded({LogicalGate::kP}, in)), opt);
    EXPECT_TRUE(p.approx_equal(ErrorPolynomial::one(2), 1e-12));
}

TEST(Expansion, TruncatedQuotientRejectsZeroAcceptance) {
    EXPECT_THROW(truncated_quotient(ErrorPolynomial::one(1), ErrorPolynomial(1)), DegenerateError);
}

}  // namespace
}  // namespace qecseq
