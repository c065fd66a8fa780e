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

#include <random>

#include "qecseq/oracle.h"
#include "test_util.h"

namespace qecseq {
namespace {

using steane::LogicalGate;
using steane::LogicalState;

// Two data wires, a parity ancilla read out into a bit and a conditional
// correction: exercises measurement flips and classically controlled gates.
CircuitFragment parity_fragment() {
    CircuitFragment f;
    uint32_t d0 = f.new_wire(), d1 = f.new_wire(), a = f.new_wire();
    f.set_inputs({d0, d1});
    uint32_t b = f.new_bit();
    f.init(a, true, "t");
    f.gate(gates::CNOT(), {d0, a}, true, "t");
    f.gate(gates::CNOT(), {d1, a}, true, "t");
    f.measure(a, MeasureRole::kSyndrome, {b}, true, "t");
    f.cond_gate(gates::X(), d1, Condition{{b}, 1}, true, "t");
    f.gate(gates::H(), {d0}, true, "t");
    f.set_outputs({d0, d1});
    f.validate();
    return f;
}

StateVector random_state(size_t n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<Complex> amps(size_t{1} << n);
    for (auto &x : amps) {
        x = {g(rng), g(rng)};
    }
    StateVector s(n, amps);
    s.normalize();
    return s;
}

void expect_same(const DensityResult &a, const DensityResult &b, double tol) {
    ASSERT_EQ(a.rho.rows(), b.rho.rows());
    for (size_t i = 0; i < a.rho.data().size(); i++) {
        EXPECT_NEAR(std::abs(a.rho.data()[i] - b.rho.data()[i]), 0.0, tol);
    }
}

TEST(Oracle, DensityMatrixAgreesWithEnumeration) {
    ErrorRates r{0.02, 0.01, 0.03};
    CircuitFragment f = parity_fragment();
    StateVector in = random_state(2, 4);
    expect_same(density_matrix_run(f, pure_density(in), r), exhaustive_run(f, in, r), 1e-12);

    CircuitFragment h = transversal_clifford(LogicalGate::kH, true);
    StateVector enc = steane::encode_perfect({0.3, 0.2});
    expect_same(density_matrix_run(h, pure_density(enc), r), exhaustive_run(h, enc, r), 1e-12);
}

TEST(Oracle, DensityMatrixSegmentationIsInvisible) {
    // Different qubit limits cut the T gadget into different segments.
    ErrorRates r = ErrorRates::uniform(2e-3);
    CircuitFragment f = t_gate_fragment(true);
    const LogicalState in{0.5, 0.4};
    StateVector enc = steane::encode_perfect(in);
    StateVector ref = testing::ideal_encoded({LogicalGate::kT}, in);
    DensityResult a = density_matrix_run(f, pure_density(enc), r, 11);
    DensityResult b = density_matrix_run(f, pure_density(enc), r, 12);
    EXPECT_NEAR(a.trace(), b.trace(), 1e-12);
    EXPECT_NEAR(a.overlap(ref), b.overlap(ref), 1e-12);
}

TEST(Oracle, CachedBlocksFitFragmentsWithMoreBits) {
    // Blocks cached while running the first fragment are reused by a second one with more classical bits.
    ErrorRates r = ErrorRates::uniform(1e-3);
    const GateSequence gates = {LogicalGate::kT, LogicalGate::kP};
    CircuitFragment small = build_sequence(gates, QecPolicy::explicit_after({1}));
    CircuitFragment big = build_sequence(gates, QecPolicy::explicit_after({1, 2}));
    ASSERT_GT(big.num_bits(), small.num_bits());
    const LogicalState in{0.5, 0.4};
    StateVector enc = steane::encode_perfect(in);
    StateVector ref = testing::ideal_encoded(gates, in);
    DensityResult fresh = density_matrix_run(big, pure_density(enc), r, 11);
    density_matrix_run(small, pure_density(enc), r, 12);
    DensityResult reused = density_matrix_run(big, pure_density(enc), r, 12);
    EXPECT_GT(fresh.trace(), 0.05);
    EXPECT_NEAR(reused.trace(), fresh.trace(), 1e-12);
    EXPECT_NEAR(reused.overlap(ref), fresh.overlap(ref), 1e-12);
}

TEST(Oracle, ZeroRatesGiveUnitFidelity) {
    OracleRequest req;
    req.gates = {LogicalGate::kT};
    req.input = {0.3, 0.9};
    req.rates = {ErrorRates{}};
    for (auto m : {OracleMethod::kDensityMatrix, OracleMethod::kSampled}) {
        req.method = m;
        req.sampling.samples = 1000;
        OracleResult res = oracle_state_fidelity(req);
        EXPECT_NEAR(res.fidelity[0], 1.0, 1e-12) << oracle_method_name(m);
    }
}

TEST(Oracle, AutoPicksExactMethods) {
    OracleRequest req;
    req.gates = {LogicalGate::kH};
    req.rates = {ErrorRates::uniform(1e-3)};
    EXPECT_EQ(oracle_state_fidelity(req).method, OracleMethod::kExhaustive);
    req.gates = {LogicalGate::kH, LogicalGate::kP};
    EXPECT_EQ(oracle_state_fidelity(req).method, OracleMethod::kDensityMatrix);
}

TEST(Oracle, MonteCarloAgreesWithExactWithinThreeStandardErrors) {
    OracleRequest req;
    req.gates = {LogicalGate::kT};
    req.input = {0.4, 0.7};
    req.rates = {ErrorRates::uniform(2e-3)};
    req.method = OracleMethod::kDensityMatrix;
    double exact = oracle_state_fidelity(req).fidelity[0];
    req.method = OracleMethod::kSampled;
    req.sampling.samples = 100'000;
    req.sampling.seed = 17;
    for (int strata : {-1, 1}) {
        req.sampling.exact_strata = strata;
        OracleResult mc = oracle_state_fidelity(req);
        ASSERT_GT(mc.standard_error[0], 0.0);
        EXPECT_LT(std::abs(mc.fidelity[0] - exact), 3 * mc.standard_error[0]) << strata;
    }
}

TEST(Oracle, SamplingIsSeedDeterministic) {
    CircuitFragment f = transversal_clifford(LogicalGate::kP, true);
    StateVector in = steane::encode_perfect({0.2, 0.1});
    SamplingOptions opt;
    opt.samples = 5000;
    opt.exact_strata = -1;
    SampledResult a = sampled_run(f, in, in, {0.01}, opt), b = sampled_run(f, in, in, {0.01}, opt);
    expect_same(a.states[0], b.states[0], 0.0);
    opt.seed = 2;
    SampledResult c = sampled_run(f, in, in, {0.01}, opt);
    EXPECT_NE(a.states[0].rho.data(), c.states[0].rho.data());
}

TEST(Oracle, MethodNames) {
    for (auto m : {OracleMethod::kAuto, OracleMethod::kExhaustive, OracleMethod::kDensityMatrix,
                   OracleMethod::kSampled}) {
        EXPECT_EQ(parse_oracle_method(oracle_method_name(m)), m);
    }
    EXPECT_THROW(parse_oracle_method("guess"), std::invalid_argument);
}

}  // namespace
}  // namespace qecseq
