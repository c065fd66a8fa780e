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

#ifndef QECSEQ_ORACLE_H
#define QECSEQ_ORACLE_H

#include <cstdint>
#include <string>
#include <vector>

#include "qecseq/circuit.h"
#include "qecseq/gadgets.h"
#include "qecseq/steane.h"

namespace qecseq {

// Independent numeric evaluations of a noisy fragment at fixed rates, with no
// truncation. They share no code with the expansion engine beyond the
// fixed-fault executor used for sampling.

/// Mixed state over a fragment's output wires (in order). Unnormalized: the
/// trace is the acceptance probability.
struct DensityResult {
    size_t num_qubits = 0;
    ComplexMatrix rho;

    double trace() const;
    /// <psi|rho|psi> (not divided by the trace).
    double overlap(const StateVector &psi) const;
};

/// Exact evolution of the density matrix under every fault channel. Throws
/// std::length_error if more than `max_qubits` wires are ever live.
DensityResult density_matrix_run(const CircuitFragment &f, const ComplexMatrix &input, const ErrorRates &rates,
                                 size_t max_qubits = 12);
ComplexMatrix pure_density(const StateVector &psi);

/// Sums every one of the 4^slots fault configurations with its exact weight.
DensityResult exhaustive_run(const CircuitFragment &f, const StateVector &input, const ErrorRates &rates);

struct SamplingOptions {
    size_t samples = 1'000'000;
    uint64_t seed = 1;
    /// Strata with at most this many faults are enumerated, not sampled; -1 samples everything.
    int exact_strata = 2;
};

struct SampledResult {
    std::vector<DensityResult> states;  // per rate
    /// Standard error of the overlap with `reference` (divided by acceptance), per rate.
    std::vector<double> standard_error;
    size_t samples = 0;
    size_t distinct_configs = 0;
};

/// Stratified Monte Carlo over the fault count of `f` at uniform rates. The
/// fault paths within a stratum are equally likely whatever the rate, so the
/// same draws serve every requested rate.
SampledResult sampled_run(const CircuitFragment &f, const StateVector &input, const StateVector &reference,
                          const std::vector<double> &uniform_rates, const SamplingOptions &opt);

enum class OracleMethod { kAuto, kExhaustive, kDensityMatrix, kSampled };
const char *oracle_method_name(OracleMethod m);
OracleMethod parse_oracle_method(const std::string &text);

struct OracleRequest {
    GateSequence gates;
    QecPolicy policy;
    GadgetOptions gadgets;
    steane::LogicalState input;
    std::vector<ErrorRates> rates;
    OracleMethod method = OracleMethod::kAuto;
    SamplingOptions sampling;
    /// kAuto uses exhaustive enumeration up to this many slots.
    size_t max_exhaustive_slots = 8;
};

struct OracleResult {
    OracleMethod method = OracleMethod::kAuto;
    std::vector<double> fidelity;    // per rate, divided by acceptance
    std::vector<double> acceptance;  // per rate
    std::vector<double> standard_error;
    size_t samples = 0;
    size_t distinct_configs = 0;
};

/// State fidelity of the scenario at each rate. kAuto is exact: exhaustive
/// enumeration for small fragments, the density-matrix run otherwise.
/// kSampled samples everything up to the end of the last T gadget and evolves
/// the rest as a density matrix; it needs px = py = pz.
OracleResult oracle_state_fidelity(const OracleRequest &req);

}  // namespace qecseq

#endif
