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

#ifndef QECSEQ_METRICS_H
#define QECSEQ_METRICS_H

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "qecseq/expansion.h"
#include "qecseq/gadgets.h"
#include "qecseq/steane.h"

namespace qecseq {

struct SimSettings {
    int order = 2;
    GadgetOptions gadgets;
    size_t memory_budget = size_t{768} << 20;
    std::shared_ptr<BlockCache> cache;
};

/// |0>, |1>, |+>, |+i>.
std::array<steane::LogicalState, 4> standard_tomography_inputs();

/// Unnormalized results of one expanded run.
struct ChannelRun {
    steane::LogicalState input;
    ErrorPolynomial acceptance;
    /// decode_ideal of the accepted ensemble; trace equals `acceptance`.
    PolyMatrix decoded;
    /// Entry (k, l) = sum_b w_b <u_k|b><b|u_l>, with u_k the encoded logical basis.
    PolyMatrix projected;
    EngineStats stats;
};

/// The expanded logical channel of a scenario, sampled on four input states.
///
/// The unnormalized map from input density matrix to output ensemble is
/// linear, so the four runs determine acceptance, decoded output and
/// encoded-state overlaps for any other input.
struct LogicalChannel {
    GateSequence gates;
    QecPolicy policy;
    int order = 0;
    size_t num_locations = 0;
    size_t num_slots = 0;
    ComplexMatrix ideal;  // 2x2 logical unitary, gates applied in time order
    std::array<ChannelRun, 4> runs;
};

CircuitFragment scenario_fragment(const GateSequence &gates, const QecPolicy &policy, const SimSettings &s);
ComplexMatrix ideal_logical_unitary(const GateSequence &gates);

/// One expanded run; used to fill LogicalChannel::runs.
ChannelRun run_input(const CircuitFragment &f, const steane::LogicalState &input, const SimSettings &s);

/// Runs the scenario on `inputs` (informationally complete). `map` runs the
/// four independent jobs, possibly concurrently; the default runs them in order.
using JobRunner = std::function<void(size_t count, const std::function<void(size_t)> &job)>;
LogicalChannel run_channel(const GateSequence &gates, const QecPolicy &policy, const SimSettings &s,
                           const std::array<steane::LogicalState, 4> &inputs = standard_tomography_inputs(),
                           const JobRunner &map = {});

ErrorPolynomial acceptance_at(const LogicalChannel &c, const steane::LogicalState &input);
/// Overlap of the output with the ideal encoded output, divided by acceptance.
ErrorPolynomial state_fidelity(const LogicalChannel &c, const steane::LogicalState &input);
/// Normalized decoded single-qubit output.
PolyMatrix logical_output(const LogicalChannel &c, const steane::LogicalState &input);

/// 4x4 matrix over the unnormalized Pauli basis (I, X, Y, Z):
/// E(rho) = sum_mn chi_mn s_m rho s_n. A unitary gives Tr chi = 1.
using ProcessMatrix = DenseMatrix<ComplexPolynomial>;

/// Linear inversion from the normalized outputs of the channel's four runs.
ProcessMatrix process_matrix(const LogicalChannel &c);
ComplexMatrix process_matrix_of_unitary(const ComplexMatrix &u);
/// Re Tr[chi_ideal chi].
ErrorPolynomial gate_fidelity(const ComplexMatrix &chi_ideal, const ProcessMatrix &chi);
double gate_fidelity(const ComplexMatrix &chi_ideal, const ComplexMatrix &chi);
/// Order-0 part of a polynomial process matrix.
ComplexMatrix constant_part(const ProcessMatrix &chi);

/// Least-squares fit of per-monomial coefficients over an (alpha, beta) grid
/// onto {1, s1, s2} with s1 = cos 4a and s2 = cos 2b sin^2 2a.
struct AngularFit {
    std::vector<std::array<double, 3>> coefficients;  // per monomial index
    double max_residual = 0;
    bool matches(double tol = 1e-8) const {
        return max_residual <= tol;
    }
};
AngularFit fit_angular(const std::vector<steane::LogicalState> &grid, const std::vector<ErrorPolynomial> &values);
std::vector<steane::LogicalState> default_state_grid();

}  // namespace qecseq

#endif
