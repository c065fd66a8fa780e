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

#include "qecseq/metrics.h"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qecseq {

namespace {

using Mat4 = Eigen::Matrix<Complex, 4, 4>;
using Mat16 = Eigen::Matrix<Complex, 16, 16>;

constexpr double kPi = std::numbers::pi;

std::array<ComplexMatrix, 4> paulis() {
    const Complex i(0, 1);
    std::array<ComplexMatrix, 4> s;
    for (auto &m : s) {
        m = ComplexMatrix(2, 2);
    }
    s[0](0, 0) = s[0](1, 1) = 1;
    s[1](0, 1) = s[1](1, 0) = 1;
    s[2](0, 1) = -i;
    s[2](1, 0) = i;
    s[3](0, 0) = 1;
    s[3](1, 1) = -1;
    return s;
}

ComplexMatrix projector(const steane::LogicalState &s) {
    auto a = s.amplitudes();
    ComplexMatrix r(2, 2);
    for (int k = 0; k < 2; k++) {
        for (int l = 0; l < 2; l++) {
            r(k, l) = a[k] * std::conj(a[l]);
        }
    }
    return r;
}

// Coefficients expressing `rho` in terms of the four input projectors.
std::array<Complex, 4> input_coefficients(const LogicalChannel &c, const ComplexMatrix &rho) {
    Mat4 basis;
    Eigen::Matrix<Complex, 4, 1> target;
    for (int r = 0; r < 4; r++) {
        ComplexMatrix p = projector(c.runs[r].input);
        for (int e = 0; e < 4; e++) {
            basis(e, r) = p.data()[e];
        }
    }
    for (int e = 0; e < 4; e++) {
        target(e) = rho.data()[e];
    }
    Eigen::FullPivLU<Mat4> lu(basis);
    if (lu.rank() < 4) {
        throw std::invalid_argument("tomography inputs are not informationally complete");
    }
    Eigen::Matrix<Complex, 4, 1> x = lu.solve(target);
    return {x(0), x(1), x(2), x(3)};
}

ComplexPolynomial combine(const std::array<Complex, 4> &coef, const std::array<ComplexPolynomial, 4> &terms) {
    ComplexPolynomial r(terms[0].order());
    for (int k = 0; k < 4; k++) {
        r += terms[k] * coef[k];
    }
    return r;
}

ComplexPolynomial complex_reciprocal(const ErrorPolynomial &acc) {
    if (std::abs(acc.constant()) < 1e-12) {
        throw DegenerateError("acceptance vanishes at zeroth order");
    }
    return to_complex(acc.reciprocal());
}

ComplexMatrix matmul(const ComplexMatrix &a, const ComplexMatrix &b) {
    ComplexMatrix r(a.rows(), b.cols());
    for (size_t i = 0; i < a.rows(); i++) {
        for (size_t j = 0; j < b.cols(); j++) {
            for (size_t k = 0; k < a.cols(); k++) {
                r(i, j) += a(i, k) * b(k, j);
            }
        }
    }
    return r;
}

// Beta[(ij, kl), (m, n)] = (s_m E_ij s_n)_kl; its inverse maps channel action to chi.
const Mat16 &chi_inverse() {
    static const Mat16 inv = [] {
        auto s = paulis();
        Mat16 beta;
        for (int ij = 0; ij < 4; ij++) {
            ComplexMatrix e(2, 2);
            e.data()[ij] = 1;
            for (int m = 0; m < 4; m++) {
                for (int n = 0; n < 4; n++) {
                    ComplexMatrix t = matmul(matmul(s[m], e), s[n]);
                    for (int kl = 0; kl < 4; kl++) {
                        beta(ij * 4 + kl, m * 4 + n) = t.data()[kl];
                    }
                }
            }
        }
        return Mat16(beta.inverse());
    }();
    return inv;
}

}  // namespace

std::array<steane::LogicalState, 4> standard_tomography_inputs() {
    return {{{0, 0}, {kPi / 2, 0}, {kPi / 4, 0}, {kPi / 4, kPi / 2}}};
}

std::vector<steane::LogicalState> default_state_grid() {
    std::vector<steane::LogicalState> g;
    for (int a = 0; a <= 4; a++) {
        for (int b = 0; b <= 2; b++) {
            g.push_back({a * kPi / 8, b * kPi / 4});
        }
    }
    return g;
}

CircuitFragment scenario_fragment(const GateSequence &gates, const QecPolicy &policy, const SimSettings &s) {
    return build_sequence(gates, policy, s.gadgets);
}

ComplexMatrix ideal_logical_unitary(const GateSequence &gates) {
    ComplexMatrix u(2, 2);
    u(0, 0) = u(1, 1) = 1;
    for (auto g : gates) {
        const Unitary &v = steane::logical_unitary(g);
        ComplexMatrix m(2, 2);
        for (int r = 0; r < 2; r++) {
            for (int c = 0; c < 2; c++) {
                m(r, c) = v.at(r, c);
            }
        }
        u = matmul(m, u);
    }
    return u;
}

ChannelRun run_input(const CircuitFragment &f, const steane::LogicalState &input, const SimSettings &s) {
    ExpandOptions opt;
    opt.order = s.order;
    opt.memory_budget = s.memory_budget;
    opt.cache = s.cache;
    ChannelRun run;
    run.input = input;
    PolyEnsemble e = execute_expanded(f, steane::encode_perfect(input), opt, &run.stats);
    run.acceptance = acceptance(e, s.order);

    const size_t data[7] = {0, 1, 2, 3, 4, 5, 6};
    run.decoded = steane::decode_ideal(e.weighted(), data);

    auto [u0, u1] = steane::logical_basis_states();
    run.projected = PolyMatrix(2, 2, ComplexPolynomial(s.order));
    for (const auto &b : e.branches) {
        StateVector psi(e.wires.size(), b.amps);
        Complex v[2] = {u0.inner(psi), u1.inner(psi)};
        ComplexPolynomial w = to_complex(b.weight);
        for (int k = 0; k < 2; k++) {
            for (int l = 0; l < 2; l++) {
                run.projected(k, l) += w * (v[k] * std::conj(v[l]));
            }
        }
    }
    return run;
}

LogicalChannel run_channel(const GateSequence &gates, const QecPolicy &policy, const SimSettings &s,
                           const std::array<steane::LogicalState, 4> &inputs, const JobRunner &map) {
    LogicalChannel c;
    c.gates = gates;
    c.policy = policy;
    c.order = s.order;
    CircuitFragment f = scenario_fragment(gates, policy, s);
    c.num_locations = f.num_locations();
    c.num_slots = f.num_slots();
    c.ideal = ideal_logical_unitary(gates);
    auto job = [&](size_t r) { c.runs[r] = run_input(f, inputs[r], s); };
    if (map) {
        map(4, job);
    } else {
        for (size_t r = 0; r < 4; r++) {
            job(r);
        }
    }
    return c;
}

ErrorPolynomial acceptance_at(const LogicalChannel &c, const steane::LogicalState &input) {
    auto coef = input_coefficients(c, projector(input));
    std::array<ComplexPolynomial, 4> a;
    for (int r = 0; r < 4; r++) {
        a[r] = to_complex(c.runs[r].acceptance);
    }
    return real_part(combine(coef, a));
}

ErrorPolynomial state_fidelity(const LogicalChannel &c, const steane::LogicalState &input) {
    auto coef = input_coefficients(c, projector(input));
    auto amps = input.amplitudes();
    Complex d[2] = {c.ideal(0, 0) * amps[0] + c.ideal(0, 1) * amps[1],
                    c.ideal(1, 0) * amps[0] + c.ideal(1, 1) * amps[1]};
    ComplexPolynomial num(c.order);
    for (int k = 0; k < 2; k++) {
        for (int l = 0; l < 2; l++) {
            std::array<ComplexPolynomial, 4> p;
            for (int r = 0; r < 4; r++) {
                p[r] = c.runs[r].projected(k, l);
            }
            num += combine(coef, p) * (std::conj(d[k]) * d[l]);
        }
    }
    return truncated_quotient(real_part(num), acceptance_at(c, input));
}

PolyMatrix logical_output(const LogicalChannel &c, const steane::LogicalState &input) {
    auto coef = input_coefficients(c, projector(input));
    ComplexPolynomial inv = complex_reciprocal(acceptance_at(c, input));
    PolyMatrix out(2, 2);
    for (int e = 0; e < 4; e++) {
        std::array<ComplexPolynomial, 4> p;
        for (int r = 0; r < 4; r++) {
            p[r] = c.runs[r].decoded.data()[e];
        }
        out.data()[e] = combine(coef, p) * inv;
    }
    return out;
}

ProcessMatrix process_matrix(const LogicalChannel &c) {
    // Normalized outputs of the four runs, extended linearly to the matrix units.
    std::array<std::array<ComplexPolynomial, 4>, 4> normalized;  // [run][entry]
    for (int r = 0; r < 4; r++) {
        ComplexPolynomial inv = complex_reciprocal(c.runs[r].acceptance);
        for (int e = 0; e < 4; e++) {
            normalized[r][e] = c.runs[r].decoded.data()[e] * inv;
        }
    }
    std::array<ComplexPolynomial, 16> lambda;  // index ij * 4 + kl
    for (int ij = 0; ij < 4; ij++) {
        ComplexMatrix unit(2, 2);
        unit.data()[ij] = 1;
        auto coef = input_coefficients(c, unit);
        for (int kl = 0; kl < 4; kl++) {
            std::array<ComplexPolynomial, 4> p;
            for (int r = 0; r < 4; r++) {
                p[r] = normalized[r][kl];
            }
            lambda[ij * 4 + kl] = combine(coef, p);
        }
    }
    const Mat16 &inv = chi_inverse();
    ProcessMatrix chi(4, 4, ComplexPolynomial(c.order));
    for (int mn = 0; mn < 16; mn++) {
        ComplexPolynomial v(c.order);
        for (int q = 0; q < 16; q++) {
            if (std::abs(inv(mn, q)) > 1e-15) {
                v += lambda[q] * inv(mn, q);
            }
        }
        chi.data()[mn] = v;
    }
    return chi;
}

ComplexMatrix process_matrix_of_unitary(const ComplexMatrix &u) {
    // u = sum_m a_m s_m with a_m = Tr[s_m u] / 2; chi = a a^dag.
    auto s = paulis();
    Complex a[4];
    for (int m = 0; m < 4; m++) {
        ComplexMatrix t = matmul(s[m], u);
        a[m] = (t(0, 0) + t(1, 1)) / 2.0;
    }
    ComplexMatrix chi(4, 4);
    for (int m = 0; m < 4; m++) {
        for (int n = 0; n < 4; n++) {
            chi(m, n) = a[m] * std::conj(a[n]);
        }
    }
    return chi;
}

ErrorPolynomial gate_fidelity(const ComplexMatrix &chi_ideal, const ProcessMatrix &chi) {
    if (chi_ideal.rows() != 4 || chi.rows() != 4) {
        throw std::invalid_argument("process matrices must be 4x4 in the Pauli basis");
    }
    ComplexPolynomial t(chi(0, 0).order());
    for (int m = 0; m < 4; m++) {
        for (int n = 0; n < 4; n++) {
            t += chi(n, m) * chi_ideal(m, n);
        }
    }
    return real_part(t);
}

double gate_fidelity(const ComplexMatrix &chi_ideal, const ComplexMatrix &chi) {
    if (chi_ideal.rows() != 4 || chi.rows() != 4) {
        throw std::invalid_argument("process matrices must be 4x4 in the Pauli basis");
    }
    Complex t = 0;
    for (int m = 0; m < 4; m++) {
        for (int n = 0; n < 4; n++) {
            t += chi_ideal(m, n) * chi(n, m);
        }
    }
    return t.real();
}

ComplexMatrix constant_part(const ProcessMatrix &chi) {
    ComplexMatrix r(chi.rows(), chi.cols());
    for (size_t i = 0; i < r.data().size(); i++) {
        r.data()[i] = chi.data()[i].constant();
    }
    return r;
}

AngularFit fit_angular(const std::vector<steane::LogicalState> &grid, const std::vector<ErrorPolynomial> &values) {
    if (grid.size() != values.size() || grid.size() < 3) {
        throw std::invalid_argument("angular fit needs at least three matching samples");
    }
    Eigen::MatrixXd design(grid.size(), 3);
    for (size_t g = 0; g < grid.size(); g++) {
        double s2a = std::sin(2 * grid[g].alpha);
        design(g, 0) = 1;
        design(g, 1) = std::cos(4 * grid[g].alpha);
        design(g, 2) = std::cos(2 * grid[g].beta) * s2a * s2a;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    AngularFit fit;
    int n = values[0].size();
    for (int i = 0; i < n; i++) {
        Eigen::VectorXd y(grid.size());
        for (size_t g = 0; g < grid.size(); g++) {
            y(g) = values[g][i];
        }
        Eigen::Vector3d x = qr.solve(y);
        fit.coefficients.push_back({x(0), x(1), x(2)});
        fit.max_residual = std::max(fit.max_residual, (design * x - y).cwiseAbs().maxCoeff());
    }
    return fit;
}

}  // namespace qecseq
