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

// Acceptance suite: one PASS/FAIL line per criterion on stdout, details on
// stderr. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qecseq/expansion.h"
#include "qecseq/gadgets.h"
#include "qecseq/metrics.h"
#include "qecseq/oracle.h"
#include "qecseq/scenario.h"

namespace {

using namespace qecseq;
using steane::LogicalGate;
using steane::LogicalState;

constexpr double kSnap = 1e-9;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void fail(const std::string &why) {
        pass = false;
        std::cerr << "    FAIL: " << why << "\n";
    }
    void note(const std::string &msg) const {
        std::cerr << "    " << msg << "\n";
    }
};

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const ScenarioResult &find(const RunOutput &r, const std::string &row, const std::string &variant) {
    for (const auto &res : r.results) {
        if (res.scenario.row == row && res.scenario.variant == variant) {
            return res;
        }
    }
    throw std::runtime_error("missing scenario " + row + "/" + variant);
}

/// First-order coefficients agree after snapping.
bool first_order_equal(const ErrorPolynomial &got, const ErrorPolynomial &want) {
    for (int i = 0; i < 4; i++) {
        if (format_coefficient(got[i], kSnap) != format_coefficient(want[i], kSnap)) {
            return false;
        }
    }
    return true;
}

std::string first_order(const ErrorPolynomial &p) {
    return format_polynomial(p, PolyStyle::kAscii, 1);
}

void check_rows(Outcome &o, const RunOutput &r, const std::vector<std::pair<std::string, std::string>> &rows,
                bool state) {
    for (const auto &[row, want_text] : rows) {
        const ScenarioResult &res = find(r, row, "no QEC");
        ErrorPolynomial want = parse_polynomial(want_text, 1);
        std::vector<const ErrorPolynomial *> got;
        if (state) {
            for (const auto &p : res.state) {
                got.push_back(&p);
            }
        } else {
            got.push_back(&*res.gate);
        }
        bool ok = true;
        for (const auto *p : got) {
            ok = ok && first_order_equal(*p, want);
        }
        o.note(row + ": " + first_order(*got.front()) + (state ? " (all grid points)" : "") +
               (ok ? "" : "  expected " + want_text));
        if (!ok) {
            o.fail(row + " differs");
        }
    }
}

// Criterion 6: |exact oracle - expansion| between p and 2p.
void oracle_ratio(Outcome &o, const std::vector<const RunOutput *> &runs) {
    const auto grid = default_state_grid();
    const size_t gi = 4;  // alpha = pi/8, beta = pi/4: both amplitudes and a relative phase
    const LogicalState input = grid[gi];
    const std::vector<ErrorRates> rates = {ErrorRates::uniform(1e-3), ErrorRates::uniform(2e-3)};
    size_t mc_checked = 0;
    for (const RunOutput *run : runs) {
        for (const auto &res : run->results) {
            const Scenario &sc = res.scenario;
            auto t0 = std::chrono::steady_clock::now();
            OracleRequest req;
            req.gates = sc.gates;
            req.policy = sc.policy;
            req.gadgets = run->config.gadgets;
            req.input = input;
            req.rates = rates;
            req.method = OracleMethod::kAuto;
            OracleResult exact = oracle_state_fidelity(req);
            double resid[2];
            for (int k = 0; k < 2; k++) {
                resid[k] = std::abs(exact.fidelity[k] - res.state[gi](rates[k]));
            }
            double ratio = resid[1] / resid[0];
            bool ok = resid[0] > 0 && ratio >= 6 && ratio <= 10;
            char buf[256];
            std::snprintf(buf, sizeof buf, "%-22s %-14s residual %.3e / %.3e  ratio %.3f  (%.1f s)", sc.id().c_str(),
                          oracle_method_name(exact.method), resid[0], resid[1], ratio, elapsed(t0));
            o.note(buf);
            if (!ok) {
                o.fail(sc.id() + " ratio outside [6, 10]");
            }
            bool has_t = std::find(sc.gates.begin(), sc.gates.end(), LogicalGate::kT) != sc.gates.end();
            if (!has_t) {
                continue;
            }
            // Monte Carlo cross-check: 10^6 plain samples of everything up to the last T gadget.
            t0 = std::chrono::steady_clock::now();
            req.method = OracleMethod::kSampled;
            req.sampling.samples = 1'000'000;
            req.sampling.seed = 1;
            req.sampling.exact_strata = -1;
            OracleResult mc = oracle_state_fidelity(req);
            mc_checked++;
            for (int k = 0; k < 2; k++) {
                double dev = std::abs(mc.fidelity[k] - exact.fidelity[k]);
                double se = mc.standard_error[k];
                std::snprintf(buf, sizeof buf, "%-22s monte-carlo    p=%g  %.9f vs exact %.9f  |dev| = %.2f SE  (%.1f s)",
                              sc.id().c_str(), rates[k].px, mc.fidelity[k], exact.fidelity[k], se > 0 ? dev / se : 0,
                              elapsed(t0));
                o.note(buf);
                if (!(se > 0 && dev <= 3 * se)) {
                    o.fail(sc.id() + " Monte Carlo estimate more than 3 SE from the exact oracle");
                }
            }
        }
    }
    o.detail << "exact oracle ratios in [6, 10]; " << mc_checked << " T scenarios cross-checked by 10^6-sample MC";
}

// Criterion 7: equalities of noisy-QEC polynomials (state at every grid point and gate).
void equal_noisy(Outcome &o, const ScenarioResult &a, const ScenarioResult &b) {
    double second = 0;
    bool ok = first_order_equal(*a.gate, *b.gate);
    second = std::max(second, a.gate->max_abs_diff(*b.gate));
    for (size_t g = 0; g < a.state.size(); g++) {
        ok = ok && first_order_equal(a.state[g], b.state[g]);
        second = std::max(second, a.state[g].max_abs_diff(b.state[g]));
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s == %s: state %s, gate %s; largest second-order difference %.4g",
                  a.scenario.id().c_str(), b.scenario.id().c_str(), first_order(a.state.front()).c_str(),
                  first_order(*a.gate).c_str(), second);
    o.note(buf);
    if (!ok) {
        o.fail(a.scenario.id() + " != " + b.scenario.id());
    }
}

bool is_zero_through(const ErrorPolynomial &p, int degree) {
    for (int i = 1; i < poly_detail::count_up_to(degree); i++) {
        if (std::abs(p[i]) > kSnap) {
            return false;
        }
    }
    return true;
}

void report(int id, const std::string &title, const Outcome &o, bool &all, double seconds) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " (%.0f s)", seconds);
    std::cout << "[" << (o.pass ? "PASS" : "FAIL") << "] criterion " << id << ": " << title;
    if (!o.detail.str().empty()) {
        std::cout << " -- " << o.detail.str();
    }
    std::cout << buf << std::endl;
    all = all && o.pass;
}

ScenarioConfig preset_config(const std::string &name, int jobs) {
    ScenarioConfig c;
    c.preset = name;
    c.jobs = jobs;
    c.format = OutputFormat::kJson;
    return c;
}

}  // namespace

int main() {
    bool all = true;
    auto start = std::chrono::steady_clock::now();
    std::cerr << "computing presets table1, table2 and perfect-qec at order 2\n";
    RunOutput t1 = run_scenarios(preset_config("table1", 1));
    RunOutput t2 = run_scenarios(preset_config("table2", 1));
    RunOutput pq = run_scenarios(preset_config("perfect-qec", 1));
    std::cerr << "  done in " << elapsed(start) << " s\n";

    {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        check_rows(o, t1, {{"H", "1 - 7px - 7py - 7pz"}, {"P", "1 - 7px - 7py - 7pz"}, {"PH", "1 - 14px - 14py - 14pz"},
                           {"HPH", "1 - 21px - 21py - 21pz"}},
                   true);
        report(1, "Table I no-QEC state fidelities", o, all, elapsed(t0));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        check_rows(o, t2, {{"T", "1 - 7px - 7py - 26pz"}, {"PT", "1 - 14px - 14py - 33pz"},
                           {"HT", "1 - 14px - 14py - 33pz"}, {"TPH", "1 - 7px - 7py - 40pz"},
                           {"THPH", "1 - 14px - 14py - 33pz"}},
                   true);
        report(2, "Table II no-QEC state fidelities", o, all, elapsed(t0));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        check_rows(o, t1, {{"H", "1 - 3px - 5py - 3pz"}, {"P", "1 - 3px - 5py - 3pz"}, {"PH", "1 - 8px - 8py - 6pz"},
                           {"HPH", "1 - 11px - 13py - 9pz"}},
                   false);
        check_rows(o, t2, {{"T", "1 - 3px - 5py - 14pz"}, {"HT", "1 - 6px - 10py - 17pz"},
                           {"TPH", "1 - 3px - 5py - 20pz"}, {"THPH", "1 - 6px - 8py - 17pz"}},
                   false);
        report(3, "Table I/II no-QEC gate fidelities", o, all, elapsed(t0));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        for (const auto &res : pq.results) {
            bool has_t = std::find(res.scenario.gates.begin(), res.scenario.gates.end(), LogicalGate::kT) !=
                         res.scenario.gates.end();
            int through = has_t ? 1 : 2;
            bool ok = is_zero_through(*res.gate, through);
            for (const auto &p : res.state) {
                ok = ok && is_zero_through(p, through);
            }
            o.note(res.scenario.id() + ": gate " + format_polynomial(*res.gate) + "; zero through order " +
                   std::to_string(through) + (ok ? "" : " VIOLATED"));
            if (!ok) {
                o.fail(res.scenario.id());
            }
        }
        o.detail << "infidelity vanishes through order 2 (Clifford) and order 1 (T), state and gate";
        report(4, "perfect QEC restores unit fidelity", o, all, elapsed(t0));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        GadgetOptions opt;
        opt.perfect_recovery = GadgetOptions::Recovery::kCorrect;
        CircuitFragment cycle = qec_cycle_fragment(false, opt);
        auto inputs = standard_tomography_inputs();
        std::vector<LogicalState> states(inputs.begin(), inputs.end());
        states.push_back({0.3, 1.9});
        double worst = 0;
        int injections = 0;
        for (size_t q = 0; q < steane::kBlockSize; q++) {
            for (Pauli p : {Pauli::kX, Pauli::kY, Pauli::kZ}) {
                injections++;
                for (const auto &in : states) {
                    StateVector ref = steane::encode_perfect(in);
                    StateVector s = ref;
                    size_t t[] = {q};
                    steane::apply_pauli_string(s, t, p);
                    NumericEnsemble e = execute_with_faults(cycle, s, FaultPath{});
                    double w = 0, ov = 0;
                    for (const auto &b : e.branches) {
                        Complex ip = 0;
                        for (size_t i = 0; i < b.amps.size(); i++) {
                            ip += std::conj(ref[i]) * b.amps[i];
                        }
                        w += b.weight;
                        ov += b.weight * std::norm(ip);
                    }
                    worst = std::max({worst, std::abs(1 - w), std::abs(1 - ov)});
                }
            }
        }
        if (injections != 21 || worst > 1e-12) {
            o.fail("largest deviation from unit fidelity " + std::to_string(worst));
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "%d injections x %zu inputs, largest |1 - F| = %.2e", injections,
                      states.size(), worst);
        o.detail << buf;
        report(5, "single-qubit Pauli injections corrected by one QEC cycle", o, all, elapsed(t0));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        oracle_ratio(o, {&t1, &t2, &pq});
        report(6, "oracle residual scales as p^3", o, all, elapsed(t0));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        const std::string n = "noisy QEC";
        equal_noisy(o, find(t1, "H", n), find(t1, "PH", n));
        for (const char *row : {"PT", "HT", "TPH", "THPH"}) {
            equal_noisy(o, find(t2, "T", n), find(t2, row, n));
        }
        equal_noisy(o, find(t1, "P-QEC-H", n), find(t1, "PH", n));
        equal_noisy(o, find(t2, "P-QEC-T", n), find(t2, "T", n));
        o.detail << "compared through first order, the order the tables report";
        report(7, "structural noisy-QEC equalities", o, all, elapsed(t0));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        SimSettings s;
        s.order = 0;
        for (LogicalGate g : {LogicalGate::kH, LogicalGate::kP, LogicalGate::kT}) {
            LogicalChannel c = run_channel({g}, QecPolicy::none(), s);
            ComplexMatrix chi = constant_part(process_matrix(c));
            ComplexMatrix ideal = process_matrix_of_unitary(c.ideal);
            Complex tr = 0;
            double herm = 0, minor = 0, dist = 0;
            for (size_t i = 0; i < 4; i++) {
                tr += chi(i, i);
                for (size_t j = 0; j < 4; j++) {
                    herm = std::max(herm, std::abs(chi(i, j) - std::conj(chi(j, i))));
                    dist = std::max(dist, std::abs(chi(i, j) - ideal(i, j)));
                    for (size_t k = 0; k < 4; k++) {
                        for (size_t l = 0; l < 4; l++) {
                            minor = std::max(minor, std::abs(chi(i, j) * chi(k, l) - chi(i, l) * chi(k, j)));
                        }
                    }
                }
            }
            double self = gate_fidelity(chi, chi), vs_ideal = gate_fidelity(ideal, chi);
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "%c: |Tr-1| %.1e, hermiticity %.1e, 2x2 minors %.1e, |chi-chi_ideal| %.1e, gf(chi,chi) %.12f",
                          steane::gate_char(g), std::abs(tr - 1.0), herm, minor, dist, self);
            o.note(buf);
            if (std::abs(tr - 1.0) > 1e-10 || herm > 1e-10 || minor > 1e-10 || dist > 1e-10 ||
                std::abs(self - 1) > 1e-10 || std::abs(vs_ideal - 1) > 1e-10) {
                o.fail(std::string("chi of ") + steane::gate_char(g));
            }
        }
        report(8, "fault-free chi is a rank-1 unit-trace Hermitian projector", o, all, elapsed(t0));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        size_t count = 0;
        for (const RunOutput *r : {&t1, &t2, &pq}) {
            for (const auto &res : r->results) {
                count++;
                ErrorPolynomial three = path_weight_sum(
                    build_sequence(res.scenario.gates, res.scenario.policy, r->config.gadgets), 3);
                if (!res.path_weight_sum.approx_equal(ErrorPolynomial::one(2), 1e-12) ||
                    !three.approx_equal(ErrorPolynomial::one(3), 1e-12)) {
                    o.fail(res.scenario.id() + ": " + format_polynomial(res.path_weight_sum));
                }
            }
        }
        o.detail << count << " preset fragments, orders 2 and 3";
        report(9, "path weights sum to 1", o, all, elapsed(t0));
    }
    {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        std::string one = render_json(t2);
        std::string eight = render_json(run_scenarios(preset_config("table2", 8)));
        if (one != eight) {
            o.fail("JSON differs between --jobs 1 and --jobs 8");
        }
        o.detail << one.size() << " bytes";
        report(10, "preset table2 JSON identical for --jobs 1 and --jobs 8", o, all, elapsed(t0));
    }
    std::cout << (all ? "all criteria passed" : "some criteria FAILED") << " in " << elapsed(start) << " s"
              << std::endl;
    return all ? 0 : 1;
}
