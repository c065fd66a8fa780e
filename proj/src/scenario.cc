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

#include "qecseq/scenario.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"

#ifndef QECSEQ_CONVENTIONS_SHA256
#define QECSEQ_CONVENTIONS_SHA256 "unknown"
#endif
#ifndef QECSEQ_VERSION
#define QECSEQ_VERSION "0.0.0"
#endif

namespace qecseq {

using Json = nlohmann::ordered_json;

namespace {

constexpr double kFitTol = 1e-8;
constexpr size_t kJobFootprintMb = 768;

std::string recovery_str(GadgetOptions::Recovery r) {
    return r == GadgetOptions::Recovery::kCorrect ? "correct" : "postselect";
}

Json gadgets_json(const GadgetOptions &g) {
    Json j;
    j["noisy_recovery"] = recovery_str(g.noisy_recovery);
    j["perfect_recovery"] = recovery_str(g.perfect_recovery);
    j["init_recovery"] = recovery_str(g.init_recovery);
    j["cat_layout"] = g.cat_layout == GadgetOptions::CatLayout::kChain ? "chain" : "fanout";
    j["phase_extraction"] =
        g.phase_extraction == GadgetOptions::PhaseExtraction::kCatControl ? "cat-control" : "data-hadamard";
    j["theta_ancilla_noise"] = g.theta_ancilla_noise;
    j["correction_noise"] = g.correction_noise;
    j["theta_verifications"] = g.theta_verifications;
    j["t_odd_correction"] = g.t_odd_correction;
    return j;
}

template <class T>
T field_as(const Json &v, const std::string &name) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception &) {
        throw ConfigError(name, "wrong type");
    }
}

std::string expect_string(const Json &v, const std::string &name) {
    if (!v.is_string()) {
        throw ConfigError(name, "expected a string");
    }
    return v.get<std::string>();
}

bool expect_bool(const Json &v, const std::string &name) {
    if (!v.is_boolean()) {
        throw ConfigError(name, "expected true or false");
    }
    return v.get<bool>();
}

int64_t expect_int(const Json &v, const std::string &name) {
    if (!v.is_number_integer()) {
        throw ConfigError(name, "expected an integer");
    }
    return v.get<int64_t>();
}

double expect_number(const Json &v, const std::string &name) {
    if (!v.is_number()) {
        throw ConfigError(name, "expected a number");
    }
    return v.get<double>();
}

std::vector<double> expect_numbers(const Json &v, const std::string &name) {
    std::vector<double> out;
    if (v.is_number()) {
        out.push_back(v.get<double>());
        return out;
    }
    if (!v.is_array()) {
        throw ConfigError(name, "expected a number or a list of numbers");
    }
    for (size_t i = 0; i < v.size(); i++) {
        out.push_back(expect_number(v[i], name + "[" + std::to_string(i) + "]"));
    }
    return out;
}

GadgetOptions parse_gadgets(const Json &j, GadgetOptions g) {
    if (!j.is_object()) {
        throw ConfigError("gadgets", "expected an object");
    }
    for (const auto &[key, v] : j.items()) {
        const std::string name = "gadgets." + key;
        try {
            if (key == "noisy_recovery") {
                g.noisy_recovery = parse_recovery(expect_string(v, name));
            } else if (key == "perfect_recovery") {
                g.perfect_recovery = parse_recovery(expect_string(v, name));
            } else if (key == "init_recovery") {
                g.init_recovery = parse_recovery(expect_string(v, name));
            } else if (key == "cat_layout") {
                std::string s = expect_string(v, name);
                if (s == "chain") {
                    g.cat_layout = GadgetOptions::CatLayout::kChain;
                } else if (s == "fanout") {
                    g.cat_layout = GadgetOptions::CatLayout::kFanout;
                } else {
                    throw ConfigError(name, "expected chain or fanout");
                }
            } else if (key == "phase_extraction") {
                std::string s = expect_string(v, name);
                if (s == "cat-control") {
                    g.phase_extraction = GadgetOptions::PhaseExtraction::kCatControl;
                } else if (s == "data-hadamard") {
                    g.phase_extraction = GadgetOptions::PhaseExtraction::kDataHadamard;
                } else {
                    throw ConfigError(name, "expected cat-control or data-hadamard");
                }
            } else if (key == "theta_ancilla_noise") {
                g.theta_ancilla_noise = expect_bool(v, name);
            } else if (key == "correction_noise") {
                g.correction_noise = expect_bool(v, name);
            } else if (key == "theta_verifications") {
                g.theta_verifications = static_cast<int>(expect_int(v, name));
            } else if (key == "t_odd_correction") {
                g.t_odd_correction = expect_bool(v, name);
            } else {
                throw ConfigError(name, "unknown key");
            }
        } catch (const ConfigError &) {
            throw;
        } catch (const std::invalid_argument &e) {
            throw ConfigError(name, e.what());
        }
    }
    return g;
}

std::string format_value(double v, bool snap) {
    char buf[64];
    if (snap) {
        double r = std::round(v);
        if (std::abs(v - r) <= 1e-9) {
            std::snprintf(buf, sizeof buf, "%.0f", r == 0 ? 0.0 : r);
            return buf;
        }
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json poly_json(const ErrorPolynomial &p) {
    Json j = Json::object();
    for (int i = 0; i < p.size(); i++) {
        j[poly_detail::kMonomials[static_cast<size_t>(i)].str()] = p[i];
    }
    return j;
}

bool has_angular_terms(const AngularFit &fit, int max_degree) {
    for (size_t i = 0; i < fit.coefficients.size(); i++) {
        if (poly_detail::kMonomials[i].degree() > max_degree) {
            continue;
        }
        if (std::abs(fit.coefficients[i][1]) > 1e-9 || std::abs(fit.coefficients[i][2]) > 1e-9) {
            return true;
        }
    }
    return false;
}

// Representative state-fidelity polynomial: the angle-independent part of the
// fit when the grid supports one, otherwise the first grid point.
ErrorPolynomial state_summary(const ScenarioResult &r, int order) {
    if (r.state_fit.matches(kFitTol) && !r.state_fit.coefficients.empty()) {
        ErrorPolynomial p(order);
        for (int i = 0; i < p.size(); i++) {
            p[i] = r.state_fit.coefficients[static_cast<size_t>(i)][0];
        }
        return p;
    }
    return r.state.front();
}

std::string state_cell(const ScenarioResult &r, int order, int display, bool snap, PolyStyle style) {
    const bool fitted = r.state_fit.matches(kFitTol) && !r.state_fit.coefficients.empty();
    const int top = display < 0 ? order : std::min(display, order);
    if (!fitted || !has_angular_terms(r.state_fit, top)) {
        std::string s = format_polynomial(state_summary(r, order), style, display, snap);
        return fitted ? s : s + " (at first grid point)";
    }
    const std::string minus = style == PolyStyle::kMarkdown ? "\xE2\x88\x92" : "-";
    std::string out;
    for (int i = 0; i < poly_detail::count_up_to(top); i++) {
        const auto &c = r.state_fit.coefficients[static_cast<size_t>(i)];
        const Monomial &m = poly_detail::kMonomials[static_cast<size_t>(i)];
        const char *names[3] = {"", "s1", "s2"};
        std::string expr;
        bool present[3] = {false, false, false};
        bool lone_negative = false;
        for (int k = 0; k < 3; k++) {
            std::string mag = snap ? format_coefficient(std::abs(c[k])) : format_value(std::abs(c[k]), false);
            if (mag == "0" || c[k] == 0) {
                continue;
            }
            present[k] = true;
            std::string term = k == 0 ? mag : (mag == "1" ? names[k] : mag + " " + names[k]);
            bool neg = c[k] < 0;
            if (expr.empty()) {
                lone_negative = neg;
                expr = neg ? minus + term : term;
            } else {
                expr += (neg ? " " + minus + " " : " + ") + term;
            }
        }
        if (!present[0] && !present[1] && !present[2]) {
            continue;
        }
        std::string term;
        bool negative = false;
        if (m.degree() == 0) {
            term = expr;
        } else if (!present[1] && !present[2]) {
            negative = lone_negative;
            std::string mag = snap ? format_coefficient(std::abs(c[0])) : format_value(std::abs(c[0]), false);
            term = (mag == "1" ? "" : (mag.find('/') != std::string::npos ? "(" + mag + ")" : mag)) + m.str();
        } else {
            term = "(" + expr + ")" + m.str();
        }
        if (out.empty()) {
            out = negative ? minus + term : term;
        } else {
            out += (negative ? " " + minus + " " : " + ") + term;
        }
    }
    return out.empty() ? "0" : out;
}

}  // namespace

const char *metric_name(Metric m) {
    switch (m) {
        case Metric::kState:
            return "state";
        case Metric::kGate:
            return "gate";
        case Metric::kBoth:
            return "both";
    }
    return "?";
}

Metric parse_metric(const std::string &s) {
    for (Metric m : {Metric::kState, Metric::kGate, Metric::kBoth}) {
        if (s == metric_name(m)) {
            return m;
        }
    }
    throw std::invalid_argument("expected state, gate or both");
}

const char *format_name(OutputFormat f) {
    switch (f) {
        case OutputFormat::kMarkdown:
            return "markdown";
        case OutputFormat::kCsv:
            return "csv";
        case OutputFormat::kJson:
            return "json";
    }
    return "?";
}

OutputFormat parse_format(const std::string &s) {
    for (OutputFormat f : {OutputFormat::kMarkdown, OutputFormat::kCsv, OutputFormat::kJson}) {
        if (s == format_name(f)) {
            return f;
        }
    }
    throw std::invalid_argument("expected markdown, csv or json");
}

GadgetOptions::Recovery parse_recovery(const std::string &s) {
    if (s == "correct") {
        return GadgetOptions::Recovery::kCorrect;
    }
    if (s == "postselect") {
        return GadgetOptions::Recovery::kPostselect;
    }
    throw std::invalid_argument("expected correct or postselect");
}

const std::vector<std::string> &preset_names() {
    static const std::vector<std::string> names{"table1", "table2", "perfect-qec"};
    return names;
}

std::vector<Scenario> preset_scenarios(const std::string &name) {
    // Row labels are operator products (rightmost acts first).
    auto seq = [](const std::string &label) {
        GateSequence g = parse_sequence(label);
        std::reverse(g.begin(), g.end());
        return g;
    };
    std::vector<Scenario> out;
    auto table_rows = [&](const std::vector<std::string> &rows, const std::string &interleaved) {
        for (const auto &row : rows) {
            out.push_back({row, "no QEC", seq(row), QecPolicy::none()});
            out.push_back({row, "noisy QEC", seq(row), QecPolicy::noisy_final()});
        }
        // P after a noisy cycle: the no-QEC column has only the first cycle.
        GateSequence g = {steane::gate_from_char(interleaved.back()), steane::LogicalGate::kP};
        std::string label = "P-QEC-" + interleaved.substr(interleaved.size() - 1);
        out.push_back({label, "no QEC", g, QecPolicy::explicit_after({1})});
        out.push_back({label, "noisy QEC", g, QecPolicy::explicit_after({1, 2})});
    };
    if (name == "table1") {
        table_rows({"H", "P", "PH", "HPH"}, "H");
    } else if (name == "table2") {
        table_rows({"T", "PT", "HT", "TPH", "THPH"}, "T");
    } else if (name == "perfect-qec") {
        for (const char *row : {"H", "P", "PH", "HPH", "T", "PT", "HT", "TPH", "THPH"}) {
            out.push_back({row, "perfect QEC", seq(row), QecPolicy::perfect_final()});
        }
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "' (expected table1, table2 or perfect-qec)");
    }
    return out;
}

void ScenarioConfig::validate() const {
    if (preset.empty()) {
        if (sequence.empty()) {
            throw ConfigError("sequence", "required (or choose a preset)");
        }
        try {
            qec.placements(sequence.size());
        } catch (const std::invalid_argument &e) {
            throw ConfigError("qec", e.what());
        }
    } else {
        if (std::find(preset_names().begin(), preset_names().end(), preset) == preset_names().end()) {
            throw ConfigError("preset", "unknown preset '" + preset + "'");
        }
        if (!sequence.empty()) {
            throw ConfigError("sequence", "not allowed together with a preset");
        }
    }
    if (order < 1 || order > 3) {
        throw ConfigError("order", "must be 1, 2 or 3");
    }
    if (order == 3 && !allow_order3) {
        throw ConfigError("order", "order 3 is expensive; set allow_order3 (--allow-order3) to run it");
    }
    for (double a : alpha) {
        if (!std::isfinite(a)) {
            throw ConfigError("alpha", "angles must be finite");
        }
    }
    for (double b : beta) {
        if (!std::isfinite(b)) {
            throw ConfigError("beta", "angles must be finite");
        }
    }
    static const std::vector<std::string> methods{"off", "auto", "exhaustive", "density-matrix", "monte-carlo"};
    if (std::find(methods.begin(), methods.end(), oracle.method) == methods.end()) {
        throw ConfigError("oracle.method",
                          "expected off, auto, exhaustive, density-matrix or monte-carlo, got '" + oracle.method + "'");
    }
    if (oracle.samples < 1) {
        throw ConfigError("oracle.samples", "must be positive");
    }
    if (oracle.exact_strata < -1 || oracle.exact_strata > 3) {
        throw ConfigError("oracle.exact_strata", "must be between -1 and 3");
    }
    if (oracle.input && !(std::isfinite(oracle.input->alpha) && std::isfinite(oracle.input->beta))) {
        throw ConfigError("oracle.alpha", "angles must be finite");
    }
    if (oracle.rates.empty()) {
        throw ConfigError("oracle.rates", "needs at least one rate");
    }
    for (double p : oracle.rates) {
        if (!(p >= 0 && 3 * p <= 1)) {
            throw ConfigError("oracle.rates", "each uniform rate must lie in [0, 1/3]");
        }
    }
    if (jobs < 1 || jobs > 256) {
        throw ConfigError("jobs", "must be between 1 and 256");
    }
    if (display_order < -1 || display_order > 3) {
        throw ConfigError("display_order", "must be -1 (all) or 0..3");
    }
    if (gadgets.theta_verifications < 0 || gadgets.theta_verifications > 4) {
        throw ConfigError("gadgets.theta_verifications", "must be between 0 and 4");
    }
    if (memory_mb < 64) {
        throw ConfigError("memory_mb", "must be at least 64");
    }
}

std::vector<Scenario> ScenarioConfig::scenarios() const {
    if (!preset.empty()) {
        return preset_scenarios(preset);
    }
    return {{product_label(sequence), qec.str(), sequence, qec}};
}

std::vector<steane::LogicalState> ScenarioConfig::state_grid() const {
    if (alpha.empty() && beta.empty()) {
        return default_state_grid();
    }
    std::vector<double> as = alpha.empty() ? std::vector<double>{0.0} : alpha;
    std::vector<double> bs = beta.empty() ? std::vector<double>{0.0} : beta;
    std::vector<steane::LogicalState> out;
    for (double a : as) {
        for (double b : bs) {
            out.push_back({a, b});
        }
    }
    return out;
}

ScenarioConfig parse_config(const std::string &json_text, ScenarioConfig c) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const nlohmann::json::parse_error &e) {
        size_t line = 1 + static_cast<size_t>(std::count(
                              json_text.begin(),
                              json_text.begin() + static_cast<long>(std::min(e.byte, json_text.size())), '\n'));
        throw ConfigError("line " + std::to_string(line), "malformed JSON");
    }
    if (!j.is_object()) {
        throw ConfigError("config", "top level must be an object");
    }
    for (const auto &[key, v] : j.items()) {
        try {
            if (key == "preset") {
                c.preset = expect_string(v, key);
            } else if (key == "sequence") {
                if (v.is_array()) {
                    std::string s;
                    for (size_t i = 0; i < v.size(); i++) {
                        s += expect_string(v[i], "sequence[" + std::to_string(i) + "]");
                    }
                    c.sequence = parse_sequence(s);
                } else {
                    c.sequence = parse_sequence(expect_string(v, key));
                }
            } else if (key == "qec") {
                c.qec = QecPolicy::parse(expect_string(v, key));
            } else if (key == "metric") {
                c.metric = parse_metric(expect_string(v, key));
            } else if (key == "order") {
                c.order = static_cast<int>(expect_int(v, key));
            } else if (key == "allow_order3") {
                c.allow_order3 = expect_bool(v, key);
            } else if (key == "alpha") {
                c.alpha = expect_numbers(v, key);
            } else if (key == "beta") {
                c.beta = expect_numbers(v, key);
            } else if (key == "oracle") {
                if (v.is_string()) {
                    c.oracle.method = v.get<std::string>();
                } else if (v.is_object()) {
                    for (const auto &[ok, ov] : v.items()) {
                        std::string name = "oracle." + ok;
                        if (ok == "method") {
                            c.oracle.method = expect_string(ov, name);
                        } else if (ok == "samples") {
                            int64_t n = expect_int(ov, name);
                            if (n < 1) {
                                throw ConfigError(name, "must be positive");
                            }
                            c.oracle.samples = static_cast<size_t>(n);
                        } else if (ok == "seed") {
                            int64_t n = expect_int(ov, name);
                            if (n < 0) {
                                throw ConfigError(name, "must be non-negative");
                            }
                            c.oracle.seed = static_cast<uint64_t>(n);
                        } else if (ok == "rates") {
                            c.oracle.rates = expect_numbers(ov, name);
                        } else if (ok == "exact_strata") {
                            c.oracle.exact_strata = static_cast<int>(expect_int(ov, name));
                        } else if (ok == "alpha") {
                            c.oracle.input = c.oracle.input.value_or(steane::LogicalState{});
                            c.oracle.input->alpha = expect_number(ov, name);
                        } else if (ok == "beta") {
                            c.oracle.input = c.oracle.input.value_or(steane::LogicalState{});
                            c.oracle.input->beta = expect_number(ov, name);
                        } else {
                            throw ConfigError(name, "unknown key");
                        }
                    }
                } else {
                    throw ConfigError(key, "expected a method name or an object");
                }
            } else if (key == "format") {
                c.format = parse_format(expect_string(v, key));
            } else if (key == "out") {
                c.out = expect_string(v, key);
            } else if (key == "jobs") {
                c.jobs = static_cast<int>(expect_int(v, key));
            } else if (key == "snap") {
                c.snap = expect_bool(v, key);
            } else if (key == "display_order") {
                c.display_order = static_cast<int>(expect_int(v, key));
            } else if (key == "memory_mb") {
                int64_t n = expect_int(v, key);
                if (n < 0) {
                    throw ConfigError(key, "must be positive");
                }
                c.memory_mb = static_cast<size_t>(n);
            } else if (key == "gadgets") {
                c.gadgets = parse_gadgets(v, c.gadgets);
            } else {
                throw ConfigError(key, "unknown key");
            }
        } catch (const ConfigError &) {
            throw;
        } catch (const std::invalid_argument &e) {
            throw ConfigError(key, e.what());
        }
    }
    return c;
}

std::string config_to_json(const ScenarioConfig &c) {
    Json j;
    if (!c.preset.empty()) {
        j["preset"] = c.preset;
    } else {
        j["sequence"] = sequence_str(c.sequence);
        j["qec"] = c.qec.str();
    }
    j["metric"] = metric_name(c.metric);
    j["order"] = c.order;
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    j["oracle"] = {{"method", c.oracle.method},
                   {"samples", c.oracle.samples},
                   {"seed", c.oracle.seed},
                   {"exact_strata", c.oracle.exact_strata},
                   {"rates", c.oracle.rates}};
    if (c.oracle.input) {
        j["oracle"]["alpha"] = c.oracle.input->alpha;
        j["oracle"]["beta"] = c.oracle.input->beta;
    }
    j["format"] = format_name(c.format);
    j["snap"] = c.snap;
    j["display_order"] = c.display_order;
    j["gadgets"] = gadgets_json(c.gadgets);
    return j.dump(2);
}

void parallel_for(size_t count, int workers, const std::function<void(size_t)> &job) {
    size_t n = std::min(count, static_cast<size_t>(std::max(workers, 1)));
    std::vector<std::exception_ptr> errors(count);
    if (n <= 1) {
        for (size_t i = 0; i < count; i++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (size_t t = 0; t < n; t++) {
            pool.emplace_back([&] {
                for (size_t i = next++; i < count; i = next++) {
                    try {
                        job(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto &t : pool) {
            t.join();
        }
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

RunOutput run_scenarios(const ScenarioConfig &config) {
    config.validate();
    auto t0 = std::chrono::steady_clock::now();
    RunOutput out;
    out.config = config;
    std::vector<Scenario> scenarios = config.scenarios();

    // An expansion job peaks near kJobFootprintMb whatever its ensemble
    // budget, so the memory target also caps how many run at once. The budget
    // itself must not depend on the worker count: it decides where ensembles
    // are split, and with it the summation order.
    const int workers = std::clamp(static_cast<int>(config.memory_mb / kJobFootprintMb), 1, config.jobs);
    SimSettings s;
    s.order = config.order;
    s.gadgets = config.gadgets;
    s.memory_budget = std::max<size_t>(size_t{64} << 20, (config.memory_mb << 20) / 16);
    s.cache = std::make_shared<BlockCache>();

    const auto inputs = standard_tomography_inputs();
    std::vector<CircuitFragment> fragments;
    std::vector<LogicalChannel> channels(scenarios.size());
    for (size_t i = 0; i < scenarios.size(); i++) {
        fragments.push_back(scenario_fragment(scenarios[i].gates, scenarios[i].policy, s));
        LogicalChannel &c = channels[i];
        c.gates = scenarios[i].gates;
        c.policy = scenarios[i].policy;
        c.order = s.order;
        c.num_locations = fragments[i].num_locations();
        c.num_slots = fragments[i].num_slots();
        c.ideal = ideal_logical_unitary(c.gates);
    }
    parallel_for(scenarios.size() * 4, workers, [&](size_t k) {
        size_t i = k / 4, r = k % 4;
        channels[i].runs[r] = run_input(fragments[i], inputs[r], s);
    });

    const auto grid = config.state_grid();
    out.results.resize(scenarios.size());
    parallel_for(scenarios.size(), config.jobs, [&](size_t i) {
        ScenarioResult &r = out.results[i];
        const LogicalChannel &c = channels[i];
        r.scenario = scenarios[i];
        r.num_locations = c.num_locations;
        r.num_slots = c.num_slots;
        r.path_weight_sum = path_weight_sum(fragments[i], config.order);
        if (config.metric != Metric::kGate) {
            r.grid = grid;
            for (const auto &in : grid) {
                r.state.push_back(state_fidelity(c, in));
                r.state_acceptance.push_back(acceptance_at(c, in));
            }
            if (grid.size() >= 3) {
                r.state_fit = fit_angular(grid, r.state);
            } else {
                r.state_fit.max_residual = INFINITY;
            }
        }
        if (config.metric != Metric::kState) {
            r.gate = gate_fidelity(process_matrix_of_unitary(c.ideal), process_matrix(c));
            for (const auto &run : c.runs) {
                r.tomography_acceptance.push_back(run.acceptance);
            }
        }
    });

    if (config.oracle.method != "off") {
        parallel_for(scenarios.size(), workers, [&](size_t i) {
            OracleRequest req;
            req.gates = scenarios[i].gates;
            req.policy = scenarios[i].policy;
            req.gadgets = config.gadgets;
            req.input = config.oracle.input.value_or(grid.front());
            for (double p : config.oracle.rates) {
                req.rates.push_back(ErrorRates::uniform(p));
            }
            req.method = parse_oracle_method(config.oracle.method);
            req.sampling.samples = config.oracle.samples;
            req.sampling.seed = config.oracle.seed;
            req.sampling.exact_strata = config.oracle.exact_strata;
            OracleCheck chk;
            chk.input = req.input;
            chk.result = oracle_state_fidelity(req);
            ErrorPolynomial f = state_fidelity(channels[i], req.input);
            for (size_t k = 0; k < req.rates.size(); k++) {
                chk.polynomial.push_back(f(req.rates[k]));
                chk.residual.push_back(std::abs(chk.result.fidelity[k] - chk.polynomial.back()));
            }
            out.results[i].oracle = std::move(chk);
        });
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::string conventions_hash() {
    return QECSEQ_CONVENTIONS_SHA256;
}

namespace {

// Rows and columns in first-appearance order.
struct Layout {
    std::vector<std::string> rows;
    std::vector<std::string> variants;
    std::map<std::pair<std::string, std::string>, const ScenarioResult *> cell;
};

Layout layout_of(const RunOutput &r) {
    Layout l;
    for (const auto &res : r.results) {
        if (std::find(l.rows.begin(), l.rows.end(), res.scenario.row) == l.rows.end()) {
            l.rows.push_back(res.scenario.row);
        }
        if (std::find(l.variants.begin(), l.variants.end(), res.scenario.variant) == l.variants.end()) {
            l.variants.push_back(res.scenario.variant);
        }
        l.cell[{res.scenario.row, res.scenario.variant}] = &res;
    }
    return l;
}

std::string angle_str(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", a);
    return buf;
}

}  // namespace

std::string render_markdown(const RunOutput &r) {
    const auto &c = r.config;
    std::ostringstream md;
    Layout l = layout_of(r);
    md << "# qecseq report" << (c.preset.empty() ? "" : ": " + c.preset) << "\n\n";
    md << "- truncation order: " << c.order << "\n";
    md << "- gadgets: `" << c.gadgets.describe() << "`\n";
    md << "- conventions sha256: `" << conventions_hash() << "`\n";
    char wall[64];
    std::snprintf(wall, sizeof wall, "%.2f", r.wall_seconds);
    md << "- wall time: " << wall << " s (jobs = " << c.jobs << ")\n";
    if (c.display_order >= 0 && c.display_order < c.order) {
        md << "- cells show terms up to degree " << c.display_order << "; CSV and JSON carry all " << c.order
           << " orders\n";
    }
    md << "\n";
    const bool state = c.metric != Metric::kGate, gate = c.metric != Metric::kState;
    md << "|";
    if (state) {
        md << " State Fidelity |";
        for (const auto &v : l.variants) {
            md << " " << v << " |";
        }
    }
    if (gate) {
        md << " Gate Fidelity |";
        for (const auto &v : l.variants) {
            md << " " << v << " |";
        }
    }
    md << "\n|";
    size_t cols = (state ? 1 + l.variants.size() : 0) + (gate ? 1 + l.variants.size() : 0);
    for (size_t k = 0; k < cols; k++) {
        md << "---|";
    }
    md << "\n";
    for (const auto &row : l.rows) {
        md << "|";
        auto emit = [&](bool is_state) {
            md << " " << row << " |";
            for (const auto &v : l.variants) {
                auto it = l.cell.find({row, v});
                if (it == l.cell.end()) {
                    md << " |";
                    continue;
                }
                const ScenarioResult &res = *it->second;
                std::string cell = is_state ? state_cell(res, c.order, c.display_order, c.snap, PolyStyle::kMarkdown)
                                            : format_polynomial(*res.gate, PolyStyle::kMarkdown, c.display_order, c.snap);
                md << " " << cell << " |";
            }
        };
        if (state) {
            emit(true);
        }
        if (gate) {
            emit(false);
        }
        md << "\n";
    }
    if (state) {
        md << "\ns1 = cos(4α), s2 = cos(2β) sin²(2α); state fidelities fitted over " << r.results.front().grid.size()
           << " (α, β) points.\n";
    }

    md << "\n| Scenario | sequence (time order) | QEC | locations | slots | path-weight sum |\n|---|---|---|---|---|---|\n";
    for (const auto &res : r.results) {
        bool one = (res.path_weight_sum - ErrorPolynomial::one(res.path_weight_sum.order())).is_zero();
        md << "| " << res.scenario.id() << " | " << sequence_str(res.scenario.gates) << " | "
           << res.scenario.policy.str() << " | " << res.num_locations << " | " << res.num_slots << " | "
           << (one ? "1" : format_polynomial(res.path_weight_sum)) << " |\n";
    }

    bool any_oracle = std::any_of(r.results.begin(), r.results.end(), [](const auto &x) { return x.oracle; });
    if (any_oracle) {
        md << "\n| Scenario | oracle | p | oracle fidelity | expansion | residual | std. error |\n"
              "|---|---|---|---|---|---|---|\n";
        for (const auto &res : r.results) {
            if (!res.oracle) {
                continue;
            }
            const auto &o = *res.oracle;
            for (size_t k = 0; k < o.residual.size(); k++) {
                char buf[256];
                std::snprintf(buf, sizeof buf, "| %s | %s | %g | %.12f | %.12f | %.3e | %.3e |\n",
                              res.scenario.id().c_str(), oracle_method_name(o.result.method), c.oracle.rates[k],
                              o.result.fidelity[k], o.polynomial[k], o.residual[k], o.result.standard_error[k]);
                md << buf;
            }
            if (o.residual.size() >= 2 && o.residual[0] > 0) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "| %s | residual ratio | | | | %.4f | |\n", res.scenario.id().c_str(),
                              o.residual[1] / o.residual[0]);
                md << buf;
            }
        }
        for (const auto &res : r.results) {
            if (res.oracle) {
                md << "\nOracle input: α = " << angle_str(res.oracle->input.alpha)
                   << ", β = " << angle_str(res.oracle->input.beta) << "\n";
                break;
            }
        }
    }
    return md.str();
}

std::string render_csv(const RunOutput &r) {
    std::ostringstream csv;
    csv << "scenario,metric,monomial,coefficient\n";
    const auto &c = r.config;
    for (const auto &res : r.results) {
        std::string id = "\"" + res.scenario.id() + "\"";
        if (!res.state.empty()) {
            ErrorPolynomial p = state_summary(res, c.order);
            bool fitted = res.state_fit.matches(kFitTol) && !res.state_fit.coefficients.empty();
            for (int i = 0; i < p.size(); i++) {
                const std::string m = poly_detail::kMonomials[static_cast<size_t>(i)].str();
                csv << id << ",state," << m << "," << format_value(p[i], c.snap) << "\n";
                if (fitted) {
                    const auto &f = res.state_fit.coefficients[static_cast<size_t>(i)];
                    for (int k = 1; k < 3; k++) {
                        if (std::abs(f[k]) > 1e-9) {
                            std::string name = (m == "1" ? "" : m + "*") + (k == 1 ? "s1" : "s2");
                            csv << id << ",state," << name << "," << format_value(f[k], c.snap) << "\n";
                        }
                    }
                }
            }
        }
        if (res.gate) {
            for (int i = 0; i < res.gate->size(); i++) {
                csv << id << ",gate," << poly_detail::kMonomials[static_cast<size_t>(i)].str() << ","
                    << format_value((*res.gate)[i], c.snap) << "\n";
            }
        }
    }
    return csv.str();
}

std::string render_json(const RunOutput &r) {
    const auto &c = r.config;
    Json j;
    j["schema"] = kReportSchema;
    j["version"] = kReportVersion;
    j["conventions_sha256"] = conventions_hash();
    j["engine"] = {{"library_version", QECSEQ_VERSION},
                   {"order", c.order},
                   {"fault_model", "independent per-qubit Pauli after each gate, init and before each measurement"},
                   {"gadgets", gadgets_json(c.gadgets)},
                   {"snap_tolerance", 1e-9}};
    j["config"] = Json::parse(config_to_json(c));
    Json reports = Json::array();
    for (const auto &res : r.results) {
        Json base;
        base["scenario"] = res.scenario.id();
        base["row"] = res.scenario.row;
        base["variant"] = res.scenario.variant;
        base["sequence"] = sequence_str(res.scenario.gates);
        base["qec"] = res.scenario.policy.str();
        base["locations"] = res.num_locations;
        base["slots"] = res.num_slots;
        base["path_weight_sum"] = poly_json(res.path_weight_sum);
        if (!res.state.empty()) {
            Json s = base;
            s["metric"] = "state";
            ErrorPolynomial p = state_summary(res, c.order);
            s["coefficients"] = poly_json(p);
            s["display"] = state_cell(res, c.order, -1, c.snap, PolyStyle::kAscii);
            bool fitted = res.state_fit.matches(kFitTol) && !res.state_fit.coefficients.empty();
            if (fitted) {
                Json ang = Json::object();
                for (int i = 0; i < p.size(); i++) {
                    const auto &f = res.state_fit.coefficients[static_cast<size_t>(i)];
                    ang[poly_detail::kMonomials[static_cast<size_t>(i)].str()] = {
                        {"1", f[0]}, {"s1", f[1]}, {"s2", f[2]}};
                }
                s["angular"] = ang;
                s["angular_fit_residual"] = res.state_fit.max_residual;
            }
            Json grid = Json::array();
            for (size_t k = 0; k < res.grid.size(); k++) {
                grid.push_back({{"alpha", res.grid[k].alpha},
                                {"beta", res.grid[k].beta},
                                {"fidelity", poly_json(res.state[k])},
                                {"acceptance", poly_json(res.state_acceptance[k])}});
            }
            s["grid"] = grid;
            if (res.oracle) {
                const auto &o = *res.oracle;
                Json oj;
                oj["method"] = oracle_method_name(o.result.method);
                oj["alpha"] = o.input.alpha;
                oj["beta"] = o.input.beta;
                oj["rates"] = c.oracle.rates;
                oj["fidelity"] = o.result.fidelity;
                oj["acceptance"] = o.result.acceptance;
                oj["expansion"] = o.polynomial;
                oj["residual"] = o.residual;
                oj["standard_error"] = o.result.standard_error;
                oj["samples"] = o.result.samples;
                s["oracle"] = oj;
            }
            reports.push_back(s);
        }
        if (res.gate) {
            Json g = base;
            g["metric"] = "gate";
            g["coefficients"] = poly_json(*res.gate);
            g["display"] = format_polynomial(*res.gate, PolyStyle::kAscii, -1, c.snap);
            Json acc = Json::array();
            for (const auto &a : res.tomography_acceptance) {
                acc.push_back(poly_json(a));
            }
            g["tomography_acceptance"] = acc;
            reports.push_back(g);
        }
    }
    j["reports"] = reports;
    return j.dump(2) + "\n";
}

std::string render(const RunOutput &r) {
    switch (r.config.format) {
        case OutputFormat::kMarkdown:
            return render_markdown(r);
        case OutputFormat::kCsv:
            return render_csv(r);
        case OutputFormat::kJson:
            return render_json(r);
    }
    return {};
}

bool ReportDiff::ok() const {
    return std::all_of(entries.begin(), entries.end(), [](const DiffEntry &e) { return e.within; });
}

namespace {

using Flat = std::map<std::tuple<std::string, std::string, std::string>, double>;

Flat flatten(const Json &j, const std::string &which) {
    if (!j.is_object() || j.value("schema", "") != kReportSchema) {
        throw ConfigError(which, "not a qecseq report");
    }
    if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != kReportVersion) {
        throw ConfigError(which + ".version", "unsupported report version (expected " +
                                                  std::to_string(kReportVersion) + ")");
    }
    if (!j.contains("reports") || !j["reports"].is_array()) {
        throw ConfigError(which + ".reports", "missing");
    }
    Flat out;
    for (const auto &rep : j["reports"]) {
        std::string sc = rep.value("scenario", ""), metric = rep.value("metric", "");
        if (sc.empty() || metric.empty() || !rep.contains("coefficients") || !rep["coefficients"].is_object()) {
            throw ConfigError(which + ".reports", "entry without scenario, metric or coefficients");
        }
        for (const auto &[m, v] : rep["coefficients"].items()) {
            out[{sc, metric, m}] = field_as<double>(v, which + ".coefficients." + m);
        }
        if (rep.contains("angular")) {
            for (const auto &[m, v] : rep["angular"].items()) {
                for (const char *k : {"s1", "s2"}) {
                    double x = field_as<double>(v.at(k), which + ".angular." + m);
                    if (x != 0) {
                        out[{sc, metric, (m == "1" ? "" : m + "*") + k}] = x;
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace

ReportDiff diff_reports(const std::string &json_a, const std::string &json_b, double tolerance) {
    auto load = [](const std::string &text, const std::string &which) {
        try {
            return Json::parse(text);
        } catch (const nlohmann::json::parse_error &) {
            throw ConfigError(which, "malformed JSON");
        }
    };
    Flat a = flatten(load(json_a, "a"), "a"), b = flatten(load(json_b, "b"), "b");
    // Two single-scenario reports of different scenarios (say no-QEC and
    // noisy-QEC PH) are compared with each other.
    auto ids = [](const Flat &f) {
        std::vector<std::string> out;
        for (const auto &[k, v] : f) {
            if (std::find(out.begin(), out.end(), std::get<0>(k)) == out.end()) {
                out.push_back(std::get<0>(k));
            }
        }
        return out;
    };
    std::vector<std::string> ia = ids(a), ib = ids(b);
    bool disjoint = std::none_of(ia.begin(), ia.end(),
                                 [&](const std::string &x) { return std::find(ib.begin(), ib.end(), x) != ib.end(); });
    if (disjoint && ia.size() == 1 && ib.size() == 1) {
        auto rename = [](const Flat &f, const std::vector<std::string> &from, const std::vector<std::string> &to) {
            Flat out;
            for (const auto &[k, v] : f) {
                size_t i = static_cast<size_t>(std::find(from.begin(), from.end(), std::get<0>(k)) - from.begin());
                out[{to[i], std::get<1>(k), std::get<2>(k)}] = v;
            }
            return out;
        };
        std::vector<std::string> joint;
        for (size_t i = 0; i < ia.size(); i++) {
            joint.push_back(ia[i] + " | " + ib[i]);
        }
        a = rename(a, ia, joint);
        b = rename(b, ib, joint);
    }
    std::map<std::tuple<std::string, std::string, std::string>, std::pair<double, double>> merged;
    for (const auto &[k, v] : a) {
        merged[k].first = v;
    }
    for (const auto &[k, v] : b) {
        merged[k].second = v;
    }
    ReportDiff d;
    for (const auto &[k, v] : merged) {
        if (v.first == v.second) {
            continue;
        }
        DiffEntry e{std::get<0>(k), std::get<1>(k), std::get<2>(k), v.first, v.second,
                    std::abs(v.first - v.second) <= tolerance};
        d.entries.push_back(e);
    }
    return d;
}

std::string render_diff(const ReportDiff &d) {
    std::ostringstream out;
    size_t bad = 0;
    for (const auto &e : d.entries) {
        char buf[512];
        std::snprintf(buf, sizeof buf, "%s %s %s: %.17g -> %.17g (delta %.3g)%s\n", e.scenario.c_str(),
                      e.metric.c_str(), e.monomial.c_str(), e.a, e.b, e.b - e.a, e.within ? "" : "  OUT OF TOLERANCE");
        out << buf;
        bad += e.within ? 0 : 1;
    }
    out << d.entries.size() << " differing coefficient(s), " << bad << " out of tolerance\n";
    return out.str();
}

}  // namespace qecseq
