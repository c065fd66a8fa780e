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

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qecseq/expansion.h"
#include "qecseq/scenario.h"

namespace {

constexpr int kExitInvalid = 1;
constexpr int kExitDegenerate = 2;
constexpr int kExitDiff = 3;

std::string read_file(const std::string &path, const std::string &what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw qecseq::ConfigError(what, "cannot read '" + path + "'");
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_output(const std::string &path, const std::string &text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw qecseq::ConfigError("out", "cannot write '" + path + "'");
    }
    out << text;
}

// Raw flag values; only the ones given on the command line override the file.
struct Flags {
    std::string config, sequence, qec, metric, oracle, format, out, transcript;
    int order = 0, jobs = 0, display_order = 0;
    size_t samples = 0, memory_mb = 0;
    uint64_t seed = 0;
    std::vector<double> alpha, beta, rates;
    bool allow_order3 = false, no_snap = false;
    std::string noisy_recovery, perfect_recovery, cat_layout;
};

void add_run_flags(CLI::App *cmd, Flags &f, bool single) {
    cmd->add_option("--config", f.config, "JSON config file; flags override its values");
    if (single) {
        cmd->add_option("--sequence", f.sequence, "gates in time order, e.g. HPT");
        cmd->add_option("--qec", f.qec,
                        "none | perfect-final | noisy-final | noisy-after-each | noisy-every-K | after:i,j");
        cmd->add_option("--transcript", f.transcript, "also write the circuit transcript (JSON) to this file");
    }
    cmd->add_option("--order", f.order, "truncation order (1-3)");
    cmd->add_flag("--allow-order3", f.allow_order3, "permit order 3");
    cmd->add_option("--metric", f.metric, "state | gate | both");
    cmd->add_option("--alpha", f.alpha, "state angles alpha (radians)")->delimiter(',');
    cmd->add_option("--beta", f.beta, "state angles beta (radians)")->delimiter(',');
    cmd->add_option("--oracle", f.oracle, "off | auto | exhaustive | density-matrix | monte-carlo");
    cmd->add_option("--samples", f.samples, "Monte Carlo samples");
    cmd->add_option("--seed", f.seed, "Monte Carlo seed");
    cmd->add_option("--rates", f.rates, "uniform oracle rates")->delimiter(',');
    cmd->add_option("--format", f.format, "markdown | csv | json");
    cmd->add_option("--out", f.out, "output file (default stdout)");
    cmd->add_option("--jobs", f.jobs, "worker threads");
    cmd->add_option("--display-order", f.display_order, "highest degree in markdown cells (-1 for all)");
    cmd->add_flag("--no-snap", f.no_snap, "print raw coefficients");
    cmd->add_option("--memory-mb", f.memory_mb, "engine memory target");
    cmd->add_option("--noisy-recovery", f.noisy_recovery, "correct | postselect");
    cmd->add_option("--perfect-recovery", f.perfect_recovery, "correct | postselect");
    cmd->add_option("--cat-layout", f.cat_layout, "chain | fanout");
}

qecseq::ScenarioConfig build_config(CLI::App *cmd, const Flags &f, const std::string &preset) {
    using qecseq::ConfigError;
    qecseq::ScenarioConfig c;
    if (!f.config.empty()) {
        c = qecseq::parse_config(read_file(f.config, "config"));
    }
    auto given = [&](const char *name) {
        const CLI::Option *o = cmd->get_option_no_throw(name);
        return o != nullptr && o->count() > 0;
    };
    auto wrap = [](const char *field, auto &&fn) {
        try {
            fn();
        } catch (const ConfigError &) {
            throw;
        } catch (const std::invalid_argument &e) {
            throw ConfigError(field, e.what());
        }
    };
    if (!preset.empty()) {
        c.preset = preset;
    }
    if (given("--sequence")) {
        wrap("sequence", [&] { c.sequence = qecseq::parse_sequence(f.sequence); });
    }
    if (given("--qec")) {
        wrap("qec", [&] { c.qec = qecseq::QecPolicy::parse(f.qec); });
    }
    if (given("--order")) {
        c.order = f.order;
    }
    if (f.allow_order3) {
        c.allow_order3 = true;
    }
    if (given("--metric")) {
        wrap("metric", [&] { c.metric = qecseq::parse_metric(f.metric); });
    }
    if (given("--alpha")) {
        c.alpha = f.alpha;
    }
    if (given("--beta")) {
        c.beta = f.beta;
    }
    if (given("--oracle")) {
        c.oracle.method = f.oracle;
    }
    if (given("--samples")) {
        c.oracle.samples = f.samples;
    }
    if (given("--seed")) {
        c.oracle.seed = f.seed;
    }
    if (given("--rates")) {
        c.oracle.rates = f.rates;
    }
    if (given("--format")) {
        wrap("format", [&] { c.format = qecseq::parse_format(f.format); });
    }
    if (given("--out")) {
        c.out = f.out;
    }
    if (given("--jobs")) {
        c.jobs = f.jobs;
    }
    if (given("--display-order")) {
        c.display_order = f.display_order;
    }
    if (f.no_snap) {
        c.snap = false;
    }
    if (given("--memory-mb")) {
        c.memory_mb = f.memory_mb;
    }
    if (given("--noisy-recovery")) {
        wrap("gadgets.noisy_recovery", [&] { c.gadgets.noisy_recovery = qecseq::parse_recovery(f.noisy_recovery); });
    }
    if (given("--perfect-recovery")) {
        wrap("gadgets.perfect_recovery",
             [&] { c.gadgets.perfect_recovery = qecseq::parse_recovery(f.perfect_recovery); });
    }
    if (given("--cat-layout")) {
        if (f.cat_layout == "chain") {
            c.gadgets.cat_layout = qecseq::GadgetOptions::CatLayout::kChain;
        } else if (f.cat_layout == "fanout") {
            c.gadgets.cat_layout = qecseq::GadgetOptions::CatLayout::kFanout;
        } else {
            throw ConfigError("gadgets.cat_layout", "expected chain or fanout");
        }
    }
    if (given("--seed") && c.oracle.method != "monte-carlo") {
        throw ConfigError("seed", "only used by the monte-carlo oracle");
    }
    c.validate();
    return c;
}

int run(CLI::App *cmd, const Flags &f, const std::string &preset) {
    qecseq::ScenarioConfig c = build_config(cmd, f, preset);
    if (!f.transcript.empty()) {
        qecseq::CircuitFragment frag = qecseq::build_sequence(c.sequence, c.qec, c.gadgets);
        write_output(f.transcript, frag.to_json() + "\n");
    }
    qecseq::RunOutput r = qecseq::run_scenarios(c);
    write_output(c.out, qecseq::render(r));
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Steane-code Clifford+T sequence fidelities under Pauli noise"};
    app.require_subcommand(1);
    Flags run_flags, preset_flags;
    std::string preset_name, diff_a, diff_b, diff_out;
    double tolerance = 1e-9;

    CLI::App *run_cmd = app.add_subcommand("run", "compute one sequence");
    add_run_flags(run_cmd, run_flags, true);

    CLI::App *preset_cmd = app.add_subcommand("preset", "compute a built-in table");
    preset_cmd->add_option("name", preset_name, "table1 | table2 | perfect-qec")->required();
    add_run_flags(preset_cmd, preset_flags, false);

    CLI::App *diff_cmd = app.add_subcommand("diff", "compare two JSON reports");
    diff_cmd->add_option("a", diff_a)->required();
    diff_cmd->add_option("b", diff_b)->required();
    diff_cmd->add_option("--tolerance", tolerance, "absolute tolerance per coefficient");
    diff_cmd->add_option("--out", diff_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        if (*run_cmd) {
            return run(run_cmd, run_flags, "");
        }
        if (*preset_cmd) {
            return run(preset_cmd, preset_flags, preset_name);
        }
        qecseq::ReportDiff d = qecseq::diff_reports(read_file(diff_a, "a"), read_file(diff_b, "b"), tolerance);
        write_output(diff_out, qecseq::render_diff(d));
        return d.ok() ? 0 : kExitDiff;
    } catch (const qecseq::DegenerateError &e) {
        std::cerr << "degenerate scenario: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const std::invalid_argument &e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
}
