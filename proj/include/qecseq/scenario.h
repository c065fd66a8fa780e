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

#ifndef QECSEQ_SCENARIO_H
#define QECSEQ_SCENARIO_H

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qecseq/gadgets.h"
#include "qecseq/metrics.h"
#include "qecseq/oracle.h"

namespace qecseq {

inline constexpr int kReportVersion = 1;
inline constexpr const char *kReportSchema = "qecseq-report";

/// Rejected configuration; `field` names the offending entry ("order", "gadgets.cat_layout", "line 3", ...).
class ConfigError : public std::invalid_argument {
   public:
    ConfigError(std::string field, const std::string &msg)
        : std::invalid_argument(field + ": " + msg), field_(std::move(field)) {
    }
    const std::string &field() const {
        return field_;
    }

   private:
    std::string field_;
};

enum class Metric { kState, kGate, kBoth };
enum class OutputFormat { kMarkdown, kCsv, kJson };

/// One computed channel: a labelled gate sequence under a QEC policy.
struct Scenario {
    std::string row;      // "PH", "P-QEC-H", ...
    std::string variant;  // column, e.g. "no QEC"
    GateSequence gates;   // time order
    QecPolicy policy;

    std::string id() const {
        return row + "/" + variant;
    }
};

struct OracleConfig {
    std::string method = "off";  // off | auto | exhaustive | density-matrix | monte-carlo
    size_t samples = 1'000'000;
    uint64_t seed = 1;
    /// Fault-count strata enumerated instead of sampled; -1 samples every stratum.
    int exact_strata = -1;
    std::vector<double> rates{1e-3, 2e-3};  // uniform px = py = pz
    /// Input state of the check; defaults to the first state-grid point.
    std::optional<steane::LogicalState> input;
};

struct ScenarioConfig {
    std::string preset;  // empty for a single `run`
    GateSequence sequence;
    QecPolicy qec;
    Metric metric = Metric::kBoth;
    int order = 2;
    bool allow_order3 = false;
    std::vector<double> alpha;  // state grid = alpha x beta; empty means the default grid
    std::vector<double> beta;
    OracleConfig oracle;
    OutputFormat format = OutputFormat::kMarkdown;
    std::string out;  // empty writes to stdout
    /// Upper bound on worker threads; memory_mb may allow fewer.
    int jobs = 1;
    bool snap = true;
    /// Highest degree shown in markdown cells; -1 shows everything.
    int display_order = 1;
    GadgetOptions gadgets;
    /// Total working-memory target for the engine, shared by the workers.
    size_t memory_mb = 2048;

    /// Throws ConfigError.
    void validate() const;
    std::vector<Scenario> scenarios() const;
    std::vector<steane::LogicalState> state_grid() const;
};

/// Parses a JSON config; unknown keys and bad values raise ConfigError.
ScenarioConfig parse_config(const std::string &json_text, ScenarioConfig base = {});
std::string config_to_json(const ScenarioConfig &c);

std::vector<Scenario> preset_scenarios(const std::string &name);
const std::vector<std::string> &preset_names();

const char *metric_name(Metric m);
Metric parse_metric(const std::string &s);
const char *format_name(OutputFormat f);
OutputFormat parse_format(const std::string &s);
GadgetOptions::Recovery parse_recovery(const std::string &s);

/// Result of the optional oracle comparison for one scenario.
struct OracleCheck {
    OracleResult result;
    std::vector<double> polynomial;  // evaluated expansion, per rate
    std::vector<double> residual;    // |oracle - polynomial|
    steane::LogicalState input;
};

struct ScenarioResult {
    Scenario scenario;
    size_t num_locations = 0;
    size_t num_slots = 0;
    ErrorPolynomial path_weight_sum;
    // State metric over the grid.
    std::vector<steane::LogicalState> grid;
    std::vector<ErrorPolynomial> state;
    std::vector<ErrorPolynomial> state_acceptance;
    AngularFit state_fit;
    // Gate metric.
    std::optional<ErrorPolynomial> gate;
    std::vector<ErrorPolynomial> tomography_acceptance;
    std::optional<OracleCheck> oracle;
};

struct RunOutput {
    ScenarioConfig config;
    std::vector<ScenarioResult> results;
    double wall_seconds = 0;
};

/// Runs `count` jobs on up to `workers` threads; job i only writes slot i of its outputs.
void parallel_for(size_t count, int workers, const std::function<void(size_t)> &job);

RunOutput run_scenarios(const ScenarioConfig &config);

std::string conventions_hash();

std::string render_markdown(const RunOutput &r);
std::string render_csv(const RunOutput &r);
std::string render_json(const RunOutput &r);
std::string render(const RunOutput &r);

/// Per-monomial comparison of two JSON reports.
struct DiffEntry {
    std::string scenario;
    std::string metric;
    std::string monomial;
    double a = 0;
    double b = 0;
    bool within = true;
};
struct ReportDiff {
    std::vector<DiffEntry> entries;  // differing coefficients only
    bool ok() const;
};
/// Throws ConfigError on schema mismatch or unreadable input.
ReportDiff diff_reports(const std::string &json_a, const std::string &json_b, double tolerance);
std::string render_diff(const ReportDiff &d);

}  // namespace qecseq

#endif
