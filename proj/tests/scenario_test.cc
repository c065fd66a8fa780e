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

#include "json.hpp"
#include "qecseq/scenario.h"

namespace qecseq {
namespace {

std::string field_of(const std::string &json) {
    try {
        parse_config(json).validate();
    } catch (const ConfigError &e) {
        return e.field();
    }
    return "";
}

TEST(Config, ParsesEveryField) {
    ScenarioConfig c = parse_config(R"({
        "sequence": ["H", "P"], "qec": "after:1", "metric": "gate", "order": 1,
        "alpha": [0.1, 0.2], "beta": 0.5, "format": "csv", "jobs": 3, "snap": false,
        "oracle": {"method": "monte-carlo", "samples": 10, "seed": 4, "rates": [0.001]},
        "gadgets": {"cat_layout": "fanout", "noisy_recovery": "correct", "theta_verifications": 2}
    })");
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(sequence_str(c.sequence), "HP");
    EXPECT_EQ(c.qec, QecPolicy::explicit_after({1}));
    EXPECT_EQ(c.metric, Metric::kGate);
    EXPECT_EQ(c.alpha.size(), 2u);
    EXPECT_EQ(c.beta, std::vector<double>{0.5});
    EXPECT_EQ(c.state_grid().size(), 2u);
    EXPECT_EQ(c.format, OutputFormat::kCsv);
    EXPECT_EQ(c.oracle.samples, 10u);
    EXPECT_EQ(c.oracle.seed, 4u);
    EXPECT_EQ(c.gadgets.cat_layout, GadgetOptions::CatLayout::kFanout);
    EXPECT_EQ(c.gadgets.noisy_recovery, GadgetOptions::Recovery::kCorrect);
    EXPECT_EQ(c.gadgets.theta_verifications, 2);
    EXPECT_FALSE(c.snap);
}

TEST(Config, DiagnosticsNameTheField) {
    EXPECT_EQ(field_of(R"({"sequence": "H", "order": 7})"), "order");
    EXPECT_EQ(field_of(R"({"sequence": "H", "order": 3})"), "order");
    EXPECT_EQ(field_of(R"({"sequence": "H", "order": 3, "allow_order3": true})"), "");
    EXPECT_EQ(field_of(R"({"sequence": "HQ"})"), "sequence");
    EXPECT_EQ(field_of(R"({"sequence": "H", "qec": "after:2"})"), "qec");
    EXPECT_EQ(field_of(R"({"sequence": "H", "metric": "purity"})"), "metric");
    EXPECT_EQ(field_of(R"({"sequence": "H", "jobs": 0})"), "jobs");
    EXPECT_EQ(field_of(R"({"sequence": "H", "colour": "red"})"), "colour");
    EXPECT_EQ(field_of(R"({"sequence": "H", "gadgets": {"cat_layout": "ring"}})"), "gadgets.cat_layout");
    EXPECT_EQ(field_of(R"({"sequence": "H", "oracle": {"rates": [0.5]}})"), "oracle.rates");
    EXPECT_EQ(field_of(R"({"sequence": "H", "oracle": "psychic"})"), "oracle.method");
    EXPECT_EQ(field_of(R"({"order": 1})"), "sequence");
    EXPECT_EQ(field_of(R"({"preset": "table1", "sequence": "H"})"), "sequence");
    EXPECT_EQ(field_of(R"({"preset": "table9"})"), "preset");
    EXPECT_EQ(field_of(R"({"sequence": 5})"), "sequence");
}

TEST(Config, MalformedJsonReportsTheLine) {
    EXPECT_EQ(field_of("{\n  \"sequence\": \"H\",\n  \"order\": ,\n}"), "line 3");
}

TEST(Config, RoundTripsThroughJson) {
    ScenarioConfig c = parse_config(R"({"sequence": "HPT", "qec": "noisy-every-2", "order": 1})");
    ScenarioConfig d = parse_config(config_to_json(c));
    EXPECT_EQ(config_to_json(c), config_to_json(d));
    EXPECT_EQ(d.qec, QecPolicy::noisy_every(2));
}

TEST(Presets, RowsAndTimeOrder) {
    auto t1 = preset_scenarios("table1");
    ASSERT_EQ(t1.size(), 10u);
    EXPECT_EQ(t1[4].row, "PH");
    EXPECT_EQ(sequence_str(t1[4].gates), "HP");
    EXPECT_EQ(t1[9].row, "P-QEC-H");
    EXPECT_EQ(t1[9].policy, QecPolicy::explicit_after({1, 2}));
    auto t2 = preset_scenarios("table2");
    ASSERT_EQ(t2.size(), 12u);
    EXPECT_EQ(sequence_str(t2[8].gates), "HPHT");
    EXPECT_EQ(preset_scenarios("perfect-qec").size(), 9u);
    EXPECT_THROW(preset_scenarios("nope"), ConfigError);
}

TEST(Parallel, EveryJobRunsOnceAndErrorsPropagate) {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](size_t i) { hits[i]++; });
    EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 100);
    EXPECT_THROW(parallel_for(10, 3, [](size_t i) {
                     if (i == 7) {
                         throw std::runtime_error("x");
                     }
                 }),
                 std::runtime_error);
}

class Reports : public ::testing::Test {
   protected:
    static RunOutput run(const std::string &json) {
        return run_scenarios(parse_config(json));
    }
};

TEST_F(Reports, MarkdownCellForSingleGate) {
    RunOutput r = run(R"({"sequence": "H", "order": 1})");
    std::string md = render_markdown(r);
    EXPECT_NE(md.find("1 \xE2\x88\x92 7px \xE2\x88\x92 7py \xE2\x88\x92 7pz"), std::string::npos) << md;
    EXPECT_NE(md.find("1 \xE2\x88\x92 3px \xE2\x88\x92 5py \xE2\x88\x92 3pz"), std::string::npos) << md;
}

TEST_F(Reports, CsvColumns) {
    RunOutput r = run(R"({"sequence": "H", "order": 1, "metric": "state"})");
    std::string csv = render_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "scenario,metric,monomial,coefficient");
    EXPECT_NE(csv.find("\"H/none\",state,px,-7\n"), std::string::npos) << csv;
    EXPECT_EQ(csv.find(",gate,"), std::string::npos);
}

TEST_F(Reports, JsonEmbedsConventionsAndConfig) {
    RunOutput r = run(R"({"sequence": "T", "order": 1, "metric": "gate"})");
    auto j = nlohmann::json::parse(render_json(r));
    EXPECT_EQ(j["schema"], kReportSchema);
    EXPECT_EQ(j["version"], kReportVersion);
    EXPECT_EQ(j["conventions_sha256"].get<std::string>().size(), 64u);
    EXPECT_EQ(j["config"]["sequence"], "T");
    EXPECT_TRUE(j["engine"].contains("gadgets"));
    EXPECT_NEAR(j["reports"][0]["coefficients"]["pz"].get<double>(), -14.0, 1e-9);
    EXPECT_FALSE(j.dump().find("wall") != std::string::npos);
}

TEST_F(Reports, DiffSemantics) {
    std::string a = render_json(run(R"({"sequence": "HP", "order": 1})"));
    EXPECT_TRUE(diff_reports(a, a, 0).entries.empty());

    // Tolerance: -7 against -7.0000000001.
    auto j = nlohmann::json::parse(a);
    j["reports"][0]["coefficients"]["px"] = j["reports"][0]["coefficients"]["px"].get<double>() - 1e-10;
    ReportDiff small = diff_reports(a, j.dump(), 1e-6);
    EXPECT_EQ(small.entries.size(), 1u);
    EXPECT_TRUE(small.ok());
    EXPECT_FALSE(diff_reports(a, j.dump(), 1e-12).ok());

    std::string noisy = render_json(run(R"({"sequence": "HP", "order": 1, "qec": "noisy-final"})"));
    ReportDiff genuine = diff_reports(a, noisy, 1e-6);
    EXPECT_FALSE(genuine.entries.empty());
    EXPECT_FALSE(genuine.ok());
    EXPECT_NE(render_diff(genuine).find("OUT OF TOLERANCE"), std::string::npos);

    EXPECT_THROW(diff_reports(a, "{\"schema\": \"other\"}", 1e-6), ConfigError);
    EXPECT_THROW(diff_reports(a, "not json", 1e-6), ConfigError);
}

TEST_F(Reports, DeterministicAcrossWorkerCounts) {
    std::string one = render_json(run(R"({"sequence": "HPH", "order": 2, "jobs": 1})"));
    std::string four = render_json(run(R"({"sequence": "HPH", "order": 2, "jobs": 4})"));
    EXPECT_EQ(one, four);
}

TEST_F(Reports, OracleColumns) {
    RunOutput r = run(R"({"sequence": "P", "order": 2, "oracle": "auto", "alpha": 0.3, "beta": 0.2})");
    ASSERT_TRUE(r.results[0].oracle.has_value());
    const auto &o = *r.results[0].oracle;
    EXPECT_EQ(o.result.method, OracleMethod::kExhaustive);
    double ratio = o.residual[1] / o.residual[0];
    EXPECT_GT(ratio, 6);
    EXPECT_LT(ratio, 10);
}

}  // namespace
}  // namespace qecseq
