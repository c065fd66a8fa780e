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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qecseq/expansion.h"
#include "qecseq/scenario.h"

namespace py = pybind11;

namespace {

// Config in, report out; the JSON layer keeps the binding surface small.
std::string run_config(const std::string &config_json, const std::string &format) {
    qecseq::ScenarioConfig c = qecseq::parse_config(config_json);
    c.format = qecseq::parse_format(format);
    c.validate();
    qecseq::RunOutput r;
    {
        py::gil_scoped_release release;
        r = qecseq::run_scenarios(c);
    }
    return qecseq::render(r);
}

}  // namespace

PYBIND11_MODULE(_qecseq, m) {
    m.doc() = "Steane-code Clifford+T sequence fidelities under Pauli noise";
    py::register_exception<qecseq::DegenerateError>(m, "DegenerateError", PyExc_RuntimeError);
    // ConfigError derives from std::invalid_argument, which pybind11 maps to ValueError.
    m.def("run_config", &run_config, py::arg("config_json"), py::arg("format") = "json");
    m.def("preset_names", &qecseq::preset_names);
    m.def("conventions_hash", &qecseq::conventions_hash);
    m.attr("__version__") = QECSEQ_VERSION;
    m.attr("REPORT_VERSION") = qecseq::kReportVersion;
}
