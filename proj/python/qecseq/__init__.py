# Copyright 2026 The qecseq Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Fidelity polynomials of encoded Steane-code gate sequences."""

import json

from ._qecseq import (
    REPORT_VERSION,
    DegenerateError,
    __version__,
    conventions_hash,
    preset_names,
    run_config,
)

__all__ = [
    "REPORT_VERSION",
    "DegenerateError",
    "__version__",
    "conventions_hash",
    "preset_names",
    "run",
    "preset",
    "render",
]


def _report(config):
    return json.loads(run_config(json.dumps(config), "json"))


def run(sequence, qec="none", order=2, metric="both", **extra):
    """Compute one sequence (time order, e.g. "HPT"); returns the JSON report as a dict.

    Extra keyword arguments are config keys (alpha, beta, oracle, gadgets, ...).
    """
    config = {"sequence": sequence, "qec": qec, "order": order, "metric": metric}
    config.update(extra)
    return _report(config)


def preset(name, order=2, **extra):
    """Compute a built-in table (see preset_names())."""
    config = {"preset": name, "order": order}
    config.update(extra)
    return _report(config)


def render(config, format="markdown"):
    """Render a config dict as markdown, csv or json text."""
    return run_config(json.dumps(config), format)
