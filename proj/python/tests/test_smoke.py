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

import pytest

import qecseq


def coeffs(report, metric):
    (res,) = [r for r in report["reports"] if r["metric"] == metric]
    return res["coefficients"]


def test_metadata():
    assert set(qecseq.preset_names()) == {"table1", "table2", "perfect-qec"}
    assert len(qecseq.conventions_hash()) == 64
    assert qecseq.REPORT_VERSION == 1


def test_hadamard_first_order():
    r = qecseq.run("H", order=1)
    assert r["conventions_sha256"] == qecseq.conventions_hash()
    state = coeffs(r, "state")
    assert state["px"] == pytest.approx(-7)
    assert state["py"] == pytest.approx(-7)
    assert state["pz"] == pytest.approx(-7)
    gate = coeffs(r, "gate")
    assert gate["px"] == pytest.approx(-3)
    assert gate["py"] == pytest.approx(-5)
    assert gate["pz"] == pytest.approx(-3)


def test_perfect_qec_cancels_first_order():
    state = coeffs(qecseq.run("P", qec="perfect-final", order=1), "state")
    for m in ("px", "py", "pz"):
        assert abs(state.get(m, 0.0)) < 1e-9


def test_markdown_render():
    text = qecseq.render({"sequence": "H", "order": 1, "metric": "state"})
    assert text.startswith("#") or "|" in text


def test_bad_config_is_value_error():
    with pytest.raises(ValueError, match="order"):
        qecseq.run("H", order=7)
    with pytest.raises(ValueError):
        qecseq.run("H", qec="after:4")
