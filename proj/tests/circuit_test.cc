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
#include "qecseq/circuit.h"
#include "qecseq/gadgets.h"

namespace qecseq {
namespace {

TEST(Circuit, ValidateRejectsUseOfDeadWires) {
    CircuitFragment f;
    uint32_t a = f.new_wire(), b = f.new_wire();
    f.init(a, false, "t");
    f.gate(gates::CNOT(), {a, b}, false, "t");
    EXPECT_THROW(f.validate(), std::invalid_argument);

    CircuitFragment g;
    uint32_t w = g.new_wire();
    g.init(w, false, "t");
    g.measure(w, MeasureRole::kAncilla, {}, false, "t");
    g.gate(gates::H(), {w}, false, "t");
    EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(Circuit, LocationsAndSlots) {
    CircuitFragment f = transversal_clifford(steane::LogicalGate::kH, true);
    EXPECT_EQ(f.num_locations(), 7u);
    EXPECT_EQ(f.num_slots(), 7u);
    EXPECT_EQ(transversal_clifford(steane::LogicalGate::kH, false).num_slots(), 0u);

    CircuitFragment c;
    uint32_t a = c.new_wire(), b = c.new_wire();
    c.init(a, true, "t");
    c.init(b, true, "t");
    c.gate(gates::CNOT(), {a, b}, true, "t");
    c.set_outputs({a, b});
    EXPECT_EQ(c.num_locations(), 3u);
    EXPECT_EQ(c.num_slots(), 4u);
}

TEST(Circuit, SignaturesIdentifyEqualSubcircuits) {
    CircuitFragment a = shor_state_fragment(4), b = shor_state_fragment(4), c = shor_state_fragment(7);
    EXPECT_EQ(a.signature(0, a.steps().size()), b.signature(0, b.steps().size()));
    EXPECT_NE(a.signature(0, a.steps().size()), c.signature(0, c.steps().size()));
}

TEST(Circuit, TranscriptIsStableJson) {
    CircuitFragment f = qec_cycle_fragment(true);
    std::string t = f.to_json();
    EXPECT_EQ(t, qec_cycle_fragment(true).to_json());
    auto j = nlohmann::json::parse(t);
    ASSERT_TRUE(j.contains("steps"));
    EXPECT_EQ(j["steps"].size(), f.steps().size());
}

TEST(Circuit, SliceKeepsStepsAndRenumbersLocations) {
    CircuitFragment f = build_sequence({steane::LogicalGate::kH, steane::LogicalGate::kP}, QecPolicy::none());
    size_t half = f.steps().size() / 2;
    CircuitFragment a = f.slice(0, half), b = f.slice(half, f.steps().size());
    EXPECT_EQ(a.steps().size() + b.steps().size(), f.steps().size());
    EXPECT_EQ(a.num_slots() + b.num_slots(), f.num_slots());
    EXPECT_EQ(b.steps().front().location, 0);
}

TEST(Circuit, BitLastUse) {
    CircuitFragment f = syndrome_extraction_fragment(steane::ErrorKind::kBitFlip, 0);
    auto last = f.bit_last_use();
    ASSERT_FALSE(f.result_bits().empty());
    EXPECT_EQ(last[f.result_bits()[0]], static_cast<int>(f.steps().size()));
}

}  // namespace
}  // namespace qecseq
