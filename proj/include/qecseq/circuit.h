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

#ifndef QECSEQ_CIRCUIT_H
#define QECSEQ_CIRCUIT_H

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qecseq/statevec.h"

namespace qecseq {

enum class StepKind : uint8_t {
    kInit,        // fresh |0> on a wire
    kGate,        // unitary on 1 or 2 wires
    kMeasure,     // Z measurement; the wire is released
    kCondGate,    // single-qubit gate applied when a condition on classical bits holds
    kPostSelect,  // discard branches whose classical bits fail the condition
    kBeginBlock,  // start of a sub-circuit acting only on wires it initializes
    kEndBlock,
};

enum class MeasureRole : uint8_t { kSyndrome, kVerification, kData, kAncilla };

const char *step_kind_name(StepKind k);
const char *measure_role_name(MeasureRole r);

/// True when the classical bits, read as an integer (bits[i] is bit i), equal `value`.
struct Condition {
    std::vector<uint32_t> bits;
    uint64_t value = 0;

    bool holds(std::span<const uint8_t> reg) const {
        for (size_t i = 0; i < bits.size(); i++) {
            if (reg[bits[i]] != ((value >> i) & 1u)) {
                return false;
            }
        }
        return true;
    }
};

struct Step {
    StepKind kind = StepKind::kGate;
    std::vector<uint32_t> wires;
    const Unitary *gate = nullptr;
    MeasureRole role = MeasureRole::kAncilla;
    std::vector<uint32_t> xor_into;  // measurement outcome is XORed into these bits
    Condition cond;
    /// Bit i set when wires[i] receives faults at this step.
    uint8_t noise_mask = 0;
    /// Index among the noisy steps, or -1.
    int location = -1;
    std::string tag;  // which gadget emitted the step

    bool noisy() const {
        return noise_mask != 0;
    }
};

/// One fault location: a noisy step and the wires it can corrupt.
struct FaultLocation {
    int id;
    size_t step;
    std::vector<uint32_t> wires;
};

/// An ordered list of steps over abstract wires and classical bits.
///
/// Wires listed in `inputs` are live at the start; every other wire must be
/// initialized before use. Measured wires are released.
class CircuitFragment {
   public:
    uint32_t new_wire() {
        return num_wires_++;
    }
    std::vector<uint32_t> new_wires(size_t count);
    uint32_t new_bit() {
        return num_bits_++;
    }

    void set_inputs(std::vector<uint32_t> w) {
        inputs_ = std::move(w);
    }
    void set_outputs(std::vector<uint32_t> w) {
        outputs_ = std::move(w);
    }
    const std::vector<uint32_t> &inputs() const {
        return inputs_;
    }
    const std::vector<uint32_t> &outputs() const {
        return outputs_;
    }
    /// Classical bits kept until the end and reported with each output branch.
    void set_result_bits(std::vector<uint32_t> b) {
        result_bits_ = std::move(b);
    }
    const std::vector<uint32_t> &result_bits() const {
        return result_bits_;
    }
    size_t num_wires() const {
        return num_wires_;
    }
    size_t num_bits() const {
        return num_bits_;
    }

    // Builders. `noisy` marks every touched wire as a fault slot.
    void init(uint32_t wire, bool noisy, const std::string &tag);
    void gate(const Unitary &u, std::vector<uint32_t> wires, uint8_t noise_mask, const std::string &tag);
    void gate(const Unitary &u, std::vector<uint32_t> wires, bool noisy, const std::string &tag) {
        gate(u, std::move(wires), static_cast<uint8_t>(noisy ? (wires.size() == 2 ? 3 : 1) : 0), tag);
    }
    void measure(uint32_t wire, MeasureRole role, std::vector<uint32_t> xor_into, bool noisy, const std::string &tag);
    void cond_gate(const Unitary &u, uint32_t wire, Condition cond, bool noisy, const std::string &tag);
    void post_select(Condition cond, const std::string &tag);
    void begin_block(const std::string &tag);
    void end_block(const std::string &tag);

    const std::vector<Step> &steps() const {
        return steps_;
    }
    size_t num_locations() const {
        return static_cast<size_t>(num_locations_);
    }
    std::vector<FaultLocation> locations() const;
    /// Total (location, wire) fault slots.
    size_t num_slots() const;

    /// Index of the last step that reads each classical bit (-1 if never read,
    /// steps().size() for result bits).
    std::vector<int> bit_last_use() const;

    /// Checks wire liveness, block isolation and classical-bit ordering; throws on violation.
    void validate() const;

    /// Steps [begin, end) as a fragment on the same wire and bit numbering,
    /// with locations renumbered. Inputs are the wires live at `begin` and
    /// outputs the wires live at `end` (ascending), except that the original
    /// inputs and outputs are kept at the fragment's own ends.
    CircuitFragment slice(size_t begin, size_t end) const;
    /// As above with explicit input order; outputs follow it, with surviving
    /// new wires appended in order of creation.
    CircuitFragment slice(size_t begin, size_t end, std::vector<uint32_t> inputs) const;
    /// Wires live just before step `index`, ascending.
    std::vector<uint32_t> live_wires(size_t index) const;

    /// Stable JSON transcript.
    std::string to_json(int indent = 2) const;
    /// Canonical text of steps [begin, end) with wires and bits renamed by
    /// first appearance; equal signatures mean identical sub-circuits.
    std::string signature(size_t begin, size_t end) const;

   private:
    void push(Step s);

    std::vector<Step> steps_;
    std::vector<uint32_t> inputs_;
    std::vector<uint32_t> outputs_;
    std::vector<uint32_t> result_bits_;
    uint32_t num_wires_ = 0;
    uint32_t num_bits_ = 0;
    int num_locations_ = 0;
};

}  // namespace qecseq

#endif
