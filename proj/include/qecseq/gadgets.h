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

#ifndef QECSEQ_GADGETS_H
#define QECSEQ_GADGETS_H

#include <string>
#include <vector>

#include "qecseq/circuit.h"
#include "qecseq/steane.h"

namespace qecseq {

/// Circuit reconstruction choices. Every field is reported with results; see
/// docs/conventions.md for what each one changes.
struct GadgetOptions {
    enum class Recovery {
        kCorrect,     // apply the looked-up single-qubit correction
        kPostselect,  // keep only the trivial-syndrome branch
    };
    enum class CatLayout {
        kFanout,  // CNOTs from the first cat qubit to each other one
        kChain,   // CNOT from qubit k to qubit k+1
    };
    enum class PhaseExtraction {
        kCatControl,    // cat controls CNOTs onto data, then X-basis readout of the cat
        kDataHadamard,  // H on data, data controls CNOTs onto a Shor state, H on data
    };

    Recovery noisy_recovery = Recovery::kPostselect;
    Recovery perfect_recovery = Recovery::kPostselect;
    Recovery init_recovery = Recovery::kCorrect;
    CatLayout cat_layout = CatLayout::kChain;
    PhaseExtraction phase_extraction = PhaseExtraction::kCatControl;
    /// Faults on the ancillas (cats, verification qubits) used while preparing |Theta>.
    bool theta_ancilla_noise = false;
    /// Faults on the correction gates triggered by syndromes.
    bool correction_noise = false;
    /// Parity verifications of the 7-qubit cat.
    int theta_verifications = 1;
    /// Keep odd-class readouts of the T gadget and fix them with a logical PX.
    bool t_odd_correction = false;

    std::string describe() const;
    bool operator==(const GadgetOptions &) const = default;
};

/// Tag prefixes used on emitted steps.
namespace tags {
inline constexpr const char *kGate = "gate";
inline constexpr const char *kQec = "qec";
inline constexpr const char *kInit = "zero_init";
inline constexpr const char *kTheta = "theta";
inline constexpr const char *kTGadget = "t_gadget";
}  // namespace tags

// Appenders: emit steps into an existing fragment on the given wires.

/// Cat state on `width` fresh wires with verification; with `shor` the cat is
/// rotated into the even-parity Shor form. Returns the cat wires.
std::vector<uint32_t> append_cat(CircuitFragment &f, size_t width, bool shor, bool noisy, int verifications,
                                 const GadgetOptions &opt, const std::string &tag);
/// Measures generator `index` of the given kind, XORing the result into `bit`.
void append_syndrome_extraction(CircuitFragment &f, const std::vector<uint32_t> &data, steane::ErrorKind kind,
                                size_t index, uint32_t bit, bool noisy, bool ancilla_noisy, const GadgetOptions &opt,
                                const std::string &tag);
void append_qec_cycle(CircuitFragment &f, const std::vector<uint32_t> &data, bool noisy, const GadgetOptions &opt);
/// Returns the 7 new block wires holding |0_L>.
std::vector<uint32_t> append_logical_zero(CircuitFragment &f, bool noisy, bool ancilla_noisy,
                                          const GadgetOptions &opt, const std::string &tag);
/// Returns the 7 new block wires holding |Theta>. Emitted as an independent block.
std::vector<uint32_t> append_theta(CircuitFragment &f, bool noisy, const GadgetOptions &opt);
/// Consumes `data`; returns the wires now carrying T applied to it.
std::vector<uint32_t> append_t_gate(CircuitFragment &f, const std::vector<uint32_t> &data, bool noisy,
                                    const GadgetOptions &opt);
void append_transversal(CircuitFragment &f, const std::vector<uint32_t> &data, steane::LogicalGate g, bool noisy);

// Standalone fragments.

CircuitFragment shor_state_fragment(size_t width, const GadgetOptions &opt = {});
CircuitFragment syndrome_extraction_fragment(steane::ErrorKind kind, size_t index, const GadgetOptions &opt = {});
CircuitFragment qec_cycle_fragment(bool noisy, const GadgetOptions &opt = {});
CircuitFragment logical_zero_init_fragment(bool noisy, const GadgetOptions &opt = {});
CircuitFragment theta_state_fragment(bool noisy, const GadgetOptions &opt = {});
CircuitFragment t_gate_fragment(bool noisy, const GadgetOptions &opt = {});
CircuitFragment transversal_clifford(steane::LogicalGate g, bool noisy = true);

/// Where QEC cycles go in a gate sequence.
struct QecPolicy {
    enum class Mode { kNone, kPerfectFinal, kNoisyFinal, kNoisyAfterEach, kNoisyEveryK, kExplicit };
    Mode mode = Mode::kNone;
    int k = 1;
    /// 1-based gate indices followed by a noisy cycle (kExplicit).
    std::vector<int> after;

    static QecPolicy none() {
        return {};
    }
    static QecPolicy perfect_final() {
        return {Mode::kPerfectFinal, 1, {}};
    }
    static QecPolicy noisy_final() {
        return {Mode::kNoisyFinal, 1, {}};
    }
    static QecPolicy noisy_after_each() {
        return {Mode::kNoisyAfterEach, 1, {}};
    }
    static QecPolicy noisy_every(int k) {
        return {Mode::kNoisyEveryK, k, {}};
    }
    static QecPolicy explicit_after(std::vector<int> after) {
        return {Mode::kExplicit, 1, std::move(after)};
    }

    /// Parses "none", "perfect-final", "noisy-final", "noisy-after-each",
    /// "noisy-every-K", "after:1,2".
    static QecPolicy parse(const std::string &text);
    std::string str() const;
    /// For each gate (0-based), 0 = nothing, 1 = noisy cycle, 2 = perfect cycle after it.
    std::vector<int> placements(size_t num_gates) const;
    bool operator==(const QecPolicy &) const = default;
};

/// Gates in time order (first applied first).
using GateSequence = std::vector<steane::LogicalGate>;
GateSequence parse_sequence(const std::string &text);
/// Time-ordered sequence as letters, e.g. "HP" for H then P.
std::string sequence_str(const GateSequence &seq);
/// Operator-product label, e.g. "PH" for H then P.
std::string product_label(const GateSequence &seq);

/// Full experiment on a perfectly encoded input block (fragment inputs).
CircuitFragment build_sequence(const GateSequence &gates, const QecPolicy &policy, const GadgetOptions &opt = {});

}  // namespace qecseq

#endif
