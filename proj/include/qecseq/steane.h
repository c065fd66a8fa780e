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

#ifndef QECSEQ_STEANE_H
#define QECSEQ_STEANE_H

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qecseq/statevec.h"

namespace qecseq::steane {

inline constexpr size_t kBlockSize = 7;

/// Shared supports of the X-type and Z-type generators, in syndrome bit order.
inline constexpr std::array<std::array<size_t, 4>, 3> kSupports = {{
    {3, 4, 5, 6},
    {1, 2, 5, 6},
    {0, 2, 4, 6},
}};

enum class StabilizerKind { kX, kZ };

struct StabilizerGenerator {
    StabilizerKind kind;
    std::array<size_t, 4> support;
};

/// Z-type generators 0..2 followed by X-type generators 0..2.
std::vector<StabilizerGenerator> generators();

/// Which syndrome a measurement produces. Bit-flip syndromes come from the
/// Z-type generators and call for X corrections; phase syndromes come from the
/// X-type generators and call for Z corrections.
enum class ErrorKind { kBitFlip, kPhase };

struct Correction {
    Pauli pauli;
    size_t qubit;
};

/// Syndrome (bit k = generator k) raised by a single error on `qubit`.
unsigned syndrome_of_qubit(size_t qubit);
std::optional<Correction> syndrome_lookup(ErrorKind kind, unsigned syndrome);

/// cos(alpha)|0> + e^{i beta} sin(alpha)|1>.
struct LogicalState {
    double alpha = 0;
    double beta = 0;

    std::array<Complex, 2> amplitudes() const;
    StateVector bare() const;
};

std::pair<StateVector, StateVector> logical_basis_states();
/// c0|0_L> + c1|1_L>, built from the codespace projector (no circuit).
StateVector encode_amplitudes(Complex c0, Complex c1);
StateVector encode_perfect(const LogicalState &s);

/// Unitary encoder with the logical input on qubit 0 and |0> on qubits 1..6.
struct EncoderGate {
    const Unitary *gate;
    size_t a;
    size_t b;  // second target of CNOT, unused for H
};
const std::vector<EncoderGate> &encoder_circuit();

/// Applies the inverse encoder to the block `data` of an n-qubit register.
void apply_decoder(std::span<Complex> amps, size_t n, std::span<const size_t> data);
ComplexMatrix decode_ideal(const StateVector &state, std::span<const size_t> data);
ComplexMatrix decode_ideal(const WeightedEnsemble<double> &ensemble, std::span<const size_t> data);
PolyMatrix decode_ideal(const WeightedEnsemble<ErrorPolynomial> &ensemble, std::span<const size_t> data);

enum class LogicalGate { kH, kP, kT };
char gate_char(LogicalGate g);
LogicalGate gate_from_char(char c);
/// The ideal single-qubit action.
const Unitary &logical_unitary(LogicalGate g);
/// The bitwise physical gate realizing a logical Clifford (H -> H, P -> P^dag).
const Unitary &transversal_unitary(LogicalGate g);

/// Classification of a 7-bit Z-basis readout of the block (bit q = qubit q).
struct ReadoutClass {
    unsigned checks;  // Hamming checks, 0 for a codeword
    int parity;       // 0 for the |0_L> class
};
ReadoutClass classify_readout(unsigned bits);

/// Applies a Pauli string given per block qubit.
void apply_pauli_string(StateVector &state, std::span<const size_t> qubits, Pauli p);

}  // namespace qecseq::steane

#endif
