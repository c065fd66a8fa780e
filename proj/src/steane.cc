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

#include "qecseq/steane.h"

#include <cmath>
#include <stdexcept>

namespace qecseq::steane {

std::vector<StabilizerGenerator> generators() {
    std::vector<StabilizerGenerator> out;
    for (auto kind : {StabilizerKind::kZ, StabilizerKind::kX}) {
        for (const auto &s : kSupports) {
            out.push_back({kind, s});
        }
    }
    return out;
}

unsigned syndrome_of_qubit(size_t qubit) {
    unsigned s = 0;
    for (size_t k = 0; k < kSupports.size(); k++) {
        for (size_t q : kSupports[k]) {
            if (q == qubit) {
                s |= 1u << k;
            }
        }
    }
    return s;
}

std::optional<Correction> syndrome_lookup(ErrorKind kind, unsigned syndrome) {
    if (syndrome > 7) {
        throw std::invalid_argument("syndrome must be 3 bits");
    }
    if (syndrome == 0) {
        return std::nullopt;
    }
    for (size_t q = 0; q < kBlockSize; q++) {
        if (syndrome_of_qubit(q) == syndrome) {
            return Correction{kind == ErrorKind::kBitFlip ? Pauli::kX : Pauli::kZ, q};
        }
    }
    throw std::logic_error("syndrome table is incomplete");
}

std::array<Complex, 2> LogicalState::amplitudes() const {
    return {Complex(std::cos(alpha)), std::polar(std::sin(alpha), beta)};
}

StateVector LogicalState::bare() const {
    auto a = amplitudes();
    return StateVector(1, {a[0], a[1]});
}

void apply_pauli_string(StateVector &state, std::span<const size_t> qubits, Pauli p) {
    for (size_t q : qubits) {
        kernels::apply_pauli(state.amplitudes(), state.num_qubits(), q, p);
    }
}

std::pair<StateVector, StateVector> logical_basis_states() {
    static const std::pair<StateVector, StateVector> cached = [] {
        // Project |0000000> with prod_g (I + g)/2 over the X-type generators.
        StateVector zero = StateVector::basis(kBlockSize, "0000000");
        for (const auto &s : kSupports) {
            StateVector flipped = zero;
            apply_pauli_string(flipped, s, Pauli::kX);
            for (size_t i = 0; i < zero.dim(); i++) {
                zero[i] = (zero[i] + flipped[i]) / 2.0;
            }
        }
        zero.normalize();
        StateVector one = zero;
        const std::array<size_t, 7> all = {0, 1, 2, 3, 4, 5, 6};
        apply_pauli_string(one, all, Pauli::kX);
        return std::make_pair(zero, one);
    }();
    return cached;
}

StateVector encode_amplitudes(Complex c0, Complex c1) {
    const auto &[zero, one] = logical_basis_states();
    std::vector<Complex> amps(zero.dim());
    for (size_t i = 0; i < amps.size(); i++) {
        amps[i] = c0 * zero[i] + c1 * one[i];
    }
    return StateVector(kBlockSize, std::move(amps));
}

StateVector encode_perfect(const LogicalState &s) {
    auto a = s.amplitudes();
    return encode_amplitudes(a[0], a[1]);
}

const std::vector<EncoderGate> &encoder_circuit() {
    // Logical X representative X0 X5 X6, then one X-type stabilizer per pivot
    // qubit 1, 2, 3 (supports {0,1,4,5}, {0,2,4,6}, {3,4,5,6}).
    static const std::vector<EncoderGate> circuit = {
        {&gates::CNOT(), 0, 5}, {&gates::CNOT(), 0, 6}, {&gates::H(), 1, 0},    {&gates::CNOT(), 1, 0},
        {&gates::CNOT(), 1, 4}, {&gates::CNOT(), 1, 5}, {&gates::H(), 2, 0},    {&gates::CNOT(), 2, 0},
        {&gates::CNOT(), 2, 4}, {&gates::CNOT(), 2, 6}, {&gates::H(), 3, 0},    {&gates::CNOT(), 3, 4},
        {&gates::CNOT(), 3, 5}, {&gates::CNOT(), 3, 6},
    };
    return circuit;
}

void apply_decoder(std::span<Complex> amps, size_t n, std::span<const size_t> data) {
    if (data.size() != kBlockSize) {
        throw std::invalid_argument("decoder needs exactly 7 data qubits");
    }
    const auto &circuit = encoder_circuit();
    for (auto it = circuit.rbegin(); it != circuit.rend(); ++it) {
        if (it->gate->num_qubits() == 1) {
            kernels::apply_1q(amps, n, data[it->a], *it->gate);
        } else {
            kernels::apply_2q(amps, n, data[it->a], data[it->b], *it->gate);
        }
    }
}

ComplexMatrix decode_ideal(const StateVector &state, std::span<const size_t> data) {
    StateVector s = state;
    apply_decoder(s.amplitudes(), s.num_qubits(), data);
    const size_t keep[1] = {data[0]};
    return reduced_density(s, keep);
}

ComplexMatrix decode_ideal(const WeightedEnsemble<double> &ensemble, std::span<const size_t> data) {
    WeightedEnsemble<double> decoded = ensemble;
    for (auto &m : decoded.members) {
        apply_decoder(m.state.amplitudes(), m.state.num_qubits(), data);
    }
    const size_t keep[1] = {data[0]};
    return partial_trace(decoded, keep);
}

PolyMatrix decode_ideal(const WeightedEnsemble<ErrorPolynomial> &ensemble, std::span<const size_t> data) {
    WeightedEnsemble<ErrorPolynomial> decoded = ensemble;
    for (auto &m : decoded.members) {
        apply_decoder(m.state.amplitudes(), m.state.num_qubits(), data);
    }
    const size_t keep[1] = {data[0]};
    return partial_trace(decoded, keep);
}

char gate_char(LogicalGate g) {
    switch (g) {
        case LogicalGate::kH:
            return 'H';
        case LogicalGate::kP:
            return 'P';
        case LogicalGate::kT:
            return 'T';
    }
    return '?';
}

LogicalGate gate_from_char(char c) {
    switch (c) {
        case 'H':
            return LogicalGate::kH;
        case 'P':
            return LogicalGate::kP;
        case 'T':
            return LogicalGate::kT;
        default:
            throw std::invalid_argument(std::string("unsupported logical gate '") + c + "'");
    }
}

const Unitary &logical_unitary(LogicalGate g) {
    switch (g) {
        case LogicalGate::kH:
            return gates::H();
        case LogicalGate::kP:
            return gates::P();
        case LogicalGate::kT:
            return gates::T();
    }
    throw std::invalid_argument("bad gate");
}

const Unitary &transversal_unitary(LogicalGate g) {
    switch (g) {
        case LogicalGate::kH:
            return gates::H();
        case LogicalGate::kP:
            return gates::Pdag();
        case LogicalGate::kT:
            break;
    }
    throw std::invalid_argument("T is not transversal on the Steane code");
}

ReadoutClass classify_readout(unsigned bits) {
    ReadoutClass c{0, 0};
    for (size_t k = 0; k < kSupports.size(); k++) {
        unsigned p = 0;
        for (size_t q : kSupports[k]) {
            p ^= (bits >> q) & 1u;
        }
        c.checks |= p << k;
    }
    for (size_t q = 0; q < kBlockSize; q++) {
        c.parity ^= static_cast<int>((bits >> q) & 1u);
    }
    return c;
}

}  // namespace qecseq::steane
