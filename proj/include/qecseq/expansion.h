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

#ifndef QECSEQ_EXPANSION_H
#define QECSEQ_EXPANSION_H

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "qecseq/circuit.h"
#include "qecseq/polynomial.h"
#include "qecseq/statevec.h"

namespace qecseq {

/// Thrown when a post-selected observable has zero acceptance at order 0.
class DegenerateError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct FaultAssignment {
    int location;
    uint32_t wire;
    Pauli pauli;

    bool operator==(const FaultAssignment &) const = default;
    auto operator<=>(const FaultAssignment &) const = default;
};

/// Paulis placed on (location, wire) slots; at most one per slot.
struct FaultPath {
    std::vector<FaultAssignment> faults;

    size_t order() const {
        return faults.size();
    }
    /// Throws std::invalid_argument if a slot is missing from `f` or repeated.
    void validate(const CircuitFragment &f) const;
    std::string str() const;
};

/// Calls `visit` for every fault path with at most `order` faults over the
/// fragment's slots, in a fixed order (by slot, then X < Y < Z).
void enumerate_fault_paths(const CircuitFragment &f, int order, const std::function<void(const FaultPath &)> &visit);

/// Probability weight of a path with k faults among n slots, truncated.
ErrorPolynomial path_weight(const FaultPath &path, size_t num_slots, int order);

/// Sum of path weights over every path up to `order`; equals 1 by construction
/// of the fault model, so this checks enumeration and weighting together.
ErrorPolynomial path_weight_sum(const CircuitFragment &f, int order);

template <class W>
struct Branch {
    W weight;
    std::vector<Complex> amps;  // over Ensemble::wires, normalized
    std::vector<uint8_t> bits;  // classical register; bits past their last use are zeroed
};

template <class W>
struct Ensemble {
    std::vector<uint32_t> wires;  // position -> wire, position 0 most significant
    std::vector<Branch<W>> branches;

    W total_weight(const W &zero) const {
        W t = zero;
        for (const auto &b : branches) {
            t += b.weight;
        }
        return t;
    }
    WeightedEnsemble<W> weighted() const;
};

using PolyEnsemble = Ensemble<ErrorPolynomial>;
using NumericEnsemble = Ensemble<double>;

/// Results of independent blocks keyed by their signature; shared across runs.
class BlockCache {
   public:
    bool lookup(const std::string &key, PolyEnsemble &out) const;
    void store(const std::string &key, const PolyEnsemble &e);
    bool lookup(const std::string &key, NumericEnsemble &out) const;
    void store(const std::string &key, const NumericEnsemble &e);
    size_t size() const;
    void clear();

   private:
    mutable std::mutex mu_;
    std::map<std::string, PolyEnsemble> poly_;
    std::map<std::string, NumericEnsemble> numeric_;
};

struct ExpandOptions {
    int order = 2;
    /// Ensembles larger than this are processed in pieces.
    size_t memory_budget = size_t{768} << 20;
    /// Treat post-selection steps as no-ops (for weight-completeness checks).
    bool ignore_postselection = false;
    /// When set, only locations for which it returns true receive faults.
    std::function<bool(int)> location_filter;
    std::shared_ptr<BlockCache> cache;
};

struct EngineStats {
    size_t peak_branches = 0;
    size_t splits = 0;
    size_t cache_hits = 0;
};

/// Runs the fragment on `input` (over its input wires), branching over every
/// fault path up to the truncation order. Output branches are over the
/// fragment's output wires, in order.
PolyEnsemble execute_expanded(const CircuitFragment &f, const StateVector &input, const ExpandOptions &opt,
                              EngineStats *stats = nullptr);

/// Runs the fragment with exactly the faults in `path`; weights are branch
/// probabilities (accepted branches only unless post-selection is ignored).
NumericEnsemble execute_with_faults(const CircuitFragment &f, const StateVector &input, const FaultPath &path,
                                    bool ignore_postselection = false, BlockCache *cache = nullptr);

/// Observables of an expanded run.
ErrorPolynomial acceptance(const PolyEnsemble &e, int order);
/// Sum over branches of weight * |<reference|psi>|^2 (not normalized).
ErrorPolynomial overlap_sum(const PolyEnsemble &e, const StateVector &reference, int order);
/// num / acc truncated; throws DegenerateError when acc has no constant term.
ErrorPolynomial truncated_quotient(const ErrorPolynomial &num, const ErrorPolynomial &acc);

enum class ObservableKind { kStateFidelity, kAcceptance, kDecodedEntry };

struct Observable {
    ObservableKind kind = ObservableKind::kAcceptance;
    StateVector reference;  // kStateFidelity
    int row = 0;            // kDecodedEntry
    int col = 0;
    /// Real or imaginary part of the decoded entry.
    bool imaginary = false;
};

/// Expansion of a single observable; post-selected observables are divided by
/// the acceptance polynomial.
ErrorPolynomial expand(const CircuitFragment &f, const StateVector &input, const Observable &obs,
                       const ExpandOptions &opt);

}  // namespace qecseq

#endif
