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

#ifndef QECSEQ_TEST_UTIL_H
#define QECSEQ_TEST_UTIL_H

#include "qecseq/expansion.h"
#include "qecseq/gadgets.h"
#include "qecseq/steane.h"

namespace qecseq::testing {

/// Encoded ideal output of `gates` on `in`, computed from the 2x2 logical matrices.
inline StateVector ideal_encoded(const GateSequence &gates, const steane::LogicalState &in) {
    auto a = in.amplitudes();
    Complex c0 = a[0], c1 = a[1];
    for (auto g : gates) {
        const Unitary &u = steane::logical_unitary(g);
        Complex n0 = u.at(0, 0) * c0 + u.at(0, 1) * c1;
        Complex n1 = u.at(1, 0) * c0 + u.at(1, 1) * c1;
        c0 = n0;
        c1 = n1;
    }
    return steane::encode_amplitudes(c0, c1);
}

struct Accepted {
    double weight = 0;
    double fidelity = 0;
};

/// Acceptance and normalized overlap of a numeric ensemble with `ref`.
inline Accepted accepted_fidelity(const NumericEnsemble &e, const StateVector &ref) {
    Accepted r;
    double overlap = 0;
    for (const auto &b : e.branches) {
        Complex ip = 0;
        for (size_t i = 0; i < b.amps.size(); i++) {
            ip += std::conj(ref[i]) * b.amps[i];
        }
        r.weight += b.weight;
        overlap += b.weight * std::norm(ip);
    }
    r.fidelity = r.weight > 0 ? overlap / r.weight : 0;
    return r;
}

}  // namespace qecseq::testing

#endif
