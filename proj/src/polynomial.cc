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

#include "qecseq/polynomial.h"

#include <cctype>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <vector>

namespace qecseq {

namespace {

const char *kVarNames[3] = {"px", "py", "pz"};

std::string trim(const std::string &s) {
    size_t b = s.find_first_not_of(" \t");
    size_t e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

// Replaces the markdown minus sign with ASCII.
std::string ascii_minus(const std::string &s) {
    std::string out;
    const std::string minus = "\xE2\x88\x92";
    for (size_t i = 0; i < s.size();) {
        if (s.compare(i, minus.size(), minus) == 0) {
            out += '-';
            i += minus.size();
        } else {
            out += s[i++];
        }
    }
    return out;
}

double parse_number(const std::string &text) {
    std::string t = trim(text);
    size_t slash = t.find('/');
    if (slash != std::string::npos) {
        return std::stod(t.substr(0, slash)) / std::stod(t.substr(slash + 1));
    }
    return std::stod(t);
}

}  // namespace

std::string Monomial::str() const {
    if (degree() == 0) {
        return "1";
    }
    std::string out;
    int exps[3] = {x, y, z};
    for (int v = 0; v < 3; v++) {
        if (exps[v] == 0) {
            continue;
        }
        if (!out.empty()) {
            out += '*';
        }
        out += kVarNames[v];
        if (exps[v] > 1) {
            out += '^' + std::to_string(exps[v]);
        }
    }
    return out;
}

Monomial Monomial::parse(const std::string &text) {
    std::string t = trim(text);
    Monomial m;
    if (t == "1" || t.empty()) {
        return m;
    }
    std::stringstream ss(t);
    std::string factor;
    while (std::getline(ss, factor, '*')) {
        factor = trim(factor);
        int power = 1;
        size_t caret = factor.find('^');
        if (caret != std::string::npos) {
            power = std::stoi(factor.substr(caret + 1));
            factor = factor.substr(0, caret);
        }
        if (factor == "px") {
            m.x += power;
        } else if (factor == "py") {
            m.y += power;
        } else if (factor == "pz") {
            m.z += power;
        } else {
            throw std::invalid_argument("unknown monomial factor '" + factor + "'");
        }
    }
    return m;
}

void ErrorRates::validate() const {
    for (double p : {px, py, pz}) {
        if (!(p >= 0 && p <= 1)) {
            throw std::invalid_argument("error rates must lie in [0, 1]");
        }
    }
    if (total() > 1) {
        throw std::invalid_argument("px + py + pz must not exceed 1");
    }
}

ErrorPolynomial real_part(const ComplexPolynomial &p) {
    ErrorPolynomial r(p.order());
    for (int i = 0; i < p.size(); i++) {
        r[i] = p[i].real();
    }
    return r;
}

ErrorPolynomial imag_part(const ComplexPolynomial &p) {
    ErrorPolynomial r(p.order());
    for (int i = 0; i < p.size(); i++) {
        r[i] = p[i].imag();
    }
    return r;
}

ComplexPolynomial to_complex(const ErrorPolynomial &p) {
    ComplexPolynomial r(p.order());
    for (int i = 0; i < p.size(); i++) {
        r[i] = p[i];
    }
    return r;
}

std::string format_coefficient(double value, double tol) {
    double rounded = std::round(value);
    if (std::abs(value - rounded) <= tol) {
        return std::to_string(static_cast<long long>(rounded));
    }
    for (long long den = 2; den <= 64; den++) {
        double num = std::round(value * static_cast<double>(den));
        if (std::abs(value - num / static_cast<double>(den)) <= tol) {
            long long n = static_cast<long long>(num);
            if (std::gcd(n < 0 ? -n : n, den) == 1) {
                return std::to_string(n) + "/" + std::to_string(den);
            }
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

std::string format_polynomial(const ErrorPolynomial &p, PolyStyle style, int max_degree, bool snap) {
    const std::string minus = style == PolyStyle::kMarkdown ? "\xE2\x88\x92" : "-";
    std::string out;
    int top = max_degree < 0 ? p.order() : std::min(max_degree, p.order());
    for (int i = 0; i < poly_detail::count_up_to(top); i++) {
        double c = p[i];
        const Monomial &m = poly_detail::kMonomials[i];
        std::string mag;
        if (snap) {
            mag = format_coefficient(std::abs(c));
            if (mag == "0") {
                continue;
            }
        } else {
            if (c == 0) {
                continue;
            }
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", std::abs(c));
            mag = buf;
        }
        bool negative = c < 0;
        std::string term;
        if (m.degree() == 0) {
            term = mag;
        } else if (mag == "1") {
            term = m.str();
        } else if (mag.find('/') != std::string::npos || mag.find('e') != std::string::npos) {
            term = "(" + mag + ")" + m.str();
        } else {
            term = mag + m.str();
        }
        if (out.empty()) {
            out = negative ? minus + term : term;
        } else {
            out += (negative ? " " + minus + " " : " + ") + term;
        }
    }
    return out.empty() ? "0" : out;
}

ErrorPolynomial parse_polynomial(const std::string &text, int order) {
    std::string t = ascii_minus(text);
    ErrorPolynomial p(order);
    // Split into signed terms at top-level + and - (ignoring those inside parentheses or exponents).
    std::vector<std::string> terms;
    std::string current;
    int depth = 0;
    for (size_t i = 0; i < t.size(); i++) {
        char c = t[i];
        if (c == '(') {
            depth++;
        } else if (c == ')') {
            depth--;
        }
        bool exponent_sign = i > 0 && (t[i - 1] == 'e' || t[i - 1] == 'E') && i >= 2 &&
                             std::isdigit(static_cast<unsigned char>(t[i - 2]));
        if ((c == '+' || c == '-') && depth == 0 && !exponent_sign && !trim(current).empty()) {
            terms.push_back(current);
            current.clear();
        }
        current += c;
    }
    if (!trim(current).empty()) {
        terms.push_back(current);
    }
    for (std::string term : terms) {
        term = trim(term);
        double sign = 1;
        if (term[0] == '+' || term[0] == '-') {
            sign = term[0] == '-' ? -1 : 1;
            term = trim(term.substr(1));
        }
        double coeff = 1;
        std::string mono;
        if (term[0] == '(') {
            size_t close = term.find(')');
            coeff = parse_number(term.substr(1, close - 1));
            mono = term.substr(close + 1);
        } else {
            size_t pos = term.find('p');
            if (pos == std::string::npos) {
                coeff = parse_number(term);
            } else {
                if (pos > 0) {
                    coeff = parse_number(term.substr(0, pos));
                }
                mono = term.substr(pos);
            }
        }
        Monomial m = Monomial::parse(mono);
        if (m.degree() <= order) {
            p.set_coefficient(m, p.coefficient(m) + sign * coeff);
        }
    }
    return p;
}

}  // namespace qecseq
