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

#ifndef QECSEQ_POLYNOMIAL_H
#define QECSEQ_POLYNOMIAL_H

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qecseq {

using Complex = std::complex<double>;

/// Exponents (a, b, c) of the monomial px^a py^b pz^c.
struct Monomial {
    int x = 0;
    int y = 0;
    int z = 0;

    constexpr int degree() const {
        return x + y + z;
    }
    bool operator==(const Monomial &) const = default;

    /// "1", "px", "px^2", "px*py", ...
    std::string str() const;
    static Monomial parse(const std::string &text);
};

/// Numeric values substituted for the symbolic error probabilities.
struct ErrorRates {
    double px = 0;
    double py = 0;
    double pz = 0;

    double total() const {
        return px + py + pz;
    }
    /// Throws std::invalid_argument unless each rate is in [0,1] and the sum is at most 1.
    void validate() const;
    static ErrorRates uniform(double p) {
        return {p, p, p};
    }
};

namespace poly_detail {

inline constexpr int kMaxOrder = 3;
inline constexpr int kNumMonomials = 20;

// Graded order: 1 | px py pz | px^2 px*py px*pz py^2 py*pz pz^2 | cubic terms.
inline constexpr std::array<Monomial, kNumMonomials> kMonomials = {{
    {0, 0, 0},
    {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
    {2, 0, 0}, {1, 1, 0}, {1, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2},
    {3, 0, 0}, {2, 1, 0}, {2, 0, 1}, {1, 2, 0}, {1, 1, 1}, {1, 0, 2},
    {0, 3, 0}, {0, 2, 1}, {0, 1, 2}, {0, 0, 3},
}};

/// Number of monomials with total degree <= order.
constexpr int count_up_to(int order) {
    return (order + 1) * (order + 2) * (order + 3) / 6;
}

constexpr int index_of(Monomial m) {
    for (int i = 0; i < kNumMonomials; i++) {
        if (kMonomials[i] == m) {
            return i;
        }
    }
    return -1;
}

struct ProductTable {
    std::array<std::array<int8_t, kNumMonomials>, kNumMonomials> index{};
    constexpr ProductTable() {
        for (int i = 0; i < kNumMonomials; i++) {
            for (int j = 0; j < kNumMonomials; j++) {
                Monomial m{kMonomials[i].x + kMonomials[j].x, kMonomials[i].y + kMonomials[j].y,
                           kMonomials[i].z + kMonomials[j].z};
                index[i][j] = static_cast<int8_t>(m.degree() > kMaxOrder ? -1 : index_of(m));
            }
        }
    }
};
inline constexpr ProductTable kProducts{};

inline double abs_value(double v) {
    return std::abs(v);
}
inline double abs_value(const Complex &v) {
    return std::abs(v);
}

}  // namespace poly_detail

/// Multivariate polynomial in (px, py, pz) truncated at a fixed total degree.
///
/// The truncation order is part of the value: arithmetic between polynomials of
/// different orders truncates to the smaller one, so every result is exact up
/// to the order it carries. Coefficients live in a fixed graded array.
template <class T>
class BasicPolynomial {
   public:
    BasicPolynomial() = default;
    explicit BasicPolynomial(int order, T constant = T{}) : order_(order) {
        if (order < 0 || order > poly_detail::kMaxOrder) {
            throw std::invalid_argument("truncation order must be in [0, 3]");
        }
        coeffs_[0] = constant;
    }

    static BasicPolynomial one(int order) {
        return BasicPolynomial(order, T{1});
    }
    /// The variable px (axis 0), py (axis 1) or pz (axis 2).
    static BasicPolynomial variable(int order, int axis) {
        BasicPolynomial r(order);
        if (order >= 1) {
            r.coeffs_[1 + axis] = T{1};
        }
        return r;
    }
    /// 1 - px - py - pz: the weight of a fault slot that stays clean.
    static BasicPolynomial no_fault(int order) {
        BasicPolynomial r = one(order);
        if (order >= 1) {
            r.coeffs_[1] = r.coeffs_[2] = r.coeffs_[3] = T{-1};
        }
        return r;
    }

    int order() const {
        return order_;
    }
    int size() const {
        return poly_detail::count_up_to(order_);
    }
    const T &operator[](int i) const {
        return coeffs_[i];
    }
    T &operator[](int i) {
        return coeffs_[i];
    }
    T coefficient(Monomial m) const {
        if (m.degree() > order_) {
            return T{};
        }
        return coeffs_[poly_detail::index_of(m)];
    }
    void set_coefficient(Monomial m, T v) {
        if (m.degree() > order_) {
            throw std::out_of_range("monomial exceeds truncation order");
        }
        coeffs_[poly_detail::index_of(m)] = v;
    }
    T constant() const {
        return coeffs_[0];
    }

    /// Lowest total degree carrying a nonzero coefficient, or order()+1 when zero.
    int min_degree() const {
        int n = size();
        for (int i = 0; i < n; i++) {
            if (coeffs_[i] != T{}) {
                return poly_detail::kMonomials[i].degree();
            }
        }
        return order_ + 1;
    }
    bool is_zero() const {
        return min_degree() > order_;
    }

    BasicPolynomial truncated(int order) const {
        BasicPolynomial r(std::min(order, order_));
        for (int i = 0; i < r.size(); i++) {
            r.coeffs_[i] = coeffs_[i];
        }
        return r;
    }

    BasicPolynomial &operator+=(const BasicPolynomial &o) {
        shrink_to(o.order_);
        for (int i = 0; i < size(); i++) {
            coeffs_[i] += o.coeffs_[i];
        }
        return *this;
    }
    BasicPolynomial &operator-=(const BasicPolynomial &o) {
        shrink_to(o.order_);
        for (int i = 0; i < size(); i++) {
            coeffs_[i] -= o.coeffs_[i];
        }
        return *this;
    }
    BasicPolynomial &operator*=(const T &s) {
        for (int i = 0; i < size(); i++) {
            coeffs_[i] *= s;
        }
        return *this;
    }
    friend BasicPolynomial operator+(BasicPolynomial a, const BasicPolynomial &b) {
        return a += b;
    }
    friend BasicPolynomial operator-(BasicPolynomial a, const BasicPolynomial &b) {
        return a -= b;
    }
    friend BasicPolynomial operator-(BasicPolynomial a) {
        return a *= T{-1};
    }
    friend BasicPolynomial operator*(BasicPolynomial a, const T &s) {
        return a *= s;
    }
    friend BasicPolynomial operator*(const T &s, BasicPolynomial a) {
        return a *= s;
    }
    friend BasicPolynomial operator*(const BasicPolynomial &a, const BasicPolynomial &b) {
        BasicPolynomial r(std::min(a.order_, b.order_));
        int n = r.size();
        for (int i = 0; i < n; i++) {
            if (a.coeffs_[i] == T{}) {
                continue;
            }
            for (int j = 0; j < n; j++) {
                int k = poly_detail::kProducts.index[i][j];
                if (k >= 0 && k < n) {
                    r.coeffs_[k] += a.coeffs_[i] * b.coeffs_[j];
                }
            }
        }
        return r;
    }
    BasicPolynomial &operator*=(const BasicPolynomial &o) {
        return *this = *this * o;
    }

    /// Truncated series inverse; requires a nonzero constant term.
    BasicPolynomial reciprocal() const {
        if (poly_detail::abs_value(coeffs_[0]) == 0) {
            throw std::domain_error("reciprocal of a polynomial with zero constant term");
        }
        T inv0 = T{1} / coeffs_[0];
        BasicPolynomial q = *this * inv0;
        q.coeffs_[0] = T{};
        // 1/(c0 (1 + q)) = (1/c0) sum_n (-q)^n, exact once n exceeds the order.
        BasicPolynomial term = one(order_);
        BasicPolynomial sum = one(order_);
        for (int n = 1; n <= order_; n++) {
            term = term * q * T{-1};
            sum += term;
        }
        return sum * inv0;
    }

    template <class R>
    R evaluate(const ErrorRates &rates) const {
        R total{};
        for (int i = 0; i < size(); i++) {
            const Monomial &m = poly_detail::kMonomials[i];
            total += R(coeffs_[i]) * (std::pow(rates.px, m.x) * std::pow(rates.py, m.y) * std::pow(rates.pz, m.z));
        }
        return total;
    }
    T operator()(const ErrorRates &rates) const {
        return evaluate<T>(rates);
    }

    /// Largest coefficient difference (missing terms count as zero).
    double max_abs_diff(const BasicPolynomial &o) const {
        int n = std::max(size(), o.size());
        double m = 0;
        for (int i = 0; i < n; i++) {
            T a = i < size() ? coeffs_[i] : T{};
            T b = i < o.size() ? o.coeffs_[i] : T{};
            m = std::max(m, poly_detail::abs_value(a - b));
        }
        return m;
    }
    bool approx_equal(const BasicPolynomial &o, double tol) const {
        return max_abs_diff(o) <= tol;
    }
    bool operator==(const BasicPolynomial &o) const {
        return order_ == o.order_ && coeffs_ == o.coeffs_;
    }

   private:
    void shrink_to(int order) {
        if (order < order_) {
            for (int i = poly_detail::count_up_to(order); i < size(); i++) {
                coeffs_[i] = T{};
            }
            order_ = order;
        }
    }

    int order_ = 0;
    std::array<T, poly_detail::kNumMonomials> coeffs_{};
};

using ErrorPolynomial = BasicPolynomial<double>;
using ComplexPolynomial = BasicPolynomial<Complex>;

ErrorPolynomial real_part(const ComplexPolynomial &p);
ErrorPolynomial imag_part(const ComplexPolynomial &p);
ComplexPolynomial to_complex(const ErrorPolynomial &p);

/// Renders a coefficient as an integer or small rational when it lies within
/// `tol` of one, otherwise with full precision.
std::string format_coefficient(double value, double tol = 1e-9);

enum class PolyStyle {
    kAscii,     // "1 - 7px - 7py - 7pz"
    kMarkdown,  // "1 − 7px − 7py − 7pz"
};

/// Human-readable form. With `max_degree` >= 0 only terms up to that degree are shown.
std::string format_polynomial(const ErrorPolynomial &p, PolyStyle style = PolyStyle::kAscii, int max_degree = -1,
                              bool snap = true);

/// Parses the output of format_polynomial (either style).
ErrorPolynomial parse_polynomial(const std::string &text, int order);

}  // namespace qecseq

#endif
