#pragma once

// Truncated univariate power series a_0 + a_1 y + ... + a_N y^N.
//
// Model vector fields are written once as templates over a scalar type; with
// T = Series they produce the Taylor expansion of the field along a curve
// parametrised by y, which is what degree-by-degree center-manifold matching
// needs. Elementary functions use the usual recurrences obtained from
// f(a)' = f'(a) a'.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace evtrig {

class Series {
public:
    Series() : c_(1, 0.0) {}

    /// Constant series of truncation degree `degree`.
    explicit Series(std::size_t degree, double value = 0.0) : c_(degree + 1, 0.0) { c_[0] = value; }

    static Series constant(double value, std::size_t degree) { return Series(degree, value); }

    /// The identity series `y`.
    static Series variable(std::size_t degree) {
        Series s(degree);
        if (degree >= 1) s.c_[1] = 1.0;
        return s;
    }

    static Series from_coefficients(std::vector<double> coeffs) {
        if (coeffs.empty()) coeffs.push_back(0.0);
        Series s;
        s.c_ = std::move(coeffs);
        return s;
    }

    [[nodiscard]] std::size_t degree() const noexcept { return c_.size() - 1; }
    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return c_; }

    [[nodiscard]] double operator[](std::size_t i) const noexcept { return i < c_.size() ? c_[i] : 0.0; }
    double& operator[](std::size_t i) { return c_.at(i); }

    [[nodiscard]] double eval(double y) const noexcept {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * y + *it;
        return acc;
    }

    /// d/dy, keeping the truncation degree (top coefficient becomes zero).
    [[nodiscard]] Series derivative() const {
        Series d(degree());
        for (std::size_t i = 1; i < c_.size(); ++i) d.c_[i - 1] = static_cast<double>(i) * c_[i];
        return d;
    }

    /// Antiderivative with constant term `c0`, truncated at the same degree.
    [[nodiscard]] Series integral(double c0 = 0.0) const {
        Series r(degree(), c0);
        for (std::size_t i = 1; i < c_.size(); ++i) r.c_[i] = c_[i - 1] / static_cast<double>(i);
        return r;
    }

    Series& operator+=(const Series& o) {
        widen(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o[i];
        return *this;
    }
    Series& operator-=(const Series& o) {
        widen(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o[i];
        return *this;
    }
    Series& operator*=(const Series& o) { return *this = *this * o; }
    Series& operator/=(const Series& o) { return *this = *this / o; }

    Series& operator+=(double v) { c_[0] += v; return *this; }
    Series& operator-=(double v) { c_[0] -= v; return *this; }
    Series& operator*=(double v) {
        for (auto& x : c_) x *= v;
        return *this;
    }
    Series& operator/=(double v) {
        for (auto& x : c_) x /= v;
        return *this;
    }

    friend Series operator-(Series a) {
        for (auto& x : a.c_) x = -x;
        return a;
    }
    friend Series operator+(Series a, const Series& b) { return a += b; }
    friend Series operator-(Series a, const Series& b) { return a -= b; }
    friend Series operator+(Series a, double v) { return a += v; }
    friend Series operator+(double v, Series a) { return a += v; }
    friend Series operator-(Series a, double v) { return a -= v; }
    friend Series operator-(double v, Series a) { return (-a) += v; }
    friend Series operator*(Series a, double v) { return a *= v; }
    friend Series operator*(double v, Series a) { return a *= v; }
    friend Series operator/(Series a, double v) { return a /= v; }
    friend Series operator/(double v, const Series& a) { return Series::constant(v, a.degree()) / a; }

    friend Series operator*(const Series& a, const Series& b) {
        const std::size_t n = std::max(a.degree(), b.degree());
        Series r(n);
        for (std::size_t i = 0; i <= a.degree(); ++i) {
            if (a.c_[i] == 0.0) continue;
            for (std::size_t j = 0; j <= b.degree() && i + j <= n; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
        }
        return r;
    }

    friend Series operator/(const Series& a, const Series& b) {
        if (b[0] == 0.0) throw std::domain_error("Series division by a series with zero constant term");
        const std::size_t n = std::max(a.degree(), b.degree());
        Series q(n);
        for (std::size_t k = 0; k <= n; ++k) {
            double acc = a[k];
            for (std::size_t j = 1; j <= k; ++j) acc -= b[j] * q.c_[k - j];
            q.c_[k] = acc / b[0];
        }
        return q;
    }

private:
    void widen(const Series& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
    }

    std::vector<double> c_;
};

/// Both sin and cos of a series, from s' = c a', c' = -s a'.
inline std::pair<Series, Series> sincos(const Series& a) {
    const std::size_t n = a.degree();
    std::vector<double> s(n + 1, 0.0), c(n + 1, 0.0);
    s[0] = std::sin(a[0]);
    c[0] = std::cos(a[0]);
    for (std::size_t k = 1; k <= n; ++k) {
        double ss = 0.0, cc = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            const double ja = static_cast<double>(j) * a[j];
            ss += ja * c[k - j];
            cc -= ja * s[k - j];
        }
        s[k] = ss / static_cast<double>(k);
        c[k] = cc / static_cast<double>(k);
    }
    return {Series::from_coefficients(std::move(s)), Series::from_coefficients(std::move(c))};
}

inline Series sin(const Series& a) { return sincos(a).first; }
inline Series cos(const Series& a) { return sincos(a).second; }

/// atanh(a) = integral of a' / (1 - a^2).
inline Series atanh(const Series& a) {
    if (std::abs(a[0]) >= 1.0) throw std::domain_error("atanh of a series outside (-1, 1)");
    const Series one_minus = 1.0 - a * a;
    return (a.derivative() / one_minus).integral(std::atanh(a[0]));
}

/// tanh via t' = (1 - t^2) a', solved coefficient by coefficient.
inline Series tanh(const Series& a) {
    const std::size_t n = a.degree();
    std::vector<double> t(n + 1, 0.0), sq(n + 1, 0.0);
    t[0] = std::tanh(a[0]);
    sq[0] = t[0] * t[0];
    for (std::size_t k = 1; k <= n; ++k) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            const double one_minus = (k - j == 0 ? 1.0 : 0.0) - sq[k - j];
            acc += static_cast<double>(j) * a[j] * one_minus;
        }
        t[k] = acc / static_cast<double>(k);
        double s = 0.0;
        for (std::size_t j = 0; j <= k; ++j) s += t[j] * t[k - j];
        sq[k] = s;
    }
    return Series::from_coefficients(std::move(t));
}

/// Zero of the same kind as `x` (same truncation degree for series).
inline double zero_like(double) { return 0.0; }
inline Series zero_like(const Series& x) { return Series(x.degree()); }

inline Series pow(const Series& a, int e) {
    if (e < 0) return 1.0 / pow(a, -e);
    Series r = Series::constant(1.0, a.degree());
    Series base = a;
    while (e > 0) {
        if (e & 1) r *= base;
        e >>= 1;
        if (e) base *= base;
    }
    return r;
}

}  // namespace evtrig
