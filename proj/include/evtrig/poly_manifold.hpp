#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "evtrig/errors.hpp"
#include "evtrig/linalg.hpp"
#include "evtrig/series.hpp"

namespace evtrig {

/// Polynomial graph y -> h(y) in R^n with no constant or linear part.
///
/// `coeffs(i, d)` is the coefficient of y^d in component i; columns 0 and 1
/// are always zero.
class PolyManifold {
public:
    PolyManifold() = default;

    PolyManifold(std::size_t dimension, int order) : order_(order), coeffs_(Matrix::Zero(dimension, order + 1)) {
        if (order < 2) throw ConfigError("PolyManifold order must be >= 2");
    }

    /// The trivial manifold h = 0, flagged exact.
    static PolyManifold zero(std::size_t dimension, int order = 2) {
        PolyManifold h(dimension, order);
        h.exact_ = true;
        return h;
    }

    /// Builds from per-component lists of (degree, coefficient) pairs.
    static PolyManifold from_terms(const std::vector<std::vector<std::pair<int, double>>>& terms, int order,
                                   bool exact = false) {
        PolyManifold h(terms.size(), order);
        for (std::size_t i = 0; i < terms.size(); ++i) {
            for (const auto& [deg, c] : terms[i]) h.set(i, deg, c);
        }
        h.exact_ = exact;
        return h;
    }

    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(coeffs_.rows()); }
    [[nodiscard]] bool exact() const noexcept { return exact_; }
    void set_exact(bool e) noexcept { exact_ = e; }
    [[nodiscard]] const Matrix& coefficients() const noexcept { return coeffs_; }

    [[nodiscard]] double coeff(std::size_t component, int degree) const {
        if (degree < 0 || degree > order_) return 0.0;
        return coeffs_(static_cast<Eigen::Index>(component), degree);
    }

    void set(std::size_t component, int degree, double value) {
        if (degree < 2 || degree > order_)
            throw ConfigError("PolyManifold: degree " + std::to_string(degree) + " outside [2, " +
                              std::to_string(order_) + "]");
        if (component >= dimension()) throw ConfigError("PolyManifold: component index out of range");
        coeffs_(static_cast<Eigen::Index>(component), degree) = value;
    }

    /// Non-zero (degree, coefficient) pairs per component.
    [[nodiscard]] std::vector<std::vector<std::pair<int, double>>> terms(double drop_below = 0.0) const {
        std::vector<std::vector<std::pair<int, double>>> out(dimension());
        for (std::size_t i = 0; i < dimension(); ++i) {
            for (int d = 2; d <= order_; ++d) {
                const double c = coeff(i, d);
                if (std::abs(c) > drop_below) out[i].emplace_back(d, c);
            }
        }
        return out;
    }

    [[nodiscard]] Vector eval(double y) const {
        Vector out = Vector::Zero(static_cast<Eigen::Index>(dimension()));
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            double acc = 0.0;
            for (int d = order_; d >= 2; --d) acc = (acc + coeffs_(i, d)) * y;
            out(i) = acc * y;
        }
        return out;
    }

    [[nodiscard]] Vector derivative(double y) const {
        Vector out = Vector::Zero(static_cast<Eigen::Index>(dimension()));
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            double acc = 0.0;
            for (int d = order_; d >= 2; --d) acc = acc * y + d * coeffs_(i, d);
            out(i) = acc * y;
        }
        return out;
    }

    /// Component i composed with a series argument.
    [[nodiscard]] Series eval(std::size_t component, const Series& y) const {
        Series acc(y.degree());
        for (int d = order_; d >= 2; --d) acc = (acc + coeff(component, d)) * y;
        return acc * y;
    }

    /// Human-readable polynomial for one component, e.g. "y^2 - 10 y^4".
    [[nodiscard]] std::string to_string(std::size_t component, const std::string& var = "y") const {
        std::ostringstream os;
        os.precision(12);
        bool first = true;
        for (int d = 2; d <= order_; ++d) {
            const double c = coeff(component, d);
            if (c == 0.0) continue;
            const double mag = std::abs(c);
            if (first) {
                if (c < 0) os << '-';
            } else {
                os << (c < 0 ? " - " : " + ");
            }
            if (mag != 1.0) os << mag << ' ';
            os << var << '^' << d;
            first = false;
        }
        if (first) os << '0';
        return os.str();
    }

private:
    int order_ = 2;
    Matrix coeffs_;
    bool exact_ = false;
};

}  // namespace evtrig
