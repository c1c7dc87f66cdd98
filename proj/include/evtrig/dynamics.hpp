#pragma once

// Plants in decomposed coordinates
//
//   y' = A1 y + g1(y, z, u)
//   z' = A2 z + B2 u + g2(y, z, u),     u = K11 z + K12 y + Kn(y)
//
// with y the center state, z the stable block. The nonlinear remainder g and
// the nonlinear feedback Kn are stored for two scalar types: double for
// simulation and Series for center-manifold matching.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evtrig/errors.hpp"
#include "evtrig/linalg.hpp"
#include "evtrig/poly_manifold.hpp"
#include "evtrig/series.hpp"

namespace evtrig {

template <class T>
using NonlinearField =
    std::function<void(std::span<const T> y, std::span<const T> z, std::span<const T> u, std::span<T> dy,
                       std::span<T> dz)>;

template <class T>
using NonlinearFeedback = std::function<void(std::span<const T> y, std::span<T> u)>;

/// Raw-coordinate state (y, z).
struct StatePoint {
    Vector y;
    Vector z;

    [[nodiscard]] bool finite() const { return y.allFinite() && z.allFinite(); }
};

struct StateDerivative {
    Vector dy;
    Vector dz;
};

/// Reduced-system Lyapunov function supplied with a model, V1(y), together with
/// the decrement exponent of the reduced dynamics.
struct ReducedLyapunov {
    std::function<double(double)> value;
    std::string formula;
};

struct PlantModel {
    std::string name;
    int k = 1;
    int nz = 0;
    int m = 0;

    Matrix A1, A2, B2, K11, K12;

    NonlinearField<double> g_nl;
    NonlinearField<Series> g_nl_series;  // empty: the model has no truncation hook
    NonlinearFeedback<double> kn;        // empty: Kn = 0
    NonlinearFeedback<Series> kn_series;

    std::optional<ReducedLyapunov> V1;
    double p = 3.0;      // polynomial decay exponent of the reduced dynamics
    int g1_degree = 2;   // lowest degree carried by g1; sets the reduced-dynamics truncation
    int field_degree = 0;  // total degree of a polynomial remainder, 0 when not polynomial

    /// Optional domain predicate (e.g. states confined to (-1, 1)).
    std::function<bool(const StatePoint&)> in_domain;

    /// Installs a generic nonlinearity callable for both scalar types.
    template <class F>
    void set_nonlinearity(F f) {
        g_nl = [f](std::span<const double> y, std::span<const double> z, std::span<const double> u,
                   std::span<double> dy, std::span<double> dz) { f(y, z, u, dy, dz); };
        g_nl_series = [f](std::span<const Series> y, std::span<const Series> z, std::span<const Series> u,
                          std::span<Series> dy, std::span<Series> dz) { f(y, z, u, dy, dz); };
    }

    template <class F>
    void set_feedback(F f) {
        kn = [f](std::span<const double> y, std::span<double> u) { f(y, u); };
        kn_series = [f](std::span<const Series> y, std::span<Series> u) { f(y, u); };
    }

    [[nodiscard]] Matrix closed_loop() const { return A2 + B2 * K11; }

    /// Checks dimensions, the zero value and zero Jacobian of g at the origin
    /// (central differences), and that A2 + B2 K11 is Hurwitz.
    void validate() const;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

inline void check_dims(const PlantModel& model, const Vector& y, const Vector& z) {
    require(y.size() == model.k, "state y has dimension " + std::to_string(y.size()) + ", model expects " +
                                     std::to_string(model.k));
    require(z.size() == model.nz, "state z has dimension " + std::to_string(z.size()) + ", model expects " +
                                      std::to_string(model.nz));
}

}  // namespace detail

/// Nonlinear part only: (g1, g2) at (y, z, u).
inline StateDerivative eval_nonlinearity(const PlantModel& model, const Vector& y, const Vector& z,
                                         const Vector& u) {
    StateDerivative d{Vector::Zero(model.k), Vector::Zero(model.nz)};
    if (model.g_nl) {
        model.g_nl(std::span<const double>(y.data(), y.size()), std::span<const double>(z.data(), z.size()),
                   std::span<const double>(u.data(), u.size()), std::span<double>(d.dy.data(), d.dy.size()),
                   std::span<double>(d.dz.data(), d.dz.size()));
    }
    return d;
}

inline StateDerivative eval_dynamics(const PlantModel& model, const StatePoint& s, const Vector& u) {
    detail::check_dims(model, s.y, s.z);
    detail::require(u.size() == model.m, "input has dimension " + std::to_string(u.size()) + ", model expects " +
                                             std::to_string(model.m));
    StateDerivative d = eval_nonlinearity(model, s.y, s.z, u);
    d.dy += model.A1 * s.y;
    d.dz += model.A2 * s.z + model.B2 * u;
    for (Eigen::Index i = 0; i < d.dy.size(); ++i) {
        if (!std::isfinite(d.dy(i)))
            throw NumericOverflowError("non-finite derivative in component y" + std::to_string(i + 1));
    }
    for (Eigen::Index i = 0; i < d.dz.size(); ++i) {
        if (!std::isfinite(d.dz(i)))
            throw NumericOverflowError("non-finite derivative in component z" + std::to_string(i + 1));
    }
    return d;
}

/// u = K11 z + K12 y + Kn(y), evaluated at the held sample.
inline Vector held_control(const PlantModel& model, const StatePoint& s_held) {
    detail::check_dims(model, s_held.y, s_held.z);
    Vector u = model.K11 * s_held.z + model.K12 * s_held.y;
    if (model.kn) {
        Vector extra = Vector::Zero(model.m);
        model.kn(std::span<const double>(s_held.y.data(), s_held.y.size()),
                 std::span<double>(extra.data(), extra.size()));
        u += extra;
    }
    return u;
}

/// v = z - E y.
inline Vector to_v(const Matrix& E, const StatePoint& s) { return s.z - E * s.y; }

/// (y, w) with w = z - E y - h(y).
inline std::pair<Vector, Vector> to_w(const PlantModel& model, const Matrix& E, const PolyManifold& h,
                                      const StatePoint& s) {
    detail::check_dims(model, s.y, s.z);
    detail::require(static_cast<int>(h.dimension()) == model.nz, "manifold dimension does not match nz");
    detail::require(model.k == 1, "manifold coordinates require a scalar center state");
    return {s.y, to_v(E, s) - h.eval(s.y(0))};
}

inline StatePoint from_w(const PlantModel& model, const Matrix& E, const PolyManifold& h, const Vector& y,
                         const Vector& w) {
    detail::require(static_cast<int>(h.dimension()) == model.nz, "manifold dimension does not match nz");
    detail::require(model.k == 1, "manifold coordinates require a scalar center state");
    return {y, w + h.eval(y(0)) + E * y};
}

// ---------------------------------------------------------------------------
// Polynomial nonlinearities

/// coef * prod_j var_j^powers[j] over the variable vector (y, z, u).
struct Monomial {
    double coef = 0.0;
    std::vector<int> powers;
};

/// One list of monomials per state component (first k rows for y, then nz for z).
struct PolynomialField {
    int k = 1, nz = 0, m = 0;
    std::vector<std::vector<Monomial>> rows;

    [[nodiscard]] int max_degree() const {
        int deg = 0;
        for (const auto& row : rows)
            for (const auto& mono : row) {
                int d = 0;
                for (int p : mono.powers) d += p;
                deg = std::max(deg, d);
            }
        return deg;
    }

    [[nodiscard]] int min_degree_of_row(std::size_t r) const {
        int deg = -1;
        for (const auto& mono : rows.at(r)) {
            if (mono.coef == 0.0) continue;
            int d = 0;
            for (int p : mono.powers) d += p;
            deg = deg < 0 ? d : std::min(deg, d);
        }
        return deg;
    }

    template <class T>
    void operator()(std::span<const T> y, std::span<const T> z, std::span<const T> u, std::span<T> dy,
                    std::span<T> dz) const {
        auto var = [&](std::size_t j) -> const T& {
            if (j < y.size()) return y[j];
            if (j < y.size() + z.size()) return z[j - y.size()];
            return u[j - y.size() - z.size()];
        };
        for (std::size_t r = 0; r < rows.size(); ++r) {
            T acc = zero_like(var(0));
            for (const auto& mono : rows[r]) {
                T term = zero_like(var(0)) + mono.coef;
                for (std::size_t j = 0; j < mono.powers.size(); ++j) {
                    for (int e = 0; e < mono.powers[j]; ++e) term = term * var(j);
                }
                acc = acc + term;
            }
            if (r < static_cast<std::size_t>(k))
                dy[r] = acc;
            else
                dz[r - static_cast<std::size_t>(k)] = acc;
        }
    }
};

inline void PlantModel::validate() const {
    using detail::require;
    require(k >= 1 && nz >= 1 && m >= 1, "model dimensions must be positive");
    require(A1.rows() == k && A1.cols() == k, "A1 must be k x k");
    require(A2.rows() == nz && A2.cols() == nz, "A2 must be nz x nz");
    require(B2.rows() == nz && B2.cols() == m, "B2 must be nz x m");
    require(K11.rows() == m && K11.cols() == nz, "K11 must be m x nz");
    require(K12.rows() == m && K12.cols() == k, "K12 must be m x k");
    require(p > 1.0, "decay exponent p must exceed 1");

    const Vector y0 = Vector::Zero(k), z0 = Vector::Zero(nz), u0 = Vector::Zero(m);
    const StateDerivative g0 = eval_nonlinearity(*this, y0, z0, u0);
    const double tol = 1e-6;
    require(g0.dy.cwiseAbs().maxCoeff() <= tol && g0.dz.cwiseAbs().maxCoeff() <= tol,
            "nonlinear remainder does not vanish at the origin");

    const int nvar = k + nz + m;
    const double h = 1e-5;
    for (int j = 0; j < nvar; ++j) {
        Vector yp = y0, zp = z0, up = u0, ym = y0, zm = z0, um = u0;
        auto bump = [&](Vector& a, Vector& b, int idx) {
            a(idx) += h;
            b(idx) -= h;
        };
        if (j < k)
            bump(yp, ym, j);
        else if (j < k + nz)
            bump(zp, zm, j - k);
        else
            bump(up, um, j - k - nz);
        const StateDerivative gp = eval_nonlinearity(*this, yp, zp, up);
        const StateDerivative gm = eval_nonlinearity(*this, ym, zm, um);
        const double slope =
            std::max(((gp.dy - gm.dy) / (2 * h)).cwiseAbs().maxCoeff(), ((gp.dz - gm.dz) / (2 * h)).cwiseAbs().maxCoeff());
        require(slope <= tol, "nonlinear remainder has a nonzero Jacobian at the origin (variable " +
                                  std::to_string(j) + ", slope " + std::to_string(slope) + ")");
    }
    if (!linalg::is_hurwitz(closed_loop())) {
        throw CertificateError("A2 + B2 K11 is not Hurwitz; eigenvalues " +
                               linalg::format_eigenvalues(linalg::eigenvalues(closed_loop())));
    }
}

/// Builds a model whose nonlinear remainder is a polynomial field.
inline PlantModel make_polynomial_model(std::string name, Matrix A1, Matrix A2, Matrix B2, Matrix K11, Matrix K12,
                                        PolynomialField field, double p) {
    PlantModel model;
    model.name = std::move(name);
    model.k = static_cast<int>(A1.rows());
    model.nz = static_cast<int>(A2.rows());
    model.m = static_cast<int>(B2.cols());
    model.A1 = std::move(A1);
    model.A2 = std::move(A2);
    model.B2 = std::move(B2);
    model.K11 = std::move(K11);
    model.K12 = std::move(K12);
    model.p = p;
    if (static_cast<int>(field.rows.size()) != model.k + model.nz)
        throw ConfigError("polynomial field must have k + nz rows");
    field.k = model.k;
    field.nz = model.nz;
    field.m = model.m;
    for (const auto& row : field.rows)
        for (const auto& mono : row)
            if (static_cast<int>(mono.powers.size()) != model.k + model.nz + model.m)
                throw ConfigError("monomial exponent vector must have k + nz + m entries");
    const int g1_low = field.min_degree_of_row(0);
    model.g1_degree = g1_low > 0 ? g1_low : 2;
    model.field_degree = std::max(2, field.max_degree());
    model.set_nonlinearity(std::move(field));
    return model;
}

/// Kn(y) as one univariate polynomial per input, given as (degree, coefficient)
/// pairs with degree >= 2 (a scalar center state is assumed).
inline void set_polynomial_feedback(PlantModel& model, std::vector<std::vector<std::pair<int, double>>> terms) {
    if (static_cast<int>(terms.size()) != model.m) throw ConfigError("Kn must have one polynomial per input");
    if (model.k != 1) throw ConfigError("polynomial Kn requires a scalar center state");
    for (const auto& row : terms)
        for (const auto& [deg, c] : row)
            if (deg < 2) throw ConfigError("Kn terms must have degree >= 2");
    model.set_feedback([terms](auto y, auto u) {
        for (std::size_t i = 0; i < terms.size(); ++i) {
            auto acc = zero_like(y[0]);
            for (const auto& [deg, c] : terms[i]) {
                auto term = zero_like(y[0]) + c;
                for (int e = 0; e < deg; ++e) term = term * y[0];
                acc = acc + term;
            }
            u[i] = acc;
        }
    });
}

}  // namespace evtrig
