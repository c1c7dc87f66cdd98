#pragma once

// Coupling matrix E and polynomial center-manifold approximations.
//
// With v = z - E y the stable block decouples linearly from y when
// A_K E - E A1 + B2 K12 = 0. The manifold v = h(y) then satisfies the
// invariance equation
//
//   R(y) = f_z(y, E y + h(y)) - (E + h'(y)) f_y(y, E y + h(y)) = 0,
//
// which is matched degree by degree with truncated power series.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "evtrig/dynamics.hpp"
#include "evtrig/errors.hpp"
#include "evtrig/linalg.hpp"
#include "evtrig/poly_manifold.hpp"
#include "evtrig/series.hpp"

namespace evtrig {

/// Solves A_K E - E A1 + C = 0.
inline Matrix solve_coupling(const Matrix& A_K, const Matrix& A1, const Matrix& C) {
    if (C.rows() != A_K.rows() || C.cols() != A1.rows())
        throw ConfigError("solve_coupling: C must be nz x k");
    Matrix E = linalg::solve_sylvester(A_K, -A1, -C);
    const double res = (A_K * E - E * A1 + C).norm();
    const double scale = 1.0 + C.norm();
    if (!(res <= 1e-10 * scale * std::max(1.0, A_K.norm() * E.norm()))) {
        throw CertificateError("solve_coupling: residual " + std::to_string(res) + " too large");
    }
    return E;
}

/// E for the model's own coupling term C = B2 K12.
inline Matrix solve_coupling(const PlantModel& model) {
    return solve_coupling(model.closed_loop(), model.A1, model.B2 * model.K12);
}

namespace detail {

/// Closed-loop field along the curve z = E y + h(y), as series in y truncated at `degree`.
struct CurveField {
    std::vector<Series> fy;  // k = 1 entry
    std::vector<Series> fz;  // nz entries
};

inline void require_series_model(const PlantModel& model) {
    if (model.k != 1) throw UnsupportedModelError("center-manifold series require a scalar center state");
    if (!model.g_nl_series && model.g_nl)
        throw UnsupportedModelError("model '" + model.name + "' has no series (truncation) hook");
    if (!model.kn_series && model.kn)
        throw UnsupportedModelError("model '" + model.name + "' has a feedback Kn without a series hook");
}

inline CurveField curve_field(const PlantModel& model, const Matrix& E, const PolyManifold& h, std::size_t degree) {
    const Series y = Series::variable(degree);
    std::vector<Series> ys{y};
    std::vector<Series> zs(model.nz, Series(degree));
    for (int i = 0; i < model.nz; ++i) zs[i] = E(i, 0) * y + h.eval(static_cast<std::size_t>(i), y);

    std::vector<Series> us(model.m, Series(degree));
    for (int j = 0; j < model.m; ++j) {
        Series acc = model.K12(j, 0) * y;
        for (int i = 0; i < model.nz; ++i)
            if (model.K11(j, i) != 0.0) acc += model.K11(j, i) * zs[i];
        us[j] = acc;
    }
    if (model.kn_series) {
        std::vector<Series> extra(model.m, Series(degree));
        model.kn_series(std::span<const Series>(ys), std::span<Series>(extra));
        for (int j = 0; j < model.m; ++j) us[j] += extra[j];
    }

    CurveField f{{Series(degree)}, std::vector<Series>(model.nz, Series(degree))};
    if (model.g_nl_series) {
        model.g_nl_series(std::span<const Series>(ys), std::span<const Series>(zs), std::span<const Series>(us),
                          std::span<Series>(f.fy), std::span<Series>(f.fz));
    }
    f.fy[0] += model.A1(0, 0) * y;
    for (int i = 0; i < model.nz; ++i) {
        for (int j = 0; j < model.nz; ++j)
            if (model.A2(i, j) != 0.0) f.fz[i] += model.A2(i, j) * zs[j];
        for (int j = 0; j < model.m; ++j)
            if (model.B2(i, j) != 0.0) f.fz[i] += model.B2(i, j) * us[j];
    }
    return f;
}

/// Invariance residual coefficients, nz x (degree + 1).
inline Matrix residual_table(const PlantModel& model, const Matrix& E, const PolyManifold& h, std::size_t degree) {
    const CurveField f = curve_field(model, E, h, degree);
    const Series y = Series::variable(degree);
    Matrix out = Matrix::Zero(model.nz, static_cast<Eigen::Index>(degree) + 1);
    for (int i = 0; i < model.nz; ++i) {
        const Series slope = E(i, 0) + h.eval(static_cast<std::size_t>(i), y).derivative();
        const Series r = f.fz[i] - slope * f.fy[0];
        for (std::size_t d = 0; d <= degree; ++d) out(i, static_cast<Eigen::Index>(d)) = r[d];
    }
    return out;
}

}  // namespace detail

/// Coefficients of the invariance residual up to degree r_check; row i is
/// component i, column d the coefficient of y^d.
inline Matrix pde_residual(const PlantModel& model, const Matrix& E, const PolyManifold& h, int r_check) {
    detail::require_series_model(model);
    if (r_check < h.order()) throw ConfigError("pde_residual: r_check must be >= the manifold order");
    if (static_cast<int>(h.dimension()) != model.nz) throw ConfigError("manifold dimension does not match nz");
    return detail::residual_table(model, E, h, static_cast<std::size_t>(r_check));
}

/// Polynomial center-manifold approximation of order r.
///
/// The exact flag is set when the model is polynomial and the residual
/// vanishes through the largest degree it can possibly reach.
inline PolyManifold solve_series(const PlantModel& model, const Matrix& E, int r) {
    detail::require_series_model(model);
    if (r < 2) throw ConfigError("manifold order must be >= 2");
    const Matrix A_K = model.closed_loop();
    const Eigen::Index nz = model.nz;
    PolyManifold h(static_cast<std::size_t>(nz), r);

    for (int d = 2; d <= r; ++d) {
        const Matrix table = detail::residual_table(model, E, h, static_cast<std::size_t>(d));
        const Matrix lhs = A_K - static_cast<double>(d) * model.A1(0, 0) * Matrix::Identity(nz, nz);
        Eigen::FullPivLU<Matrix> lu(lhs);
        if (!lu.isInvertible()) {
            throw CertificateError("solve_series: A_K - " + std::to_string(d) +
                                   " A1 is singular; eigenvalues " +
                                   linalg::format_eigenvalues(linalg::eigenvalues(lhs)));
        }
        const Vector c = lu.solve(-table.col(d));
        for (Eigen::Index i = 0; i < nz; ++i) h.set(static_cast<std::size_t>(i), d, c(i));
    }

    if (model.field_degree > 0) {
        const int top = model.field_degree * r + r;
        const Matrix check = detail::residual_table(model, E, h, static_cast<std::size_t>(top));
        const double scale = std::max(1.0, h.coefficients().cwiseAbs().maxCoeff());
        h.set_exact(check.cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
    return h;
}

/// Reduced dynamics y' = sum_d coeffs[d] y^d on the approximate manifold.
struct ReducedDynamics {
    std::vector<double> coeffs;

    [[nodiscard]] double eval(double y) const {
        double acc = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * y + *it;
        return acc;
    }

    [[nodiscard]] double derivative(double y) const {
        double acc = 0.0;
        for (std::size_t d = coeffs.size(); d-- > 1;) acc = acc * y + static_cast<double>(d) * coeffs[d];
        return acc;
    }

    /// Lowest degree with a coefficient above `tol`, or -1 for the zero polynomial.
    [[nodiscard]] int leading_degree(double tol = 1e-12) const {
        for (std::size_t d = 0; d < coeffs.size(); ++d)
            if (std::abs(coeffs[d]) > tol) return static_cast<int>(d);
        return -1;
    }

    [[nodiscard]] double leading_coefficient(double tol = 1e-12) const {
        const int d = leading_degree(tol);
        return d < 0 ? 0.0 : coeffs[static_cast<std::size_t>(d)];
    }

    /// Odd leading degree with a negative coefficient: locally asymptotically stable.
    [[nodiscard]] bool locally_stable(double tol = 1e-12) const {
        const int d = leading_degree(tol);
        return d > 0 && d % 2 == 1 && leading_coefficient(tol) < 0.0;
    }
};

/// y' = A1 y + g1(y, E y + h(y), K(...)) truncated at h.order + g1_degree,
/// or at `degree` when given.
inline ReducedDynamics reduced_dynamics(const PlantModel& model, const Matrix& E, const PolyManifold& h,
                                        int degree = -1) {
    detail::require_series_model(model);
    const int top = degree > 0 ? degree : h.order() + model.g1_degree;
    const detail::CurveField f = detail::curve_field(model, E, h, static_cast<std::size_t>(top));
    ReducedDynamics rd;
    rd.coeffs.assign(f.fy[0].coefficients().begin(), f.fy[0].coefficients().end());
    return rd;
}

/// Sampled bounds |y'| <= k5 |y|^p and |dy'/dy| <= k6 |y|^(p-1) on [-radius, radius].
struct ReducedConstants {
    double k5 = 0.0;
    double k6 = 0.0;
    double p = 0.0;
};

inline ReducedConstants estimate_reduced_constants(const ReducedDynamics& rd, double radius, int samples = 2000) {
    if (!(radius > 0.0)) throw ConfigError("estimate_reduced_constants: radius must be positive");
    ReducedConstants out;
    const int deg = rd.leading_degree();
    if (deg < 0) return out;
    out.p = static_cast<double>(deg);
    for (int i = 1; i <= samples; ++i) {
        const double y = radius * static_cast<double>(i) / samples;
        for (double s : {y, -y}) {
            const double a = std::abs(s);
            out.k5 = std::max(out.k5, std::abs(rd.eval(s)) / std::pow(a, out.p));
            out.k6 = std::max(out.k6, std::abs(rd.derivative(s)) / std::pow(a, out.p - 1.0));
        }
    }
    return out;
}

}  // namespace evtrig
