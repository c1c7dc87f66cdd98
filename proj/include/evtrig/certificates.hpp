#pragma once

// Lyapunov certificate, admissible trigger thresholds and inter-event-time
// lower bounds for V(y, w) = |y| + sqrt(w' P w).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "evtrig/dynamics.hpp"
#include "evtrig/errors.hpp"
#include "evtrig/linalg.hpp"
#include "evtrig/manifold.hpp"
#include "evtrig/poly_manifold.hpp"

namespace evtrig {

/// Which threshold bound to evaluate.
enum class SigmaVariant {
    RelativeFull,      // ||e|| >= sigma ||(y; w)||, full error
    ManifoldWeighted,  // ||e_v|| >= sigma (||w|| + |y|^(p+1))
};

inline const char* to_string(SigmaVariant v) {
    return v == SigmaVariant::RelativeFull ? "relative-full" : "manifold-weighted";
}

struct CertificateOptions {
    Matrix Q;  // empty: identity
    double s_f = 0.5;
    double s_y = 0.5;
    SigmaVariant variant = SigmaVariant::ManifoldWeighted;
};

struct SigmaBound {
    double value = 0.0;
    bool unbounded = false;
    std::string notice;
};

struct Certificate {
    Matrix P;
    Matrix Q;
    double s_f = 0.5;
    double s_y = 0.5;
    double sigma_max = 0.0;
    SigmaVariant variant = SigmaVariant::ManifoldWeighted;
    bool unbounded = false;
    std::string notice;
    double lambda_min_P = 0.0;
    double lambda_max_P = 0.0;
};

/// Solves A_K' P + P A_K = -Q; Q must be symmetric positive definite.
inline Matrix solve_lyapunov(const Matrix& A_K, const Matrix& Q) {
    if (Q.rows() != Q.cols() || (Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Q.norm()))
        throw ConfigError("Q must be symmetric");
    if (!(linalg::eigen_range(Q).min > 0.0)) throw ConfigError("Q must be positive definite");
    return linalg::solve_lyapunov(A_K, Q);
}

/// The gain through which the measurement error enters the w-dynamics:
/// B2 [K12 + K11 E, K11] for the full error, B2 K11 for e_v alone.
inline Matrix error_gain(const PlantModel& model, const Matrix& E, SigmaVariant variant) {
    if (variant == SigmaVariant::ManifoldWeighted) return model.B2 * model.K11;
    Matrix K1(model.m, model.k + model.nz);
    K1 << model.K12 + model.K11 * E, model.K11;
    return model.B2 * K1;
}

/// Closed-form threshold bound; the norm is the induced 2-norm.
inline SigmaBound sigma_bound(const Matrix& P, const Matrix& Q, const Matrix& B2K1, double s_f, SigmaVariant variant) {
    if (!(s_f > 0.0 && s_f < 1.0)) throw ConfigError("s_f must lie in (0, 1)");
    const auto p_range = linalg::eigen_range(P);
    const auto q_range = linalg::eigen_range(Q);
    if (!(p_range.min > 0.0) || !(q_range.min > 0.0)) throw CertificateError("P and Q must be positive definite");
    SigmaBound out;
    const double gain = linalg::norm2(P * B2K1);
    if (gain == 0.0) {
        out.value = std::numeric_limits<double>::infinity();
        out.unbounded = true;
        out.notice = "||P B2 K1|| = 0: the error does not enter the closed loop, sigma is unbounded";
        return out;
    }
    const double shape = std::sqrt(p_range.min / p_range.max);
    out.value = variant == SigmaVariant::RelativeFull ? q_range.min / (4.0 * gain) * shape
                                                      : (1.0 - s_f) * q_range.min / (2.0 * gain) * shape;
    return out;
}

inline Certificate certify(const PlantModel& model, const Matrix& E, const CertificateOptions& opts = {}) {
    if (!(opts.s_y > 0.0 && opts.s_y < 1.0)) throw ConfigError("s_y must lie in (0, 1)");
    Certificate c;
    c.Q = opts.Q.size() == 0 ? Matrix::Identity(model.nz, model.nz) : opts.Q;
    if (c.Q.rows() != model.nz) throw ConfigError("Q must be nz x nz");
    c.P = solve_lyapunov(model.closed_loop(), c.Q);
    c.s_f = opts.s_f;
    c.s_y = opts.s_y;
    c.variant = opts.variant;
    const SigmaBound b = sigma_bound(c.P, c.Q, error_gain(model, E, opts.variant), opts.s_f, opts.variant);
    c.sigma_max = b.value;
    c.unbounded = b.unbounded;
    c.notice = b.notice;
    const auto range = linalg::eigen_range(c.P);
    c.lambda_min_P = range.min;
    c.lambda_max_P = range.max;
    return c;
}

inline double v_value(const Vector& y, const Vector& w, const Matrix& P) {
    if (P.rows() != w.size() || P.cols() != w.size()) throw ConfigError("v_value: P does not match w");
    return y.norm() + std::sqrt(std::max(0.0, w.dot(P * w)));
}

/// Bounds c_lo ||(y; w)|| <= V <= c_hi ||(y; w)||.
struct VEquivalence {
    double c_lo;
    double c_hi;
};

inline VEquivalence v_equivalence(const Matrix& P) {
    const auto r = linalg::eigen_range(P);
    return {std::min(1.0, std::sqrt(r.min)), std::sqrt(2.0) * std::max(1.0, std::sqrt(r.max))};
}

/// Radius r1 of the dead zone S2 for an ultimate bound r_s.
inline double dead_zone_radius(const Matrix& P, double r_s) {
    if (!(r_s > 0.0)) throw ConfigError("r_s must be positive");
    const VEquivalence eq = v_equivalence(P);
    return eq.c_lo * r_s / eq.c_hi;
}

struct TauEstimate {
    double value = 0.0;
    bool fallback = false;  // discriminant not positive: linear comparison bound used
};

/// Time for phi' = a1 + (a2 + a3) phi + a4 phi^2 to climb from 0 to sigma.
inline TauEstimate tau1_estimate(double a1, double a2, double a3, double a4, double sigma) {
    if (!(a1 > 0.0) || a2 < 0.0 || a3 < 0.0 || a4 < 0.0) throw ConfigError("tau1: a1 must be positive and a2..a4 non-negative");
    if (sigma < 0.0) throw ConfigError("tau1: sigma must be non-negative");
    TauEstimate out;
    if (sigma == 0.0) return out;
    const double s = a2 + a3;
    const double disc = 4.0 * a1 * a4 - s * s;
    if (disc > 0.0) {
        const double b = std::sqrt(disc);
        out.value = (2.0 / b) * (std::atan((2.0 * a4 * sigma + s) / b) - std::atan(s / b));
        return out;
    }
    // a4 phi^2 <= a4 sigma phi on [0, sigma]
    out.fallback = true;
    const double L = s + a4 * sigma;
    out.value = L > 0.0 ? std::log1p(sigma * L / a1) / L : sigma / a1;
    return out;
}

/// Same comparison bound with the asymptotic b-constants.
inline TauEstimate tau2_estimate(double b1, double b2, double b3, double b4, double sigma) {
    return tau1_estimate(b1, b2, b3, b4, sigma);
}

/// (1/L1) ln(1 + sigma_l L1 / delta).
inline double tau3_estimate(double sigma_l, double L1, double delta) {
    if (sigma_l < 0.0 || !(L1 > 0.0) || !(delta > 0.0)) throw ConfigError("tau3: L1, delta must be positive and sigma_l >= 0");
    return std::log1p(sigma_l * L1 / delta) / L1;
}

/// Sampled constants of the closed loop on S = {|y| <= delta, ||w|| <= delta}.
/// These are conservative analytic estimates for the model at hand, not
/// published values.
struct AnalyticConstants {
    double delta = 0.0;
    double k1 = 0.0;  // |y' - A1 y - g1_red(y)| <= k1 ||w||
    double k2 = 0.0;  // ||w' - A_K w|| <= k2 ||w|| (error-free)
    double k5 = 0.0;  // |g1_red(y)| <= k5 |y|^p
    double k6 = 0.0;
    double k8 = 0.0;  // ||E + h'(y)||
    double p = 0.0;
    double flow = 0.0;  // sup ||x'|| on S
    double L1 = 0.0;
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
    double b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0;
    TauEstimate tau1;
    TauEstimate tau2;
    double r1 = 0.0;
    double sigma_l = 0.0;
    double tau3 = 0.0;
    std::string label = "conservative analytic estimates";
};

inline AnalyticConstants estimate_constants(const PlantModel& model, const Matrix& E, const PolyManifold& h,
                                            const Certificate& cert, double sigma, double delta, double r_s,
                                            int samples = 4000, std::uint64_t seed = 1) {
    if (!(delta > 0.0)) throw ConfigError("estimate_constants: delta must be positive");
    AnalyticConstants c;
    c.delta = delta;
    const Matrix A_K = model.closed_loop();
    const ReducedDynamics rd = reduced_dynamics(model, E, h);
    const ReducedConstants rc = estimate_reduced_constants(rd, delta);
    c.k5 = rc.k5;
    c.k6 = rc.k6;
    c.p = rc.p > 1.0 ? rc.p : model.p;

    for (int i = 0; i <= 400; ++i) {
        const double y = -delta + 2.0 * delta * i / 400.0;
        c.k8 = std::max(c.k8, (E.col(0) + h.derivative(y)).norm());
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int s = 0; s < samples; ++s) {
        const double y = delta * unif(rng);
        Vector w(model.nz);
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = gauss(rng);
        w *= delta * std::pow(std::abs(unif(rng)), 1.0 / static_cast<double>(model.nz)) / w.norm();
        const Vector yv = Vector::Constant(1, y);
        const StatePoint x = from_w(model, E, h, yv, w);
        if (model.in_domain && !model.in_domain(x)) continue;
        const StateDerivative d = eval_dynamics(model, x, held_control(model, x));
        c.flow = std::max(c.flow, std::sqrt(d.dy.squaredNorm() + d.dz.squaredNorm()));

        const double wn = w.norm();
        if (wn < 1e-3 * delta) continue;
        const double n1 = d.dy(0) - model.A1(0, 0) * y - rd.eval(y);
        // w' = z' - (E + h'(y)) y'
        const Vector wdot = d.dz - (E.col(0) + h.derivative(y)) * d.dy(0);
        const StatePoint on = from_w(model, E, h, yv, Vector::Zero(model.nz));
        const StateDerivative d0 = eval_dynamics(model, on, held_control(model, on));
        const Vector wdot0 = d0.dz - (E.col(0) + h.derivative(y)) * d0.dy(0);
        c.k1 = std::max(c.k1, std::abs(n1) / wn);
        c.k2 = std::max(c.k2, (wdot - wdot0 - A_K * w).norm() / wn);
    }

    const double nAK = linalg::norm2(A_K);
    const double nBK = linalg::norm2(model.B2 * model.K11);
    const double p = c.p;
    c.a1 = std::max(nAK + c.k2 + c.k8 * c.k1 * delta, c.k8 * c.k5);
    c.a2 = nBK + c.k2 + delta * c.k1 * c.k8;
    c.a3 = std::max(nAK + c.k2 + (p + 1.0) * std::pow(delta, p) * c.k1, std::pow(delta, p - 1.0) * c.k5);
    c.a4 = nBK + c.k2 + (p + 1.0) * std::pow(delta, p) * c.k1;
    c.tau1 = tau1_estimate(c.a1, c.a2, c.a3, c.a4, sigma);

    c.b1 = c.k8 * c.k5;
    c.b2 = delta * c.k1 * c.k8;
    c.b3 = (p + 1.0) * std::pow(delta, p - 1.0) * c.k5;
    c.b4 = (p + 1.0) * std::pow(delta, p) * c.k1;
    if (c.b1 > 0.0) c.tau2 = tau2_estimate(c.b1, c.b2, c.b3, c.b4, sigma);

    c.L1 = nAK + c.k2 + nBK;
    c.r1 = dead_zone_radius(cert.P, r_s);
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000; ++i) {
        const double th = 0.5 * std::numbers::pi * i / 1000.0;
        lo = std::min(lo, c.r1 * std::sin(th) + std::pow(c.r1 * std::cos(th), p + 1.0));
    }
    c.sigma_l = sigma * lo;
    if (c.flow > 0.0) c.tau3 = tau3_estimate(c.sigma_l, c.L1, c.flow);
    return c;
}

}  // namespace evtrig
