#pragma once

#include <cmath>
#include <span>
#include <string>
#include <type_traits>

#include "evtrig/dynamics.hpp"

namespace evtrig::models {

/// y' = -y v,  v' = v + u + y^2 - 2 v^2,  u = -2 v.
/// The center manifold is exactly v = y^2 and the reduced dynamics y' = -y^3.
inline PlantModel example1() {
    PolynomialField f;
    // variables: (y, z1, u)
    f.rows = {
        {{-1.0, {1, 1, 0}}},
        {{1.0, {2, 0, 0}}, {-2.0, {0, 2, 0}}},
    };
    Matrix A1 = Matrix::Zero(1, 1), A2(1, 1), B2(1, 1), K11(1, 1), K12 = Matrix::Zero(1, 1);
    A2 << 1.0;
    B2 << 1.0;
    K11 << -2.0;
    PlantModel m = make_polynomial_model("example1", A1, A2, B2, K11, K12, std::move(f), 3.0);
    m.V1 = ReducedLyapunov{[](double y) { return 0.5 * y * y; }, "y^2/2"};
    return m;
}

/// y' = -y (z1 - 4 z2),  z' = [0 1; -2 3] z + [0; 1] u + [y^2; 0],  u = [1 -4] z.
inline PlantModel example2() {
    PolynomialField f;
    // variables: (y, z1, z2, u)
    f.rows = {
        {{-1.0, {1, 1, 0, 0}}, {4.0, {1, 0, 1, 0}}},
        {{1.0, {2, 0, 0, 0}}},
        {},
    };
    Matrix A1 = Matrix::Zero(1, 1), A2(2, 2), B2(2, 1), K11(1, 2), K12 = Matrix::Zero(1, 1);
    A2 << 0.0, 1.0, -2.0, 3.0;
    B2 << 0.0, 1.0;
    K11 << 1.0, -4.0;
    PlantModel m = make_polynomial_model("example2", A1, A2, B2, K11, K12, std::move(f), 3.0);
    m.V1 = ReducedLyapunov{[](double y) { return std::abs(y); }, "|y|"};
    return m;
}

/// Mobile inverted pendulum in the coordinates
/// x = (tanh(x sin th - y cos th), tanh(x cos th + y sin th), alpha, alpha', v, th').
///
/// The robot constants are not published; the defaults put m1, m2 > 0 on the
/// whole state space and, together with the default gains, place the
/// linearised closed-loop poles near {-2 +- 0.5i, -0.9, -0.5, -1}.
struct MipParams {
    double b = 0.02332814930015553;
    double r = 0.1;
    double b1 = 0.02;
    double b2 = 0.0296085409895522;
    double b3 = 1.56430785651527;
    double b4 = 0.05;
    double b5 = 0.0794334377085544;
    double ag = 9.81;

    // u1 = g[0] x2 + g[1] x3 + g[2] x4 + g[3] x5,  u2 = g[4] x6 + g[5] x1
    double g[6] = {0.1091, 7.0089, 1.0014, 0.4302, -0.1929, -0.09645};

    // Gains in the K1 = [k1i], K2 = [k2j] convention u1 = -K1 (x2..x5), u2 = -K2 (x6, x1).
    [[nodiscard]] double k11() const { return -g[0]; }
    [[nodiscard]] double k14() const { return -g[3]; }
    [[nodiscard]] double k21() const { return -g[4]; }
    [[nodiscard]] double k22() const { return -g[5]; }

    [[nodiscard]] double det() const { return b2 * b3 - b5 * b5; }
    [[nodiscard]] double a1() const { return b5 * b3 * ag / det(); }
    [[nodiscard]] double a2() const { return -b5 * b5 * ag / det(); }
    [[nodiscard]] double a3() const { return -(b3 * r + b5) / det(); }
    [[nodiscard]] double a4() const { return (b2 + b5 * r) / det(); }
    [[nodiscard]] double a5() const { return b / (b4 * r); }

    /// Closed-form manifold constants h = (c1 p^2, 0, 0, -c2 p^2, c3 p^3).
    [[nodiscard]] double c1() const { return k14() * k22() / (k11() * k21()); }
    [[nodiscard]] double c2() const { return k22() / k21(); }
    [[nodiscard]] double c3() const {
        return -b4 * k14() * std::pow(k22(), 3) * r / (k11() * std::pow(k21(), 4) * b);
    }
};

/// Full nonlinear vector field f1(x) + h1(x) u1 + h2(x) u2.
template <class T>
void mip_vector_field(const MipParams& p, std::span<const T> x, std::span<const T> u, std::span<T> dx) {
    using std::atanh;
    using std::cos;
    using std::sin;
    const T& x1 = x[0];
    const T& x2 = x[1];
    const T& x3 = x[2];
    const T& x4 = x[3];
    const T& x5 = x[4];
    const T& x6 = x[5];

    const T s3 = sin(x3);
    const T c3 = cos(x3);
    const T s23 = sin(2.0 * x3);
    const T m1 = 2.0 * (p.b2 * p.b3 - p.b5 * p.b5 * c3 * c3);
    const T m2 = p.b4 + p.b1 * s3 * s3;

    dx[0] = (1.0 - x1 * x1) * atanh(x2) * x6;
    dx[1] = (1.0 - x2 * x2) * (x5 - atanh(x1) * x6);
    dx[2] = x4;
    dx[3] = (s23 * (p.b3 * p.b1 * x6 * x6 - p.b5 * p.b5 * x4 * x4) + 2.0 * p.b5 * p.b3 * p.ag * s3 -
             2.0 * (p.b3 * p.r + p.b5 * c3) * u[0]) /
            m1;
    dx[4] = (s23 * (-p.b1 * p.b5 * x5 * x5 * c3 - p.b5 * p.b5 * p.ag) + 2.0 * p.b2 * p.b5 * x4 * x4 * s3 +
             2.0 * (p.b2 + p.b5 * p.r * c3) * u[0]) /
            m1;
    dx[5] = (-p.b1 * x4 * x6 * s23 + p.b / p.r * u[1]) / m2;
}

inline PlantModel mip(const MipParams& params = {}) {
    if (!(params.det() > 0.0) || !(params.b4 > 0.0) || params.b1 < 0.0 || !(params.r > 0.0))
        throw ConfigError("MIP constants must satisfy b2 b3 > b5^2, b4 > 0, b1 >= 0, r > 0");
    PlantModel m;
    m.name = "mip";
    m.k = 1;
    m.nz = 5;
    m.m = 2;
    m.A1 = Matrix::Zero(1, 1);
    m.A2 = Matrix::Zero(5, 5);
    m.A2(0, 3) = 1.0;
    m.A2(1, 2) = 1.0;
    m.A2(2, 1) = params.a1();
    m.A2(3, 1) = params.a2();
    m.B2 = Matrix::Zero(5, 2);
    m.B2(2, 0) = params.a3();
    m.B2(3, 0) = params.a4();
    m.B2(4, 1) = params.a5();
    m.K11 = Matrix::Zero(2, 5);
    m.K11.row(0).head(4) << params.g[0], params.g[1], params.g[2], params.g[3];
    m.K11(1, 4) = params.g[4];
    m.K12 = Matrix::Zero(2, 1);
    m.K12(1, 0) = params.g[5];

    const Matrix A = m.A2, B = m.B2;
    m.set_nonlinearity([params, A, B](auto y, auto z, auto u, auto dy, auto dz) {
        using T = std::remove_cvref_t<decltype(y[0])>;
        T x[6] = {y[0], z[0], z[1], z[2], z[3], z[4]};
        T dx[6];
        mip_vector_field<T>(params, std::span<const T>(x, 6), u, std::span<T>(dx, 6));
        dy[0] = dx[0];
        for (int i = 0; i < 5; ++i) {
            T lin = zero_like(y[0]);
            for (int j = 0; j < 5; ++j)
                if (A(i, j) != 0.0) lin = lin + A(i, j) * z[j];
            for (int j = 0; j < 2; ++j)
                if (B(i, j) != 0.0) lin = lin + B(i, j) * u[j];
            dz[i] = dx[i + 1] - lin;
        }
    });
    m.p = 3.0;
    m.g1_degree = 2;
    m.V1 = ReducedLyapunov{[](double y) { return 0.5 * y * y; }, "p1^2/2"};
    m.in_domain = [](const StatePoint& s) { return std::abs(s.y(0)) < 1.0 && std::abs(s.z(0)) < 1.0; };
    return m;
}

}  // namespace evtrig::models
