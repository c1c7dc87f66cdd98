#include "catch_amalgamated.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "evtrig/dynamics.hpp"
#include "evtrig/manifold.hpp"
#include "evtrig/models.hpp"

using namespace evtrig;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

StatePoint point(std::initializer_list<double> y, std::initializer_list<double> z) { return {vec(y), vec(z)}; }

}  // namespace

TEST_CASE("first example vector field", "[dynamics]") {
    const PlantModel m = models::example1();
    const auto d0 = eval_dynamics(m, point({0}, {0}), vec({0}));
    CHECK(d0.dy(0) == 0.0);
    CHECK(d0.dz(0) == 0.0);
    // y' = -y v, v' = v + u + y^2 - 2 v^2 at (1, 1), u = 0
    const auto d1 = eval_dynamics(m, point({1}, {1}), vec({0}));
    CHECK(d1.dy(0) == -1.0);
    CHECK(d1.dz(0) == 0.0);
}

TEST_CASE("second example vector field", "[dynamics]") {
    const PlantModel m = models::example2();
    // y' = -y (z1 - 4 z2) = 0, z1' = z2 + y^2 = 1, z2' = -2 z1 + 3 z2 + u = 0
    const auto d = eval_dynamics(m, point({1}, {0, 0}), vec({0}));
    CHECK(d.dy(0) == 0.0);
    CHECK(d.dz(0) == 1.0);
    CHECK(d.dz(1) == 0.0);
    const auto d2 = eval_dynamics(m, point({0.5}, {0.2, -0.1}), vec({0.3}));
    CHECK_THAT(d2.dy(0), WithinAbs(-0.5 * (0.2 + 0.4), 1e-15));
    CHECK_THAT(d2.dz(0), WithinAbs(-0.1 + 0.25, 1e-15));
    CHECK_THAT(d2.dz(1), WithinAbs(-0.4 - 0.3 + 0.3, 1e-15));
}

TEST_CASE("held control", "[dynamics]") {
    CHECK(held_control(models::example1(), point({0.3}, {1}))(0) == -2.0);
    CHECK(held_control(models::example2(), point({0.3}, {1, 1}))(0) == -3.0);
    for (const auto& m : {models::example1(), models::example2(), models::mip()}) {
        const StatePoint zero{Vector::Zero(m.k), Vector::Zero(m.nz)};
        CHECK(held_control(m, zero).norm() == 0.0);
    }
}

TEST_CASE("polynomial feedback enters the held control", "[dynamics]") {
    PlantModel m = models::example1();
    set_polynomial_feedback(m, {{{2, 0.5}, {3, -1.0}}});
    const Vector u = held_control(m, point({2.0}, {1.0}));
    CHECK_THAT(u(0), WithinAbs(-2.0 + 0.5 * 4.0 - 8.0, 1e-15));
    CHECK_THROWS_AS(set_polynomial_feedback(m, {{{1, 1.0}}}), ConfigError);
}

TEST_CASE("manifold coordinates", "[dynamics]") {
    SECTION("points on y^2 map to w = 0") {
        const PlantModel m = models::example1();
        const PolyManifold h = PolyManifold::from_terms({{{2, 1.0}}}, 2, true);
        const auto [y, w] = to_w(m, Matrix::Zero(1, 1), h, point({0.5}, {0.25}));
        CHECK(y(0) == 0.5);
        CHECK(w(0) == 0.0);
    }
    SECTION("E = 0 and h = 0 give w = z") {
        const PlantModel m = models::example2();
        const auto [y, w] = to_w(m, Matrix::Zero(2, 1), PolyManifold::zero(2), point({0.3}, {0.1, -0.7}));
        CHECK(w(0) == 0.1);
        CHECK(w(1) == -0.7);
    }
    SECTION("second example on its order-2 manifold") {
        const PlantModel m = models::example2();
        const PolyManifold h = PolyManifold::from_terms({{{2, 1.0}}, {{2, -1.0}}}, 2);
        const auto [y, w] = to_w(m, Matrix::Zero(2, 1), h, point({0.1}, {0.01, -0.01}));
        CHECK_THAT(w(0), WithinAbs(0.0, 1e-17));
        CHECK_THAT(w(1), WithinAbs(0.0, 1e-17));
    }
}

TEST_CASE("from_w inverts to_w", "[dynamics]") {
    const PlantModel m = models::mip();
    const Matrix E = solve_coupling(m);
    const PolyManifold h = solve_series(m, E, 5);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        Vector x(6);
        for (int j = 0; j < 6; ++j) x(j) = g(rng);
        x *= std::pow(u(rng), 1.0 / 6.0) / x.norm();
        const StatePoint s{x.head(1), x.tail(5)};
        const auto [y, w] = to_w(m, E, h, s);
        const StatePoint back = from_w(m, E, h, y, w);
        REQUIRE((back.z - s.z).cwiseAbs().maxCoeff() <= 1e-12);
        REQUIRE(back.y == s.y);
    }
}

TEST_CASE("dimension and overflow errors", "[dynamics]") {
    const PlantModel m = models::example2();
    CHECK_THROWS_AS(eval_dynamics(m, point({1}, {0}), vec({0})), ConfigError);
    CHECK_THROWS_AS(eval_dynamics(m, point({1}, {0, 0}), vec({0, 0})), ConfigError);

    PlantModel bad = models::example2();
    bad.set_nonlinearity([](auto y, auto, auto, auto dy, auto dz) {
        dy[0] = y[0] * y[0];
        dz[0] = zero_like(y[0]);
        dz[1] = y[0] * y[0] * std::numeric_limits<double>::infinity();
    });
    CHECK_THROWS_AS(eval_dynamics(bad, point({1}, {0, 0}), vec({0})), NumericOverflowError);
    CHECK_THROWS_WITH(eval_dynamics(bad, point({1}, {0, 0}), vec({0})), ContainsSubstring("z2"));
}

TEST_CASE("model validation", "[dynamics]") {
    CHECK_NOTHROW(models::example1().validate());
    CHECK_NOTHROW(models::example2().validate());
    CHECK_NOTHROW(models::mip().validate());

    PlantModel linear = models::example1();
    linear.set_nonlinearity([](auto y, auto z, auto, auto dy, auto dz) {
        dy[0] = 0.5 * z[0];
        dz[0] = y[0] * y[0];
    });
    CHECK_THROWS_AS(linear.validate(), ConfigError);

    PlantModel offset = models::example1();
    offset.set_nonlinearity([](auto y, auto, auto, auto dy, auto dz) {
        dy[0] = zero_like(y[0]) + 1e-3;
        dz[0] = zero_like(y[0]);
    });
    CHECK_THROWS_AS(offset.validate(), ConfigError);

    PlantModel unstable = models::example1();
    unstable.K11(0, 0) = 0.0;
    CHECK_THROWS_AS(unstable.validate(), CertificateError);
}

TEST_CASE("pendulum model: decomposition reproduces the full vector field", "[dynamics][mip]") {
    const models::MipParams p;
    const PlantModel m = models::mip(p);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < 200; ++i) {
        double x[6], uu[2], dx[6];
        for (double& xi : x) xi = u(rng);
        for (double& ui : uu) ui = u(rng);
        models::mip_vector_field<double>(p, x, uu, dx);
        const StatePoint s{vec({x[0]}), vec({x[1], x[2], x[3], x[4], x[5]})};
        const auto d = eval_dynamics(m, s, vec({uu[0], uu[1]}));
        CHECK_THAT(d.dy(0), WithinAbs(dx[0], 1e-12));
        for (int j = 0; j < 5; ++j) CHECK_THAT(d.dz(j), WithinAbs(dx[j + 1], 1e-12));
    }
}

TEST_CASE("pendulum model: linear part matches the finite-difference Jacobian", "[dynamics][mip]") {
    const models::MipParams p;
    const PlantModel m = models::mip(p);
    const double h = 1e-6;
    Matrix J = Matrix::Zero(6, 8);
    for (int j = 0; j < 8; ++j) {
        double xp[6] = {}, xm[6] = {}, up[2] = {}, um[2] = {}, fp[6], fm[6];
        if (j < 6) {
            xp[j] = h;
            xm[j] = -h;
        } else {
            up[j - 6] = h;
            um[j - 6] = -h;
        }
        models::mip_vector_field<double>(p, xp, up, fp);
        models::mip_vector_field<double>(p, xm, um, fm);
        for (int i = 0; i < 6; ++i) J(i, j) = (fp[i] - fm[i]) / (2 * h);
    }
    CHECK(J.row(0).norm() < 1e-8);
    CHECK((J.block(1, 1, 5, 5) - m.A2).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((J.block(1, 6, 5, 2) - m.B2).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(J.block(1, 0, 5, 1).norm() < 1e-8);
}

TEST_CASE("pendulum model: inertia terms stay positive", "[dynamics][mip]") {
    const models::MipParams p;
    for (int i = 0; i <= 1000; ++i) {
        const double th = -std::numbers::pi + 2.0 * std::numbers::pi * i / 1000.0;
        const double c = std::cos(th), s = std::sin(th);
        CHECK(2.0 * (p.b2 * p.b3 - p.b5 * p.b5 * c * c) > 0.0);
        CHECK(p.b4 + p.b1 * s * s > 0.0);
    }
    models::MipParams bad;
    bad.b5 = 1.0;
    CHECK_THROWS_AS(models::mip(bad), ConfigError);
}
