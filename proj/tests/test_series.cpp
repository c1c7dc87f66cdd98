#include "catch_amalgamated.hpp"

#include <cmath>

#include "evtrig/series.hpp"

using evtrig::Series;
using Catch::Matchers::WithinAbs;

namespace {

Series poly(std::vector<double> c) { return Series::from_coefficients(std::move(c)); }

}  // namespace

TEST_CASE("series arithmetic truncates at the larger degree", "[series]") {
    const Series a = poly({1, 2, 0, 0});
    const Series b = poly({0, 1, 3, 0});
    const Series p = a * b;  // y + 5 y^2 + 6 y^3
    REQUIRE(p.degree() == 3);
    CHECK(p[0] == 0.0);
    CHECK(p[1] == 1.0);
    CHECK(p[2] == 5.0);
    CHECK(p[3] == 6.0);

    const Series y = Series::variable(4);
    const Series big = y * y * y * y * y;  // y^5 falls off the end
    for (std::size_t d = 0; d <= 4; ++d) CHECK(big[d] == 0.0);
}

TEST_CASE("series division inverts multiplication", "[series]") {
    const Series a = poly({2, -1, 0.5, 3, 0, 0});
    const Series b = poly({1, 4, -2, 0, 1, 0});
    const Series q = (a * b) / b;
    for (std::size_t d = 0; d <= 5; ++d) CHECK_THAT(q[d], WithinAbs(a[d], 1e-12));
    CHECK_THROWS_AS(a / Series::variable(5), std::domain_error);
}

TEST_CASE("elementary functions match their Taylor coefficients", "[series]") {
    const Series y = Series::variable(7);
    const Series s = sin(y), c = cos(y), t = tanh(y), at = atanh(y);
    // sin y = y - y^3/6 + y^5/120 - y^7/5040
    CHECK_THAT(s[1], WithinAbs(1.0, 1e-15));
    CHECK_THAT(s[3], WithinAbs(-1.0 / 6, 1e-15));
    CHECK_THAT(s[5], WithinAbs(1.0 / 120, 1e-15));
    CHECK_THAT(s[7], WithinAbs(-1.0 / 5040, 1e-15));
    // cos y = 1 - y^2/2 + y^4/24 - y^6/720
    CHECK_THAT(c[0], WithinAbs(1.0, 1e-15));
    CHECK_THAT(c[2], WithinAbs(-0.5, 1e-15));
    CHECK_THAT(c[4], WithinAbs(1.0 / 24, 1e-15));
    CHECK_THAT(c[6], WithinAbs(-1.0 / 720, 1e-15));
    // tanh y = y - y^3/3 + 2 y^5/15 - 17 y^7/315
    CHECK_THAT(t[3], WithinAbs(-1.0 / 3, 1e-15));
    CHECK_THAT(t[5], WithinAbs(2.0 / 15, 1e-15));
    CHECK_THAT(t[7], WithinAbs(-17.0 / 315, 1e-15));
    // atanh y = y + y^3/3 + y^5/5 + y^7/7
    for (int d : {1, 3, 5, 7}) CHECK_THAT(at[d], WithinAbs(1.0 / d, 1e-15));
    for (int d : {0, 2, 4, 6}) CHECK_THAT(at[d], WithinAbs(0.0, 1e-15));
}

TEST_CASE("composition with a shifted argument agrees with pointwise evaluation", "[series]") {
    // f(a(y)) for a = 0.3 + y - 0.5 y^2, evaluated at a small y
    const Series y = Series::variable(12);
    const Series a = 0.3 + y - 0.5 * y * y;
    const double x = 0.01;
    const double ax = 0.3 + x - 0.5 * x * x;
    CHECK_THAT(sin(a).eval(x), WithinAbs(std::sin(ax), 1e-14));
    CHECK_THAT(cos(a).eval(x), WithinAbs(std::cos(ax), 1e-14));
    CHECK_THAT(tanh(a).eval(x), WithinAbs(std::tanh(ax), 1e-14));
    CHECK_THAT(atanh(a).eval(x), WithinAbs(std::atanh(ax), 1e-14));
    CHECK_THAT((1.0 / (2.0 + a)).eval(x), WithinAbs(1.0 / (2.0 + ax), 1e-14));
    CHECK_THROWS_AS(atanh(1.0 + y), std::domain_error);
}

TEST_CASE("derivative, integral and integer powers", "[series]") {
    const Series p = poly({1, 2, 3, 4});
    const Series d = p.derivative();
    CHECK(d[0] == 2.0);
    CHECK(d[1] == 6.0);
    CHECK(d[2] == 12.0);
    CHECK(d[3] == 0.0);
    const Series back = d.integral(1.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK_THAT(back[i], WithinAbs(p[i], 1e-15));

    const Series q = pow(poly({1, 1, 0, 0, 0}), 4);  // (1 + y)^4
    const double binom[] = {1, 4, 6, 4, 1};
    for (std::size_t i = 0; i <= 4; ++i) CHECK(q[i] == binom[i]);
    const Series inv = pow(poly({1, 1, 0, 0, 0}), -1);  // 1 - y + y^2 - ...
    for (std::size_t i = 0; i <= 4; ++i) CHECK(inv[i] == (i % 2 ? -1.0 : 1.0));
}

TEST_CASE("zero_like keeps the truncation degree", "[series]") {
    CHECK(evtrig::zero_like(3.5) == 0.0);
    const Series z = evtrig::zero_like(Series::variable(6));
    CHECK(z.degree() == 6);
    CHECK(z[1] == 0.0);
}
