#include "catch_amalgamated.hpp"

#include <random>

#include "evtrig/certificates.hpp"
#include "evtrig/linalg.hpp"
#include "oracles.hpp"

using namespace evtrig;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

TEST_CASE("Sylvester solver agrees with the vectorised dense solve", "[linalg]") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> dim(1, 6);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = dim(rng), m = dim(rng);
        const Matrix a = oracle::random_hurwitz(rng, n);
        const Matrix b = oracle::random_hurwitz(rng, m);
        const Matrix c = oracle::random_matrix(rng, n, m);
        const Matrix x = linalg::solve_sylvester(a, b, c);
        const Matrix ref = oracle::sylvester_dense(a, b, c);
        INFO("trial " << trial << " n=" << n << " m=" << m);
        CHECK((x - ref).norm() <= 1e-10 * (1.0 + ref.norm()));
        CHECK((a * x + x * b - c).norm() <= 1e-10 * (1.0 + c.norm()));
    }
}

TEST_CASE("Lyapunov solver agrees with the vectorised dense solve", "[linalg]") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> dim(1, 6);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = dim(rng);
        const Matrix a = oracle::random_hurwitz(rng, n);
        const Matrix m = oracle::random_matrix(rng, n, n);
        const Matrix q = m * m.transpose() + Matrix::Identity(n, n);
        const Matrix p = solve_lyapunov(a, q);
        const Matrix ref = oracle::lyapunov_dense(a, q);
        INFO("trial " << trial);
        CHECK((p - ref).norm() <= 1e-10 * (1.0 + ref.norm()));
        CHECK((a.transpose() * p + p * a + q).norm() <= 1e-10 * q.norm() * std::max(1.0, p.norm()));
        CHECK((p - p.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(linalg::eigen_range(p).min > 0.0);
    }
}

TEST_CASE("small Lyapunov equations with hand solutions", "[linalg]") {
    SECTION("scalar: -2 P = -Q") {
        const Matrix p = solve_lyapunov(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 2.0));
        CHECK_THAT(p(0, 0), WithinAbs(1.0, 1e-14));
    }
    SECTION("companion closed loop [[0,1],[-1,-1]] with Q = I") {
        Matrix a(2, 2);
        a << 0, 1, -1, -1;
        const Matrix p = solve_lyapunov(a, Matrix::Identity(2, 2));
        Matrix expected(2, 2);
        expected << 1.5, 0.5, 0.5, 1.0;
        CHECK((p - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("diagonal") {
        Matrix a = Matrix::Zero(2, 2), q = Matrix::Zero(2, 2);
        a.diagonal() << -1, -2;
        q.diagonal() << 2, 4;
        CHECK((solve_lyapunov(a, q) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("singular and non-Hurwitz inputs are reported", "[linalg]") {
    const Matrix one = Matrix::Constant(1, 1, 1.0);
    CHECK_THROWS_AS(linalg::solve_sylvester(one, -one, one), CertificateError);
    CHECK_THROWS_WITH(linalg::solve_sylvester(one, -one, one), ContainsSubstring("eigenvalue sum"));

    Matrix unstable(2, 2);
    unstable << 0, 1, -2, 3;
    CHECK_THROWS_AS(solve_lyapunov(unstable, Matrix::Identity(2, 2)), CertificateError);
    CHECK_THROWS_WITH(solve_lyapunov(unstable, Matrix::Identity(2, 2)), ContainsSubstring("not Hurwitz"));

    CHECK_THROWS_AS(linalg::solve_sylvester(one, Matrix::Identity(2, 2), one), ConfigError);
    CHECK_THROWS_AS(solve_lyapunov(-one, -one), ConfigError);  // Q not positive definite
}

TEST_CASE("norm and spectrum helpers", "[linalg]") {
    Matrix a(2, 2);
    a << 0, -2, 1, -4;  // lambda^2 + 4 lambda + 2 = 0
    Matrix r1(2, 2);  // rank one: the 2-norm equals the Frobenius norm
    r1 << 0.5, -2, 1, -4;
    CHECK_THAT(linalg::norm2(r1), WithinAbs(std::sqrt(0.25 + 4 + 1 + 16), 1e-12));
    CHECK(linalg::is_hurwitz(-Matrix::Identity(3, 3)));
    CHECK_FALSE(linalg::is_hurwitz(Matrix::Zero(2, 2)));
    CHECK_THAT(linalg::spectral_abscissa(a), WithinAbs(-2.0 + std::sqrt(2.0), 1e-12));
}
