#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <limits>
#include <sstream>
#include <string>

#include "evtrig/errors.hpp"

namespace evtrig {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

inline Eigen::VectorXcd eigenvalues(const Matrix& a) {
    if (a.size() == 0) return {};
    return Eigen::EigenSolver<Matrix>(a, false).eigenvalues();
}

/// Largest real part of the spectrum (-inf for an empty matrix).
inline double spectral_abscissa(const Matrix& a) {
    const auto ev = eigenvalues(a);
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) m = std::max(m, ev[i].real());
    return m;
}

inline bool is_hurwitz(const Matrix& a, double margin = 1e-9) { return spectral_abscissa(a) < -margin; }

/// Induced 2-norm.
inline double norm2(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

struct SymmetricRange {
    double min;
    double max;
};

inline SymmetricRange eigen_range(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

inline std::string format_eigenvalues(const Eigen::VectorXcd& ev) {
    std::ostringstream os;
    os << '[';
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (i) os << ", ";
        os << ev[i].real();
        if (ev[i].imag() != 0.0) os << (ev[i].imag() > 0 ? "+" : "-") << std::abs(ev[i].imag()) << 'i';
    }
    os << ']';
    return os.str();
}

/// Solves A X + X B = C by the Bartels-Stewart method on complex Schur forms.
/// Throws CertificateError when some eigenvalue sum lambda_i(A) + mu_j(B) is
/// numerically zero (the Sylvester operator is singular).
inline Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c, double singular_tol = 1e-12) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || c.rows() != a.rows() || c.cols() != b.rows())
        throw ConfigError("solve_sylvester: dimension mismatch");
    using CMatrix = Eigen::MatrixXcd;
    const Eigen::Index n = a.rows(), m = b.rows();
    if (n == 0 || m == 0) return Matrix::Zero(n, m);

    Eigen::ComplexSchur<Matrix> sa(a), sb(b);
    const CMatrix& t = sa.matrixT();
    const CMatrix& u = sa.matrixU();
    const CMatrix& s = sb.matrixT();
    const CMatrix& v = sb.matrixU();

    const double scale = std::max({1.0, t.cwiseAbs().maxCoeff(), s.cwiseAbs().maxCoeff()});
    CMatrix f = u.adjoint() * c.cast<std::complex<double>>() * v;
    CMatrix y = CMatrix::Zero(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::VectorXcd rhs = f.col(j);
        for (Eigen::Index i = 0; i < j; ++i) rhs -= s(i, j) * y.col(i);
        CMatrix lhs = t;
        for (Eigen::Index k = 0; k < n; ++k) {
            lhs(k, k) += s(j, j);
            if (std::abs(lhs(k, k)) <= singular_tol * scale) {
                std::ostringstream os;
                os << "singular Sylvester operator: eigenvalue sum " << t(k, k) << " + " << s(j, j) << " = "
                   << lhs(k, k) << " is numerically zero";
                throw CertificateError(os.str());
            }
        }
        y.col(j) = lhs.triangularView<Eigen::Upper>().solve(rhs);
    }
    return (u * y * v.adjoint()).real();
}

/// Solves A^T P + P A + Q = 0 for P; A must be Hurwitz.
inline Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
    if (a.rows() != a.cols() || q.rows() != a.rows() || q.cols() != a.cols())
        throw ConfigError("solve_lyapunov: dimension mismatch");
    if (!is_hurwitz(a)) {
        throw CertificateError("solve_lyapunov: closed-loop matrix is not Hurwitz; eigenvalues " +
                               format_eigenvalues(eigenvalues(a)));
    }
    Matrix p = solve_sylvester(a.transpose(), a, -q);
    return 0.5 * (p + p.transpose());
}

}  // namespace linalg
}  // namespace evtrig
