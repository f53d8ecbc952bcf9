#include "rsmastat/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace rsmastat {

namespace {

constexpr int kMaxJacobiSweeps = 100;
constexpr double kPsdTolerance = 1e-10;
constexpr double kPivotClamp = 1e-12;

double max_abs_entry(const CMatrix& m) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) best = std::max(best, std::abs(m(i, j)));
    return best;
}

double off_diagonal_norm2(const CMatrix& a) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (i != j) s += std::norm(a(i, j));
    return s;
}

}  // namespace

HermitianMatrix::HermitianMatrix(const CMatrix& m, double tolerance) {
    if (m.rows() != m.cols()) {
        std::ostringstream os;
        os << "HermitianMatrix: matrix is " << m.rows() << "x" << m.cols() << ", not square";
        throw PreconditionError(os.str());
    }
    const double scale = std::max(1.0, max_abs_entry(m));
    double worst = 0.0;
    Eigen::Index wi = 0, wj = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double d = std::abs(m(i, j) - std::conj(m(j, i)));
            if (d > worst) {
                worst = d;
                wi = i;
                wj = j;
            }
        }
    }
    if (worst > tolerance * scale) {
        std::ostringstream os;
        os << "HermitianMatrix: not Hermitian; worst pair (" << wi << "," << wj
           << ") has |m(i,j) - conj(m(j,i))| = " << worst;
        throw PreconditionError(os.str());
    }
    m_ = CMatrix(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        m_(j, j) = cdouble(m(j, j).real(), 0.0);
        for (Eigen::Index i = 0; i < j; ++i) {
            const cdouble v = 0.5 * (m(i, j) + std::conj(m(j, i)));
            m_(i, j) = v;
            m_(j, i) = std::conj(v);
        }
    }
}

HermitianMatrix HermitianMatrix::identity(int dim) {
    return HermitianMatrix(CMatrix::Identity(dim, dim));
}

HermitianMatrix HermitianMatrix::zero(int dim) {
    return HermitianMatrix(CMatrix::Zero(dim, dim));
}

double psd_tolerance(double scale) {
    return kPsdTolerance * std::max(1.0, scale);
}

// Cyclic complex Jacobi. Each rotation first removes the phase of a(p,q)
// with a diagonal unitary, then applies the real symmetric Jacobi rotation.
EigenDecomposition hermitian_evd(const HermitianMatrix& m) {
    const int n = m.dim();
    CMatrix a = m.matrix();
    CMatrix v = CMatrix::Identity(n, n);

    const double total = a.squaredNorm();
    for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
        if (off_diagonal_norm2(a) <= 1e-30 * std::max(total, 1e-300)) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cdouble apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-300) continue;
                const cdouble phase = apq / mag;  // e^{i phi}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double zeta = (aqq - app) / (2.0 * mag);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // G restricted to (p,q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                const cdouble gpp = c;
                const cdouble gpq = s;
                const cdouble gqp = -s * std::conj(phase);
                const cdouble gqq = c * std::conj(phase);
                for (int k = 0; k < n; ++k) {
                    const cdouble akp = a(k, p);
                    const cdouble akq = a(k, q);
                    a(k, p) = akp * gpp + akq * gqp;
                    a(k, q) = akp * gpq + akq * gqq;
                    const cdouble vkp = v(k, p);
                    const cdouble vkq = v(k, q);
                    v(k, p) = vkp * gpp + vkq * gqp;
                    v(k, q) = vkp * gpq + vkq * gqq;
                }
                for (int k = 0; k < n; ++k) {
                    const cdouble apk = a(p, k);
                    const cdouble aqk = a(q, k);
                    a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
                    a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = app - t * mag;
                a(q, q) = aqq + t * mag;
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i).real() > a(j, j).real(); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.eigenvalues(i) = a(order[i], order[i]).real();
        out.eigenvectors.col(i) = v.col(order[i]);
    }
    return out;
}

CMatrix hermitian_sqrt(const HermitianMatrix& m) {
    const EigenDecomposition evd = hermitian_evd(m);
    const int n = m.dim();
    if (n == 0) return CMatrix(0, 0);
    const double scale = std::max(std::abs(evd.eigenvalues(0)), std::abs(evd.eigenvalues(n - 1)));
    const double tol = psd_tolerance(scale);
    RVector root(n);
    for (int i = 0; i < n; ++i) {
        const double lambda = evd.eigenvalues(i);
        if (lambda < -tol) {
            std::ostringstream os;
            os << "hermitian_sqrt: matrix is not PSD (eigenvalue " << lambda << ")";
            throw PreconditionError(os.str());
        }
        root(i) = std::sqrt(std::max(lambda, 0.0));
    }
    return evd.eigenvectors * root.asDiagonal() * evd.eigenvectors.adjoint();
}

CMatrix cholesky_psd(const HermitianMatrix& m) {
    const int n = m.dim();
    const CMatrix& a = m.matrix();
    CMatrix l = CMatrix::Zero(n, n);
    double diag_scale = 0.0;
    for (int i = 0; i < n; ++i) diag_scale = std::max(diag_scale, a(i, i).real());
    const double clamp = kPivotClamp * std::max(diag_scale, 1e-300);
    const double neg_tol = psd_tolerance(diag_scale);
    const double residual_tol = 1e-8 * std::max(1.0, diag_scale);

    for (int j = 0; j < n; ++j) {
        double d = a(j, j).real();
        for (int k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (d < -neg_tol) {
            std::ostringstream os;
            os << "cholesky_psd: matrix is indefinite (pivot " << j << " = " << d << ")";
            throw PreconditionError(os.str());
        }
        if (d <= clamp) {
            // Clamped pivot: the rest of the column must already be explained.
            for (int i = j + 1; i < n; ++i) {
                cdouble r = a(i, j);
                for (int k = 0; k < j; ++k) r -= l(i, k) * std::conj(l(j, k));
                if (std::abs(r) > residual_tol) {
                    std::ostringstream os;
                    os << "cholesky_psd: matrix is indefinite (zero pivot " << j
                       << " with residual " << std::abs(r) << " at row " << i << ")";
                    throw PreconditionError(os.str());
                }
            }
            continue;
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            cdouble r = a(i, j);
            for (int k = 0; k < j; ++k) r -= l(i, k) * std::conj(l(j, k));
            l(i, j) = r / ljj;
        }
    }
    return l;
}

double relative_frobenius_error(const CMatrix& a, const CMatrix& ref) {
    const double denom = std::max(ref.norm(), 1e-300);
    return (a - ref).norm() / denom;
}

}  // namespace rsmastat
