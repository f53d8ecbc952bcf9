#pragma once

// Small dense complex kernel: Hermitian eigendecomposition, PSD square root
// and a pivot-clamped Cholesky factorization. Sized for N_t of a few dozen.

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rsmastat {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Raised when an input violates a documented precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Square complex matrix equal to its conjugate transpose.
///
/// Construction validates symmetry and then stores the exact Hermitian part,
/// so entries(i, j) == conj(entries(j, i)) bitwise and the diagonal is real.
class HermitianMatrix {
public:
    static constexpr double kSymmetryTolerance = 1e-10;

    HermitianMatrix() = default;

    /// Throws PreconditionError naming the worst (i, j) pair when
    /// |m(i,j) - conj(m(j,i))| exceeds tolerance * max(1, max|m|).
    explicit HermitianMatrix(const CMatrix& m, double tolerance = kSymmetryTolerance);

    static HermitianMatrix identity(int dim);
    static HermitianMatrix zero(int dim);

    int dim() const { return static_cast<int>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }
    cdouble operator()(int i, int j) const { return m_(i, j); }

private:
    CMatrix m_;
};

struct EigenDecomposition {
    RVector eigenvalues;   // descending
    CMatrix eigenvectors;  // column i pairs with eigenvalues(i)
};

EigenDecomposition hermitian_evd(const HermitianMatrix& m);

/// Q with Q Q^H = m. Eigenvalues in [-tol, 0) are clamped to zero; anything
/// more negative is rejected.
CMatrix hermitian_sqrt(const HermitianMatrix& m);

/// Lower-triangular L with L L^H = m. Pivots at or below 1e-12 (relative to
/// the largest diagonal) are clamped to zero, so rank-deficient PSD input is
/// accepted. Indefinite input is rejected.
CMatrix cholesky_psd(const HermitianMatrix& m);

/// ||a - ref||_F / max(||ref||_F, tiny).
double relative_frobenius_error(const CMatrix& a, const CMatrix& ref);

/// Eigenvalue tolerance used by the PSD checks, for a matrix whose largest
/// eigenvalue magnitude is `scale`.
double psd_tolerance(double scale);

}  // namespace rsmastat
