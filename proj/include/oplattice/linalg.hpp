#pragma once

// Dense complex matrices, validated Hermitian and unitary operators, and the
// Hermitian eigensolver the rest of the library is built on.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "oplattice/error.hpp"

namespace oplattice {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kDefaultTol = 1e-10;
inline constexpr Complex kI{0.0, 1.0};

inline double frobenius(const Matrix& m) { return m.norm(); }

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

inline Matrix identity(Index n) { return Matrix::Identity(n, n); }

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Tolerance scaled by max(1, ‖m‖_F).
inline double scaled_tol(double tol, const Matrix& m) { return tol * std::max(1.0, frobenius(m)); }

/// Multiplies v by the unit phase that makes its first non-negligible entry real positive.
inline void fix_phase(Eigen::Ref<Vector> v) {
    const double scale = v.cwiseAbs().maxCoeff();
    if (scale == 0.0) return;
    for (Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v(i));
        if (mag > 1e-12 * scale) {
            v *= std::conj(v(i)) / mag;
            v(i) = Complex(mag, 0.0);
            return;
        }
    }
}

inline void require_square(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw NotSquare(m.rows(), m.cols());
    if (!all_finite(m)) throw NonFinite();
}

inline void require_same_dim(Index a, Index b) {
    if (a != b) throw DimensionMismatch(a, b);
}

/// Orthonormal basis (columns) of the column space of m. Singular values at or
/// below rel_tol·σ_max are treated as zero.
inline Matrix column_space(const Matrix& m, double rel_tol = 1e-9) {
    if (m.cols() == 0 || m.rows() == 0) return Matrix(m.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return Matrix(m.rows(), 0);
    const double cut = rel_tol * s(0);
    Index r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    return svd.matrixU().leftCols(r);
}

/// Orthonormal basis (columns) of ker(m). Singular values at or below max(rel_tol·σ_max, abs_floor)
/// are treated as zero; when σ_max ≤ abs_floor the whole domain is returned.
inline Matrix null_space(const Matrix& m, double rel_tol = 1e-9, double abs_floor = 1e-14) {
    const Index n = m.cols();
    if (m.rows() == 0) return identity(n);
    // Compress tall systems to their triangular factor first; the SVD then runs on n×n.
    Matrix work;
    if (m.rows() > 2 * n) {
        Eigen::HouseholderQR<Matrix> qr(m);
        work = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    } else {
        work = m;
    }
    Eigen::JacobiSVD<Matrix> svd(work, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= abs_floor) return identity(n);
    const double cut = std::max(rel_tol * s(0), abs_floor);
    Index r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    return svd.matrixV().rightCols(n - r);
}

/// Validated square complex matrix with A = A*. Stored as the symmetrization (A + A*)/2.
class HermitianOperator {
public:
    static HermitianOperator validated(const Matrix& m, double tol = kDefaultTol) {
        require_square(m);
        const double defect = frobenius(m - m.adjoint());
        if (defect > scaled_tol(tol, m)) throw NotHermitian(defect);
        return HermitianOperator(Matrix((m + m.adjoint()) / 2.0));
    }

    Index dim() const noexcept { return matrix_.rows(); }
    const Matrix& matrix() const noexcept { return matrix_; }

private:
    explicit HermitianOperator(Matrix m) : matrix_(std::move(m)) {}
    Matrix matrix_;
};

/// Rejects inputs whose Hermiticity defect ‖M − M*‖_F exceeds tol·max(1, ‖M‖_F).
inline HermitianOperator validate_hermitian(const Matrix& m, double tol = kDefaultTol) {
    return HermitianOperator::validated(m, tol);
}

inline double unitarity_defect(const Matrix& u) {
    const Matrix id = identity(u.rows());
    return std::max(frobenius(u.adjoint() * u - id), frobenius(u * u.adjoint() - id));
}

class UnitaryOperator {
public:
    static UnitaryOperator validated(const Matrix& m, double tol = kDefaultTol) {
        require_square(m);
        const double defect = unitarity_defect(m);
        if (defect > tol * std::max(1.0, std::sqrt(double(m.rows())))) throw NotUnitary(defect);
        return UnitaryOperator(m);
    }

    Index dim() const noexcept { return matrix_.rows(); }
    const Matrix& matrix() const noexcept { return matrix_; }
    UnitaryOperator adjoint() const { return UnitaryOperator(matrix_.adjoint()); }

    friend UnitaryOperator operator*(const UnitaryOperator& a, const UnitaryOperator& b) {
        require_same_dim(a.dim(), b.dim());
        return UnitaryOperator(a.matrix_ * b.matrix_);
    }

private:
    explicit UnitaryOperator(Matrix m) : matrix_(std::move(m)) {}
    Matrix matrix_;
};

/// Ascending real eigenvalues with orthonormal, phase-fixed eigenvectors (columns).
struct EigenSystem {
    RealVector eigenvalues;
    Matrix eigenvectors;

    double reconstruction_residual(const Matrix& a) const {
        return frobenius(a * eigenvectors - eigenvectors * eigenvalues.cast<Complex>().asDiagonal());
    }
    double orthonormality_residual() const {
        return frobenius(eigenvectors.adjoint() * eigenvectors - identity(eigenvectors.cols()));
    }
};

inline EigenSystem eig_hermitian(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success) throw ConvergenceFailure("eig_hermitian");
    EigenSystem es{solver.eigenvalues(), solver.eigenvectors()};
    for (Index k = 0; k < es.eigenvectors.cols(); ++k) fix_phase(es.eigenvectors.col(k));
    // The solver already returns ascending order; re-sort stably so the contract
    // does not hinge on that detail.
    std::vector<Index> order(static_cast<std::size_t>(es.eigenvalues.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index i, Index j) { return es.eigenvalues(i) < es.eigenvalues(j); });
    if (!std::is_sorted(order.begin(), order.end())) {
        EigenSystem sorted{RealVector(es.eigenvalues.size()), Matrix(es.eigenvectors.rows(), es.eigenvectors.cols())};
        for (std::size_t k = 0; k < order.size(); ++k) {
            sorted.eigenvalues(Index(k)) = es.eigenvalues(order[k]);
            sorted.eigenvectors.col(Index(k)) = es.eigenvectors.col(order[k]);
        }
        return sorted;
    }
    return es;
}

inline EigenSystem eig_hermitian(const HermitianOperator& a) { return eig_hermitian(a.matrix()); }

/// Largest singular value.
inline double operator_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

/// Smallest eigenvalue of the Hermitian part of m.
inline double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver((m + m.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw ConvergenceFailure("min_eigenvalue");
    return solver.eigenvalues()(0);
}

/// sin of the largest principal angle between the column spans of two orthonormal bases;
/// 1 when the dimensions differ.
inline double subspace_distance(const Matrix& q1, const Matrix& q2) {
    if (q1.cols() != q2.cols()) return 1.0;
    if (q1.cols() == 0) return 0.0;
    const Matrix residual = q2 - q1 * (q1.adjoint() * q2);
    return operator_norm(residual);
}

}  // namespace oplattice
