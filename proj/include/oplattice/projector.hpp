#pragma once

#include <cmath>

#include "oplattice/linalg.hpp"

namespace oplattice {

/// Orthogonal projector P = P² = P*, carried together with an orthonormal basis of its range.
class Projector {
public:
    /// Validates an arbitrary matrix. The range basis is read off the eigendecomposition
    /// with 0/1 thresholding at 1/2.
    static Projector validated(const Matrix& m, double tol = kDefaultTol) {
        require_square(m);
        const double scale = std::max(1.0, frobenius(m));
        const double herm = frobenius(m - m.adjoint());
        if (herm > tol * scale) throw NotProjector("P != P*, defect " + detail::fmt_real(herm));
        const Matrix sym = (m + m.adjoint()) / 2.0;
        const double idem = frobenius(sym * sym - sym);
        if (idem > tol * scale) throw NotProjector("P^2 != P, defect " + detail::fmt_real(idem));
        const double tr = sym.trace().real();
        if (std::abs(tr - std::round(tr)) > tol * scale)
            throw NotProjector("trace " + detail::fmt_real(tr) + " is not an integer");
        const EigenSystem es = eig_hermitian(sym);
        Index first = 0;
        while (first < es.eigenvalues.size() && es.eigenvalues(first) <= 0.5) ++first;
        Matrix range = es.eigenvectors.rightCols(es.eigenvalues.size() - first);
        return Projector(sym, std::move(range));
    }

    /// Projector onto the span of the given columns (orthonormalized internally).
    static Projector onto(const Matrix& columns, double rel_tol = 1e-9) {
        return from_orthonormal(column_space(columns, rel_tol));
    }

    /// Builds V V* from a basis already known to be orthonormal.
    static Projector from_orthonormal(Matrix basis) {
        Matrix p = basis * basis.adjoint();
        return Projector(std::move(p), std::move(basis));
    }

    static Projector zero(Index n) { return Projector(Matrix::Zero(n, n), Matrix(n, 0)); }
    static Projector identity(Index n) { return Projector(oplattice::identity(n), oplattice::identity(n)); }

    Index dim() const noexcept { return matrix_.rows(); }
    Index rank() const noexcept { return range_.cols(); }
    const Matrix& matrix() const noexcept { return matrix_; }
    /// Orthonormal basis of the range, one column per dimension.
    const Matrix& range() const noexcept { return range_; }

private:
    Projector(Matrix m, Matrix range) : matrix_(std::move(m)), range_(std::move(range)) {}
    Matrix matrix_;
    Matrix range_;
};

}  // namespace oplattice
