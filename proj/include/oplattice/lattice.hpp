#pragma once

// The orthomodular lattice of orthogonal projectors: orthocomplement, meet, join,
// commutation and the alternating-product meet.

#include <cmath>
#include <optional>
#include <vector>

#include "oplattice/linalg.hpp"
#include "oplattice/projector.hpp"

namespace oplattice {

/// ¬P = I − P.
inline Projector neg(const Projector& p) {
    const Index n = p.dim();
    // Range of I − P is the orthogonal complement of range(P).
    Matrix complement = p.rank() == 0 ? identity(n) : null_space(p.range().adjoint());
    if (p.rank() == n) complement = Matrix(n, 0);
    return Projector::from_orthonormal(std::move(complement));
}

/// Projector onto range(P) ∩ range(Q), computed as the orthogonal complement of
/// span(range(¬P) ∪ range(¬Q)).
inline Projector meet(const Projector& p, const Projector& q, double rel_tol = 1e-9) {
    require_same_dim(p.dim(), q.dim());
    const Index n = p.dim();
    const Projector np = neg(p), nq = neg(q);
    Matrix stacked(n, np.rank() + nq.rank());
    stacked << np.range(), nq.range();
    if (stacked.cols() == 0) return Projector::identity(n);
    const Matrix span = column_space(stacked, rel_tol);
    if (span.cols() == n) return Projector::zero(n);
    if (span.cols() == 0) return Projector::identity(n);
    return Projector::from_orthonormal(null_space(span.adjoint(), rel_tol));
}

/// Projector onto span(range(P) ∪ range(Q)).
inline Projector join(const Projector& p, const Projector& q, double rel_tol = 1e-9) {
    require_same_dim(p.dim(), q.dim());
    Matrix stacked(p.dim(), p.rank() + q.rank());
    stacked << p.range(), q.range();
    if (stacked.cols() == 0) return Projector::zero(p.dim());
    return Projector::onto(stacked, rel_tol);
}

/// P ≤ Q, tested as ‖QP − P‖_F ≤ tol.
inline bool leq(const Projector& p, const Projector& q, double tol = kDefaultTol) {
    require_same_dim(p.dim(), q.dim());
    return frobenius(q.matrix() * p.matrix() - p.matrix()) <= tol;
}

struct JauchResult {
    Matrix limit;
    int steps = 0;         ///< squarings performed
    double residual = 0;   ///< ‖M_{k+1} − M_k‖_F at exit
};

/// Limit of the alternating products (PQP)^m, approached along m = 2^k by repeated
/// squaring; stops when consecutive iterates differ by at most tol in Frobenius norm.
inline JauchResult jauch_meet_iterate(const Projector& p, const Projector& q, double tol = kDefaultTol,
                                      int max_iter = 200) {
    require_same_dim(p.dim(), q.dim());
    Matrix m = p.matrix() * q.matrix() * p.matrix();
    m = (m + m.adjoint()) / 2.0;
    double residual = 0.0;
    for (int k = 1; k <= max_iter; ++k) {
        Matrix next = m * m;
        next = (next + next.adjoint()) / 2.0;
        residual = frobenius(next - m);
        m = std::move(next);
        if (residual <= tol) return {std::move(m), k, residual};
    }
    throw MaxIterExceeded(max_iter, residual);
}

inline Projector jauch_meet(const Projector& p, const Projector& q, double tol = kDefaultTol, int max_iter = 200) {
    const JauchResult r = jauch_meet_iterate(p, q, tol, max_iter);
    // The limit is a projector up to tol; its range is read off with the 1/2 threshold.
    const EigenSystem es = eig_hermitian(r.limit);
    Index first = 0;
    while (first < es.eigenvalues.size() && es.eigenvalues(first) <= 0.5) ++first;
    return Projector::from_orthonormal(es.eigenvectors.rightCols(es.eigenvalues.size() - first));
}

/// Frobenius norms of the plain alternating iterates (PQP)^m for m = 1..steps.
inline std::vector<double> alternating_product_norms(const Projector& p, const Projector& q, int steps) {
    require_same_dim(p.dim(), q.dim());
    const Matrix base = p.matrix() * q.matrix() * p.matrix();
    std::vector<double> norms;
    norms.reserve(static_cast<std::size_t>(steps));
    Matrix m = base;
    for (int k = 1; k <= steps; ++k) {
        norms.push_back(frobenius(m));
        m = m * base;
    }
    return norms;
}

/// P₁ = P(I−Q), P₂ = Q(I−P), P₃ = PQ for a commuting pair.
struct CommutingDecomposition {
    Matrix p_only;
    Matrix q_only;
    Matrix both;
    double orthogonality_defect = 0;  ///< max pairwise ‖P_i P_j‖_F
};

struct CommutationReport {
    bool commutes = false;
    double defect = 0;  ///< ‖PQ − QP‖_F
    std::optional<CommutingDecomposition> decomposition;
};

inline CommutationReport commutation(const Projector& p, const Projector& q, double tol = kDefaultTol) {
    require_same_dim(p.dim(), q.dim());
    CommutationReport rep;
    rep.defect = frobenius(commutator(p.matrix(), q.matrix()));
    rep.commutes = rep.defect <= tol;
    if (rep.commutes) {
        const Matrix id = identity(p.dim());
        CommutingDecomposition d{p.matrix() * (id - q.matrix()), q.matrix() * (id - p.matrix()),
                                 p.matrix() * q.matrix(), 0.0};
        d.orthogonality_defect = std::max({frobenius(d.p_only * d.q_only), frobenius(d.p_only * d.both),
                                           frobenius(d.q_only * d.both)});
        rep.decomposition = std::move(d);
    }
    return rep;
}

inline bool commutes(const Projector& p, const Projector& q, double tol = kDefaultTol) {
    return commutation(p, q, tol).commutes;
}

/// Checks Q = P ∨ (¬P ∧ Q) for P ≤ Q; throws NotComparable when P ≤ Q fails.
inline bool orthomodular_check(const Projector& p, const Projector& q, double tol = kDefaultTol) {
    require_same_dim(p.dim(), q.dim());
    const double order_defect = frobenius(q.matrix() * p.matrix() - p.matrix());
    if (order_defect > tol) throw NotComparable(order_defect);
    const Projector rhs = join(p, meet(neg(p), q));
    return frobenius(rhs.matrix() - q.matrix()) <= tol * std::max(1.0, frobenius(q.matrix()));
}

}  // namespace oplattice
