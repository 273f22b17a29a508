#pragma once

// Finite-dimensional *-algebras given by structure constants, algebraic states and the
// GNS representation.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "oplattice/algebras.hpp"
#include "oplattice/linalg.hpp"
#include "oplattice/states.hpp"

namespace oplattice {

/// b_i b_j = Σ_k c_{ij}^k b_k, b_i* = Σ_k s_i^k b_k, 𝟙 = Σ_k u_k b_k. The involution is
/// antilinear: (Σ x_i b_i)* = Σ conj(x_i) b_i*.
class AbstractStarAlgebra {
public:
    /// mult[i][j] holds the coefficient vector of b_i b_j; invol(i, k) = s_i^k.
    static AbstractStarAlgebra validated(std::vector<std::vector<Vector>> mult, Matrix invol, Vector unit,
                                         double tol = 1e-9) {
        const Index m = unit.size();
        if (m == 0) throw DegenerateAlgebra("empty basis");
        if (Index(mult.size()) != m || invol.rows() != m || invol.cols() != m)
            throw DegenerateAlgebra("structure constants have inconsistent sizes");
        for (const auto& row : mult) {
            if (Index(row.size()) != m) throw DegenerateAlgebra("multiplication table is not square");
            for (const auto& v : row)
                if (v.size() != m || !v.allFinite()) throw DegenerateAlgebra("bad product coefficients");
        }
        AbstractStarAlgebra alg(std::move(mult), std::move(invol), std::move(unit));
        alg.check_axioms(tol);
        return alg;
    }

    /// Structure constants of the span of a *-closed unital set of matrices, expanded by
    /// least squares in the given basis.
    static AbstractStarAlgebra from_matrices(std::span<const Matrix> basis, double tol = 1e-9) {
        if (basis.empty()) throw DegenerateAlgebra("empty basis");
        const Index n = basis.front().rows();
        const Index m = static_cast<Index>(basis.size());
        const Matrix stacked = detail::stack_vecs(basis, n);
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(stacked);
        if (cod.rank() < m) throw DegenerateAlgebra("basis matrices are linearly dependent");
        auto expand = [&](const Matrix& x) {
            const Vector v = detail::vec(x);
            Vector c = cod.solve(v);
            if ((stacked * c - v).norm() > tol * std::max(1.0, v.norm()))
                throw DegenerateAlgebra("span is not closed under the algebra operations");
            return c;
        };
        std::vector<std::vector<Vector>> mult(static_cast<std::size_t>(m));
        Matrix invol(m, m);
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < m; ++j) mult[std::size_t(i)].push_back(expand(basis[std::size_t(i)] * basis[std::size_t(j)]));
            invol.row(i) = expand(basis[std::size_t(i)].adjoint()).transpose();
        }
        Vector unit = expand(identity(n));
        AbstractStarAlgebra alg = validated(std::move(mult), std::move(invol), std::move(unit), tol);
        alg.concrete_ = std::vector<Matrix>(basis.begin(), basis.end());
        return alg;
    }

    /// M_n with the matrix units E_{jk} as basis, ordered row-major (index j·n + k).
    static AbstractStarAlgebra matrix_algebra(Index n) {
        std::vector<Matrix> units;
        for (Index j = 0; j < n; ++j)
            for (Index k = 0; k < n; ++k) {
                Matrix e = Matrix::Zero(n, n);
                e(j, k) = 1.0;
                units.push_back(e);
            }
        return from_matrices(units);
    }

    Index size() const noexcept { return unit_.size(); }
    const Vector& product(Index i, Index j) const { return mult_[std::size_t(i)][std::size_t(j)]; }
    const Matrix& involution() const noexcept { return invol_; }
    const Vector& unit() const noexcept { return unit_; }
    /// The matrices this algebra was built from, if it came from a concrete algebra.
    const std::vector<Matrix>& concrete_basis() const noexcept { return concrete_; }

    /// Coefficients of x·y.
    Vector multiply(const Vector& x, const Vector& y) const {
        Vector out = Vector::Zero(size());
        for (Index i = 0; i < size(); ++i) {
            if (x(i) == 0.0) continue;
            for (Index j = 0; j < size(); ++j)
                if (y(j) != 0.0) out += x(i) * y(j) * product(i, j);
        }
        return out;
    }

    /// Coefficients of x*.
    Vector adjoint(const Vector& x) const { return invol_.transpose() * x.conjugate(); }

    /// Matrix of left multiplication by b_i acting on coefficient vectors.
    Matrix left_multiplication(Index i) const {
        Matrix l(size(), size());
        for (Index j = 0; j < size(); ++j) l.col(j) = product(i, j);
        return l;
    }

    Vector basis_vector(Index i) const { return Vector::Unit(size(), i); }

private:
    AbstractStarAlgebra(std::vector<std::vector<Vector>> mult, Matrix invol, Vector unit)
        : mult_(std::move(mult)), invol_(std::move(invol)), unit_(std::move(unit)) {}

    void check_axioms(double tol) const {
        const Index m = size();
        for (Index i = 0; i < m; ++i) {
            const Vector bi = basis_vector(i);
            if ((multiply(unit_, bi) - bi).norm() > tol || (multiply(bi, unit_) - bi).norm() > tol)
                throw DegenerateAlgebra("unit does not act as identity on b_" + std::to_string(i));
            if ((adjoint(adjoint(bi)) - bi).norm() > tol)
                throw DegenerateAlgebra("involution is not involutive on b_" + std::to_string(i));
            for (Index j = 0; j < m; ++j) {
                const Vector bj = basis_vector(j);
                const Vector& bij = product(i, j);
                if ((adjoint(bij) - multiply(adjoint(bj), adjoint(bi))).norm() > tol)
                    throw DegenerateAlgebra("(ab)* != b*a* at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
                for (Index l = 0; l < m; ++l) {
                    const Vector left = multiply(bij, basis_vector(l));
                    const Vector right = multiply(bi, product(j, l));
                    if ((left - right).norm() > tol)
                        throw DegenerateAlgebra("associativity fails at (" + std::to_string(i) + ", " +
                                                std::to_string(j) + ", " + std::to_string(l) + ")");
                }
            }
        }
    }

    std::vector<std::vector<Vector>> mult_;
    Matrix invol_;
    Vector unit_;
    std::vector<Matrix> concrete_;
};

/// Gram matrix G_{ij} = ω(b_i* b_j).
inline Matrix gram_matrix(const AbstractStarAlgebra& alg, const Vector& values) {
    const Index m = alg.size();
    Matrix g(m, m);
    for (Index i = 0; i < m; ++i) {
        const Vector bi_star = alg.adjoint(alg.basis_vector(i));
        for (Index j = 0; j < m; ++j) g(i, j) = alg.multiply(bi_star, alg.basis_vector(j)).cwiseProduct(values).sum();
    }
    return g;
}

/// ω(b_i) for each basis element; ω(𝟙) = 1 and ω(a*a) ≥ 0.
class AlgebraicState {
public:
    static AlgebraicState validated(const AbstractStarAlgebra& alg, Vector values, double tol = 1e-9) {
        if (values.size() != alg.size()) throw NotAState("one value per basis element is required");
        if (!values.allFinite()) throw NotAState("non-finite value");
        const Complex norm = alg.unit().cwiseProduct(values).sum();
        if (std::abs(norm - 1.0) > tol) throw NotAState("omega(1) = " + detail::fmt_real(norm.real()));
        const Matrix g = gram_matrix(alg, values);
        if (frobenius(g - g.adjoint()) > tol * std::max(1.0, frobenius(g))) throw NotAState("Gram matrix is not Hermitian");
        if (const double lo = min_eigenvalue(g); lo < -tol * std::max(1.0, frobenius(g)))
            throw NotAState("Gram matrix has negative eigenvalue " + detail::fmt_real(lo));
        return AlgebraicState(std::move(values));
    }

    /// a ↦ tr(ρ a) on a concrete algebra.
    static AlgebraicState from_density(const AbstractStarAlgebra& alg, const Matrix& rho, double tol = 1e-9) {
        const auto& basis = alg.concrete_basis();
        if (basis.empty()) throw NotAState("algebra has no concrete realization");
        Vector values(alg.size());
        for (Index i = 0; i < alg.size(); ++i) values(i) = (rho * basis[std::size_t(i)]).trace();
        return validated(alg, std::move(values), tol);
    }

    const Vector& values() const noexcept { return values_; }
    Complex operator()(const Vector& coeffs) const { return coeffs.cwiseProduct(values_).sum(); }

private:
    explicit AlgebraicState(Vector v) : values_(std::move(v)) {}
    Vector values_;
};

/// (H_ω, π_ω, Ψ_ω).
struct GnsTriple {
    Index rep_dim = 0;
    std::vector<Matrix> pi;  ///< π(b_i)
    Vector cyclic;           ///< Ψ

    /// π(Σ x_i b_i).
    Matrix represent(const Vector& coeffs) const {
        Matrix out = Matrix::Zero(rep_dim, rep_dim);
        for (Index i = 0; i < coeffs.size(); ++i) out += coeffs(i) * pi[std::size_t(i)];
        return out;
    }
};

inline constexpr double kGramNullTol = 1e-10;

/// Quotients the algebra by the null space of ω(a*a), orthonormalizes, and represents
/// each b_i by left multiplication pushed through the quotient map.
inline GnsTriple gns_construct(const AbstractStarAlgebra& alg, const AlgebraicState& omega) {
    const Matrix g = gram_matrix(alg, omega.values());
    const EigenSystem es = eig_hermitian(Matrix((g + g.adjoint()) / 2.0));
    const double top = es.eigenvalues.maxCoeff();
    if (top <= 0) throw NotAState("Gram matrix vanishes");
    Index first = 0;
    while (first < es.eigenvalues.size() && es.eigenvalues(first) <= kGramNullTol * top) ++first;
    const Index r = es.eigenvalues.size() - first;
    const Matrix w = es.eigenvectors.rightCols(r);
    const RealVector lambda = es.eigenvalues.tail(r);
    // J x = Λ^{1/2} W* x maps coefficients to the quotient with ⟨Jx, Jy⟩ = x* G y.
    const Matrix j = lambda.cwiseSqrt().cast<Complex>().asDiagonal() * w.adjoint();
    const Matrix j_pinv = w * lambda.cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal();
    GnsTriple t;
    t.rep_dim = r;
    for (Index i = 0; i < alg.size(); ++i) t.pi.push_back(j * alg.left_multiplication(i) * j_pinv);
    t.cyclic = j * alg.unit();
    return t;
}

struct GnsVerification {
    bool ok = true;
    std::string violated;  ///< first failing invariant, empty when ok
    double homomorphism_residual = 0;
    double star_residual = 0;
    double expectation_residual = 0;
    Index cyclic_rank = 0;
};

inline GnsVerification verify_gns(const GnsTriple& t, const AbstractStarAlgebra& alg, const AlgebraicState& omega,
                                  double tol = 1e-9) {
    GnsVerification v;
    const Index m = alg.size();
    if (Index(t.pi.size()) != m || t.cyclic.size() != t.rep_dim) {
        v.ok = false;
        v.violated = "shape";
        return v;
    }
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j)
            v.homomorphism_residual = std::max(
                v.homomorphism_residual, frobenius(t.pi[std::size_t(i)] * t.pi[std::size_t(j)] - t.represent(alg.product(i, j))));
        v.star_residual = std::max(v.star_residual, frobenius(t.pi[std::size_t(i)].adjoint() -
                                                               t.represent(alg.involution().row(i).transpose())));
        const Complex e = t.cyclic.dot(t.pi[std::size_t(i)] * t.cyclic);
        v.expectation_residual = std::max(v.expectation_residual, std::abs(e - omega.values()(i)));
    }
    Matrix orbit(t.rep_dim, m);
    for (Index i = 0; i < m; ++i) orbit.col(i) = t.pi[std::size_t(i)] * t.cyclic;
    v.cyclic_rank = column_space(orbit, 1e-9).cols();

    if (v.homomorphism_residual > tol) v.violated = "homomorphism";
    else if (v.star_residual > tol) v.violated = "involution";
    else if (v.expectation_residual > tol) v.violated = "expectation";
    else if (v.cyclic_rank != t.rep_dim) v.violated = "cyclicity";
    v.ok = v.violated.empty();
    return v;
}

struct GnsIntertwiner {
    Matrix unitary;
    double unitarity_defect = 0;
    double intertwining_residual = 0;  ///< max_i ‖U π₁(b_i) U* − π₂(b_i)‖_F
    double cyclic_residual = 0;        ///< ‖U Ψ₁ − Ψ₂‖
};

/// U π₁(a)Ψ₁ = π₂(a)Ψ₂, solved on the cyclic orbit by least squares.
inline GnsIntertwiner gns_intertwiner(const GnsTriple& a, const GnsTriple& b) {
    require_same_dim(a.rep_dim, b.rep_dim);
    require_same_dim(Index(a.pi.size()), Index(b.pi.size()));
    const Index m = Index(a.pi.size());
    Matrix va(a.rep_dim, m), vb(b.rep_dim, m);
    for (Index i = 0; i < m; ++i) {
        va.col(i) = a.pi[std::size_t(i)] * a.cyclic;
        vb.col(i) = b.pi[std::size_t(i)] * b.cyclic;
    }
    // U va = vb ⇔ va* U* = vb*.
    const Matrix u = Eigen::CompleteOrthogonalDecomposition<Matrix>(va.adjoint()).solve(vb.adjoint()).adjoint();
    GnsIntertwiner out{u, unitarity_defect(u), 0.0, (u * a.cyclic - b.cyclic).norm()};
    for (Index i = 0; i < m; ++i)
        out.intertwining_residual = std::max(out.intertwining_residual,
                                             frobenius(u * a.pi[std::size_t(i)] * u.adjoint() - b.pi[std::size_t(i)]));
    return out;
}

/// Dimension of the commutant of π_ω(𝔄) on H_ω.
inline Index gns_commutant_dim(const GnsTriple& t) { return commutant(t.pi, t.rep_dim, false).size(); }

/// Pure ⇔ π_ω irreducible ⇔ commutant of π_ω(𝔄) is the scalars.
inline bool is_pure_state(const AbstractStarAlgebra& alg, const AlgebraicState& omega) {
    return gns_commutant_dim(gns_construct(alg, omega)) == 1;
}

/// a ↦ tr(T π(a)) for a density operator T on the representation space.
inline AlgebraicState folium_state(const GnsTriple& t, const AbstractStarAlgebra& alg, const DensityState& rho) {
    require_same_dim(rho.dim(), t.rep_dim);
    Vector values(Index(t.pi.size()));
    for (std::size_t i = 0; i < t.pi.size(); ++i) values(Index(i)) = (rho.matrix() * t.pi[i]).trace();
    return AlgebraicState::validated(alg, std::move(values));
}

struct ParadoxReport {
    Index dim = 0;
    Index rep_dim = 0;
    double cyclic_norm = 0;   ///< ‖Ψ_ρ‖ = 1: a unit vector representing the mixed state
    Index commutant_dim = 0;  ///< > 1: π is reducible, so the vector state is not pure on π(𝔄)
    bool pure = false;
    double purity = 0;        ///< tr ρ²
};

/// GNS of ω_ρ = tr(ρ ·) on M_dim for a mixed ρ: the state becomes a vector state in H_ω
/// yet stays mixed because π_ω has a nontrivial commutant.
inline ParadoxReport mixed_to_vector_paradox_demo(const DensityState& rho) {
    if (is_pure(rho)) throw InputIsPure();
    const AbstractStarAlgebra alg = AbstractStarAlgebra::matrix_algebra(rho.dim());
    const AlgebraicState omega = AlgebraicState::from_density(alg, rho.matrix());
    const GnsTriple t = gns_construct(alg, omega);
    ParadoxReport r;
    r.dim = rho.dim();
    r.rep_dim = t.rep_dim;
    r.cyclic_norm = t.cyclic.norm();
    r.commutant_dim = gns_commutant_dim(t);
    r.pure = r.commutant_dim == 1;
    r.purity = rho.purity();
    return r;
}

}  // namespace oplattice
