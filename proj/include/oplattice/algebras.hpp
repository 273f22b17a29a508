#pragma once

// Unital *-subalgebras of M_n: commutants, double commutants, centres, factors and
// superselection-sector decompositions.

#include <cmath>
#include <span>
#include <vector>

#include "oplattice/linalg.hpp"
#include "oplattice/projector.hpp"
#include "oplattice/spectral.hpp"
#include "oplattice/states.hpp"

namespace oplattice {

inline constexpr double kSvdTol = 1e-9;
inline constexpr double kMembershipTol = 1e-8;

namespace detail {
inline Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline Matrix unvec(const Eigen::Ref<const Vector>& v, Index n) {
    return Eigen::Map<const Matrix>(v.data(), n, n);
}

inline Matrix stack_vecs(std::span<const Matrix> mats, Index n) {
    Matrix out(n * n, static_cast<Index>(mats.size()));
    for (std::size_t i = 0; i < mats.size(); ++i) {
        require_square(mats[i]);
        require_same_dim(mats[i].rows(), n);
        out.col(Index(i)) = vec(mats[i]);
    }
    return out;
}
}  // namespace detail

/// Vector-space basis of a *-closed unital subalgebra of M_n. The basis is kept
/// orthonormal in the Hilbert–Schmidt inner product.
class MatrixStarAlgebra {
public:
    /// Span of the given matrices, checked to contain I and to be closed under adjoints
    /// and products (least-squares membership residual ≤ kMembershipTol·‖X‖_F).
    static MatrixStarAlgebra from_spanning(std::span<const Matrix> spanning, Index dim, bool verify = true) {
        if (dim <= 0) throw InvalidAlgebra("dimension must be positive");
        const Matrix stacked = detail::stack_vecs(spanning, dim);
        MatrixStarAlgebra alg(dim, column_space(stacked, kSvdTol));
        if (verify) alg.verify_closure();
        return alg;
    }

    static MatrixStarAlgebra full(Index dim) { return MatrixStarAlgebra(dim, identity(dim * dim)); }

    Index dim() const noexcept { return dim_; }
    /// Vector-space dimension of the algebra.
    Index size() const noexcept { return basis_.cols(); }
    const Matrix& vectorized_basis() const noexcept { return basis_; }

    Matrix element(Index k) const { return detail::unvec(basis_.col(k), dim_); }
    std::vector<Matrix> basis() const {
        std::vector<Matrix> out;
        out.reserve(static_cast<std::size_t>(size()));
        for (Index k = 0; k < size(); ++k) out.push_back(element(k));
        return out;
    }

    /// ‖X − Π X‖_F with Π the orthogonal projection onto the algebra.
    double membership_residual(const Matrix& x) const {
        const Vector v = detail::vec(x);
        return (v - basis_ * (basis_.adjoint() * v)).norm();
    }
    bool contains(const Matrix& x, double rel_tol = kMembershipTol) const {
        return membership_residual(x) <= rel_tol * std::max(1.0, frobenius(x));
    }

    void verify_closure() const {
        if (!contains(identity(dim_))) throw InvalidAlgebra("identity is not in the span");
        const auto elems = basis();
        for (const auto& a : elems) {
            if (!contains(a.adjoint())) throw InvalidAlgebra("span is not closed under adjoints");
            for (const auto& b : elems)
                if (!contains(a * b)) throw InvalidAlgebra("span is not closed under products");
        }
    }

private:
    MatrixStarAlgebra(Index dim, Matrix basis) : dim_(dim), basis_(std::move(basis)) {}
    friend MatrixStarAlgebra commutant(std::span<const Matrix>, Index, bool);
    friend MatrixStarAlgebra center(const MatrixStarAlgebra&);

    Index dim_;
    Matrix basis_;  // n² × size, orthonormal columns
};

/// {X : XG = GX for every generator G and its adjoint}, as the null space of the stacked
/// maps X ↦ GX − XG. Singular values ≤ kSvdTol·max(σ_max, max‖G‖_F, 1) count as zero, so a
/// generator that is a multiple of I up to roundoff does not turn noise into rank.
inline MatrixStarAlgebra commutant(std::span<const Matrix> generators, Index dim, bool verify = true) {
    std::vector<Matrix> closed;
    double scale = 1.0;
    for (const auto& g : generators) {
        require_square(g);
        require_same_dim(g.rows(), dim);
        scale = std::max(scale, frobenius(g));
        closed.push_back(g);
        if (frobenius(g - g.adjoint()) > 1e-14 * std::max(1.0, frobenius(g))) closed.push_back(g.adjoint());
    }
    const Index n2 = dim * dim;
    if (closed.empty()) return MatrixStarAlgebra::full(dim);
    Matrix system(n2 * static_cast<Index>(closed.size()), n2);
    const Matrix id = identity(dim);
    for (std::size_t k = 0; k < closed.size(); ++k)
        system.middleRows(Index(k) * n2, n2) = kron(id, closed[k]) - kron(closed[k].transpose(), id);
    MatrixStarAlgebra alg(dim, null_space(system, kSvdTol, kSvdTol * scale));
    if (verify) alg.verify_closure();
    return alg;
}

inline MatrixStarAlgebra commutant(const MatrixStarAlgebra& alg, bool verify = true) {
    const auto b = alg.basis();
    return commutant(b, alg.dim(), verify);
}

/// Commutant of the commutant: in finite dimension, the unital *-algebra generated by the generators.
inline MatrixStarAlgebra double_commutant(std::span<const Matrix> generators, Index dim, bool verify = true) {
    return commutant(commutant(generators, dim, verify), verify);
}

/// R ∩ R′.
inline MatrixStarAlgebra center(const MatrixStarAlgebra& alg) {
    const MatrixStarAlgebra comm = commutant(alg, false);
    const Matrix& a = alg.vectorized_basis();
    const Matrix& c = comm.vectorized_basis();
    // x = A y lies in span(C) iff (I − C C*) A y = 0.
    const Matrix outside = a - c * (c.adjoint() * a);
    const Matrix coeffs = null_space(outside, kSvdTol, 1e-12);
    return MatrixStarAlgebra(alg.dim(), column_space(a * coeffs, kSvdTol));
}

inline bool is_factor(const MatrixStarAlgebra& alg) { return center(alg).size() == 1; }

// ---------------------------------------------------------------------------
// Superselection sectors

struct Sector {
    Label label;                        ///< joint charge eigenvalues
    Projector projector;                ///< onto the coherent sector H_q
    std::vector<Matrix> compressed;     ///< V* G V for each observable generator
    std::vector<Matrix> charges;        ///< V* Q V for each charge (q·I on the sector)
    MatrixStarAlgebra restricted;       ///< algebra generated by the compressed generators
    Index commutant_dim = 0;            ///< of the compressed generators
    bool irreducible = false;           ///< commutant_dim == 1

    Index dim() const noexcept { return projector.rank(); }
};

struct SectorDecomposition {
    std::vector<Sector> sectors;

    std::vector<Projector> projectors() const {
        std::vector<Projector> out;
        for (const auto& s : sectors) out.push_back(s.projector);
        return out;
    }
};

/// Splits the space into joint eigenspaces of the central charges and compresses the
/// observable generators to each of them.
inline SectorDecomposition superselection_sectors(std::span<const HermitianOperator> charges,
                                                  std::span<const Matrix> generators, Index dim,
                                                  double tol = 1e-9) {
    if (charges.empty()) throw ValidationError("at least one charge is required");
    for (std::size_t i = 0; i < charges.size(); ++i) {
        require_same_dim(charges[i].dim(), dim);
        for (const auto& g : generators) {
            require_same_dim(g.rows(), dim);
            const double d = frobenius(commutator(charges[i].matrix(), g));
            if (d > tol * std::max(1.0, frobenius(charges[i].matrix()) * frobenius(g))) throw NonCentralCharge(i, d);
        }
    }
    ProjectorValuedMeasure joint = [&] {
        try {
            return joint_pvm(charges, tol);
        } catch (const NonCommuting& e) {
            throw NonCommutingCharges(e.first(), e.second());
        }
    }();

    SectorDecomposition out;
    for (const auto& atom : joint.atoms()) {
        const Matrix& v = atom.projector.range();
        std::vector<Matrix> compressed;
        for (const auto& g : generators) compressed.push_back(v.adjoint() * g * v);
        std::vector<Matrix> local_charges;
        for (const auto& q : charges) local_charges.push_back(v.adjoint() * q.matrix() * v);
        const Index k = v.cols();
        MatrixStarAlgebra comm = commutant(compressed, k);
        MatrixStarAlgebra restricted = commutant(comm);
        const Index cdim = comm.size();
        out.sectors.push_back(Sector{atom.label, atom.projector, std::move(compressed), std::move(local_charges),
                                     std::move(restricted), cdim, cdim == 1});
    }
    return out;
}

/// Σ_k P_k ρ P_k: removes coherences between sectors.
inline DensityState decohere_across_sectors(const DensityState& rho, std::span<const Projector> sectors) {
    Matrix out = Matrix::Zero(rho.dim(), rho.dim());
    for (const auto& p : sectors) {
        require_same_dim(p.dim(), rho.dim());
        out += p.matrix() * rho.matrix() * p.matrix();
    }
    return DensityState::validated(out, 1e-9);
}

inline DensityState decohere_across_sectors(const DensityState& rho, const SectorDecomposition& sd) {
    const auto ps = sd.projectors();
    return decohere_across_sectors(rho, ps);
}

}  // namespace oplattice
