#pragma once

// Truncated oscillator realization of the canonical pair (X, P), uncertainty products
// and the diagnostic report on the Stone–von Neumann hypotheses.

#include <cmath>
#include <span>
#include <vector>

#include "oplattice/algebras.hpp"
#include "oplattice/linalg.hpp"
#include "oplattice/states.hpp"

namespace oplattice {

inline constexpr double kTailTol = 1e-8;

/// Ladder matrices cut off at N levels: X = √(ħ/2mω)(a + a†), P = i√(mωħ/2)(a† − a).
struct TruncatedCanonicalPair {
    Index n = 0;
    double mass = 1.0;
    double omega = 1.0;
    double hbar = 1.0;
    Matrix annihilation;
    HermitianOperator x;
    HermitianOperator p;

    Matrix number_operator() const { return annihilation.adjoint() * annihilation; }
    /// P²/2m + mω²X²/2.
    HermitianOperator hamiltonian() const {
        return HermitianOperator::validated(p.matrix() * p.matrix() / (2.0 * mass) +
                                            mass * omega * omega * x.matrix() * x.matrix() / 2.0);
    }
};

inline Matrix truncated_annihilation(Index n) {
    Matrix a = Matrix::Zero(n, n);
    for (Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
    return a;
}

inline TruncatedCanonicalPair build_truncated_pair(Index n, double mass = 1.0, double omega = 1.0, double hbar = 1.0) {
    if (n < 2) throw BadDimension(n);
    if (!(mass > 0) || !(omega > 0) || !(hbar > 0)) throw ValidationError("mass, frequency and hbar must be positive");
    const Matrix a = truncated_annihilation(n);
    const Matrix ad = a.adjoint();
    const double xs = std::sqrt(hbar / (2.0 * mass * omega));
    const double ps = std::sqrt(mass * omega * hbar / 2.0);
    return {n, mass, omega, hbar, a, HermitianOperator::validated(xs * (a + ad)),
            HermitianOperator::validated(Complex(0.0, ps) * (ad - a))};
}

struct UncertaintyReport {
    double dx = 0;
    double dp = 0;
    double product = 0;
    /// ½|⟨[X,P]⟩| = (ħ/2)|1 − N·p_{N−1}|: the Robertson bound with the truncation defect included.
    double bound = 0;
    double tail_weight = 0;  ///< probability on the top two levels
};

inline UncertaintyReport heisenberg_uncertainty(const TruncatedCanonicalPair& pair, const PureStateVector& psi,
                                                double tail_tol = kTailTol) {
    require_same_dim(pair.n, psi.dim());
    const Vector& amp = psi.amplitudes();
    const double top = std::norm(amp(pair.n - 1));
    const double tail = top + std::norm(amp(pair.n - 2));
    if (tail >= tail_tol) throw TailTooLarge(tail);
    const DensityState rho = DensityState::from_pure(psi);
    UncertaintyReport r;
    r.dx = std_deviation(rho, pair.x);
    r.dp = std_deviation(rho, pair.p);
    r.product = r.dx * r.dp;
    r.bound = pair.hbar / 2.0 * std::abs(1.0 - double(pair.n) * top);
    r.tail_weight = tail;
    if (r.product < r.bound - 1e-10 * std::max(1.0, pair.hbar))
        throw NumericalError("uncertainty product " + detail::fmt_real(r.product) + " below bound " +
                             detail::fmt_real(r.bound));
    return r;
}

struct SvnReport {
    std::size_t pairs = 0;
    double hbar = 1.0;
    double ccr_residual = 0;        ///< max_k ‖[Q_k, M_k] − iħI‖ (operator norm)
    double cross_residual = 0;      ///< max_{h≠k} ‖[Q_h, M_k]‖
    double qq_residual = 0;         ///< max ‖[Q_h, Q_k]‖
    double mm_residual = 0;         ///< max ‖[M_h, M_k]‖
    double trace_obstruction = 0;   ///< max_k |tr[Q_k, M_k]|; zero in every finite dimension
    /// ħ: ‖[Q,M] − iħI‖ ≥ ħ because the trace of that operator is −iħ·dim.
    double defect_floor = 0;
    Index commutant_dim = 0;
    bool irreducible = false;
    double hamiltonian_hermiticity = 0;  ///< ‖K − K*‖_F for K = ΣQ² + ΣM²
    bool exact_ccr_possible = false;     ///< always false in finite dimension
};

inline SvnReport svn_hypotheses_check(std::span<const HermitianOperator> q, std::span<const HermitianOperator> m,
                                      double hbar = 1.0) {
    if (q.size() != m.size()) throw ValidationError("position and momentum lists differ in length");
    SvnReport r;
    r.pairs = q.size();
    r.hbar = hbar;
    r.defect_floor = q.empty() ? 0.0 : hbar;
    if (q.empty()) {
        r.irreducible = true;
        r.commutant_dim = 0;
        return r;
    }
    const Index n = q.front().dim();
    const Matrix id = identity(n);
    std::vector<Matrix> gens;
    for (std::size_t h = 0; h < q.size(); ++h) {
        require_same_dim(q[h].dim(), n);
        require_same_dim(m[h].dim(), n);
        gens.push_back(q[h].matrix());
        gens.push_back(m[h].matrix());
        for (std::size_t k = 0; k < q.size(); ++k) {
            const Matrix c = commutator(q[h].matrix(), m[k].matrix());
            if (h == k) {
                r.ccr_residual = std::max(r.ccr_residual, operator_norm(c - Complex(0.0, hbar) * id));
                r.trace_obstruction = std::max(r.trace_obstruction, std::abs(c.trace()));
            } else {
                r.cross_residual = std::max(r.cross_residual, operator_norm(c));
            }
            r.qq_residual = std::max(r.qq_residual, operator_norm(commutator(q[h].matrix(), q[k].matrix())));
            r.mm_residual = std::max(r.mm_residual, operator_norm(commutator(m[h].matrix(), m[k].matrix())));
        }
    }
    Matrix k = Matrix::Zero(n, n);
    for (const auto& g : gens) k += g * g;
    r.hamiltonian_hermiticity = frobenius(k - k.adjoint());
    r.commutant_dim = commutant(gens, n, false).size();
    r.irreducible = r.commutant_dim == 1;
    return r;
}

}  // namespace oplattice
