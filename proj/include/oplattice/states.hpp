#pragma once

// Density operators and pure vectors: Born probabilities, moments, Lüders
// collapse, sequential measurements, tomographic state reconstruction and
// Kochen–Specker witnesses.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "oplattice/linalg.hpp"
#include "oplattice/projector.hpp"
#include "oplattice/spectral.hpp"

namespace oplattice {

inline constexpr double kProbFloor = 1e-12;

/// Unit vector up to a global phase; the first non-negligible amplitude is made real positive.
class PureStateVector {
public:
    static PureStateVector normalized(Vector v, double tol = kDefaultTol) {
        if (v.size() == 0 || !v.allFinite()) throw InvalidState("empty or non-finite vector");
        const double norm = v.norm();
        if (norm <= tol) throw InvalidState("zero vector");
        v /= norm;
        fix_phase(v);
        return PureStateVector(std::move(v));
    }

    /// Requires ‖v‖ = 1 within tol.
    static PureStateVector validated(Vector v, double tol = kDefaultTol) {
        if (v.size() == 0 || !v.allFinite()) throw InvalidState("empty or non-finite vector");
        if (std::abs(v.norm() - 1.0) > tol) throw InvalidState("vector is not normalized");
        return normalized(std::move(v), tol);
    }

    static PureStateVector basis(Index n, Index k) {
        Vector v = Vector::Zero(n);
        v(k) = 1.0;
        return PureStateVector(std::move(v));
    }

    Index dim() const noexcept { return amplitudes_.size(); }
    const Vector& amplitudes() const noexcept { return amplitudes_; }
    Matrix density() const { return amplitudes_ * amplitudes_.adjoint(); }

private:
    explicit PureStateVector(Vector v) : amplitudes_(std::move(v)) {}
    Vector amplitudes_;
};

/// Positive unit-trace operator.
class DensityState {
public:
    static DensityState validated(const Matrix& m, double tol = kDefaultTol) {
        require_square(m);
        const double herm = frobenius(m - m.adjoint());
        if (herm > scaled_tol(tol, m)) throw InvalidState("density matrix is not Hermitian");
        const Matrix sym = (m + m.adjoint()) / 2.0;
        const double tr = sym.trace().real();
        if (std::abs(tr - 1.0) > tol * std::max(1.0, std::sqrt(double(m.rows()))))
            throw InvalidState("trace " + detail::fmt_real(tr) + " != 1");
        if (const double lo = min_eigenvalue(sym); lo < -tol)
            throw InvalidState("negative eigenvalue " + detail::fmt_real(lo));
        return DensityState(sym);
    }

    static DensityState from_pure(const PureStateVector& psi) { return DensityState(psi.density()); }
    static DensityState maximally_mixed(Index n) { return DensityState(identity(n) / double(n)); }

    Index dim() const noexcept { return matrix_.rows(); }
    const Matrix& matrix() const noexcept { return matrix_; }
    double purity() const { return (matrix_ * matrix_).trace().real(); }

private:
    explicit DensityState(Matrix m) : matrix_(std::move(m)) {}
    Matrix matrix_;
};

namespace detail {
// tr(A B) without forming the product.
inline Complex trace_product(const Matrix& a, const Matrix& b) { return (a.transpose().cwiseProduct(b)).sum(); }

inline double clamp_probability(double p, double tol) {
    if (p < -tol || p > 1.0 + tol) throw NumericalError("probability " + fmt_real(p) + " outside [0, 1]");
    return std::clamp(p, 0.0, 1.0);
}
}  // namespace detail

/// tr(ρP), clamped to [0, 1] after checking it lies within tol of that interval.
inline double born_probability(const DensityState& rho, const Projector& p, double tol = kDefaultTol) {
    require_same_dim(rho.dim(), p.dim());
    return detail::clamp_probability(detail::trace_product(rho.matrix(), p.matrix()).real(), tol);
}

/// ‖Pψ‖².
inline double born_probability(const PureStateVector& psi, const Projector& p) {
    require_same_dim(psi.dim(), p.dim());
    return (p.matrix() * psi.amplitudes()).squaredNorm();
}

inline double expectation(const DensityState& rho, const HermitianOperator& a) {
    require_same_dim(rho.dim(), a.dim());
    return detail::trace_product(rho.matrix(), a.matrix()).real();
}

inline double expectation(const PureStateVector& psi, const HermitianOperator& a) {
    require_same_dim(psi.dim(), a.dim());
    return psi.amplitudes().dot(a.matrix() * psi.amplitudes()).real();
}

/// sqrt(tr(ρA²) − tr(ρA)²); a radicand in [−tol, 0) is read as 0.
inline double std_deviation(const DensityState& rho, const HermitianOperator& a, double tol = kDefaultTol) {
    require_same_dim(rho.dim(), a.dim());
    const double mean = expectation(rho, a);
    const double second = detail::trace_product(rho.matrix(), a.matrix() * a.matrix()).real();
    const double var = second - mean * mean;
    if (var < -tol * std::max(1.0, second)) throw NumericalError("negative variance " + detail::fmt_real(var));
    return std::sqrt(std::max(var, 0.0));
}

/// Lüders update ρ ↦ PρP / tr(ρP).
inline DensityState luders_collapse(const DensityState& rho, const Projector& p, double prob_floor = kProbFloor) {
    require_same_dim(rho.dim(), p.dim());
    const double prob = detail::trace_product(rho.matrix(), p.matrix()).real();
    if (prob <= prob_floor) throw ZeroProbability(prob);
    const Matrix post = p.matrix() * rho.matrix() * p.matrix() / prob;
    return DensityState::validated(post, 1e-9);
}

/// Pure-vector form ψ ↦ Pψ / ‖Pψ‖.
inline PureStateVector luders_collapse(const PureStateVector& psi, const Projector& p,
                                       double prob_floor = kProbFloor) {
    require_same_dim(psi.dim(), p.dim());
    const Vector image = p.matrix() * psi.amplitudes();
    if (image.squaredNorm() <= prob_floor) throw ZeroProbability(image.squaredNorm());
    return PureStateVector::normalized(image);
}

struct SequentialProbability {
    double forward = 0;   ///< tr(Pₙ···P₁ ρ P₁···Pₙ), P₁ measured first
    double reversed = 0;  ///< same with the chain order reversed
};

inline SequentialProbability sequential_probability(const DensityState& rho, std::span<const Projector> chain,
                                                    double tol = kDefaultTol) {
    auto run = [&](auto first, auto last) {
        Matrix m = rho.matrix();
        for (auto it = first; it != last; ++it) {
            require_same_dim(rho.dim(), it->dim());
            m = it->matrix() * m * it->matrix();
        }
        return detail::clamp_probability(m.trace().real(), tol);
    };
    return {run(chain.begin(), chain.end()), run(chain.rbegin(), chain.rend())};
}

/// μ(E | F) = tr(P_E P_F ρ P_F) / tr(ρ P_F) for the sequence "F first, then E".
inline double conditional_probability(const DensityState& rho, const Projector& e, const Projector& f,
                                      double prob_floor = kProbFloor) {
    const double pf = born_probability(rho, f);
    if (pf <= prob_floor) throw ZeroProbability(pf);
    const Projector chain[] = {f, e};
    return sequential_probability(rho, chain).forward / pf;
}

/// |⟨ψ|φ⟩|².
inline double transition_probability(const PureStateVector& psi, const PureStateVector& phi) {
    require_same_dim(psi.dim(), phi.dim());
    return std::norm(psi.amplitudes().dot(phi.amplitudes()));
}

/// ρ² = ρ within tol (Frobenius).
inline bool is_pure(const DensityState& rho, double tol = 1e-9) {
    return frobenius(rho.matrix() * rho.matrix() - rho.matrix()) <= tol;
}

// ---------------------------------------------------------------------------
// State reconstruction from probability assignments

struct Assignment {
    Projector projector;
    double probability;
};

/// Rank-1 projectors onto e_j, (e_j + e_k)/√2 and (e_j + i e_k)/√2: n² of them.
inline std::vector<Projector> tomography_frame(Index n) {
    std::vector<Projector> frame;
    frame.reserve(static_cast<std::size_t>(n * n));
    const double s = 1.0 / std::sqrt(2.0);
    for (Index j = 0; j < n; ++j) frame.push_back(Projector::from_orthonormal(Vector::Unit(n, j)));
    for (Index j = 0; j < n; ++j)
        for (Index k = j + 1; k < n; ++k) {
            Vector v = Vector::Zero(n);
            v(j) = s;
            v(k) = s;
            frame.push_back(Projector::from_orthonormal(v));
            v(k) = Complex(0.0, s);
            frame.push_back(Projector::from_orthonormal(v));
        }
    return frame;
}

namespace detail {
// Real coordinates of a Hermitian matrix in an orthonormal (Hilbert–Schmidt) basis:
// diagonal entries, then √2·Re and √2·Im of the strict upper triangle.
inline RealVector hermitian_coordinates(const Matrix& h) {
    const Index n = h.rows();
    RealVector x(n * n);
    Index k = 0;
    for (Index j = 0; j < n; ++j) x(k++) = h(j, j).real();
    const double r2 = std::sqrt(2.0);
    for (Index j = 0; j < n; ++j)
        for (Index l = j + 1; l < n; ++l) {
            x(k++) = r2 * h(j, l).real();
            x(k++) = r2 * h(j, l).imag();
        }
    return x;
}

inline Matrix hermitian_from_coordinates(const RealVector& x, Index n) {
    Matrix h = Matrix::Zero(n, n);
    Index k = 0;
    for (Index j = 0; j < n; ++j) h(j, j) = x(k++);
    const double r2 = std::sqrt(2.0);
    for (Index j = 0; j < n; ++j)
        for (Index l = j + 1; l < n; ++l) {
            const double re = x(k++) / r2;
            const double im = x(k++) / r2;
            h(j, l) = Complex(re, im);
            h(l, j) = Complex(re, -im);
        }
    return h;
}
}  // namespace detail

struct GleasonFit {
    DensityState state;
    double least_squares_residual = 0;  ///< max |tr(T P_i) − p_i| for the unconstrained solution
    double residual = 0;                ///< max |tr(ρ P_i) − p_i| after projection onto states
    Index frame_rank = 0;
    bool dimension_two = false;  ///< flagged: the correspondence is not guaranteed for dim 2
};

/// Least-squares fit of a Hermitian T with tr(T P_i) = p_i over the n² real Hermitian
/// coordinates, followed by projection onto the density operators (clip negative
/// eigenvalues, renormalize).
inline GleasonFit gleason_fit(std::span<const Assignment> assignments, double fit_tol = 1e-6) {
    if (assignments.empty()) throw UnderdeterminedFrame(0, 1);
    const Index n = assignments.front().projector.dim();
    const Index params = n * n;
    Eigen::MatrixXd design(static_cast<Index>(assignments.size()), params);
    RealVector target(design.rows());
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        require_same_dim(assignments[i].projector.dim(), n);
        // tr(T P) = ⟨P, T⟩_HS, so the row is P's own Hermitian coordinates.
        design.row(Index(i)) = detail::hermitian_coordinates(assignments[i].projector.matrix()).transpose();
        target(Index(i)) = assignments[i].probability;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < params) throw UnderdeterminedFrame(qr.rank(), params);
    const RealVector coords = qr.solve(target);
    const double ls_residual = (design * coords - target).cwiseAbs().maxCoeff();

    const Matrix t = detail::hermitian_from_coordinates(coords, n);
    const EigenSystem es = eig_hermitian(t);
    RealVector clipped = es.eigenvalues.cwiseMax(0.0);
    const double total = clipped.sum();
    if (total <= 0.0) throw InconsistentAssignments(ls_residual);
    clipped /= total;
    Matrix rho = es.eigenvectors * clipped.cast<Complex>().asDiagonal() * es.eigenvectors.adjoint();
    rho = (rho + rho.adjoint()) / 2.0;

    double residual = 0.0;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        residual = std::max(residual, std::abs(detail::trace_product(rho, assignments[i].projector.matrix()).real() -
                                               assignments[i].probability));
    if (residual > fit_tol) throw InconsistentAssignments(residual);
    return {DensityState::validated(rho, 1e-9), ls_residual, residual, qr.rank(), n == 2};
}

// ---------------------------------------------------------------------------
// Kochen–Specker witness

struct KochenSpeckerWitness {
    Projector projector;
    double probability;
};

/// Finds a rank-1 projector P with δ ≤ tr(ρP) ≤ 1 − δ, showing ρ is not {0,1}-valued on
/// the projector lattice. Candidates: the eigenvectors of ρ and the balanced combinations
/// (v_j + v_k)/√2, (v_j + i v_k)/√2; a seeded random search follows if none qualifies.
inline KochenSpeckerWitness kochen_specker_witness(const DensityState& rho, double delta = 0.01,
                                                   std::uint64_t seed = 42, int random_budget = 1000) {
    const Index n = rho.dim();
    if (n < 3) throw ValidationError("Kochen-Specker witness needs dim >= 3");
    const EigenSystem es = eig_hermitian(rho.matrix());

    std::vector<Vector> candidates;
    for (Index j = 0; j < n; ++j) candidates.push_back(es.eigenvectors.col(j));
    const double s = 1.0 / std::sqrt(2.0);
    for (Index j = 0; j < n; ++j)
        for (Index k = j + 1; k < n; ++k) {
            candidates.push_back(s * (es.eigenvectors.col(j) + es.eigenvectors.col(k)));
            candidates.push_back(s * (es.eigenvectors.col(j) + kI * es.eigenvectors.col(k)));
        }

    auto prob_of = [&](const Vector& v) { return v.dot(rho.matrix() * v).real(); };
    // Prefer the most balanced candidate.
    double best_p = -1.0, best_gap = 2.0;
    Vector best;
    auto consider = [&](const Vector& v) {
        const double p = prob_of(v);
        const double gap = std::abs(p - 0.5);
        if (gap < best_gap) {
            best_gap = gap;
            best_p = p;
            best = v;
        }
    };
    for (const auto& v : candidates) consider(v);

    if (!(best_p >= delta && best_p <= 1.0 - delta)) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss;
        for (int it = 0; it < random_budget; ++it) {
            Vector v(n);
            for (Index i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
            consider(v.normalized());
            if (best_p >= delta && best_p <= 1.0 - delta) break;
        }
    }
    if (!(best_p >= delta && best_p <= 1.0 - delta)) throw WitnessNotFound(best_p);
    Vector v = best.normalized();
    fix_phase(v);
    return {Projector::from_orthonormal(v), best_p};
}

}  // namespace oplattice
