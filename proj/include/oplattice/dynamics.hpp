#pragma once

// Time evolution and symmetries: one-parameter unitary groups and their generators,
// Heisenberg picture, the constant-of-motion equivalences, time-ordered evolution,
// Wigner symmetries, multipliers of projective representations and the spin-1/2
// angular-momentum fixture.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "oplattice/linalg.hpp"
#include "oplattice/projector.hpp"
#include "oplattice/spectral.hpp"
#include "oplattice/states.hpp"

namespace oplattice {

/// e^{−itH} through the spectral measure of H.
inline UnitaryOperator evolve_unitary(const HermitianOperator& h, double t) {
    const ProjectorValuedMeasure pvm = spectral_decompose(h);
    const Matrix u = func_calculus(pvm, [t](double x) { return std::exp(Complex(0.0, -t * x)); });
    return UnitaryOperator::validated(u, 1e-9);
}

// ---------------------------------------------------------------------------
// Generator recovery

struct GroupSample {
    double t;
    Matrix u;
};

struct GeneratorEstimate {
    HermitianOperator generator;
    double group_defect = 0;           ///< worst unitarity / U_{-t} = U_t* / U_tU_s = U_{t+s} defect
    double reconstruction_defect = 0;  ///< max_t ‖e^{−itĤ} − U_t‖_F
};

inline std::vector<GroupSample> default_stencil(const HermitianOperator& h) {
    std::vector<GroupSample> out;
    for (double t : {-1e-3, -5e-4, 5e-4, 1e-3}) out.push_back({t, evolve_unitary(h, t).matrix()});
    return out;
}

/// Estimates H from samples of U_t = e^{−itH} near t = 0: central differences
/// i(U_h − U_{−h})/2h on symmetric pairs, Richardson-extrapolated across the two smallest
/// step sizes; one-sided i(U_t − I)/t when no symmetric pair exists.
inline GeneratorEstimate generator_from_group(std::span<const GroupSample> samples, double group_tol = 1e-8,
                                              double recon_tol = 1e-6) {
    if (samples.empty()) throw InconsistentGroup(INFINITY);
    const Index n = samples.front().u.rows();
    const Matrix id = identity(n);
    double group_defect = 0.0;
    for (const auto& s : samples) {
        require_square(s.u);
        require_same_dim(s.u.rows(), n);
        if (s.t == 0.0) group_defect = std::max(group_defect, frobenius(s.u - id));
        group_defect = std::max(group_defect, unitarity_defect(s.u));
    }
    auto find = [&](double t) -> const GroupSample* {
        for (const auto& s : samples)
            if (std::abs(s.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return &s;
        return nullptr;
    };
    for (const auto& a : samples)
        for (const auto& b : samples) {
            if (const GroupSample* c = find(a.t + b.t)) group_defect = std::max(group_defect, frobenius(a.u * b.u - c->u));
            if (a.t == -b.t) group_defect = std::max(group_defect, frobenius(a.u - b.u.adjoint()));
        }
    if (group_defect > group_tol) throw InconsistentGroup(group_defect);

    // Symmetric pairs keyed by step size.
    std::map<double, Matrix> central;
    for (const auto& s : samples)
        if (s.t > 0.0)
            if (const GroupSample* m = find(-s.t)) central.emplace(s.t, Complex(0, 1) * (s.u - m->u) / (2.0 * s.t));
    Matrix estimate;
    if (central.size() >= 2) {
        auto it = central.begin();
        const double h1 = it->first;
        const Matrix d1 = it->second;
        ++it;
        const double h2 = it->first;
        const Matrix d2 = it->second;
        // D(h) = H + c h² + O(h⁴)
        estimate = (h2 * h2 * d1 - h1 * h1 * d2) / (h2 * h2 - h1 * h1);
    } else if (central.size() == 1) {
        estimate = central.begin()->second;
    } else {
        std::map<double, std::pair<double, Matrix>> one_sided;  // |t| → (t, D(t))
        for (const auto& s : samples)
            if (s.t != 0.0) one_sided.emplace(std::abs(s.t), std::pair{s.t, Complex(0, 1) * (s.u - id) / s.t});
        if (one_sided.empty()) {
            estimate = Matrix::Zero(n, n);
        } else if (one_sided.size() == 1) {
            estimate = one_sided.begin()->second.second;
        } else {
            auto it = one_sided.begin();
            const auto [t1, d1] = it->second;
            ++it;
            const auto [t2, d2] = it->second;
            // D(t) = H + c t + O(t²)
            estimate = (t2 * d1 - t1 * d2) / (t2 - t1);
        }
    }
    const double anti = frobenius(estimate - estimate.adjoint()) / 2.0;
    if (anti > 1e-6 * std::max(1.0, frobenius(estimate))) throw NotHermitianResult(anti);
    HermitianOperator h = HermitianOperator::validated(estimate, 1.0);

    double recon = 0.0;
    for (const auto& s : samples) recon = std::max(recon, frobenius(evolve_unitary(h, s.t).matrix() - s.u));
    if (recon > recon_tol) throw InconsistentGroup(recon);
    return {std::move(h), group_defect, recon};
}

/// A_t = U_t* A U_t with U_t = e^{−itH}.
inline HermitianOperator heisenberg_observable(const HermitianOperator& a, const HermitianOperator& h, double t) {
    require_same_dim(a.dim(), h.dim());
    const Matrix u = evolve_unitary(h, t).matrix();
    return HermitianOperator::validated(u.adjoint() * a.matrix() * u, 1e-9);
}

// ---------------------------------------------------------------------------
// Constants of motion

inline const std::vector<double>& default_noether_grid() {
    static const std::vector<double> grid{0.1, 0.37, 1.0};
    return grid;
}

struct NoetherReport {
    bool constant_of_motion = false;   ///< A_t = A on the t grid
    bool dynamical_symmetry = false;   ///< e^{−isA} U_t = U_t e^{−isA} on the (s, t) grid
    bool hamiltonian_invariance = false;  ///< e^{−isA} H e^{isA} = H on the s grid
    double constant_defect = 0;
    double symmetry_defect = 0;
    double invariance_defect = 0;
    double tol = 0;

    bool consistent() const {
        return constant_of_motion == dynamical_symmetry && dynamical_symmetry == hamiltonian_invariance;
    }
};

/// Evaluates the three equivalent constant-of-motion conditions; disagreement means the
/// tolerance is not resolving the pair and raises EquivalenceViolation.
inline NoetherReport noether_check(const HermitianOperator& a, const HermitianOperator& h,
                                   std::span<const double> t_grid, std::span<const double> s_grid,
                                   double tol = 1e-9) {
    require_same_dim(a.dim(), h.dim());
    if (t_grid.empty() || s_grid.empty()) throw ValidationError("noether_check needs nonempty grids");
    const double sa = std::max(1.0, frobenius(a.matrix()));
    const double sh = std::max(1.0, frobenius(h.matrix()));
    NoetherReport rep;
    rep.tol = tol;
    std::vector<Matrix> ut, us;
    for (double t : t_grid) ut.push_back(evolve_unitary(h, t).matrix());
    for (double s : s_grid) us.push_back(evolve_unitary(a, s).matrix());
    for (const auto& u : ut) rep.constant_defect = std::max(rep.constant_defect, frobenius(u.adjoint() * a.matrix() * u - a.matrix()) / sa);
    for (const auto& v : us) {
        for (const auto& u : ut) rep.symmetry_defect = std::max(rep.symmetry_defect, frobenius(v * u - u * v));
        rep.invariance_defect = std::max(rep.invariance_defect, frobenius(v * h.matrix() * v.adjoint() - h.matrix()) / sh);
    }
    rep.constant_of_motion = rep.constant_defect <= tol;
    rep.dynamical_symmetry = rep.symmetry_defect <= tol;
    rep.hamiltonian_invariance = rep.invariance_defect <= tol;
    if (!rep.consistent())
        throw EquivalenceViolation("defects " + detail::fmt_real(rep.constant_defect) + ", " +
                                   detail::fmt_real(rep.symmetry_defect) + ", " + detail::fmt_real(rep.invariance_defect) +
                                   " at tol " + detail::fmt_real(tol));
    return rep;
}

inline NoetherReport noether_check(const HermitianOperator& a, const HermitianOperator& h, double tol = 1e-9) {
    return noether_check(a, h, default_noether_grid(), default_noether_grid(), tol);
}

/// Largest ‖e^{−itA}e^{−isB} − e^{−isB}e^{−itA}‖_F over the (t, s) grid.
inline double group_commutation_defect(const HermitianOperator& a, const HermitianOperator& b,
                                       std::span<const double> grid) {
    require_same_dim(a.dim(), b.dim());
    std::vector<Matrix> ua, ub;
    for (double t : grid) {
        ua.push_back(evolve_unitary(a, t).matrix());
        ub.push_back(evolve_unitary(b, t).matrix());
    }
    double worst = 0.0;
    for (const auto& x : ua)
        for (const auto& y : ub) worst = std::max(worst, frobenius(x * y - y * x));
    return worst;
}

inline bool commuting_via_groups(const HermitianOperator& a, const HermitianOperator& b,
                                 std::span<const double> grid, double tol = 1e-9) {
    return group_commutation_defect(a, b, grid) <= tol;
}

inline bool commuting_via_groups(const HermitianOperator& a, const HermitianOperator& b, double tol = 1e-9) {
    return commuting_via_groups(a, b, default_noether_grid(), tol);
}

// ---------------------------------------------------------------------------
// Time-ordered evolution

struct HamiltonianSample {
    double t;
    HermitianOperator h;
};

struct DysonResult {
    UnitaryOperator propagator;  ///< product integral U(t2, t1)
    Matrix series;               ///< truncated time-ordered series, same interval
    double unitarity_defect = 0;         ///< of the product integral
    double series_unitarity_defect = 0;
    double series_difference = 0;        ///< ‖product − series‖_F
    double truncation_bound = 0;         ///< Σ_{k>order} x^k/k! with x = ∫‖H‖, operator norms
    int order = 0;
    std::size_t nodes = 0;
};

inline constexpr int kMaxDysonOrder = 12;

/// U(t2, t1) for i dψ/dt = H(t)ψ from samples of H on a grid spanning [t1, t2].
/// Primary output: ordered product of e^{−iΔτ H̄} over sub-intervals, H̄ the average of
/// the endpoint samples. Cross-check: Σ_{k ≤ order} (−i)^k ∫_{t1 ≤ τ_k ≤ … ≤ τ_1 ≤ t2}
/// H(τ_1)···H(τ_k), the nested integrals taken by cumulative trapezoid on the same grid.
inline DysonResult dyson_evolve(std::span<const HamiltonianSample> samples, double t1, double t2, int order) {
    if (order > kMaxDysonOrder) throw OrderTooLarge(order);
    if (order < 0) throw ValidationError("series order must be non-negative");
    if (!(t1 <= t2)) throw ValidationError("dyson_evolve needs t1 <= t2");
    if (samples.size() < 2) throw QuadratureTooCoarse(samples.size(), 2);
    const Index n = samples.front().h.dim();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        require_same_dim(samples[i].h.dim(), n);
        if (i > 0 && !(samples[i].t > samples[i - 1].t)) throw QuadratureTooCoarse("sample times must increase");
    }
    const double tol_t = 1e-12 * std::max(1.0, std::max(std::abs(t1), std::abs(t2)));
    if (samples.front().t > t1 + tol_t || samples.back().t < t2 - tol_t)
        throw QuadratureTooCoarse("samples do not cover [t1, t2]");

    auto interpolate = [&](double t) -> Matrix {
        auto it = std::lower_bound(samples.begin(), samples.end(), t,
                                   [](const HamiltonianSample& s, double x) { return s.t < x; });
        if (it == samples.end()) return samples.back().h.matrix();
        if (std::abs(it->t - t) <= tol_t || it == samples.begin()) return it->h.matrix();
        const auto& lo = *(it - 1);
        const double w = (t - lo.t) / (it->t - lo.t);
        return (1.0 - w) * lo.h.matrix() + w * it->h.matrix();
    };

    std::vector<double> ts{t1};
    std::vector<Matrix> hs{interpolate(t1)};
    for (const auto& s : samples)
        if (s.t > t1 + tol_t && s.t < t2 - tol_t) {
            ts.push_back(s.t);
            hs.push_back(s.h.matrix());
        }
    if (t2 > t1) {
        ts.push_back(t2);
        hs.push_back(interpolate(t2));
    }

    double norm_integral = 0.0;
    for (std::size_t k = 1; k < ts.size(); ++k)
        norm_integral += 0.5 * (ts[k] - ts[k - 1]) * (operator_norm(hs[k]) + operator_norm(hs[k - 1]));
    const std::size_t need = std::max<std::size_t>(2, std::size_t(std::ceil((order + 1) * norm_integral)) + 1);
    if (ts.size() < need && t2 > t1) throw QuadratureTooCoarse(ts.size(), need);

    const Matrix id = identity(n);
    Matrix product = id;
    for (std::size_t k = 1; k < ts.size(); ++k) {
        const Matrix mid = 0.5 * (hs[k] + hs[k - 1]);
        product = evolve_unitary(HermitianOperator::validated(mid), ts[k] - ts[k - 1]).matrix() * product;
    }

    // S_0(τ) = I, S_k(τ) = ∫_{t1}^{τ} H(σ) S_{k−1}(σ) dσ on the grid.
    std::vector<Matrix> prev(ts.size(), id);
    Matrix series = id;
    Complex phase = 1.0;
    for (int k = 1; k <= order; ++k) {
        std::vector<Matrix> cur(ts.size(), Matrix::Zero(n, n));
        for (std::size_t j = 1; j < ts.size(); ++j)
            cur[j] = cur[j - 1] + 0.5 * (ts[j] - ts[j - 1]) * (hs[j] * prev[j] + hs[j - 1] * prev[j - 1]);
        phase *= Complex(0.0, -1.0);
        series += phase * cur.back();
        prev = std::move(cur);
    }

    // Σ_{k>order} x^k/k!, summed until the terms stop contributing.
    double term = 1.0;
    for (int k = 1; k <= order + 1; ++k) term *= norm_integral / k;
    double bound = 0.0;
    for (int k = order + 1; k < order + 400 && term > bound * 1e-17; ++k) {
        bound += term;
        term *= norm_integral / (k + 1);
    }

    DysonResult out{UnitaryOperator::validated(product, 1e-8), series};
    out.unitarity_defect = oplattice::unitarity_defect(product);
    out.series_unitarity_defect = oplattice::unitarity_defect(series);
    out.series_difference = frobenius(product - series);
    out.truncation_bound = bound;
    out.order = order;
    out.nodes = ts.size();
    return out;
}

// ---------------------------------------------------------------------------
// Wigner symmetries

/// Unitary (x ↦ Ux) or antiunitary (x ↦ U conj(x)) operator.
class SymmetryOperator {
public:
    static SymmetryOperator validated(const Matrix& u, bool antiunitary, double tol = kDefaultTol) {
        return SymmetryOperator(UnitaryOperator::validated(u, tol).matrix(), antiunitary);
    }
    static SymmetryOperator time_reversal(Index n) { return SymmetryOperator(identity(n), true); }

    Index dim() const noexcept { return matrix_.rows(); }
    const Matrix& matrix() const noexcept { return matrix_; }
    bool antiunitary() const noexcept { return antiunitary_; }

    Vector apply(const Vector& x) const { return antiunitary_ ? Vector(matrix_ * x.conjugate()) : Vector(matrix_ * x); }

    /// V A V⁻¹.
    Matrix conjugate(const Matrix& a) const {
        require_same_dim(a.rows(), dim());
        return antiunitary_ ? Matrix(matrix_ * a.conjugate() * matrix_.adjoint())
                            : Matrix(matrix_ * a * matrix_.adjoint());
    }

    SymmetryOperator inverse() const {
        // (U K)⁻¹ = K U* = conj(U*) K
        return antiunitary_ ? SymmetryOperator(matrix_.adjoint().conjugate(), true)
                            : SymmetryOperator(matrix_.adjoint(), false);
    }

    /// (V₁ ∘ V₂)x = V₁(V₂ x).
    friend SymmetryOperator operator*(const SymmetryOperator& a, const SymmetryOperator& b) {
        require_same_dim(a.dim(), b.dim());
        const Matrix m = a.antiunitary_ ? Matrix(a.matrix_ * b.matrix_.conjugate()) : Matrix(a.matrix_ * b.matrix_);
        return SymmetryOperator(m, a.antiunitary_ != b.antiunitary_);
    }

private:
    SymmetryOperator(Matrix m, bool anti) : matrix_(std::move(m)), antiunitary_(anti) {}
    Matrix matrix_;
    bool antiunitary_;
};

inline DensityState wigner_apply(const SymmetryOperator& v, const DensityState& rho) {
    return DensityState::validated(v.conjugate(rho.matrix()), 1e-9);
}

inline HermitianOperator wigner_apply(const SymmetryOperator& v, const HermitianOperator& a) {
    return HermitianOperator::validated(v.conjugate(a.matrix()), 1e-9);
}

inline PureStateVector wigner_apply(const SymmetryOperator& v, const PureStateVector& psi) {
    require_same_dim(v.dim(), psi.dim());
    return PureStateVector::normalized(v.apply(psi.amplitudes()));
}

/// True when σ(H) and σ(−H) differ as multisets, so no unitary T can satisfy THT⁻¹ = −H.
inline bool unitary_reversal_excluded(const HermitianOperator& h, double tol = 1e-9) {
    const RealVector ev = eig_hermitian(h).eigenvalues;
    const Index n = ev.size();
    for (Index k = 0; k < n; ++k)
        if (std::abs(ev(k) + ev(n - 1 - k)) > tol * std::max(1.0, ev.cwiseAbs().maxCoeff())) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Multipliers of projective representations

/// ω(g, g′) for a finite list of group elements, indexed by position.
class MultiplierTable {
public:
    static MultiplierTable validated(std::vector<std::string> elements, Eigen::MatrixXcd omega, double tol = 1e-10) {
        const Index m = static_cast<Index>(elements.size());
        if (omega.rows() != m || omega.cols() != m) throw ValidationError("multiplier table has the wrong shape");
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j)
                if (std::abs(std::abs(omega(i, j)) - 1.0) > tol)
                    throw ValidationError("multiplier is not unit modulus");
        return MultiplierTable(std::move(elements), std::move(omega));
    }

    std::size_t size() const noexcept { return elements_.size(); }
    const std::vector<std::string>& elements() const noexcept { return elements_; }
    Complex operator()(std::size_t g, std::size_t h) const { return omega_(Index(g), Index(h)); }

private:
    MultiplierTable(std::vector<std::string> e, Eigen::MatrixXcd w) : elements_(std::move(e)), omega_(std::move(w)) {}
    std::vector<std::string> elements_;
    Eigen::MatrixXcd omega_;
};

using GroupLaw = std::function<std::size_t(std::size_t, std::size_t)>;

/// Reads ω(g, g′) off U_g U_{g′} U_{gg′}⁻¹ = ω(g, g′) I; throws if a product is not scalar.
inline MultiplierTable extract_multipliers(std::vector<std::string> elements, std::span<const Matrix> ops,
                                           const GroupLaw& mult, double tol = 1e-9) {
    const std::size_t m = ops.size();
    if (elements.size() != m) throw ValidationError("one operator per group element is required");
    Eigen::MatrixXcd omega(static_cast<Index>(m), static_cast<Index>(m));
    for (std::size_t g = 0; g < m; ++g)
        for (std::size_t h = 0; h < m; ++h) {
            const Matrix c = ops[g] * ops[h] * ops[mult(g, h)].adjoint();
            const Complex w = c.trace() / double(c.rows());
            if (frobenius(c - w * identity(c.rows())) > tol) throw ValidationError("U_g U_h U_gh^-1 is not scalar");
            omega(Index(g), Index(h)) = w;
        }
    return MultiplierTable::validated(std::move(elements), std::move(omega), tol);
}

/// ω(g₁,g₂)ω(g₁g₂,g₃) = ω(g₁,g₂g₃)ω(g₂,g₃) for all triples, plus ω(g,e) = ω(e,g′) and
/// ω(g,g⁻¹) = ω(g⁻¹,g). Throws NotACocycle at the first failing triple.
inline bool cocycle_check(const MultiplierTable& w, const GroupLaw& mult, double tol = 1e-10) {
    const std::size_t m = w.size();
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            for (std::size_t c = 0; c < m; ++c) {
                const Complex lhs = w(a, b) * w(mult(a, b), c);
                const Complex rhs = w(a, mult(b, c)) * w(b, c);
                if (const double d = std::abs(lhs - rhs); d > tol) throw NotACocycle(a, b, c, d);
            }
    std::size_t e = m;
    for (std::size_t g = 0; g < m && e == m; ++g) {
        bool unit = true;
        for (std::size_t h = 0; h < m; ++h) unit = unit && mult(g, h) == h && mult(h, g) == h;
        if (unit) e = g;
    }
    if (e == m) throw ValidationError("group law has no identity element");
    for (std::size_t g = 0; g < m; ++g) {
        for (std::size_t h = 0; h < m; ++h)
            if (const double d = std::abs(w(g, e) - w(e, h)); d > tol) throw NotACocycle(g, e, h, d);
        for (std::size_t h = 0; h < m; ++h)
            if (mult(g, h) == e)
                if (const double d = std::abs(w(g, h) - w(h, g)); d > tol) throw NotACocycle(g, h, g, d);
    }
    return true;
}

// ---------------------------------------------------------------------------
// Spin-1/2 angular momentum

struct Su2Fixture {
    std::vector<HermitianOperator> generators;  ///< S_x, S_y, S_z = (ħ/2)σ_k
    double hbar = 1.0;
    double commutator_residual = 0;  ///< max over cyclic (a,b,c) of ‖[S_a,S_b] − iħS_c‖_F
    std::vector<RealVector> spectra;
    double subgroup_defect = 0;  ///< group law of θ ↦ e^{−iθS_z/ħ} on the sample grid
    HermitianOperator nelson;    ///< Σ_k S_k²
    EigenSystem nelson_eigen;
};

inline Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
inline Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}
inline Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

inline Su2Fixture su2_fixture(double hbar = 1.0) {
    std::vector<HermitianOperator> s{HermitianOperator::validated(hbar / 2 * pauli_x()),
                                     HermitianOperator::validated(hbar / 2 * pauli_y()),
                                     HermitianOperator::validated(hbar / 2 * pauli_z())};
    double comm = 0.0;
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        comm = std::max(comm, frobenius(commutator(s[a].matrix(), s[b].matrix()) - Complex(0, hbar) * s[c].matrix()));
    }
    std::vector<RealVector> spectra;
    for (const auto& op : s) spectra.push_back(eig_hermitian(op).eigenvalues);

    const HermitianOperator sz_over_hbar = HermitianOperator::validated(s[2].matrix() / hbar);
    double sub = 0.0;
    const double grid[] = {0.3, 1.1, 2.0 * std::numbers::pi, 4.0};
    for (double a : grid)
        for (double b : grid)
            sub = std::max(sub, frobenius(evolve_unitary(sz_over_hbar, a).matrix() * evolve_unitary(sz_over_hbar, b).matrix() -
                                          evolve_unitary(sz_over_hbar, a + b).matrix()));
    Matrix delta = Matrix::Zero(2, 2);
    for (const auto& op : s) delta += op.matrix() * op.matrix();
    HermitianOperator nelson = HermitianOperator::validated(delta);
    EigenSystem ne = eig_hermitian(nelson);
    return {std::move(s), hbar, comm, std::move(spectra), sub, std::move(nelson), std::move(ne)};
}

}  // namespace oplattice
