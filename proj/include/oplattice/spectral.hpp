#pragma once

// Finite projector-valued measures: spectral decomposition of Hermitian
// operators, functional calculus and joint spectral measures.

#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "oplattice/linalg.hpp"
#include "oplattice/projector.hpp"

namespace oplattice {

inline constexpr double kDefaultClusterTol = 1e-8;

using Label = std::vector<double>;

struct PvmAtom {
    Label label;
    Projector projector;
};

/// Finite PVM: pairwise-orthogonal projectors summing to the identity, each tagged with
/// a distinct real (or real-tuple) label.
class ProjectorValuedMeasure {
public:
    static ProjectorValuedMeasure validated(Index dim, std::vector<PvmAtom> atoms, double tol = kDefaultTol) {
        ProjectorValuedMeasure pvm(dim, std::move(atoms));
        for (const auto& a : pvm.atoms_) require_same_dim(a.projector.dim(), dim);
        for (std::size_t i = 0; i < pvm.atoms_.size(); ++i)
            for (std::size_t j = i + 1; j < pvm.atoms_.size(); ++j)
                if (pvm.atoms_[i].label == pvm.atoms_[j].label) throw InvalidPvm("duplicate label");
        const double scale = std::max(1.0, std::sqrt(double(dim)));
        if (const double c = pvm.completeness_residual(); c > tol * scale)
            throw InvalidPvm("projectors do not sum to I, residual " + detail::fmt_real(c));
        if (const double o = pvm.orthogonality_residual(); o > tol * scale)
            throw InvalidPvm("projectors are not mutually orthogonal, residual " + detail::fmt_real(o));
        return pvm;
    }

    Index dim() const noexcept { return dim_; }
    const std::vector<PvmAtom>& atoms() const& noexcept { return atoms_; }
    /// By value on temporaries so range-for over spectral_decompose(a).atoms() stays valid.
    std::vector<PvmAtom> atoms() && { return std::move(atoms_); }
    std::size_t size() const noexcept { return atoms_.size(); }

    /// ‖Σ_a P_a − I‖_F.
    double completeness_residual() const {
        Matrix sum = Matrix::Zero(dim_, dim_);
        for (const auto& a : atoms_) sum += a.projector.matrix();
        return frobenius(sum - identity(dim_));
    }

    /// max over a ≠ b of ‖P_a P_b‖_F, evaluated as ‖V_a* V_b‖_F on the range bases,
    /// together with the orthonormality defect of every range basis.
    double orthogonality_residual() const {
        Index total = 0;
        for (const auto& a : atoms_) total += a.projector.rank();
        Matrix all(dim_, total);
        std::vector<Index> offsets;
        Index off = 0;
        for (const auto& a : atoms_) {
            offsets.push_back(off);
            all.middleCols(off, a.projector.rank()) = a.projector.range();
            off += a.projector.rank();
        }
        const Matrix gram = all.adjoint() * all;
        double worst = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const Index ri = atoms_[i].projector.rank();
            worst = std::max(worst, frobenius(gram.block(offsets[i], offsets[i], ri, ri) - identity(ri)));
            for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
                const Index rj = atoms_[j].projector.rank();
                worst = std::max(worst, frobenius(gram.block(offsets[i], offsets[j], ri, rj)));
            }
        }
        return worst;
    }

    /// Σ_a λ_a P_a using the first label coordinate.
    Matrix reconstruct() const {
        Matrix out = Matrix::Zero(dim_, dim_);
        for (const auto& a : atoms_) out += a.label.front() * a.projector.matrix();
        return out;
    }

    /// Index of the atom whose label matches within tol, or -1.
    std::ptrdiff_t find(const Label& label, double tol = 1e-9) const {
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const auto& l = atoms_[i].label;
            if (l.size() != label.size()) continue;
            bool same = true;
            for (std::size_t k = 0; k < l.size(); ++k) same = same && std::abs(l[k] - label[k]) <= tol;
            if (same) return static_cast<std::ptrdiff_t>(i);
        }
        return -1;
    }

private:
    ProjectorValuedMeasure(Index dim, std::vector<PvmAtom> atoms) : dim_(dim), atoms_(std::move(atoms)) {}

    friend ProjectorValuedMeasure spectral_decompose(const HermitianOperator&, double);
    friend ProjectorValuedMeasure joint_pvm(std::span<const HermitianOperator>, double, double);

    Index dim_;
    std::vector<PvmAtom> atoms_;
};

/// Groups eigenvalues by single linkage with threshold cluster_tol·max(1, spread) and
/// returns one atom per cluster, labelled by the cluster mean.
inline ProjectorValuedMeasure spectral_decompose(const HermitianOperator& a,
                                                 double cluster_tol = kDefaultClusterTol) {
    const EigenSystem es = eig_hermitian(a);
    const Index n = es.eigenvalues.size();
    const double spread = es.eigenvalues(n - 1) - es.eigenvalues(0);
    const double threshold = cluster_tol * std::max(1.0, spread);
    std::vector<PvmAtom> atoms;
    Index start = 0;
    for (Index k = 1; k <= n; ++k) {
        if (k < n && es.eigenvalues(k) - es.eigenvalues(k - 1) <= threshold) continue;
        const Index len = k - start;
        const double mean = es.eigenvalues.segment(start, len).mean();
        atoms.push_back({Label{mean}, Projector::from_orthonormal(es.eigenvectors.middleCols(start, len))});
        start = k;
    }
    return ProjectorValuedMeasure(a.dim(), std::move(atoms));
}

/// Σ_a f(a) P_a with f given as one sample per atom, in atom order.
inline Matrix func_calculus(const ProjectorValuedMeasure& pvm, std::span<const Complex> samples) {
    if (samples.size() < pvm.size()) throw MissingSample(pvm.atoms()[samples.size()].label.front());
    Matrix out = Matrix::Zero(pvm.dim(), pvm.dim());
    for (std::size_t i = 0; i < pvm.size(); ++i) out += samples[i] * pvm.atoms()[i].projector.matrix();
    return out;
}

/// Σ_a f(a) P_a with f given as a finite map (label, value); every atom label must
/// appear within match_tol.
inline Matrix func_calculus(const ProjectorValuedMeasure& pvm, std::span<const std::pair<double, Complex>> table,
                            double match_tol = 1e-9) {
    std::vector<Complex> samples;
    samples.reserve(pvm.size());
    for (const auto& atom : pvm.atoms()) {
        const double x = atom.label.front();
        const auto it = std::find_if(table.begin(), table.end(),
                                     [&](const auto& kv) { return std::abs(kv.first - x) <= match_tol; });
        if (it == table.end()) throw MissingSample(x);
        samples.push_back(it->second);
    }
    return func_calculus(pvm, std::span<const Complex>(samples));
}

/// Samples a callable at the labels and forms Σ_a f(a) P_a.
template <class F>
    requires std::is_invocable_r_v<Complex, F, double>
Matrix func_calculus(const ProjectorValuedMeasure& pvm, F&& f) {
    std::vector<Complex> samples;
    samples.reserve(pvm.size());
    for (const auto& atom : pvm.atoms()) samples.push_back(static_cast<Complex>(f(atom.label.front())));
    return func_calculus(pvm, std::span<const Complex>(samples));
}

/// Largest ‖P_a Q_b − Q_b P_a‖_F over all atom pairs.
inline double pvm_commutation_defect(const ProjectorValuedMeasure& p, const ProjectorValuedMeasure& q) {
    require_same_dim(p.dim(), q.dim());
    double worst = 0.0;
    for (const auto& a : p.atoms())
        for (const auto& b : q.atoms())
            worst = std::max(worst, frobenius(commutator(a.projector.matrix(), b.projector.matrix())));
    return worst;
}

inline bool pvm_commute(const ProjectorValuedMeasure& p, const ProjectorValuedMeasure& q, double tol = kDefaultTol) {
    return pvm_commutation_defect(p, q) <= tol;
}

/// Joint spectral measure of pairwise-commuting observables; atoms are labelled by
/// eigenvalue tuples and projectors are products of the individual spectral projectors.
/// Products of trace below 1/2 (empty joint eigenspaces) are dropped.
inline ProjectorValuedMeasure joint_pvm(std::span<const HermitianOperator> ops, double tol = kDefaultTol,
                                        double cluster_tol = kDefaultClusterTol) {
    if (ops.empty()) throw ValidationError("joint_pvm needs at least one operator");
    const Index n = ops.front().dim();
    std::vector<ProjectorValuedMeasure> singles;
    singles.reserve(ops.size());
    for (const auto& op : ops) {
        require_same_dim(op.dim(), n);
        singles.push_back(spectral_decompose(op, cluster_tol));
    }
    for (std::size_t i = 0; i < singles.size(); ++i)
        for (std::size_t j = i + 1; j < singles.size(); ++j)
            if (const double d = pvm_commutation_defect(singles[i], singles[j]); d > tol) throw NonCommuting(i, j, d);

    std::vector<PvmAtom> joint = singles.front().atoms();
    for (std::size_t k = 1; k < singles.size(); ++k) {
        std::vector<PvmAtom> next;
        for (const auto& a : joint) {
            for (const auto& b : singles[k].atoms()) {
                // Range of P_a P_b for commuting projectors is range(P_a) ∩ range(P_b) = P_b(range P_a).
                const Matrix image = b.projector.matrix() * a.projector.range();
                const Matrix product = a.projector.matrix() * b.projector.matrix();
                if (product.trace().real() < 0.5) continue;
                Label label = a.label;
                label.push_back(b.label.front());
                const Index r = static_cast<Index>(std::lround(product.trace().real()));
                Eigen::JacobiSVD<Matrix> svd(image, Eigen::ComputeThinU);
                next.push_back({std::move(label), Projector::from_orthonormal(svd.matrixU().leftCols(r))});
            }
        }
        joint = std::move(next);
    }
    return ProjectorValuedMeasure(n, std::move(joint));
}

}  // namespace oplattice
