// Acceptance gate: one line per criterion, tolerances fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "oplattice/cli.hpp"
#include "oplattice/oplattice.hpp"
#include "oracles.hpp"

using namespace oplattice;
using json_io::Json;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

HermitianOperator herm(const Matrix& m) { return HermitianOperator::validated(m); }

Matrix diag_of(const RealVector& d) { return d.cast<Complex>().asDiagonal(); }

// ---------------------------------------------------------------------------

Verdict spectral_roundtrip() {
    constexpr double kTol = 1e-10;
    oracle::Rng rng(1001);
    double worst_rel = 0, worst_complete = 0, worst_orth = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Index n = rng.integer(2, 64);
        const Matrix a = oracle::random_hermitian(rng, n);
        const auto pvm = spectral_decompose(herm(a));
        worst_rel = std::max(worst_rel, frobenius(a - pvm.reconstruct()) / frobenius(a));
        worst_complete = std::max(worst_complete, pvm.completeness_residual());
        worst_orth = std::max(worst_orth, pvm.orthogonality_residual());
    }
    return {worst_rel <= kTol && worst_complete <= kTol && worst_orth <= kTol,
            "1000 matrices, max relative residual " + fmt(worst_rel) + ", completeness " + fmt(worst_complete) +
                ", orthogonality " + fmt(worst_orth) + " (tol 1e-10)"};
}

Verdict pauli_fixture() {
    constexpr double kTol = 1e-12;
    double worst_comm = 0, worst_spec = 0;
    for (double hbar : {1.0, 0.5, 2.0}) {
        const Su2Fixture f = su2_fixture(hbar);
        worst_comm = std::max(worst_comm, f.commutator_residual);
        for (const auto& s : f.spectra)
            worst_spec = std::max({worst_spec, std::abs(s(0) + hbar / 2), std::abs(s(1) - hbar / 2)});
    }
    return {worst_comm <= kTol && worst_spec <= kTol,
            "hbar in {1, 0.5, 2}: commutator residual " + fmt(worst_comm) + ", spectrum defect " + fmt(worst_spec) +
                " (tol 1e-12)"};
}

Verdict c2_counterexample() {
    constexpr double kTol = 1e-12;
    auto run_demo = [] {
        std::ostringstream out, err;
        const int code = cli::run({"demo", "--name", "c2-distributivity"}, out, err);
        return std::make_pair(code, out.str());
    };
    const auto [code1, text1] = run_demo();
    const auto [code2, text2] = run_demo();
    if (code1 != cli::kExitOk) return {false, "demo exited with " + std::to_string(code1)};
    const Json j = Json::parse(text1);
    const double lhs = j.at("checks").at("lhs_equals_p1").at("value").get<double>();
    const double rhs = j.at("checks").at("rhs_is_zero").at("value").get<double>();
    const bool identical = code1 == code2 && text1 == text2;
    return {lhs <= kTol && rhs <= kTol && identical,
            "via demo: |lhs - P1| " + fmt(lhs) + ", |rhs| " + fmt(rhs) + " (tol 1e-12), repeat run " +
                (identical ? "byte-identical" : "DIFFERS")};
}

Verdict jauch_vs_meet() {
    constexpr double kTol = 1e-7, kAngleTol = 1e-10;
    oracle::Rng rng(1004);
    double worst = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const Index n = rng.integer(2, 16);
        Matrix p, q;
        if (trial % 2 == 0) {
            p = oracle::random_projector(rng, n, rng.integer(0, n));
            q = oracle::random_projector(rng, n, rng.integer(0, n));
        } else {
            // Shared k-dimensional intersection plus generic extra directions.
            const Matrix u = oracle::random_unitary(rng, n);
            const Index k = rng.integer(1, n - 1);
            const Matrix rest = u.rightCols(n - k);
            const Index ep = rng.integer(0, n - k), eq = rng.integer(0, n - k);
            Matrix pc(n, k + ep), qc(n, k + eq);
            pc << u.leftCols(k), oracle::gram_schmidt(rest * rng.ginibre(n - k, ep), 1e-12);
            qc << u.leftCols(k), oracle::gram_schmidt(rest * rng.ginibre(n - k, eq), 1e-12);
            p = oracle::projector_onto(pc);
            q = oracle::projector_onto(qc);
        }
        const Projector pp = Projector::validated(p), qq = Projector::validated(q);
        worst = std::max(worst, frobenius(jauch_meet(pp, qq).matrix() - meet(pp, qq).matrix()));
    }
    const double theta = 0.3;
    Vector e1(2), v(2);
    e1 << 1, 0;
    v << std::cos(theta), std::sin(theta);
    const auto norms = alternating_product_norms(Projector::onto(e1), Projector::onto(v), 40);
    double angle_worst = 0;
    for (std::size_t k = 0; k < norms.size(); ++k)
        angle_worst = std::max(angle_worst, std::abs(norms[k] - std::pow(std::cos(theta), 2.0 * double(k + 1))));
    return {worst <= kTol && angle_worst <= kAngleTol,
            "500 pairs max |jauch - meet| " + fmt(worst) + " (tol 1e-7); angle fixture max step error " +
                fmt(angle_worst) + " (tol 1e-10)"};
}

Verdict gleason_roundtrip() {
    constexpr double kTol = 1e-8;
    oracle::Rng rng(1005);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = rng.integer(3, 8);
        const Matrix t = oracle::random_density(rng, n, rng.integer(1, n));
        std::vector<Assignment> as;
        for (const auto& p : tomography_frame(n)) as.push_back({p, (t * p.matrix()).trace().real()});
        worst = std::max(worst, frobenius(gleason_fit(as).state.matrix() - t));
    }
    int found = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = rng.integer(3, 6);
        const DensityState rho = DensityState::validated(oracle::random_density(rng, n, rng.integer(1, n)));
        try {
            const auto w = kochen_specker_witness(rho);
            const double p = born_probability(rho, w.projector);
            if (std::abs(p - w.probability) <= 1e-12 && p >= 0.01 && p <= 0.99) ++found;
        } catch (const Error&) {
        }
    }
    return {worst <= kTol && found == 100,
            "200 states max recovery error " + fmt(worst) + " (tol 1e-8); witnesses " + std::to_string(found) + "/100"};
}

Verdict commutant_dimensions() {
    constexpr double kAngleTol = 1e-8;
    bool ok = true;
    std::string notes;
    for (Index n : {2, 3, 4, 5}) {
        std::vector<Matrix> units, diag;
        for (Index j = 0; j < n; ++j) {
            diag.push_back(oracle::unit(n, j, j));
            for (Index k = 0; k < n; ++k) units.push_back(oracle::unit(n, j, k));
        }
        ok = ok && commutant(units, n).size() == 1 && commutant(diag, n).size() == n;
    }
    std::vector<Matrix> blocks;
    for (Index j = 0; j < 2; ++j)
        for (Index k = 0; k < 2; ++k) blocks.push_back(oracle::block_diag({oracle::unit(2, j, k), Matrix::Zero(3, 3)}));
    for (Index j = 0; j < 3; ++j)
        for (Index k = 0; k < 3; ++k) blocks.push_back(oracle::block_diag({Matrix::Zero(2, 2), oracle::unit(3, j, k)}));
    const MatrixStarAlgebra m23 = MatrixStarAlgebra::from_spanning(blocks, 5);
    const Index zdim = center(m23).size();
    const bool factor = is_factor(m23);
    ok = ok && zdim == 2 && !factor;

    oracle::Rng rng(1006);
    double worst = 0;
    int dim_mismatch = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = rng.integer(2, 8);
        std::vector<Matrix> gens;
        switch (trial % 4) {
            case 0: gens.push_back(rng.ginibre(n, n)); break;
            case 1: {
                const Index k = rng.integer(1, n - 1);
                gens.push_back(oracle::block_diag({rng.ginibre(k, k), rng.ginibre(n - k, n - k)}));
                break;
            }
            case 2: {
                const Matrix u = oracle::random_unitary(rng, n);
                RealVector d(n);
                for (Index i = 0; i < n; ++i) d(i) = double(rng.integer(0, 2));
                gens.push_back(u * diag_of(d) * u.adjoint());
                break;
            }
            default: {
                const Index k = rng.integer(1, n - 1);
                gens.push_back(oracle::block_diag({oracle::random_hermitian(rng, k), Matrix::Zero(n - k, n - k)}));
                gens.push_back(oracle::block_diag({Matrix::Zero(k, k), oracle::random_hermitian(rng, n - k)}));
            }
        }
        const MatrixStarAlgebra dc = double_commutant(gens, n);
        const Matrix words = oracle::word_closure(gens, n);
        if (dc.size() != words.cols()) {
            ++dim_mismatch;
            continue;
        }
        worst = std::max(worst, oracle::principal_angle_gap(dc.vectorized_basis(), words));
    }
    ok = ok && dim_mismatch == 0 && worst <= kAngleTol;
    return {ok, "M_n -> 1, diagonal -> n, M2+M3 center " + std::to_string(zdim) + (factor ? " factor" : " non-factor") +
                    "; 100 sets double commutant vs words max gap " + fmt(worst) + " (tol 1e-8), dim mismatches " +
                    std::to_string(dim_mismatch)};
}

Verdict electric_charge() {
    const std::vector<HermitianOperator> charges{herm(kron(identity(2), pauli_z()))};
    const std::vector<Matrix> gens{kron(pauli_x(), identity(2)), kron(pauli_y(), identity(2)),
                                   kron(pauli_z(), identity(2)), kron(identity(2), pauli_z())};
    const SectorDecomposition sd = superselection_sectors(charges, gens, 4);
    bool ok = sd.sectors.size() == 2;
    double charge_defect = 0;
    for (const auto& s : sd.sectors) {
        ok = ok && s.dim() == 2 && s.commutant_dim == 1 && std::abs(std::abs(s.label[0]) - 1.0) <= 1e-12;
        charge_defect = std::max(charge_defect, frobenius(s.charges[0] - s.label[0] * identity(2)));
    }
    ok = ok && charge_defect <= 1e-12 && sd.sectors[0].label[0] != sd.sectors[1].label[0];
    return {ok, std::to_string(sd.sectors.size()) + " sectors of dim 2, commutant dim 1 each, compressed charge defect " +
                    fmt(charge_defect) + " (tol 1e-12), labels -1 and +1"};
}

Verdict noether_equivalence() {
    constexpr double kTol = 1e-9;
    oracle::Rng rng(1008);
    int agree = 0, fh_true = 0, fh_total = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const Index n = rng.integer(2, 6);
        const Matrix h = oracle::random_hermitian(rng, n);
        Matrix a;
        const int kind = trial % 3;
        if (kind == 0) {
            a = 0.3 * h * h - h + rng.uniform(-1, 1) * identity(n);
        } else if (kind == 1) {
            a = oracle::random_hermitian(rng, n);
        } else {
            // Commutes with a block-diagonal H through shared blocks.
            const Index k = rng.integer(1, n - 1);
            const Matrix hb = oracle::block_diag({oracle::random_hermitian(rng, k), oracle::random_hermitian(rng, n - k)});
            a = oracle::block_diag({rng.uniform(-1, 1) * identity(k), rng.uniform(-1, 1) * identity(n - k)});
            try {
                const NoetherReport r = noether_check(herm(a), herm(hb), kTol);
                agree += r.consistent();
            } catch (const EquivalenceViolation&) {
            }
            continue;
        }
        try {
            const NoetherReport r = noether_check(herm(a), herm(h), kTol);
            agree += r.consistent();
            if (kind == 0) {
                ++fh_total;
                fh_true += r.constant_of_motion && r.dynamical_symmetry && r.hamiltonian_invariance;
            }
        } catch (const EquivalenceViolation&) {
        }
    }
    return {agree == 500 && fh_true == fh_total,
            "500 pairs agreeing " + std::to_string(agree) + "/500, f(H) all-true " + std::to_string(fh_true) + "/" +
                std::to_string(fh_total) + " (tol 1e-9)"};
}

Verdict stone_roundtrip() {
    oracle::Rng rng(1009);
    double worst_gen = 0, worst_group = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = rng.integer(2, 8);
        Matrix h = oracle::random_hermitian(rng, n);
        h *= rng.uniform(0.01, 10.0) / operator_norm(h);
        const HermitianOperator hh = herm(h);
        const GeneratorEstimate est = generator_from_group(default_stencil(hh));
        worst_gen = std::max(worst_gen, operator_norm(est.generator.matrix() - h));
        const double t = rng.uniform(-1, 1), s = rng.uniform(-1, 1);
        worst_group = std::max({worst_group, est.group_defect,
                                frobenius(evolve_unitary(hh, t).matrix() * evolve_unitary(hh, s).matrix() -
                                          evolve_unitary(hh, t + s).matrix())});
    }
    return {worst_gen <= 1e-6 && worst_group <= 1e-10,
            "100 generators, norm <= 10: max recovery error " + fmt(worst_gen) + " (tol 1e-6), group residual " +
                fmt(worst_group) + " (tol 1e-10)"};
}

Verdict dyson() {
    auto grid = [](double t1, double t2, int steps, const std::function<Matrix(double)>& h) {
        std::vector<HamiltonianSample> out;
        for (int k = 0; k <= steps; ++k) {
            const double t = t1 + (t2 - t1) * k / steps;
            out.push_back({t, herm(h(t))});
        }
        return out;
    };
    // f(τ) = 1 + τ² on [0, 1/2]: ∫f = 13/24, so the order-8 remainder is below 1e-8.
    const auto commuting = grid(0.0, 0.5, 2000, [](double t) { return Matrix((1.0 + t * t) * pauli_z()); });
    const DysonResult dc = dyson_evolve(commuting, 0.0, 0.5, 8);
    const Matrix exact = oracle::expm(Complex(0, -13.0 / 24.0) * pauli_z());
    const double comm_err = std::max(frobenius(dc.propagator.matrix() - exact), frobenius(dc.series - exact));

    const Matrix h0 = 0.4 * pauli_x() + 0.3 * pauli_z();
    // Trapezoid error on the nested integrals is O(h²‖H‖²); 1e4 steps puts it under the remainder bound.
    const auto constant = grid(0.0, 1.0, 10000, [&](double) { return h0; });
    const DysonResult dk = dyson_evolve(constant, 0.0, 1.0, 8);
    const double const_err = operator_norm(dk.series - evolve_unitary(herm(h0), 1.0).matrix());

    const auto fixture = json_io::hamiltonian_samples_from_json(
        json_io::read_file(std::string(OPLATTICE_DATA_DIR) + "/fixtures/dyson-noncommuting.json"));
    // Operator norm, the norm of the truncation bound; Frobenius is reported alongside.
    const Matrix diff = dyson_evolve(fixture, 0.0, 0.5, 8).series - dyson_evolve(fixture, 0.0, 0.5, 10).series;
    const double self = operator_norm(diff);
    return {comm_err <= 1e-6 && const_err <= dk.truncation_bound && self <= 1e-8,
            "commuting family error " + fmt(comm_err) + " (tol 1e-6); constant H error " + fmt(const_err) +
                " within bound " + fmt(dk.truncation_bound) + "; order 8 vs 10 " + fmt(self) + " (tol 1e-8, operator norm; Frobenius " +
                fmt(frobenius(diff)) + ")"};
}

Verdict truncated_ccr() {
    double worst_norm = 0, worst_trace = 0, worst_ground = 0, worst_fock = 0;
    for (Index n = 2; n <= 64; ++n) {
        const double hbar = 1.0;
        const auto pair = build_truncated_pair(n, 1.0, 1.0, hbar);
        const Matrix c = commutator(pair.x.matrix(), pair.p.matrix());
        worst_norm = std::max(worst_norm, std::abs(operator_norm(c - Complex(0, hbar) * identity(n)) - hbar * double(n)));
        worst_trace = std::max(worst_trace, std::abs(c.trace()));
        if (n >= 4) {
            worst_ground = std::max(
                worst_ground, std::abs(heisenberg_uncertainty(pair, PureStateVector::basis(n, 0)).product - hbar / 2));
            worst_fock = std::max(
                worst_fock, std::abs(heisenberg_uncertainty(pair, PureStateVector::basis(n, 1)).product - 1.5 * hbar));
        }
    }
    return {worst_norm <= 1e-10 && worst_trace <= 1e-12 && worst_ground <= 1e-10 && worst_fock <= 1e-10,
            "N = 2..64: corner law " + fmt(worst_norm) + " (tol 1e-10), trace " + fmt(worst_trace) +
                " (tol 1e-12), ground " + fmt(worst_ground) + ", |1> " + fmt(worst_fock) + " (tol 1e-10)"};
}

Verdict gns_dimension_law() {
    oracle::Rng rng(1012);
    bool ok = true;
    double worst_expect = 0;
    int purity_disagree = 0;
    for (Index n : {2, 3, 4}) {
        const AbstractStarAlgebra mn = AbstractStarAlgebra::matrix_algebra(n);
        for (Index r = 1; r <= n; ++r) {
            const Matrix rho = oracle::random_density(rng, n, r);
            const AlgebraicState omega = AlgebraicState::from_density(mn, rho);
            const GnsTriple t = gns_construct(mn, omega);
            ok = ok && t.rep_dim == n * r;
            worst_expect = std::max(worst_expect, verify_gns(t, mn, omega).expectation_residual);
            purity_disagree += is_pure_state(mn, omega) != is_pure(DensityState::validated(rho));
        }
    }
    const ParadoxReport p = mixed_to_vector_paradox_demo(DensityState::maximally_mixed(2));
    ok = ok && worst_expect <= 1e-10 && purity_disagree == 0 && p.commutant_dim == 4 && !p.pure;
    return {ok, "rep_dim = n r for n in {2,3,4}; expectation residual " + fmt(worst_expect) +
                    " (tol 1e-10); purity disagreements " + std::to_string(purity_disagree) +
                    "; tracial M_2 commutant dim " + std::to_string(p.commutant_dim)};
}

Verdict cross_module() {
    constexpr double kTol = 1e-9;
    oracle::Rng rng(1013);
    int agree = 0, commuting = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = rng.integer(2, 6);
        Matrix a, b;
        if (trial % 2 == 0) {
            const Matrix u = oracle::random_unitary(rng, n);
            RealVector da(n), db(n);
            for (Index i = 0; i < n; ++i) {
                da(i) = rng.uniform(-2, 2);
                db(i) = double(rng.integer(-1, 1));
            }
            a = u * diag_of(da) * u.adjoint();
            b = u * diag_of(db) * u.adjoint();
        } else {
            a = oracle::random_hermitian(rng, n);
            b = oracle::random_hermitian(rng, n);
        }
        const bool via_pvm = pvm_commute(spectral_decompose(herm(a)), spectral_decompose(herm(b)), kTol);
        const bool via_groups = commuting_via_groups(herm(a), herm(b), kTol);
        agree += via_pvm == via_groups;
        commuting += via_pvm;
    }
    return {agree == 200, "200 pairs agreeing " + std::to_string(agree) + "/200 (" + std::to_string(commuting) +
                              " commuting) at tol 1e-9"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"spectral roundtrip", spectral_roundtrip},
        {"Pauli fixture", pauli_fixture},
        {"C2 distributivity counterexample", c2_counterexample},
        {"Jauch meet equals exact meet", jauch_vs_meet},
        {"Gleason roundtrip and Kochen-Specker witness", gleason_roundtrip},
        {"commutant dimensions", commutant_dimensions},
        {"superselection electric charge", electric_charge},
        {"Noether equivalence", noether_equivalence},
        {"Stone roundtrip", stone_roundtrip},
        {"Dyson series", dyson},
        {"truncated CCR", truncated_ccr},
        {"GNS dimension law", gns_dimension_law},
        {"cross-module commutation", cross_module},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2zu %s: %s [%.2fs]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    v.detail.c_str(), secs);
        failures += !v.pass;
    }
    std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
