#pragma once

// Batch front end: one subcommand per call, JSON in, one ordered JSON report out.
// Exit codes: 0 ok, 2 validation error, 3 numerical tolerance failure,
// 64 unknown subcommand or bad flags, 65 malformed input.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oplattice/algebras.hpp"
#include "oplattice/ccr.hpp"
#include "oplattice/dynamics.hpp"
#include "oplattice/gns.hpp"
#include "oplattice/json_io.hpp"
#include "oplattice/lattice.hpp"
#include "oplattice/spectral.hpp"
#include "oplattice/states.hpp"

#ifndef OPLATTICE_DATA_DIR
#define OPLATTICE_DATA_DIR "data"
#endif

namespace oplattice::cli {

using json_io::Json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitMalformed = 65;

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"spectral", "funcalc", "lattice", "measure",  "collapse",
                                                "gleason-fit", "commutant", "sectors", "evolve", "noether",
                                                "dyson",    "ccr",     "gns",     "demo"};
    return names;
}

inline const std::vector<std::string>& demo_names() {
    static const std::vector<std::string> names{"c2-distributivity", "spin-ccr",    "electric-charge-sectors",
                                                "gns-m2-pure",       "gns-m2-trace", "truncated-oscillator"};
    return names;
}

struct CommandConfig {
    std::string subcommand;
    std::map<std::string, std::string> inputs;  ///< flag name (without dashes) → path
    double tol = 1e-10;
    double hbar = 1.0;
    bool hbar_given = false;
    std::uint64_t seed = 42;
    std::string out;  ///< empty: standard output
    int order = 8;
    double t = 0.0, t1 = 0.0, t2 = 1.0;
    long n = 32;
    bool n_given = false;
    std::string name;
    std::string data_dir = OPLATTICE_DATA_DIR;
    double cluster_tol = kDefaultClusterTol;

    const std::string& input(const std::string& key) const {
        auto it = inputs.find(key);
        if (it == inputs.end() || it->second.empty()) throw MalformedInput("--" + key + " is required");
        return it->second;
    }
    bool has_input(const std::string& key) const {
        auto it = inputs.find(key);
        return it != inputs.end() && !it->second.empty();
    }
};

/// Report plus the residual checks it was held to; any failed check maps to exit 3.
class Report {
public:
    explicit Report(const CommandConfig& cfg, const std::string& command) {
        body_["command"] = command;
        body_["tol"] = cfg.tol;
        body_["hbar"] = cfg.hbar;
    }

    Json& operator[](const char* key) { return body_[key]; }

    /// Records value ≤ limit under "checks".
    bool check(const std::string& name, double value, double limit) {
        const bool ok = value <= limit;
        Json c;
        c["value"] = value;
        c["limit"] = limit;
        c["ok"] = ok;
        body_["checks"][name] = std::move(c);
        passed_ = passed_ && ok;
        return ok;
    }

    bool passed() const noexcept { return passed_; }
    Json finish() {
        body_["passed"] = passed_;
        return std::move(body_);
    }

private:
    Json body_;
    bool passed_ = true;
};

namespace detail {

inline HermitianOperator read_hermitian(const std::string& path, double tol) {
    return HermitianOperator::validated(json_io::matrix_from_json(json_io::read_file(path)), tol);
}

inline HermitianOperator scaled(const HermitianOperator& h, double hbar) {
    return HermitianOperator::validated(h.matrix() / hbar);
}

inline double dim_scale(Index n) { return std::max(1.0, std::sqrt(double(n))); }

inline Json eigenvalues_json(const RealVector& v) {
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline Json operators_field(const Json& j, const char* key) {
    const Json& v = json_io::field(j, key);
    if (!v.is_array()) throw MalformedInput(std::string("\"") + key + "\" must be an array of matrices");
    return v;
}

// ---------------------------------------------------------------------------

inline Json spectral(const CommandConfig& cfg, bool& ok) {
    const HermitianOperator a = read_hermitian(cfg.input("in"), cfg.tol);
    const ProjectorValuedMeasure pvm = spectral_decompose(a, cfg.cluster_tol);
    Report r(cfg, "spectral");
    r["cluster_tol"] = cfg.cluster_tol;
    r["pvm"] = json_io::to_json(pvm);
    const double scale = std::max(1.0, frobenius(a.matrix()));
    r.check("reconstruction", frobenius(a.matrix() - pvm.reconstruct()), cfg.tol * scale);
    r.check("completeness", pvm.completeness_residual(), cfg.tol * dim_scale(a.dim()));
    r.check("orthogonality", pvm.orthogonality_residual(), cfg.tol * dim_scale(a.dim()));
    ok = r.passed();
    return r.finish();
}

/// --samples: {"samples": [{"label": x, "value": [re, im]}...]} or the bare array.
inline Json funcalc(const CommandConfig& cfg, bool& ok) {
    const HermitianOperator a = read_hermitian(cfg.input("in"), cfg.tol);
    const Json sj = json_io::read_file(cfg.input("samples"));
    const Json& arr = sj.is_object() ? json_io::field(sj, "samples") : sj;
    if (!arr.is_array()) throw MalformedInput("samples must be an array");
    std::vector<std::pair<double, Complex>> table;
    for (const auto& s : arr) table.emplace_back(json_io::real_field(s, "label"), json_io::complex_from_json(json_io::field(s, "value")));
    const ProjectorValuedMeasure pvm = spectral_decompose(a, cfg.cluster_tol);
    const Matrix f = func_calculus(pvm, table);
    Report r(cfg, "funcalc");
    r["cluster_tol"] = cfg.cluster_tol;
    r["matrix"] = json_io::to_json(f);
    r["hermitian_defect"] = frobenius(f - f.adjoint());
    r.check("reconstruction", frobenius(a.matrix() - pvm.reconstruct()), cfg.tol * std::max(1.0, frobenius(a.matrix())));
    ok = r.passed();
    return r.finish();
}

inline Json lattice(const CommandConfig& cfg, bool& ok) {
    const Projector p = json_io::projector_from_json(json_io::read_file(cfg.input("p")), cfg.tol);
    const Projector q = json_io::projector_from_json(json_io::read_file(cfg.input("q")), cfg.tol);
    Report r(cfg, "lattice");
    const Projector m = meet(p, q);
    r["neg_p"] = json_io::to_json(neg(p));
    r["neg_q"] = json_io::to_json(neg(q));
    r["meet"] = json_io::to_json(m);
    r["join"] = json_io::to_json(join(p, q));
    const CommutationReport c = commutation(p, q, cfg.tol);
    r["commutes"] = c.commutes;
    r["commutator_defect"] = c.defect;
    r["p_leq_q"] = leq(p, q, cfg.tol);
    r["q_leq_p"] = leq(q, p, cfg.tol);
    const JauchResult jr = jauch_meet_iterate(p, q, cfg.tol);
    const Projector jm = jauch_meet(p, q, cfg.tol);
    r["jauch_steps"] = jr.steps;
    r["jauch_residual"] = jr.residual;
    r["jauch_meet"] = json_io::to_json(jm);
    if (c.decomposition) r.check("decomposition_orthogonality", c.decomposition->orthogonality_defect, cfg.tol * dim_scale(p.dim()));
    r.check("jauch_vs_meet", frobenius(jm.matrix() - m.matrix()), 1e-7);
    if (leq(p, q, cfg.tol)) r["orthomodular"] = orthomodular_check(p, q, cfg.tol);
    ok = r.passed();
    return r.finish();
}

inline Json measure(const CommandConfig& cfg, bool& ok) {
    const DensityState rho = DensityState::validated(json_io::matrix_from_json(json_io::read_file(cfg.input("state"))), cfg.tol);
    const HermitianOperator a = read_hermitian(cfg.input("observable"), cfg.tol);
    require_same_dim(rho.dim(), a.dim());
    const ProjectorValuedMeasure pvm = spectral_decompose(a, cfg.cluster_tol);
    Report r(cfg, "measure");
    Json outcomes = Json::array();
    double total = 0.0, mean = 0.0;
    for (const auto& atom : pvm.atoms()) {
        const double p = born_probability(rho, atom.projector, cfg.tol * dim_scale(rho.dim()));
        total += p;
        mean += p * atom.label.front();
        Json o;
        o["label"] = atom.label;
        o["probability"] = p;
        outcomes.push_back(std::move(o));
    }
    r["outcomes"] = std::move(outcomes);
    const double e = expectation(rho, a);
    r["expectation"] = e;
    r["std_deviation"] = std_deviation(rho, a);
    r.check("probability_sum", std::abs(total - 1.0), cfg.tol * dim_scale(rho.dim()));
    r.check("expectation_consistency", std::abs(mean - e), cfg.tol * std::max(1.0, frobenius(a.matrix())));
    ok = r.passed();
    return r.finish();
}

inline Json collapse(const CommandConfig& cfg, bool& ok) {
    const DensityState rho = DensityState::validated(json_io::matrix_from_json(json_io::read_file(cfg.input("state"))), cfg.tol);
    const Projector p = json_io::projector_from_json(json_io::read_file(cfg.input("projector")), cfg.tol);
    Report r(cfg, "collapse");
    const double prob = born_probability(rho, p, cfg.tol * dim_scale(rho.dim()));
    const DensityState post = luders_collapse(rho, p);
    r["probability"] = prob;
    r["state"] = json_io::to_json(post.matrix());
    r["pure"] = is_pure(post);
    r["purity"] = post.purity();
    r.check("trace", std::abs(post.matrix().trace() - 1.0), cfg.tol * dim_scale(rho.dim()));
    r.check("support", frobenius(p.matrix() * post.matrix() * p.matrix() - post.matrix()), cfg.tol * dim_scale(rho.dim()));
    ok = r.passed();
    return r.finish();
}

inline Json gleason(const CommandConfig& cfg, bool& ok) {
    const auto as = json_io::assignments_from_json(json_io::read_file(cfg.input("in")), cfg.tol);
    const double fit_tol = std::max(cfg.tol, 1e-9);
    const GleasonFit fit = gleason_fit(as, fit_tol);
    Report r(cfg, "gleason-fit");
    r["fit_tol"] = fit_tol;
    r["state"] = json_io::to_json(fit.state.matrix());
    r["frame_rank"] = fit.frame_rank;
    r["least_squares_residual"] = fit.least_squares_residual;
    r["dimension_two_warning"] = fit.dimension_two;
    if (fit.state.dim() >= 3) {
        const KochenSpeckerWitness w = kochen_specker_witness(fit.state, 0.01, cfg.seed);
        Json kw;
        kw["seed"] = cfg.seed;
        kw["probability"] = w.probability;
        kw["projector"] = json_io::to_json(w.projector);
        r["kochen_specker_witness"] = std::move(kw);
    }
    r.check("residual", fit.residual, fit_tol);
    ok = r.passed();
    return r.finish();
}

inline Json commutant_cmd(const CommandConfig& cfg, bool& ok) {
    const Json in = json_io::read_file(cfg.input("in"));
    const Index dim = json_io::index_field(in, "dim");
    const auto gens = json_io::matrices_from_json(operators_field(in, "generators"));
    const MatrixStarAlgebra comm = commutant(gens, dim);
    const MatrixStarAlgebra generated = commutant(comm);
    const MatrixStarAlgebra z = center(generated);
    Report r(cfg, "commutant");
    r["svd_tol"] = kSvdTol;
    r["commutant_dim"] = comm.size();
    r["algebra_dim"] = generated.size();
    r["center_dim"] = z.size();
    r["is_factor"] = z.size() == 1;
    r["commutant"] = json_io::to_json(comm);
    double worst = 0.0;
    for (const auto& x : comm.basis())
        for (const auto& g : gens) worst = std::max(worst, frobenius(commutator(x, g)) / std::max(1.0, frobenius(g)));
    r.check("commutation", worst, cfg.tol * dim_scale(dim) * 100.0);
    ok = r.passed();
    return r.finish();
}

inline Json sectors_report(const CommandConfig& cfg, const std::string& command, Index dim,
                           const std::vector<Matrix>& charge_mats, const std::vector<Matrix>& gens, bool& ok) {
    std::vector<HermitianOperator> charges;
    for (const auto& q : charge_mats) charges.push_back(HermitianOperator::validated(q, cfg.tol));
    const double central_tol = std::max(cfg.tol, 1e-9);
    const SectorDecomposition sd = superselection_sectors(charges, gens, dim, central_tol);
    Report r(cfg, command);
    r["central_tol"] = central_tol;
    Json rep = json_io::to_json(sd);
    Matrix total = Matrix::Zero(dim, dim);
    double charge_defect = 0.0;
    for (std::size_t k = 0; k < sd.sectors.size(); ++k) {
        const Sector& s = sd.sectors[k];
        total += s.projector.matrix();
        Json cs = Json::array();
        for (std::size_t i = 0; i < s.charges.size(); ++i) {
            cs.push_back(json_io::to_json(s.charges[i]));
            charge_defect = std::max(charge_defect,
                                     frobenius(s.charges[i] - s.label[i] * identity(s.dim())));
        }
        rep["sectors"][k]["compressed_charges"] = std::move(cs);
    }
    r["report"] = std::move(rep);
    r.check("completeness", frobenius(total - identity(dim)), cfg.tol * dim_scale(dim));
    r.check("charge_scalar_defect", charge_defect, cfg.tol * dim_scale(dim));
    ok = r.passed();
    return r.finish();
}

inline Json sectors(const CommandConfig& cfg, bool& ok) {
    Json charges, gens;
    Index dim = 0;
    if (cfg.has_input("in")) {
        const Json in = json_io::read_file(cfg.input("in"));
        dim = json_io::index_field(in, "dim");
        charges = operators_field(in, "charges");
        gens = operators_field(in, "generators");
    } else {
        const Json c = json_io::read_file(cfg.input("charges"));
        const Json g = json_io::read_file(cfg.input("generators"));
        dim = json_io::index_field(c, "dim");
        charges = operators_field(c, "operators");
        gens = operators_field(g, "operators");
    }
    return sectors_report(cfg, "sectors", dim, json_io::matrices_from_json(charges), json_io::matrices_from_json(gens), ok);
}

inline Json evolve(const CommandConfig& cfg, bool& ok) {
    const HermitianOperator h = read_hermitian(cfg.input("hamiltonian"), cfg.tol);
    const UnitaryOperator u = evolve_unitary(scaled(h, cfg.hbar), cfg.t);
    Report r(cfg, "evolve");
    r["t"] = cfg.t;
    r["unitary"] = json_io::to_json(u.matrix());
    r.check("unitarity", unitarity_defect(u.matrix()), cfg.tol * dim_scale(h.dim()) * 10.0);
    ok = r.passed();
    return r.finish();
}

inline Json noether(const CommandConfig& cfg, bool& ok) {
    const HermitianOperator a = read_hermitian(cfg.input("a"), cfg.tol);
    const HermitianOperator h = read_hermitian(cfg.input("h"), cfg.tol);
    const double tol = std::max(cfg.tol, 1e-9);
    Report r(cfg, "noether");
    r["noether_tol"] = tol;
    try {
        const NoetherReport n = noether_check(a, scaled(h, cfg.hbar), tol);
        r["constant_of_motion"] = n.constant_of_motion;
        r["dynamical_symmetry"] = n.dynamical_symmetry;
        r["hamiltonian_invariance"] = n.hamiltonian_invariance;
        r["constant_defect"] = n.constant_defect;
        r["symmetry_defect"] = n.symmetry_defect;
        r["invariance_defect"] = n.invariance_defect;
        r["consistent"] = true;
    } catch (const EquivalenceViolation& e) {
        r["consistent"] = false;
        r["error"] = e.what();
        r.check("consistency", 1.0, 0.0);
    }
    ok = r.passed();
    return r.finish();
}

inline Json dyson(const CommandConfig& cfg, bool& ok) {
    auto samples = json_io::hamiltonian_samples_from_json(json_io::read_file(cfg.input("samples")), cfg.tol);
    for (auto& s : samples) s.h = scaled(s.h, cfg.hbar);
    const DysonResult d = dyson_evolve(samples, cfg.t1, cfg.t2, cfg.order);
    Report r(cfg, "dyson");
    r["t1"] = cfg.t1;
    r["t2"] = cfg.t2;
    r["order"] = d.order;
    r["nodes"] = d.nodes;
    r["propagator"] = json_io::to_json(d.propagator.matrix());
    r["series"] = json_io::to_json(d.series);
    r["series_difference"] = d.series_difference;
    r["truncation_bound"] = d.truncation_bound;
    r["series_unitarity_defect"] = d.series_unitarity_defect;
    r.check("unitarity", d.unitarity_defect, 1e-8);
    ok = r.passed();
    return r.finish();
}

inline Json ccr_report(const CommandConfig& cfg, const std::string& command, Index n, double mass, double omega, bool& ok) {
    const TruncatedCanonicalPair pair = build_truncated_pair(n, mass, omega, cfg.hbar);
    const Matrix c = commutator(pair.x.matrix(), pair.p.matrix());
    Matrix defect = c - Complex(0.0, cfg.hbar) * identity(n);
    const Complex corner = defect(n - 1, n - 1);
    Matrix off = defect;
    off(n - 1, n - 1) = 0.0;
    const SvnReport svn = svn_hypotheses_check(std::span<const HermitianOperator>(&pair.x, 1),
                                               std::span<const HermitianOperator>(&pair.p, 1), cfg.hbar);
    Report r(cfg, command);
    r["n"] = n;
    r["mass"] = mass;
    r["omega"] = omega;
    r["ccr_defect_norm"] = svn.ccr_residual;
    r["corner_entry"] = json_io::complex_to_json(corner);
    r["trace_commutator"] = json_io::complex_to_json(c.trace());
    r["commutant_dim"] = svn.commutant_dim;
    r["irreducible"] = svn.irreducible;
    r["exact_ccr_possible"] = svn.exact_ccr_possible;
    // Both vectors below keep the top two levels empty, so the bound is the untruncated ħ/2.
    if (n >= 3) {
        const UncertaintyReport ground = heisenberg_uncertainty(pair, PureStateVector::basis(n, 0));
        Json g;
        g["dx"] = ground.dx;
        g["dp"] = ground.dp;
        g["product"] = ground.product;
        g["bound"] = ground.bound;
        r["ground_state"] = std::move(g);
        r.check("ground_state_saturation", std::abs(ground.product - cfg.hbar / 2.0), cfg.tol);
    }
    if (n >= 4) {
        const UncertaintyReport first = heisenberg_uncertainty(pair, PureStateVector::basis(n, 1));
        r["fock_1_product"] = first.product;
        r.check("fock_1_product", std::abs(first.product - 1.5 * cfg.hbar), cfg.tol);
    }
    r.check("ccr_defect_norm", std::abs(svn.ccr_residual - cfg.hbar * double(n)), cfg.tol * std::max(1.0, double(n)));
    r.check("off_corner", frobenius(off), cfg.tol * std::max(1.0, double(n)));
    r.check("trace", std::abs(c.trace()), std::max(cfg.tol, 1e-12) * std::max(1.0, double(n)));
    ok = r.passed();
    return r.finish();
}

inline Json ccr(const CommandConfig& cfg, bool& ok) { return ccr_report(cfg, "ccr", cfg.n, 1.0, 1.0, ok); }

inline Json gns_report(const CommandConfig& cfg, const std::string& command, const AbstractStarAlgebra& alg,
                       const AlgebraicState& omega, bool& ok) {
    const GnsTriple t = gns_construct(alg, omega);
    const GnsVerification v = verify_gns(t, alg, omega, cfg.tol);
    Report r(cfg, command);
    r["gram_null_tol"] = kGramNullTol;
    r["rep_dim"] = t.rep_dim;
    Json pis = Json::array();
    for (const auto& p : t.pi) pis.push_back(json_io::to_json(p));
    r["pi_images"] = std::move(pis);
    r["cyclic_vector"] = json_io::vector_to_json(t.cyclic);
    r["cyclic_rank"] = v.cyclic_rank;
    const Index cdim = gns_commutant_dim(t);
    r["commutant_dim"] = cdim;
    r["pure"] = cdim == 1;
    r["verified"] = v.ok;
    if (!v.ok) r["violated"] = v.violated;
    r.check("homomorphism", v.homomorphism_residual, cfg.tol);
    r.check("involution", v.star_residual, cfg.tol);
    r.check("expectation", v.expectation_residual, cfg.tol);
    r.check("cyclicity", double(t.rep_dim - v.cyclic_rank), 0.0);
    ok = r.passed();
    return r.finish();
}

inline Json gns(const CommandConfig& cfg, bool& ok) {
    const AbstractStarAlgebra alg = json_io::abstract_algebra_from_json(json_io::read_file(cfg.input("algebra")));
    const AlgebraicState omega = json_io::state_from_json(alg, json_io::read_file(cfg.input("state")));
    return gns_report(cfg, "gns", alg, omega, ok);
}

// ---------------------------------------------------------------------------
// Demos

inline Json demo_c2(const CommandConfig& cfg, const Json& data, bool& ok) {
    const Projector p1 = json_io::projector_from_json(json_io::field(data, "p1"), cfg.tol);
    const Projector p2 = json_io::projector_from_json(json_io::field(data, "p2"), cfg.tol);
    const Projector p3 = json_io::projector_from_json(json_io::field(data, "p3"), cfg.tol);
    const Projector j23 = join(p2, p3);
    const Projector lhs = meet(p1, j23);
    const Projector m12 = meet(p1, p2), m13 = meet(p1, p3);
    const Projector rhs = join(m12, m13);
    const double limit = std::max(cfg.tol, 1e-12);
    Report r(cfg, "demo");
    r["name"] = "c2-distributivity";
    r["check_tol"] = limit;
    r["p2_join_p3"] = json_io::to_json(j23);
    r["lhs"] = json_io::to_json(lhs);
    r["p1_meet_p2"] = json_io::to_json(m12);
    r["p1_meet_p3"] = json_io::to_json(m13);
    r["rhs"] = json_io::to_json(rhs);
    const double gap = frobenius(lhs.matrix() - rhs.matrix());
    r["lhs_minus_rhs"] = gap;
    r["distributive"] = gap <= limit;
    r.check("p2_join_p3_is_identity", frobenius(j23.matrix() - identity(2)), limit);
    r.check("lhs_equals_p1", frobenius(lhs.matrix() - p1.matrix()), limit);
    r.check("rhs_is_zero", frobenius(rhs.matrix()), limit);
    ok = r.passed();
    return r.finish();
}

inline Json demo_spin(const CommandConfig& cfg, const Json& data, bool& ok) {
    const double hbar = cfg.hbar_given ? cfg.hbar : (data.contains("hbar") ? json_io::real_field(data, "hbar") : 1.0);
    if (!(hbar > 0)) throw ValidationError("hbar must be positive");
    const Su2Fixture f = su2_fixture(hbar);
    const double limit = std::max(cfg.tol, 1e-12);
    CommandConfig local = cfg;
    local.hbar = hbar;
    Report r(local, "demo");
    r["name"] = "spin-ccr";
    r["check_tol"] = limit;
    const char* names[] = {"x", "y", "z"};
    double spec_defect = 0.0;
    Json spectra;
    for (int k = 0; k < 3; ++k) {
        spectra[names[k]] = eigenvalues_json(f.spectra[std::size_t(k)]);
        spec_defect = std::max({spec_defect, std::abs(f.spectra[std::size_t(k)](0) + hbar / 2),
                                std::abs(f.spectra[std::size_t(k)](1) - hbar / 2)});
    }
    r["spectra"] = std::move(spectra);
    r["commutator_residual"] = f.commutator_residual;
    r["nelson_eigenvalues"] = eigenvalues_json(f.nelson_eigen.eigenvalues);
    r.check("commutator_residual", f.commutator_residual, limit);
    r.check("spectrum", spec_defect, limit);
    r.check("subgroup_law", f.subgroup_defect, 1e-10);
    r.check("nelson_casimir", frobenius(f.nelson.matrix() - 0.75 * hbar * hbar * identity(2)), limit);
    ok = r.passed();
    return r.finish();
}

inline Json demo_gns(const CommandConfig& cfg, const std::string& name, const Json& data, bool& ok) {
    const AbstractStarAlgebra alg = json_io::abstract_algebra_from_json(json_io::field(data, "algebra"));
    const Json& state = json_io::field(data, "state");
    const AlgebraicState omega = json_io::state_from_json(alg, state);
    Json rep = gns_report(cfg, "demo", alg, omega, ok);
    rep["name"] = name;
    if (state.contains("density")) {
        const DensityState rho = DensityState::validated(json_io::matrix_from_json(state.at("density")), cfg.tol);
        rep["density_purity"] = rho.purity();
        rep["density_pure"] = is_pure(rho);
        if (!is_pure(rho)) {
            const ParadoxReport p = mixed_to_vector_paradox_demo(rho);
            Json pj;
            pj["rep_dim"] = p.rep_dim;
            pj["cyclic_norm"] = p.cyclic_norm;
            pj["commutant_dim"] = p.commutant_dim;
            pj["pure"] = p.pure;
            rep["paradox"] = std::move(pj);
        }
    }
    return rep;
}

inline Json demo(const CommandConfig& cfg, bool& ok) {
    if (cfg.name.empty()) throw MalformedInput("--name is required");
    if (std::find(demo_names().begin(), demo_names().end(), cfg.name) == demo_names().end())
        throw MalformedInput("unknown demo \"" + cfg.name + "\"");
    const Json data = json_io::read_file((std::filesystem::path(cfg.data_dir) / "demos" / (cfg.name + ".json")).string());
    if (cfg.name == "c2-distributivity") return demo_c2(cfg, data, ok);
    if (cfg.name == "spin-ccr") return demo_spin(cfg, data, ok);
    if (cfg.name == "electric-charge-sectors") {
        const Index dim = json_io::index_field(data, "dim");
        Json rep = sectors_report(cfg, "demo", dim, json_io::matrices_from_json(operators_field(data, "charges")),
                                  json_io::matrices_from_json(operators_field(data, "generators")), ok);
        rep["name"] = cfg.name;
        return rep;
    }
    if (cfg.name == "truncated-oscillator") {
        const Index n = cfg.n_given ? Index(cfg.n) : json_io::index_field(data, "n");
        const double mass = data.contains("mass") ? json_io::real_field(data, "mass") : 1.0;
        const double omega = data.contains("omega") ? json_io::real_field(data, "omega") : 1.0;
        Json rep = ccr_report(cfg, "demo", n, mass, omega, ok);
        rep["name"] = cfg.name;
        return rep;
    }
    return demo_gns(cfg, cfg.name, data, ok);
}

inline double tolerance_from_env(double fallback) {
    const char* env = std::getenv("OPLATTICE_TOL");
    if (env == nullptr || *env == '\0') return fallback;
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0') throw MalformedInput(std::string("OPLATTICE_TOL is not a number: ") + env);
    return v;
}

}  // namespace detail

/// Runs one subcommand; args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    if (args.empty() || args.front() == "--help" || args.front() == "-h") {
        out << "usage: oplattice <subcommand> [options]\nsubcommands:";
        for (const auto& s : subcommands()) out << ' ' << s;
        out << '\n';
        return args.empty() ? kExitUsage : kExitOk;
    }
    CommandConfig cfg;
    cfg.subcommand = args.front();
    if (std::find(subcommands().begin(), subcommands().end(), cfg.subcommand) == subcommands().end()) {
        err << "oplattice: unknown subcommand \"" << cfg.subcommand << "\"\n";
        return kExitUsage;
    }

    CLI::App app("oplattice " + cfg.subcommand);
    // -h stays free: noether takes its Hamiltonian as --h.
    app.set_help_flag("--help", "print this help");
    std::optional<double> tol_flag;
    app.add_option("--tol", tol_flag, "residual tolerance (default 1e-10, or OPLATTICE_TOL)");
    auto* hbar_opt = app.add_option("--hbar", cfg.hbar, "reduced Planck constant");
    app.add_option("--seed", cfg.seed, "seed for randomized searches");
    app.add_option("--out,--report", cfg.out, "output path (default: standard output)");
    app.add_option("--order", cfg.order, "Dyson series order");
    app.add_option("--t", cfg.t, "evolution time");
    app.add_option("--t1", cfg.t1, "initial time");
    app.add_option("--t2", cfg.t2, "final time");
    auto* n_opt = app.add_option("--n", cfg.n, "truncation dimension");
    app.add_option("--name", cfg.name, "demo name");
    app.add_option("--data-dir", cfg.data_dir, "directory holding demos/");
    app.add_option("--cluster-tol", cfg.cluster_tol, "eigenvalue clustering tolerance");
    for (const char* key : {"in", "p", "q", "state", "observable", "projector", "samples", "hamiltonian", "a", "h",
                            "algebra", "charges", "generators"})
        app.add_option(std::string("--") + key, cfg.inputs[key], std::string("input file for ") + key);

    std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "oplattice: " << e.what() << '\n';
        return kExitUsage;
    }
    cfg.hbar_given = hbar_opt->count() > 0;
    cfg.n_given = n_opt->count() > 0;

    try {
        cfg.tol = tol_flag ? *tol_flag : detail::tolerance_from_env(1e-10);
        if (!(cfg.tol > 0) || !std::isfinite(cfg.tol)) throw ValidationError("tol must be positive");
        if (!(cfg.hbar > 0) || !std::isfinite(cfg.hbar)) throw ValidationError("hbar must be positive");

        bool ok = true;
        Json report;
        const std::string& s = cfg.subcommand;
        if (s == "spectral") report = detail::spectral(cfg, ok);
        else if (s == "funcalc") report = detail::funcalc(cfg, ok);
        else if (s == "lattice") report = detail::lattice(cfg, ok);
        else if (s == "measure") report = detail::measure(cfg, ok);
        else if (s == "collapse") report = detail::collapse(cfg, ok);
        else if (s == "gleason-fit") report = detail::gleason(cfg, ok);
        else if (s == "commutant") report = detail::commutant_cmd(cfg, ok);
        else if (s == "sectors") report = detail::sectors(cfg, ok);
        else if (s == "evolve") report = detail::evolve(cfg, ok);
        else if (s == "noether") report = detail::noether(cfg, ok);
        else if (s == "dyson") report = detail::dyson(cfg, ok);
        else if (s == "ccr") report = detail::ccr(cfg, ok);
        else if (s == "gns") report = detail::gns(cfg, ok);
        else report = detail::demo(cfg, ok);

        const std::string text = report.dump(2) + "\n";
        if (cfg.out.empty() || cfg.out == "-") {
            out << text;
        } else {
            std::ofstream f(cfg.out, std::ios::binary);
            if (!f) throw MalformedInput("cannot write " + cfg.out);
            f << text;
        }
        if (!ok) {
            err << "oplattice: a residual exceeded its tolerance\n";
            return kExitNumerical;
        }
        return kExitOk;
    } catch (const MalformedInput& e) {
        err << "oplattice: " << e.what() << '\n';
        return kExitMalformed;
    } catch (const ValidationError& e) {
        err << "oplattice: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericalError& e) {
        err << "oplattice: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace oplattice::cli
