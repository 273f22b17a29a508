#pragma once

// JSON encodings of matrices, PVMs, projectors, algebras, states and reports.
// Complex numbers are [re, im] pairs; matrices are row-major.

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "oplattice/algebras.hpp"
#include "oplattice/dynamics.hpp"
#include "oplattice/gns.hpp"
#include "oplattice/linalg.hpp"
#include "oplattice/projector.hpp"
#include "oplattice/spectral.hpp"
#include "oplattice/states.hpp"

namespace oplattice::json_io {

using Json = nlohmann::ordered_json;

inline Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw MalformedInput("complex number must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw MalformedInput(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

inline Index index_field(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw MalformedInput(std::string("field \"") + key + "\" must be a non-negative integer");
    return static_cast<Index>(v.get<long long>());
}

inline double real_field(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_number()) throw MalformedInput(std::string("field \"") + key + "\" must be a number");
    return v.get<double>();
}

inline Json to_json(const Matrix& m) {
    Json data = Json::array();
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) data.push_back(complex_to_json(m(r, c)));
    Json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = std::move(data);
    return j;
}

inline Matrix matrix_from_json(const Json& j) {
    const Index rows = index_field(j, "rows");
    const Index cols = index_field(j, "cols");
    const Json& data = field(j, "data");
    if (!data.is_array() || Index(data.size()) != rows * cols)
        throw MalformedInput("matrix data length does not match rows*cols");
    Matrix m(rows, cols);
    std::size_t k = 0;
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(data[k++]);
    return m;
}

inline Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
    return out;
}

inline Vector vector_from_json(const Json& j) {
    if (!j.is_array()) throw MalformedInput("vector must be an array of [re, im]");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(Index(i)) = complex_from_json(j[i]);
    return v;
}

inline Json to_json(const Projector& p) {
    Json j = to_json(p.matrix());
    j["rank"] = p.rank();
    return j;
}

/// Validates the matrix as a projector; a stated rank must agree with the trace.
inline Projector projector_from_json(const Json& j, double tol = kDefaultTol) {
    Projector p = Projector::validated(matrix_from_json(j), tol);
    if (j.contains("rank") && j.at("rank").is_number_integer() && j.at("rank").get<Index>() != p.rank())
        throw NotProjector("stated rank " + std::to_string(j.at("rank").get<Index>()) + " differs from trace rank " +
                           std::to_string(p.rank()));
    return p;
}

inline Json to_json(const ProjectorValuedMeasure& pvm) {
    Json atoms = Json::array();
    for (const auto& a : pvm.atoms()) {
        Json atom;
        atom["label"] = a.label;
        atom["projector"] = to_json(a.projector);
        atoms.push_back(std::move(atom));
    }
    Json j;
    j["dim"] = pvm.dim();
    j["atoms"] = std::move(atoms);
    return j;
}

inline ProjectorValuedMeasure pvm_from_json(const Json& j, double tol = kDefaultTol) {
    const Index dim = index_field(j, "dim");
    const Json& atoms = field(j, "atoms");
    if (!atoms.is_array()) throw MalformedInput("\"atoms\" must be an array");
    std::vector<PvmAtom> out;
    for (const auto& a : atoms) {
        const Json& label = field(a, "label");
        if (!label.is_array()) throw MalformedInput("atom label must be an array of reals");
        Label l;
        for (const auto& x : label) {
            if (!x.is_number()) throw MalformedInput("atom label must be an array of reals");
            l.push_back(x.get<double>());
        }
        out.push_back(PvmAtom{std::move(l), projector_from_json(field(a, "projector"), tol)});
    }
    return ProjectorValuedMeasure::validated(dim, std::move(out), tol);
}

inline Json to_json(const MatrixStarAlgebra& alg) {
    Json basis = Json::array();
    for (const auto& b : alg.basis()) basis.push_back(to_json(b));
    Json j;
    j["dim"] = alg.dim();
    j["basis"] = std::move(basis);
    return j;
}

inline std::vector<Matrix> matrices_from_json(const Json& arr) {
    if (!arr.is_array()) throw MalformedInput("expected an array of matrices");
    std::vector<Matrix> out;
    for (const auto& m : arr) out.push_back(matrix_from_json(m));
    return out;
}

inline MatrixStarAlgebra algebra_from_json(const Json& j) {
    const Index dim = index_field(j, "dim");
    const auto basis = matrices_from_json(field(j, "basis"));
    return MatrixStarAlgebra::from_spanning(basis, dim);
}

inline Json to_json(const AbstractStarAlgebra& alg) {
    const Index m = alg.size();
    Json mult = Json::array();
    for (Index i = 0; i < m; ++i) {
        Json row = Json::array();
        for (Index k = 0; k < m; ++k) row.push_back(vector_to_json(alg.product(i, k)));
        mult.push_back(std::move(row));
    }
    Json invol = Json::array();
    for (Index i = 0; i < m; ++i) invol.push_back(vector_to_json(alg.involution().row(i).transpose()));
    Json j;
    j["n_basis"] = m;
    j["mult"] = std::move(mult);
    j["invol"] = std::move(invol);
    j["unit"] = vector_to_json(alg.unit());
    return j;
}

/// {"n_basis", "mult"[i][j] = coefficients of b_i b_j, "invol"[i] = coefficients of b_i*, "unit"},
/// or {"matrix_algebra": n} for M_n with matrix units.
inline AbstractStarAlgebra abstract_algebra_from_json(const Json& j, double tol = 1e-9) {
    if (j.is_object() && j.contains("matrix_algebra")) {
        const Index n = index_field(j, "matrix_algebra");
        if (n == 0) throw DegenerateAlgebra("matrix algebra of size 0");
        return AbstractStarAlgebra::matrix_algebra(n);
    }
    const Index m = index_field(j, "n_basis");
    const Json& mult = field(j, "mult");
    const Json& invol = field(j, "invol");
    if (!mult.is_array() || Index(mult.size()) != m) throw MalformedInput("\"mult\" must have n_basis rows");
    if (!invol.is_array() || Index(invol.size()) != m) throw MalformedInput("\"invol\" must have n_basis rows");
    std::vector<std::vector<Vector>> table;
    for (const auto& row : mult) {
        if (!row.is_array() || Index(row.size()) != m) throw MalformedInput("\"mult\" rows must have n_basis entries");
        std::vector<Vector> r;
        for (const auto& c : row) {
            Vector v = vector_from_json(c);
            if (v.size() != m) throw MalformedInput("product coefficients must have n_basis entries");
            r.push_back(std::move(v));
        }
        table.push_back(std::move(r));
    }
    Matrix s(m, m);
    for (Index i = 0; i < m; ++i) {
        const Vector row = vector_from_json(invol[std::size_t(i)]);
        if (row.size() != m) throw MalformedInput("involution rows must have n_basis entries");
        s.row(i) = row.transpose();
    }
    Vector unit = vector_from_json(field(j, "unit"));
    if (unit.size() != m) throw MalformedInput("\"unit\" must have n_basis entries");
    return AbstractStarAlgebra::validated(std::move(table), std::move(s), std::move(unit), tol);
}

inline Json state_to_json(const AlgebraicState& w) {
    Json j;
    j["values"] = vector_to_json(w.values());
    return j;
}

/// {"values": [...]} or {"density": matrix} for algebras with a concrete basis.
inline AlgebraicState state_from_json(const AbstractStarAlgebra& alg, const Json& j, double tol = 1e-9) {
    if (j.is_object() && j.contains("density"))
        return AlgebraicState::from_density(alg, DensityState::validated(matrix_from_json(j.at("density")), tol).matrix(), tol);
    return AlgebraicState::validated(alg, vector_from_json(field(j, "values")), tol);
}

inline std::vector<Assignment> assignments_from_json(const Json& j, double tol = kDefaultTol) {
    const Json& arr = j.is_object() ? field(j, "assignments") : j;
    if (!arr.is_array()) throw MalformedInput("assignments must be an array");
    std::vector<Assignment> out;
    for (const auto& a : arr) out.push_back(Assignment{projector_from_json(field(a, "projector"), tol), real_field(a, "p")});
    return out;
}

inline Json assignments_to_json(std::span<const Assignment> as) {
    Json arr = Json::array();
    for (const auto& a : as) {
        Json e;
        e["projector"] = to_json(a.projector);
        e["p"] = a.probability;
        arr.push_back(std::move(e));
    }
    return arr;
}

inline Json to_json(const SectorDecomposition& sd) {
    Json sectors = Json::array();
    for (const auto& s : sd.sectors) {
        Json e;
        e["label"] = s.label;
        e["dim"] = s.dim();
        e["irreducible"] = s.irreducible;
        e["commutant_dim"] = s.commutant_dim;
        e["algebra_dim"] = s.restricted.size();
        e["projector"] = to_json(s.projector);
        sectors.push_back(std::move(e));
    }
    Json j;
    j["sector_count"] = sd.sectors.size();
    j["sectors"] = std::move(sectors);
    return j;
}

/// Samples of H(t): {"samples": [{"t": τ, "h": matrix}...]} or the bare array.
inline std::vector<HamiltonianSample> hamiltonian_samples_from_json(const Json& j, double tol = kDefaultTol) {
    const Json& arr = j.is_object() ? field(j, "samples") : j;
    if (!arr.is_array()) throw MalformedInput("samples must be an array");
    std::vector<HamiltonianSample> out;
    for (const auto& s : arr)
        out.push_back(HamiltonianSample{real_field(s, "t"), HermitianOperator::validated(matrix_from_json(field(s, "h")), tol)});
    return out;
}

inline Json parse(std::istream& in, const std::string& what) {
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedInput(what + ": " + e.what());
    }
}

inline Json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedInput("cannot open " + path);
    return parse(in, path);
}

}  // namespace oplattice::json_io
