#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace oplattice {

/// Root of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (shape, Hermiticity, preconditions).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed to meet its own tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

namespace detail {
inline std::string fmt_real(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}
}  // namespace detail

/// Input that could not be parsed (bad JSON, missing fields, wrong shapes in a file).
class MalformedInput : public Error {
public:
    explicit MalformedInput(const std::string& what) : Error("malformed input: " + what) {}
};

class NotSquare : public ValidationError {
public:
    NotSquare(std::ptrdiff_t rows, std::ptrdiff_t cols)
        : ValidationError("matrix is not square: " + std::to_string(rows) + "x" + std::to_string(cols)) {}
};

class NonFinite : public ValidationError {
public:
    NonFinite() : ValidationError("matrix has a non-finite entry") {}
};

class NotHermitian : public ValidationError {
public:
    explicit NotHermitian(double defect)
        : ValidationError("matrix is not Hermitian, defect " + detail::fmt_real(defect)), defect_(defect) {}
    double defect() const noexcept { return defect_; }

private:
    double defect_;
};

class NotUnitary : public ValidationError {
public:
    explicit NotUnitary(double defect)
        : ValidationError("matrix is not unitary, defect " + detail::fmt_real(defect)), defect_(defect) {}
    double defect() const noexcept { return defect_; }

private:
    double defect_;
};

class NotProjector : public ValidationError {
public:
    explicit NotProjector(const std::string& what) : ValidationError("not an orthogonal projector: " + what) {}
};

class DimensionMismatch : public ValidationError {
public:
    DimensionMismatch(std::ptrdiff_t a, std::ptrdiff_t b)
        : ValidationError("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class ConvergenceFailure : public NumericalError {
public:
    explicit ConvergenceFailure(const std::string& where) : NumericalError(where + ": eigensolver did not converge") {}
};

class InvalidPvm : public ValidationError {
public:
    explicit InvalidPvm(const std::string& what) : ValidationError("invalid projector-valued measure: " + what) {}
};

class MissingSample : public ValidationError {
public:
    explicit MissingSample(double label)
        : ValidationError("function sample missing at label " + detail::fmt_real(label)), label_(label) {}
    double label() const noexcept { return label_; }

private:
    double label_;
};

class NonCommuting : public ValidationError {
public:
    NonCommuting(std::size_t i, std::size_t j, double defect)
        : ValidationError("spectral measures of operators " + std::to_string(i) + " and " + std::to_string(j) +
                          " do not commute, defect " + detail::fmt_real(defect)),
          i_(i), j_(j), defect_(defect) {}
    std::size_t first() const noexcept { return i_; }
    std::size_t second() const noexcept { return j_; }
    double defect() const noexcept { return defect_; }

private:
    std::size_t i_, j_;
    double defect_;
};

class MaxIterExceeded : public NumericalError {
public:
    MaxIterExceeded(int iterations, double residual)
        : NumericalError("alternating-product meet did not converge after " + std::to_string(iterations) +
                         " steps, residual " + detail::fmt_real(residual)),
          iterations_(iterations), residual_(residual) {}
    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

class NotComparable : public ValidationError {
public:
    explicit NotComparable(double defect)
        : ValidationError("projectors are not ordered (P <= Q fails), defect " + detail::fmt_real(defect)) {}
};

class InvalidState : public ValidationError {
public:
    explicit InvalidState(const std::string& what) : ValidationError("invalid state: " + what) {}
};

class ZeroProbability : public ValidationError {
public:
    explicit ZeroProbability(double p)
        : ValidationError("conditioning event has probability " + detail::fmt_real(p)), probability_(p) {}
    double probability() const noexcept { return probability_; }

private:
    double probability_;
};

class UnderdeterminedFrame : public ValidationError {
public:
    UnderdeterminedFrame(std::ptrdiff_t rank, std::ptrdiff_t needed)
        : ValidationError("projector frame is not informationally complete: rank " + std::to_string(rank) +
                          ", needed " + std::to_string(needed)),
          rank_(rank), needed_(needed) {}
    std::ptrdiff_t rank() const noexcept { return rank_; }
    std::ptrdiff_t needed() const noexcept { return needed_; }

private:
    std::ptrdiff_t rank_, needed_;
};

class InconsistentAssignments : public NumericalError {
public:
    explicit InconsistentAssignments(double residual)
        : NumericalError("probability assignments are inconsistent with any state, residual " +
                         detail::fmt_real(residual)),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class WitnessNotFound : public NumericalError {
public:
    explicit WitnessNotFound(double best)
        : NumericalError("no non-dispersive witness found; best probability " + detail::fmt_real(best)) {}
};

class NonCentralCharge : public ValidationError {
public:
    NonCentralCharge(std::size_t index, double defect)
        : ValidationError("charge " + std::to_string(index) + " does not commute with the observables, defect " +
                          detail::fmt_real(defect)),
          index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class NonCommutingCharges : public ValidationError {
public:
    NonCommutingCharges(std::size_t i, std::size_t j)
        : ValidationError("charges " + std::to_string(i) + " and " + std::to_string(j) + " do not commute") {}
};

class InvalidAlgebra : public ValidationError {
public:
    explicit InvalidAlgebra(const std::string& what) : ValidationError("invalid *-algebra: " + what) {}
};

class InconsistentGroup : public ValidationError {
public:
    explicit InconsistentGroup(double defect)
        : ValidationError("samples are not a one-parameter unitary group, defect " + detail::fmt_real(defect)) {}
};

class NotHermitianResult : public NumericalError {
public:
    explicit NotHermitianResult(double defect)
        : NumericalError("recovered generator is not Hermitian, defect " + detail::fmt_real(defect)) {}
};

class EquivalenceViolation : public NumericalError {
public:
    explicit EquivalenceViolation(const std::string& details)
        : NumericalError("constant-of-motion conditions disagree: " + details) {}
};

class QuadratureTooCoarse : public ValidationError {
public:
    QuadratureTooCoarse(std::size_t have, std::size_t need)
        : ValidationError("too few Hamiltonian samples: " + std::to_string(have) + ", need " + std::to_string(need)) {}
    explicit QuadratureTooCoarse(const std::string& why) : ValidationError("Hamiltonian samples unusable: " + why) {}
};

class OrderTooLarge : public ValidationError {
public:
    explicit OrderTooLarge(int order)
        : ValidationError("series order " + std::to_string(order) + " exceeds the maximum of 12") {}
};

class NotACocycle : public ValidationError {
public:
    NotACocycle(std::size_t g1, std::size_t g2, std::size_t g3, double defect)
        : ValidationError("multiplier identity fails at (" + std::to_string(g1) + ", " + std::to_string(g2) + ", " +
                          std::to_string(g3) + "), defect " + detail::fmt_real(defect)),
          g1_(g1), g2_(g2), g3_(g3), defect_(defect) {}
    std::size_t g1() const noexcept { return g1_; }
    std::size_t g2() const noexcept { return g2_; }
    std::size_t g3() const noexcept { return g3_; }
    double defect() const noexcept { return defect_; }

private:
    std::size_t g1_, g2_, g3_;
    double defect_;
};

class BadDimension : public ValidationError {
public:
    explicit BadDimension(std::ptrdiff_t n) : ValidationError("truncation dimension must be >= 2, got " + std::to_string(n)) {}
};

class TailTooLarge : public ValidationError {
public:
    explicit TailTooLarge(double weight)
        : ValidationError("state has weight " + detail::fmt_real(weight) + " on the truncation edge"), weight_(weight) {}
    double weight() const noexcept { return weight_; }

private:
    double weight_;
};

class NotAState : public ValidationError {
public:
    explicit NotAState(const std::string& what) : ValidationError("not an algebraic state: " + what) {}
};

class DegenerateAlgebra : public ValidationError {
public:
    explicit DegenerateAlgebra(const std::string& what) : ValidationError("structure constants rejected: " + what) {}
};

class InputIsPure : public ValidationError {
public:
    InputIsPure() : ValidationError("density operator is pure; the demonstration needs a mixed state") {}
};

}  // namespace oplattice
