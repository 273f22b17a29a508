#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oplattice/oplattice.hpp"
#include "oracles.hpp"

using namespace oplattice;

TEST(Hermitian, AcceptsPauliX) {
    EXPECT_NO_THROW(HermitianOperator::validated(pauli_x()));
}

TEST(Hermitian, AcceptsZeroMatrix) {
    for (Index n : {1, 3, 7}) EXPECT_NO_THROW(HermitianOperator::validated(Matrix::Zero(n, n)));
}

TEST(Hermitian, RejectsNilpotentWithDefectRootTwo) {
    Matrix m(2, 2);
    m << 0, 1, 0, 0;
    try {
        HermitianOperator::validated(m, 1e-10);
        FAIL() << "expected NotHermitian";
    } catch (const NotHermitian& e) {
        EXPECT_NEAR(e.defect(), std::sqrt(2.0), 1e-15);
    }
}

TEST(Hermitian, RejectsNonSquareAndNonFinite) {
    EXPECT_THROW(HermitianOperator::validated(Matrix::Zero(2, 3)), NotSquare);
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(HermitianOperator::validated(m), NonFinite);
}

TEST(Hermitian, SymmetrizesWithinTolerance) {
    Matrix m = pauli_x();
    m(0, 1) += 1e-13;
    const HermitianOperator h = HermitianOperator::validated(m);
    EXPECT_EQ(h.matrix(), h.matrix().adjoint());
}

TEST(EigHermitian, PauliZAscending) {
    const EigenSystem es = eig_hermitian(pauli_z());
    EXPECT_DOUBLE_EQ(es.eigenvalues(0), -1.0);
    EXPECT_DOUBLE_EQ(es.eigenvalues(1), 1.0);
}

TEST(EigHermitian, IdentityAllOnes) {
    const EigenSystem es = eig_hermitian(identity(5));
    for (Index i = 0; i < 5; ++i) EXPECT_NEAR(es.eigenvalues(i), 1.0, 1e-15);
    EXPECT_LE(es.orthonormality_residual(), 1e-14);
}

TEST(EigHermitian, MatchesCompanionRoots) {
    oracle::Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix a = oracle::random_hermitian(rng, 8);
        const auto roots = oracle::companion_roots(a);
        const EigenSystem es = eig_hermitian(a);
        for (Index i = 0; i < 8; ++i) EXPECT_NEAR(es.eigenvalues(i), roots[std::size_t(i)], 1e-8);
    }
}

TEST(EigHermitian, PropertyReconstructionAndPhase) {
    oracle::Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = rng.integer(1, 20);
        const Matrix a = oracle::random_hermitian(rng, n);
        const EigenSystem es = eig_hermitian(a);
        EXPECT_LE(es.reconstruction_residual(a), 1e-10 * std::max(1.0, a.norm()));
        EXPECT_LE(es.orthonormality_residual(), 1e-10);
        for (Index i = 1; i < n; ++i) EXPECT_LE(es.eigenvalues(i - 1), es.eigenvalues(i));
        for (Index k = 0; k < n; ++k) {
            Index first = 0;
            while (std::abs(es.eigenvectors(first, k)) <= 1e-12) ++first;
            EXPECT_GT(es.eigenvectors(first, k).real(), 0.0);
            EXPECT_NEAR(es.eigenvectors(first, k).imag(), 0.0, 1e-15);
        }
    }
}

TEST(OperatorNorm, PauliAndZero) {
    EXPECT_NEAR(operator_norm(pauli_x()), 1.0, 1e-15);
    EXPECT_EQ(operator_norm(Matrix::Zero(3, 3)), 0.0);
}

TEST(OperatorNorm, MatchesGramOracle) {
    oracle::Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = rng.ginibre(6, 6);
        const auto roots = oracle::companion_roots(Matrix(a.adjoint() * a));
        EXPECT_NEAR(operator_norm(a), std::sqrt(roots.back()), 1e-9);
    }
}

TEST(Unitary, ValidatesAndComposes) {
    oracle::Rng rng(14);
    const Matrix u = oracle::random_unitary(rng, 4);
    const UnitaryOperator a = UnitaryOperator::validated(u);
    EXPECT_LE(unitarity_defect((a * a.adjoint()).matrix()), 1e-13);
    EXPECT_THROW(UnitaryOperator::validated(2.0 * u), NotUnitary);
}

TEST(Subspaces, ColumnAndNullSpaceAreComplementary) {
    oracle::Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = rng.integer(2, 10), r = rng.integer(1, n);
        const Matrix m = rng.ginibre(n, r) * rng.ginibre(r, n);
        const Matrix range = column_space(m);
        const Matrix ker = null_space(m);
        EXPECT_EQ(range.cols(), r);
        EXPECT_EQ(ker.cols(), n - r);
        EXPECT_LE((m * ker).norm(), 1e-9 * m.norm());
    }
}

TEST(Subspaces, NullSpaceOfZeroIsEverything) {
    EXPECT_EQ(null_space(Matrix::Zero(4, 3)).cols(), 3);
}

TEST(Subspaces, NullSpaceOfTallSystemUsesCompression) {
    oracle::Rng rng(16);
    const Matrix v = oracle::random_isometry(rng, 5, 2);
    Matrix tall(40, 5);
    for (int b = 0; b < 8; ++b) tall.middleRows(b * 5, 5) = rng.ginibre(5, 5) * (identity(5) - v * v.adjoint());
    const Matrix ker = null_space(tall);
    ASSERT_EQ(ker.cols(), 2);
    EXPECT_LE(subspace_distance(v, ker), 1e-10);
}

TEST(Kron, MatchesOracle) {
    oracle::Rng rng(17);
    const Matrix a = rng.ginibre(2, 3), b = rng.ginibre(3, 2);
    EXPECT_EQ(kron(a, b), oracle::kron(a, b));
}
