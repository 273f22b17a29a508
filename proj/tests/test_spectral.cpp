#include <gtest/gtest.h>

#include <cmath>

#include "oplattice/oplattice.hpp"
#include "oracles.hpp"

using namespace oplattice;

namespace {
HermitianOperator herm(const Matrix& m) { return HermitianOperator::validated(m); }

Matrix diag(std::initializer_list<double> d) {
    RealVector v(Index(d.size()));
    Index i = 0;
    for (double x : d) v(i++) = x;
    return v.cast<Complex>().asDiagonal();
}
}  // namespace

TEST(SpectralDecompose, SpinZAtoms) {
    const double hbar = 1.0;
    const auto pvm = spectral_decompose(herm(hbar / 2 * pauli_z()));
    ASSERT_EQ(pvm.size(), 2u);
    EXPECT_DOUBLE_EQ(pvm.atoms()[0].label[0], -hbar / 2);
    EXPECT_DOUBLE_EQ(pvm.atoms()[1].label[0], hbar / 2);
    EXPECT_LE(frobenius(pvm.atoms()[1].projector.matrix() - oracle::unit(2, 0, 0)), 1e-15);
    EXPECT_LE(frobenius(pvm.atoms()[0].projector.matrix() - oracle::unit(2, 1, 1)), 1e-15);
}

TEST(SpectralDecompose, IdentityIsOneAtom) {
    const auto pvm = spectral_decompose(herm(identity(3)));
    ASSERT_EQ(pvm.size(), 1u);
    EXPECT_NEAR(pvm.atoms()[0].label[0], 1.0, 1e-15);
    EXPECT_LE(frobenius(pvm.atoms()[0].projector.matrix() - identity(3)), 1e-14);
}

TEST(SpectralDecompose, ClustersNearDegenerateEigenvalues) {
    const auto pvm = spectral_decompose(herm(diag({1.0, 1.0 + 1e-14, 5.0})), 1e-10);
    ASSERT_EQ(pvm.size(), 2u);
    EXPECT_EQ(pvm.atoms()[0].projector.rank(), 2);
    EXPECT_NEAR(pvm.atoms()[0].projector.matrix().trace().real(), 2.0, 1e-14);
}

TEST(SpectralDecompose, PropertyRoundtrip) {
    oracle::Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = rng.integer(2, 24);
        const Matrix a = oracle::random_hermitian(rng, n);
        const auto pvm = spectral_decompose(herm(a));
        EXPECT_LE(frobenius(a - pvm.reconstruct()), 1e-10 * frobenius(a));
        EXPECT_LE(pvm.completeness_residual(), 1e-10);
        EXPECT_LE(pvm.orthogonality_residual(), 1e-10);
        for (std::size_t i = 1; i < pvm.size(); ++i) EXPECT_LT(pvm.atoms()[i - 1].label[0], pvm.atoms()[i].label[0]);
    }
}

TEST(SpectralDecompose, PropertyDegenerateSpectrum) {
    oracle::Rng rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = rng.integer(3, 12);
        const Matrix u = oracle::random_unitary(rng, n);
        RealVector d(n);
        for (Index i = 0; i < n; ++i) d(i) = double(rng.integer(-2, 2));
        const Matrix a = u * d.cast<Complex>().asDiagonal() * u.adjoint();
        const auto pvm = spectral_decompose(herm(a));
        for (const auto& atom : pvm.atoms()) {
            const double label = atom.label[0];
            EXPECT_NEAR(label, std::round(label), 1e-12);
            Index mult = 0;
            for (Index i = 0; i < n; ++i) mult += std::abs(d(i) - std::round(label)) < 0.5;
            EXPECT_EQ(atom.projector.rank(), mult);
        }
    }
}

TEST(PvmValidation, RejectsIncompleteAndOverlapping) {
    const Projector e1 = Projector::validated(oracle::unit(2, 0, 0));
    const Projector e2 = Projector::validated(oracle::unit(2, 1, 1));
    EXPECT_THROW(ProjectorValuedMeasure::validated(2, {{{0.0}, e1}}), InvalidPvm);
    EXPECT_THROW(ProjectorValuedMeasure::validated(2, {{{0.0}, e1}, {{0.0}, e2}}), InvalidPvm);
    EXPECT_THROW(ProjectorValuedMeasure::validated(2, {{{0.0}, e1}, {{1.0}, e1}, {{2.0}, e2}}), InvalidPvm);
    EXPECT_NO_THROW(ProjectorValuedMeasure::validated(2, {{{0.0}, e1}, {{1.0}, e2}}));
}

TEST(FuncCalculus, PolynomialOnSigmaZ) {
    const Matrix a = pauli_z();
    const auto pvm = spectral_decompose(herm(a));
    const Matrix f = func_calculus(pvm, [](double x) { return Complex(x * x * x - 2 * x); });
    EXPECT_LE(frobenius(f - (a * a * a - 2.0 * a)), 1e-12);
}

TEST(FuncCalculus, IndicatorGivesSpectralProjector) {
    const auto pvm = spectral_decompose(herm(0.5 * pauli_z()));
    const Matrix f = func_calculus(pvm, [](double x) { return Complex(std::abs(x - 0.5) < 1e-9 ? 1.0 : 0.0); });
    EXPECT_LE(frobenius(f - oracle::unit(2, 0, 0)), 1e-15);
}

TEST(FuncCalculus, ExponentialMatchesSeriesOracle) {
    oracle::Rng rng(23);
    const Matrix a = oracle::random_hermitian(rng, 8);
    const auto pvm = spectral_decompose(herm(a));
    const Matrix u = func_calculus(pvm, [](double x) { return std::exp(Complex(0, x)); });
    EXPECT_LE(frobenius(u - oracle::expm(kI * a)), 1e-9);
    EXPECT_LE(unitarity_defect(u), 1e-12);
}

TEST(FuncCalculus, SampleTableAndMissingSample) {
    const auto pvm = spectral_decompose(herm(pauli_z()));
    const std::vector<std::pair<double, Complex>> table{{-1.0, 3.0}, {1.0, 5.0}};
    EXPECT_LE(frobenius(func_calculus(pvm, table) - Matrix(Eigen::Vector2cd(5.0, 3.0).asDiagonal())), 1e-15);
    const std::vector<std::pair<double, Complex>> partial{{1.0, 5.0}};
    EXPECT_THROW(func_calculus(pvm, partial), MissingSample);
    const std::vector<Complex> short_list{1.0};
    EXPECT_THROW(func_calculus(pvm, short_list), MissingSample);
}

TEST(FuncCalculus, PropertyMultiplicativeAndStar) {
    oracle::Rng rng(24);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = oracle::random_hermitian(rng, rng.integer(2, 10));
        const auto pvm = spectral_decompose(herm(a));
        auto f = [](double x) { return Complex(std::cos(x), x); };
        auto g = [](double x) { return Complex(x * x, -1.0); };
        const Matrix fg = func_calculus(pvm, [&](double x) { return f(x) * g(x); });
        EXPECT_LE(frobenius(fg - func_calculus(pvm, f) * func_calculus(pvm, g)), 1e-10);
        const Matrix fbar = func_calculus(pvm, [&](double x) { return std::conj(f(x)); });
        EXPECT_LE(frobenius(fbar - func_calculus(pvm, f).adjoint()), 1e-10);
    }
}

TEST(JointPvm, DiagonalPair) {
    const std::vector<HermitianOperator> ops{herm(diag({0, 0, 1})), herm(diag({2, 3, 3}))};
    const auto joint = joint_pvm(ops);
    ASSERT_EQ(joint.size(), 3u);
    const std::vector<Label> expected{{0, 2}, {0, 3}, {1, 3}};
    for (const auto& l : expected) {
        const auto k = joint.find(l);
        ASSERT_GE(k, 0);
        EXPECT_EQ(joint.atoms()[std::size_t(k)].projector.rank(), 1);
    }
    EXPECT_LE(joint.completeness_residual(), 1e-12);
}

TEST(JointPvm, SingleOperatorMatchesOwnPvm) {
    oracle::Rng rng(25);
    const HermitianOperator a = herm(oracle::random_hermitian(rng, 5));
    const auto own = spectral_decompose(a);
    const std::vector<HermitianOperator> ops{a};
    const auto joint = joint_pvm(ops);
    ASSERT_EQ(joint.size(), own.size());
    for (std::size_t i = 0; i < own.size(); ++i) {
        const auto k = joint.find(own.atoms()[i].label);
        ASSERT_GE(k, 0);
        EXPECT_LE(frobenius(joint.atoms()[std::size_t(k)].projector.matrix() - own.atoms()[i].projector.matrix()), 1e-10);
    }
}

TEST(JointPvm, NonCommutingPaulisRejected) {
    const std::vector<HermitianOperator> ops{herm(pauli_x()), herm(pauli_y())};
    EXPECT_THROW(joint_pvm(ops), NonCommuting);
}

TEST(JointPvm, PropertyCommutingFamily) {
    oracle::Rng rng(26);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = rng.integer(2, 8);
        const Matrix u = oracle::random_unitary(rng, n);
        std::vector<HermitianOperator> ops;
        for (int k = 0; k < 3; ++k) {
            RealVector d(n);
            for (Index i = 0; i < n; ++i) d(i) = double(rng.integer(0, 1));
            ops.push_back(herm(u * d.cast<Complex>().asDiagonal() * u.adjoint()));
        }
        const auto joint = joint_pvm(ops);
        EXPECT_LE(joint.completeness_residual(), 1e-10);
        EXPECT_LE(joint.orthogonality_residual(), 1e-10);
        for (std::size_t k = 0; k < ops.size(); ++k) {
            Matrix rebuilt = Matrix::Zero(n, n);
            for (const auto& atom : joint.atoms()) rebuilt += atom.label[k] * atom.projector.matrix();
            EXPECT_LE(frobenius(rebuilt - ops[k].matrix()), 1e-10);
        }
    }
}

TEST(PvmCommute, Examples) {
    const auto sz = spectral_decompose(herm(pauli_z()));
    EXPECT_TRUE(pvm_commute(sz, spectral_decompose(herm(diag({5, 7})))));
    EXPECT_FALSE(pvm_commute(spectral_decompose(herm(pauli_x())), sz));
}

TEST(PvmCommute, FunctionOfOperatorCommutes) {
    oracle::Rng rng(27);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = oracle::random_hermitian(rng, 6);
        const auto pa = spectral_decompose(herm(a));
        const auto pf = spectral_decompose(herm(a * a));
        EXPECT_TRUE(pvm_commute(pa, pf, 1e-9));
    }
}
