#include "kpsh/complex_calculus.hpp"
#include "kpsh/grid.hpp"

#include <gtest/gtest.h>

#include <Eigen/LU>

#include <cmath>
#include <memory>
#include <random>

using namespace kpsh;

namespace {

Eigen::MatrixXcd random_complex(std::mt19937_64& rng, int n)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = Complex(g(rng), g(rng));
        }
    }
    return m;
}

Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int dim)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            m(i, j) = g(rng);
        }
    }
    return 0.5 * (m + m.transpose());
}

} // namespace

TEST(JMatrix, OneDimensional)
{
    const auto j = j_matrix(1);
    ASSERT_EQ(j.rows(), 1);
    ASSERT_EQ(j.cols(), 2);
    EXPECT_EQ(j(0, 0), Complex(0.5, 0.0));
    EXPECT_EQ(j(0, 1), Complex(0.0, -0.5));
    EXPECT_THROW((void)j_matrix(0), DomainError);
}

TEST(JMatrix, TimesAdjointIsHalfIdentity)
{
    for (int n = 1; n <= 5; ++n) {
        const auto j = j_matrix(n);
        const Eigen::MatrixXcd prod = j * j.adjoint();
        EXPECT_LT((prod - 0.5 * Eigen::MatrixXcd::Identity(n, n)).norm(), 1e-15);
    }
}

TEST(ComplexHessian, Examples)
{
    const auto h = complex_hessian(RealSymmetricMatrix(2.0 * Eigen::MatrixXd::Identity(4, 4)));
    EXPECT_LT((h.matrix() - Eigen::MatrixXcd::Identity(2, 2)).norm(), 1e-15);

    Eigen::MatrixXd d(2, 2);
    d << 2.0, 0.0, 0.0, 0.0;
    const auto h1 = complex_hessian(RealSymmetricMatrix(d));
    EXPECT_EQ(h1(0, 0), Complex(0.5, 0.0));

    EXPECT_THROW((void)complex_hessian(RealSymmetricMatrix(Eigen::MatrixXd::Identity(3, 3))), DomainError);
}

TEST(ComplexHessian, MatchesJConjugation)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 5;
        const Eigen::MatrixXd m = random_symmetric(rng, 2 * n);
        const auto j = j_matrix(n);
        const Eigen::MatrixXcd want = j * m.cast<Complex>() * j.adjoint();
        const auto got = complex_hessian(RealSymmetricMatrix(m));
        EXPECT_LT((got.matrix() - want).norm(), 1e-14 * (1.0 + m.norm()));
        EXPECT_LT((got.matrix() - got.matrix().adjoint()).norm(), 1e-15);
    }
}

TEST(ComplexHessian, TraceIsQuarterLaplacian)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 5;
        const Eigen::MatrixXd m = random_symmetric(rng, 2 * n);
        EXPECT_NEAR(complex_hessian(RealSymmetricMatrix(m)).trace(), 0.25 * m.trace(), 1e-13);
    }
}

TEST(WirtingerGradient, Examples)
{
    RealVector du(2);
    du << 1.0, 0.0;
    EXPECT_EQ(wirtinger_gradient(du)(0), Complex(0.5, 0.0));
    du << 0.0, 1.0;
    EXPECT_EQ(wirtinger_gradient(du)(0), Complex(0.0, -0.5));
    EXPECT_THROW((void)wirtinger_gradient(RealVector(3)), DomainError);
}

TEST(WirtingerGradient, NormIsHalfRealNorm)
{
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        RealVector du(6);
        for (int i = 0; i < 6; ++i) {
            du(i) = g(rng);
        }
        EXPECT_NEAR(wirtinger_gradient(du).norm(), 0.5 * du.norm(), 1e-14);
    }
}

TEST(HermitianEigenvalues, HandExample)
{
    Eigen::MatrixXcd m(2, 2);
    m << 2.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 2.0;
    const Spectrum ev = hermitian_eigenvalues(HermitianMatrix(m));
    EXPECT_NEAR(ev[0], 1.0, 1e-14);
    EXPECT_NEAR(ev[1], 3.0, 1e-14);
}

TEST(HermitianEigenvalues, DiagonalAndZero)
{
    const Spectrum ev = hermitian_eigenvalues(HermitianMatrix::diagonal(Spectrum{3.0, -1.0, 2.0}));
    EXPECT_DOUBLE_EQ(ev[0], -1.0);
    EXPECT_DOUBLE_EQ(ev[1], 2.0);
    EXPECT_DOUBLE_EQ(ev[2], 3.0);
    const Spectrum z = hermitian_eigenvalues(HermitianMatrix::zero(3));
    EXPECT_EQ(z[0], 0.0);
    EXPECT_EQ(z[2], 0.0);
}

TEST(HermitianEigenvalues, TraceAndDeterminantAgreeWithLU)
{
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 6;
        const HermitianMatrix h(random_complex(rng, n));
        const Spectrum ev = hermitian_eigenvalues(h);
        double sum = 0.0;
        double prod = 1.0;
        for (int i = 0; i < n; ++i) {
            sum += ev[i];
            prod *= ev[i];
            if (i > 0) {
                EXPECT_LE(ev[i - 1], ev[i]);
            }
        }
        const double det = Eigen::PartialPivLU<Eigen::MatrixXcd>(h.matrix()).determinant().real();
        const double scale = std::pow(1.0 + h.frobenius_norm(), n);
        EXPECT_NEAR(sum, h.trace(), 1e-12 * (1.0 + h.frobenius_norm()));
        EXPECT_NEAR(prod, det, 1e-11 * scale);
    }
}

TEST(HermitianEigenvalues, WeylPerturbationBound)
{
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 5;
        const HermitianMatrix a(random_complex(rng, n));
        const HermitianMatrix e(1e-3 * random_complex(rng, n));
        const Spectrum la = hermitian_eigenvalues(a);
        const Spectrum lb = hermitian_eigenvalues(a + e);
        for (int i = 0; i < n; ++i) {
            EXPECT_LE(std::abs(la[i] - lb[i]), e.frobenius_norm() + 1e-13);
        }
    }
}

TEST(HermitianMatrix, IsSymmetrizedAndRegularizes)
{
    Eigen::MatrixXcd m(2, 2);
    m << Complex(1.0, 3.0), 2.0, 0.0, 4.0;
    const HermitianMatrix h(m);
    EXPECT_EQ(h(0, 0), Complex(1.0, 0.0));
    EXPECT_EQ(h(0, 1), Complex(1.0, 0.0));
    EXPECT_EQ(h(1, 0), Complex(1.0, 0.0));
    const HermitianMatrix reg = h.regularized(0.5);
    EXPECT_DOUBLE_EQ(reg(0, 0).real(), 1.0 + 0.5 * 5.0);
    EXPECT_DOUBLE_EQ(reg(1, 1).real(), 4.0 + 0.5 * 5.0);
    EXPECT_THROW((void)HermitianMatrix(Eigen::MatrixXcd(2, 3)), DomainError);
}

// Finite-difference jets on lattice grids.

TEST(FiniteDifferenceJet, ExactOnSquaredNorm)
{
    auto grid = std::make_shared<const BallGrid>(2, 1.0, 0.25);
    const auto g = GridFunction::sample(grid, [](const Point& z) { return z.squaredNorm(); });
    int checked = 0;
    for (int node : grid->interior_nodes()) {
        const Jet jet = finite_difference_jet(g, node);
        EXPECT_LT((jet.hc.matrix() - Eigen::MatrixXcd::Identity(2, 2)).norm(), 1e-12);
        EXPECT_LT((jet.du - 2.0 * jet.z).norm(), 1e-12);
        ++checked;
    }
    EXPECT_GT(checked, 0);
}

TEST(FiniteDifferenceJet, PluriharmonicMixedTermVanishes)
{
    // x_1 y_1 = Im(z_1^2)/2 is pluriharmonic.
    auto grid = std::make_shared<const BallGrid>(1, 1.0, 0.25);
    const auto g = GridFunction::sample(grid, [](const Point& z) { return z(0) * z(1); });
    for (int node : grid->interior_nodes()) {
        EXPECT_LT(std::abs(finite_difference_jet(g, node).hc(0, 0)), 1e-12);
    }
}

TEST(FiniteDifferenceJet, SecondOrderConvergence)
{
    auto fn = [](const Point& z) { return std::exp(z(0)) * std::sin(z(1)) + std::pow(z(0), 4) + z(0) * z(1) * z(1); };
    auto exact_hc = [](double x, double y) {
        const double uxx = std::exp(x) * std::sin(y) + 12.0 * x * x;
        const double uyy = -std::exp(x) * std::sin(y) + 2.0 * x;
        return 0.25 * (uxx + uyy);
    };
    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const double h = 0.125 / (1 << level);
        auto grid = std::make_shared<const BallGrid>(1, 1.0, h);
        const auto g = GridFunction::sample(grid, fn);
        const int steps = static_cast<int>(std::lround(0.25 / h));
        const std::vector<int> c{steps, steps};
        const auto node = grid->find(c);
        ASSERT_TRUE(node.has_value());
        const double err = std::abs(finite_difference_jet(g, *node).hc(0, 0).real() - exact_hc(0.25, 0.25));
        if (level > 0) {
            EXPECT_GE(std::log2(prev / err), 1.9) << "h=" << h;
        }
        prev = err;
    }
}

TEST(FiniteDifferenceJet, CollarNodeIsStencilError)
{
    auto grid = std::make_shared<const BallGrid>(1, 1.0, 0.25);
    const auto g = GridFunction::sample(grid, [](const Point&) { return 0.0; });
    int collar = -1;
    for (int node = 0; node < grid->node_count(); ++node) {
        if (!grid->is_interior(node)) {
            collar = node;
            break;
        }
    }
    ASSERT_GE(collar, 0);
    EXPECT_THROW((void)finite_difference_jet(g, collar), StencilError);
    EXPECT_THROW((void)finite_difference_jet(g, grid->node_count()), StencilError);
}
