#include "kpsh/symmetric_functions.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <vector>

using namespace kpsh;

namespace {

// Oracle: sum over all j-subsets.
double subset_sigma(int j, const std::vector<double>& v)
{
    const int n = static_cast<int>(v.size());
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != j) {
            continue;
        }
        double prod = 1.0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                prod *= v[static_cast<std::size_t>(i)];
            }
        }
        total += prod;
    }
    return total;
}

std::vector<double> gaussian_vector(std::mt19937_64& rng, int n, double mean = 0.0)
{
    std::normal_distribution<double> g(mean, 1.0);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) {
        x = g(rng);
    }
    return v;
}

// Random point of Gamma_k: rejection sampling around a positive mean.
Spectrum random_in_cone(std::mt19937_64& rng, int n, int k)
{
    for (;;) {
        Spectrum s(gaussian_vector(rng, n, 0.8));
        if (in_cone(ConeLevel(k), s, ConeMode::strict)) {
            return s;
        }
    }
}

} // namespace

TEST(Spectrum, RejectsEmptyAndNonFinite)
{
    EXPECT_THROW((void)Spectrum(std::vector<double>{}), DomainError);
    EXPECT_THROW((void)Spectrum({1.0, std::nan("")}), DomainError);
    EXPECT_THROW((void)Spectrum({1.0, INFINITY}), DomainError);
}

TEST(ConeLevel, RejectsOutOfRange)
{
    EXPECT_THROW((void)ConeLevel(0), DomainError);
    EXPECT_THROW(ConeLevel(3).check(2), DomainError);
    EXPECT_NO_THROW(ConeLevel(2).check(2));
}

TEST(Sigma, HandExamples)
{
    EXPECT_DOUBLE_EQ(sigma(2, Spectrum{1, 2, 3}), 11.0);
    EXPECT_DOUBLE_EQ(sigma(0, Spectrum{1, 2, 3}), 1.0);
    EXPECT_DOUBLE_EQ(sigma(3, Spectrum{1, 2, 3}), 6.0);
    for (int n = 1; n <= 8; ++n) {
        const Spectrum ones(std::vector<double>(static_cast<std::size_t>(n), 1.0));
        for (int k = 0; k <= n; ++k) {
            EXPECT_DOUBLE_EQ(sigma(k, ones), binomial(n, k)) << "n=" << n << " k=" << k;
        }
    }
}

TEST(Sigma, OutOfRangeIndexIsDomainError)
{
    EXPECT_THROW((void)sigma(-1, Spectrum{1, 2}), DomainError);
    EXPECT_THROW((void)sigma(3, Spectrum{1, 2}), DomainError);
}

TEST(Sigma, MatchesSubsetEnumeration)
{
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const auto v = gaussian_vector(rng, 6);
        const Spectrum s(v);
        for (int j = 0; j <= 6; ++j) {
            const double want = subset_sigma(j, v);
            EXPECT_NEAR(sigma(j, s), want, 1e-12 * (1.0 + std::abs(want)) * 20) << "j=" << j;
        }
    }
}

TEST(Sigma, PermutationInvariance)
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        auto v = gaussian_vector(rng, 5);
        const Spectrum s(v);
        std::shuffle(v.begin(), v.end(), rng);
        const Spectrum p(v);
        for (int j = 0; j <= 5; ++j) {
            EXPECT_NEAR(sigma(j, s), sigma(j, p), 1e-12 * (1.0 + std::abs(sigma(j, s))) * 10);
        }
    }
}

TEST(Sigma, Homogeneity)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> tdist(0.1, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Spectrum s(gaussian_vector(rng, 5));
        const double t = tdist(rng);
        for (int j = 0; j <= 5; ++j) {
            const double want = std::pow(t, j) * sigma(j, s);
            EXPECT_NEAR(sigma(j, s.scaled(t)), want, 1e-12 * std::max(1.0, std::abs(want)) * 10);
        }
    }
}

TEST(SigmaRoot, Examples)
{
    EXPECT_DOUBLE_EQ(sigma_root(ConeLevel(2), Spectrum{1, 1}), 1.0);
    EXPECT_NEAR(sigma_root(ConeLevel(2), Spectrum{3, 1, 0}), std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(sigma_root(ConeLevel(2), Spectrum{3, 1, 0}), 1.7320508, 1e-7);
}

TEST(SigmaRoot, OutsideClosedConeIsInadmissibleNotDomain)
{
    EXPECT_THROW((void)sigma_root(ConeLevel(2), Spectrum{2, -1}), InadmissibleSpectrum);
    EXPECT_THROW((void)sigma_root(ConeLevel(3), Spectrum{2, -1}), DomainError);
}

TEST(SigmaRoot, BoundaryRoundoffIsClamped)
{
    // sigma_2 = -1e-14 sits inside the closed-cone tolerance.
    EXPECT_EQ(sigma_root(ConeLevel(2), Spectrum{1.0, -1e-14}), 0.0);
}

TEST(SigmaRoot, HomogeneityOnCone)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> tdist(0.1, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 4;
        const int k = 1 + trial % n;
        const Spectrum s = random_in_cone(rng, n, k);
        const double t = tdist(rng);
        const double base = sigma_root(ConeLevel(k), s);
        EXPECT_NEAR(sigma_root(ConeLevel(k), s.scaled(t)), t * base, 1e-12 * t * base * 10);
    }
}

TEST(SigmaRoot, ConcavityOnCone)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + trial % 4;
        const int k = 1 + trial % n;
        const Spectrum a = random_in_cone(rng, n, k);
        const Spectrum b = random_in_cone(rng, n, k);
        std::vector<double> mid(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            mid[static_cast<std::size_t>(i)] = 0.5 * (a[i] + b[i]);
        }
        const ConeLevel kk(k);
        EXPECT_GE(sigma_root(kk, Spectrum(mid)), 0.5 * (sigma_root(kk, a) + sigma_root(kk, b)) - 1e-10);
    }
}

TEST(InCone, Examples)
{
    EXPECT_TRUE(in_cone(ConeLevel(1), Spectrum{2, -1}, ConeMode::strict));
    EXPECT_FALSE(in_cone(ConeLevel(2), Spectrum{2, -1}, ConeMode::strict));
    for (int n = 1; n <= 6; ++n) {
        const Spectrum ones(std::vector<double>(static_cast<std::size_t>(n), 1.0));
        for (int k = 1; k <= n; ++k) {
            EXPECT_TRUE(in_cone(ConeLevel(k), ones, ConeMode::strict));
        }
    }
}

TEST(InCone, ClosedModeAcceptsBoundaryStrictRejects)
{
    const Spectrum boundary{1.0, 0.0};
    EXPECT_TRUE(in_cone(ConeLevel(2), boundary, ConeMode::closed));
    EXPECT_FALSE(in_cone(ConeLevel(2), boundary, ConeMode::strict));
    EXPECT_TRUE(in_cone(ConeLevel(2), Spectrum{1.0, -1e-12}, ConeMode::closed));
    EXPECT_FALSE(in_cone(ConeLevel(2), Spectrum{1.0, -1e-6}, ConeMode::closed));
}

TEST(InCone, LevelAboveDimensionIsFalse) { EXPECT_FALSE(in_cone(ConeLevel(3), Spectrum{1, 1}, ConeMode::strict)); }

TEST(InCone, Nesting)
{
    std::mt19937_64 rng(6);
    int nested = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + trial % 5;
        const Spectrum s(gaussian_vector(rng, n, 0.5));
        for (int k = 1; k < n; ++k) {
            if (in_cone(ConeLevel(k + 1), s, ConeMode::strict)) {
                ++nested;
                EXPECT_TRUE(in_cone(ConeLevel(k), s, ConeMode::strict));
            }
        }
    }
    EXPECT_GT(nested, 100);
}

TEST(SigmaGradient, Examples)
{
    const Spectrum g = sigma_gradient(ConeLevel(2), Spectrum{1, 2, 3});
    EXPECT_DOUBLE_EQ(g[0], 5.0);
    EXPECT_DOUBLE_EQ(g[1], 4.0);
    EXPECT_DOUBLE_EQ(g[2], 3.0);
    for (int n = 2; n <= 6; ++n) {
        const Spectrum ones(std::vector<double>(static_cast<std::size_t>(n), 1.0));
        for (int k = 1; k <= n; ++k) {
            const Spectrum gk = sigma_gradient(ConeLevel(k), ones);
            for (int i = 0; i < n; ++i) {
                EXPECT_DOUBLE_EQ(gk[i], binomial(n - 1, k - 1));
            }
        }
    }
}

TEST(SigmaGradient, MatchesFiniteDifferences)
{
    std::mt19937_64 rng(7);
    const double step = 1e-6;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 5;
        const int k = 1 + trial % n;
        const auto v = gaussian_vector(rng, n);
        const Spectrum g = sigma_gradient(ConeLevel(k), Spectrum(v));
        for (int i = 0; i < n; ++i) {
            auto up = v;
            auto dn = v;
            up[static_cast<std::size_t>(i)] += step;
            dn[static_cast<std::size_t>(i)] -= step;
            const double fd = (sigma(k, Spectrum(up)) - sigma(k, Spectrum(dn))) / (2.0 * step);
            EXPECT_NEAR(g[i], fd, 1e-6);
        }
    }
}

TEST(SigmaGradient, SumIdentity)
{
    // n binomial(n-1, k-1) = k binomial(n, k): the gradient sum behind the ellipticity constants.
    for (int n = 1; n <= 8; ++n) {
        for (int k = 1; k <= n; ++k) {
            const Spectrum ones(std::vector<double>(static_cast<std::size_t>(n), 1.0));
            const Spectrum g = sigma_gradient(ConeLevel(k), ones);
            double sum = 0.0;
            for (int i = 0; i < n; ++i) {
                sum += g[i];
            }
            EXPECT_DOUBLE_EQ(sum, k * binomial(n, k));
        }
    }
}

TEST(Maclaurin, AllOnes)
{
    for (int n = 1; n <= 7; ++n) {
        const auto chain = maclaurin_chain(Spectrum(std::vector<double>(static_cast<std::size_t>(n), 1.0)));
        ASSERT_EQ(chain.means.size(), static_cast<std::size_t>(n));
        EXPECT_TRUE(chain.guaranteed);
        for (double m : chain.means) {
            EXPECT_NEAR(m, 1.0, 1e-15);
        }
    }
}

TEST(Maclaurin, HandExample)
{
    const auto chain = maclaurin_chain(Spectrum{2, 1, 0});
    EXPECT_TRUE(chain.guaranteed);
    EXPECT_NEAR(chain.means[0], 1.0, 1e-15);
    EXPECT_NEAR(chain.means[1], std::sqrt(2.0) / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(chain.means[1], 0.8165, 1e-4);
    EXPECT_EQ(chain.means[2], 0.0);
}

TEST(Maclaurin, NonIncreasingOnGammaN)
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + trial % 6;
        std::uniform_real_distribution<double> u(0.0, 3.0);
        std::vector<double> v(static_cast<std::size_t>(n));
        for (double& x : v) {
            x = u(rng);
        }
        const auto chain = maclaurin_chain(Spectrum(v));
        EXPECT_TRUE(chain.guaranteed);
        for (std::size_t j = 1; j < chain.means.size(); ++j) {
            EXPECT_LE(chain.means[j], chain.means[j - 1] + 1e-12);
        }
    }
}

TEST(Maclaurin, OutsideGammaNIsFlagged)
{
    EXPECT_FALSE(maclaurin_chain(Spectrum{2, -1}).guaranteed);
}

TEST(Maclaurin, ConstantsAndCStar)
{
    EXPECT_DOUBLE_EQ(maclaurin_constant(4, 1), 0.25);
    EXPECT_NEAR(maclaurin_constant(4, 2), 1.0 / std::sqrt(6.0), 1e-15);
    EXPECT_THROW((void)maclaurin_constant(3, 4), DomainError);
    // k = 2 has an empty range; c_1/c_1 = 1 is used.
    EXPECT_DOUBLE_EQ(c_star(2, 2), 1.0);
    EXPECT_DOUBLE_EQ(c_star(5, 2), 1.0);
    // k = 3, n = 3: c_1/c_2 = (1/3) / 3^{-1/2} = 3^{-1/2}.
    EXPECT_NEAR(c_star(3, 3), 1.0 / std::sqrt(3.0), 1e-15);
    // k = 4, n = 4: max(c_1/c_2, c_1/c_3) = max(6^{1/2}, 4^{1/3}) / 4.
    EXPECT_NEAR(c_star(4, 4), std::max(std::sqrt(6.0), std::cbrt(4.0)) / 4.0, 1e-15);
    EXPECT_THROW((void)c_star(3, 4), DomainError);
}
