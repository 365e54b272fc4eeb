#pragma once

#include "kpsh/barriers.hpp"
#include "kpsh/complex_calculus.hpp"
#include "kpsh/operators.hpp"
#include "kpsh/sampling.hpp"
#include "kpsh/symmetric_functions.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace kpsh {

struct SuiteResult {
    std::string name;
    std::size_t checks = 0;
    std::size_t failures = 0;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> notes; ///< first failure descriptions
    double seconds = 0.0;

    [[nodiscard]] bool pass() const { return failures == 0 && checks > 0; }

    void expect(bool ok, const std::string& what)
    {
        ++checks;
        if (!ok) {
            ++failures;
            if (notes.size() < 8) {
                notes.push_back(what);
            }
        }
    }
    void metric(std::string key, double value) { metrics.emplace_back(std::move(key), value); }
};

struct Suite {
    std::string name;
    std::string description;
    std::function<SuiteResult()> run;
};

[[nodiscard]] inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

namespace suites {

/// sigma_k of the assembled complex Hessian of w_eps against the closed-form determinant.
inline SuiteResult determinant_identity()
{
    SuiteResult res;
    res.name = "determinant";
    double worst = 0.0;
    for (int k = 2; k <= 4; ++k) {
        for (int n = k; n <= 5; ++n) {
            for (double r : {0.125, 0.25, 0.5}) {
                for (double eps : {r / 10.0, r / 2.0}) {
                    const PogorelovParams p{n, k, r, eps, 1.0};
                    std::size_t bad = 0;
                    double cfg_worst = 0.0;
                    for (const auto& z : sobol_ball(2 * n, 1000, r)) {
                        const double assembled = sigma(k, hermitian_eigenvalues(pogorelov_hessian(p, z)));
                        const double d = rel_diff(assembled, pogorelov_det(p, z));
                        cfg_worst = std::max(cfg_worst, d);
                        bad += d > 1e-9 ? 1 : 0;
                    }
                    worst = std::max(worst, cfg_worst);
                    std::ostringstream what;
                    what << "k=" << k << " n=" << n << " r=" << r << " eps=" << eps << ": " << bad
                         << " points above 1e-9 (worst " << cfg_worst << ")";
                    res.expect(bad == 0, what.str());
                }
            }
        }
    }
    res.metric("max_rel_diff", worst);
    return res;
}

/// lambda_1^{k-2} lambda_2 against the determinant, and the spectrum of the assembled Gamma.
inline SuiteResult eigenvalue_identity()
{
    SuiteResult res;
    res.name = "eigenvalues";
    double worst_product = 0.0;
    double worst_spectrum = 0.0;
    for (int k = 2; k <= 4; ++k) {
        for (int n = k; n <= 5; ++n) {
            for (double r : {0.125, 0.25, 0.5}) {
                for (double eps : {r / 10.0, r / 2.0}) {
                    const PogorelovParams p{n, k, r, eps, 1.0};
                    std::size_t bad = 0;
                    for (const auto& z : sobol_ball(2 * n, 1000, r)) {
                        const auto ev = gamma_matrix_eigs(p, z);
                        const double product = std::pow(ev.lambda1, ev.multiplicity) * ev.lambda2;
                        const double dp = rel_diff(product, pogorelov_det(p, z));
                        worst_product = std::max(worst_product, dp);
                        std::vector<double> predicted(static_cast<std::size_t>(ev.multiplicity), ev.lambda1);
                        predicted.push_back(ev.lambda2);
                        std::sort(predicted.begin(), predicted.end());
                        const Spectrum got = hermitian_eigenvalues(gamma_matrix(p, z));
                        double ds = 0.0;
                        for (int i = 0; i < got.size(); ++i) {
                            ds = std::max(ds, rel_diff(got[i], predicted[static_cast<std::size_t>(i)]));
                        }
                        worst_spectrum = std::max(worst_spectrum, ds);
                        bad += (dp > 1e-12 || ds > 1e-9) ? 1 : 0;
                    }
                    std::ostringstream what;
                    what << "k=" << k << " n=" << n << " r=" << r << " eps=" << eps << ": " << bad << " points";
                    res.expect(bad == 0, what.str());
                }
            }
        }
    }
    res.metric("max_product_rel_diff", worst_product);
    res.metric("max_spectrum_rel_diff", worst_spectrum);
    return res;
}

/// Gaussian Hermitian matrix with a uniform diagonal shift in [0, 3).
template <class Rng>
[[nodiscard]] HermitianMatrix random_hermitian(Rng& rng, int n, double shift)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = Complex(g(rng), g(rng));
        }
    }
    m.diagonal().array() += shift;
    return HermitianMatrix(m);
}

/// N = A A^* + 1e-3 I with Gaussian A.
template <class Rng>
[[nodiscard]] HermitianMatrix random_positive(Rng& rng, int n)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            a(i, j) = Complex(g(rng), g(rng));
        }
    }
    Eigen::MatrixXcd nn = a * a.adjoint();
    nn.diagonal().array() += 1e-3;
    return HermitianMatrix(nn);
}

/// Two-sided ellipticity of F^eps on 10^4 randomized admissible pairs (M, N).
inline SuiteResult ellipticity(std::size_t target = 10000)
{
    SuiteResult res;
    res.name = "ellipticity";
    std::mt19937_64 rng(20241);
    std::uniform_real_distribution<double> shift(0.0, 3.0);
    std::vector<std::pair<int, int>> shapes;
    for (int n = 1; n <= 5; ++n) {
        for (int k = 1; k <= n; ++k) {
            shapes.emplace_back(n, k);
        }
    }
    const double eps_values[] = {0.01, 0.1, 1.0};
    std::size_t admissible = 0;
    std::size_t drawn = 0;
    std::size_t violations = 0;
    double min_lower_margin = std::numeric_limits<double>::infinity();
    double min_upper_margin = std::numeric_limits<double>::infinity();
    while (admissible < target && drawn < 100 * target) {
        const auto [n, k] = shapes[drawn % shapes.size()];
        const double eps = eps_values[(drawn / shapes.size()) % 3];
        ++drawn;
        const HermitianMatrix m = random_hermitian(rng, n, shift(rng));
        const HermitianMatrix nn = random_positive(rng, n);
        if (!in_cone(ConeLevel(k), hermitian_eigenvalues(m.regularized(eps)), ConeMode::strict)) {
            continue;
        }
        ++admissible;
        const auto rep = check_ellipticity(ConeLevel(k), eps, m, nn);
        min_lower_margin = std::min(min_lower_margin, (rep.mid - rep.lhs) / (1.0 + std::abs(rep.rhs)));
        min_upper_margin = std::min(min_upper_margin, (rep.rhs - rep.mid) / (1.0 + std::abs(rep.rhs)));
        if (!rep.pass) {
            ++violations;
        }
    }
    std::ostringstream what;
    what << violations << " of " << admissible << " admissible pairs violate the bounds";
    res.expect(admissible == target, "only " + std::to_string(admissible) + " admissible pairs drawn");
    res.expect(violations == 0, what.str());
    res.metric("admissible_pairs", static_cast<double>(admissible));
    res.metric("drawn_pairs", static_cast<double>(drawn));
    res.metric("min_lower_margin", min_lower_margin);
    res.metric("min_upper_margin", min_upper_margin);
    return res;
}

/// Sub/super-solution signs of psi_eps, phi_eps and u_{lambda*} for f = 1, k = n = 2.
inline SuiteResult barrier_signs()
{
    SuiteResult res;
    res.name = "barrier_signs";
    const int k = 2;
    const int n = 2;
    const RhsSpec f = RhsSpec::constant(1.0);
    const double r = choose_r(f, k, 1.0, n);
    const double bigM = choose_M(r, k);
    res.expect(r == 0.125, "choose_r returned " + std::to_string(r) + ", expected 1/8");
    res.metric("r", r);
    res.metric("M", bigM);
    const auto pts = sobol_ball(2 * n, 10000, r);
    double worst_psi = -std::numeric_limits<double>::infinity();
    for (double eps : {r / 2.0, r / 4.0, r / 8.0}) {
        const PogorelovParams p{n, k, r, eps, bigM};
        const Candidate psi = [p](const Point& z) { return psi_jet(p, z); };
        const auto sub = classical_sign_check(ConeLevel(k), f, psi, pts, Side::sub);
        worst_psi = std::max(worst_psi, sub.max_value);
        std::ostringstream w1;
        w1 << "F(psi_eps) < 0 fails at eps=" << eps << " (max " << sub.max_value << ")";
        res.expect(sub.pass && sub.inadmissible == 0 && sub.max_value < 0.0, w1.str());

        const DatumSpec phi = phi_eps_datum(p);
        const auto super = classical_sign_check(ConeLevel(k), f, phi.jet, pts, Side::super);
        std::ostringstream w2;
        w2 << "F(phi_eps) = f fails at eps=" << eps << " (min " << super.min_value << ")";
        res.expect(super.pass && super.min_value > 0.0 && std::abs(super.max_value - 1.0) < 1e-12 &&
                       std::abs(super.min_value - 1.0) < 1e-12,
                   w2.str());

        const auto bc = barrier_constants(f, phi, k, n);
        std::ostringstream w3;
        w3 << "r=" << r << " is not below r0=" << bc.r0;
        res.expect(r < bc.r0, w3.str());
        const SignCheckOptions half_eps0{0.5 * bc.eps0, 0.0};
        const auto reg_super = classical_sign_check(ConeLevel(k), f, phi.jet, pts, Side::super, half_eps0);
        std::ostringstream w4;
        w4 << "F^{eps0/2}(phi_eps) > 0 fails at eps=" << eps << " (min " << reg_super.min_value << ")";
        res.expect(reg_super.pass && reg_super.min_value > 0.0, w4.str());

        const Candidate lower = [phi, lam = bc.lambda_star, r](const Point& z) {
            return lower_barrier(phi.jet, lam, r, z);
        };
        for (double reg : {0.5 * bc.eps0, eps, 1.0}) {
            const SignCheckOptions o{reg, 0.0};
            const auto lb = classical_sign_check(ConeLevel(k), f, lower, pts, Side::sub, o);
            std::ostringstream w5;
            w5 << "F^eps(u_lambda*) < 0 fails at eps=" << eps << " reg=" << reg << " (max " << lb.max_value << ")";
            res.expect(lb.pass && lb.inadmissible == 0 && lb.max_value < 0.0, w5.str());
        }
    }
    res.metric("max_F_psi", worst_psi);
    return res;
}

/// |Dw_eps|^2 <= 2^{2 alpha + 3} r^{4 alpha + 2} and |D psi_eps| <= 1 with M = choose_M.
inline SuiteResult gradient_bounds()
{
    SuiteResult res;
    res.name = "gradient_bounds";
    double worst_ratio = 0.0;
    double worst_psi = 0.0;
    for (int k = 2; k <= 4; ++k) {
        for (int n = k; n <= std::min(5, k + 1); ++n) {
            for (double r : {0.125, 0.25, 0.5}) {
                for (double eps : {0.0, r / 10.0, r / 2.0, 0.99 * r}) {
                    const PogorelovParams p{n, k, r, eps, 1.0};
                    const auto rep = gradient_bound_check(p, 10000);
                    worst_ratio = std::max(worst_ratio, rep.max_ratio / rep.bound);
                    worst_psi = std::max(worst_psi, rep.max_psi_gradient);
                    std::ostringstream what;
                    what << "k=" << k << " n=" << n << " r=" << r << " eps=" << eps << ": " << rep.violations
                         << " |Dw| and " << rep.psi_violations << " |D psi| violations, formula diff "
                         << rep.formula_max_rel_diff;
                    res.expect(rep.pass, what.str());
                }
            }
        }
    }
    res.metric("max_ratio_over_bound", worst_ratio);
    res.metric("max_psi_gradient", worst_psi);
    return res;
}

/// Elementary symmetric functions against subset enumeration; cone and Maclaurin structure.
inline SuiteResult symmetric_invariants()
{
    SuiteResult res;
    res.name = "symmetric_functions";
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 1 + trial % 6;
        std::vector<double> v(static_cast<std::size_t>(n));
        for (double& x : v) {
            x = g(rng) + (trial % 3 == 0 ? 2.0 : 0.0);
        }
        const Spectrum lam(v);
        for (int j = 0; j <= n; ++j) {
            double brute = 0.0;
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
                brute += prod;
            }
            res.expect(std::abs(sigma(j, lam) - brute) <= 1e-12 * (1.0 + std::abs(brute)) * (1 << n),
                       "sigma_" + std::to_string(j) + " disagrees with subset enumeration");
            const double t = 1.7;
            res.expect(std::abs(sigma(j, lam.scaled(t)) - std::pow(t, j) * sigma(j, lam)) <=
                           1e-11 * (1.0 + std::pow(t, j) * std::abs(brute)) * (1 << n),
                       "sigma_" + std::to_string(j) + " homogeneity");
        }
        for (int k = 1; k <= n; ++k) {
            if (in_cone(ConeLevel(k), lam, ConeMode::strict)) {
                const Spectrum grad = sigma_gradient(ConeLevel(k), lam);
                bool positive = true;
                for (int i = 0; i < n; ++i) {
                    positive = positive && grad[i] > 0.0;
                }
                res.expect(positive, "sigma_k gradient not positive inside Gamma_k");
                if (k > 1) {
                    res.expect(in_cone(ConeLevel(k - 1), lam, ConeMode::strict), "Gamma_k not inside Gamma_{k-1}");
                }
            }
        }
        if (in_cone(ConeLevel(n), lam, ConeMode::strict)) {
            const auto chain = maclaurin_chain(lam);
            bool monotone = true;
            for (std::size_t j = 1; j < chain.means.size(); ++j) {
                monotone = monotone && chain.means[j] <= chain.means[j - 1] * (1.0 + 1e-12);
            }
            res.expect(chain.guaranteed && monotone, "Maclaurin chain not monotone on Gamma_n");
        }
    }
    return res;
}

/// Jacobi eigenvalues against Eigen's solver; J-reduction identities on quadratics.
inline SuiteResult complex_calculus_invariants()
{
    SuiteResult res;
    res.name = "complex_calculus";
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + trial % 6;
        const HermitianMatrix h = random_hermitian(rng, n, 0.0);
        const Spectrum ours = hermitian_eigenvalues(h);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.matrix(), Eigen::EigenvaluesOnly);
        double d = 0.0;
        for (int i = 0; i < n; ++i) {
            d = std::max(d, std::abs(ours[i] - es.eigenvalues()(i)));
        }
        worst = std::max(worst, d / (1.0 + h.frobenius_norm()));
        res.expect(d <= 1e-12 * (1.0 + h.frobenius_norm()), "Jacobi eigenvalues disagree with the reference solver");

        Eigen::MatrixXd a(2 * n, 2 * n);
        for (int i = 0; i < 2 * n; ++i) {
            for (int j = 0; j < 2 * n; ++j) {
                a(i, j) = g(rng);
            }
        }
        const RealSymmetricMatrix d2(a + a.transpose());
        const Eigen::MatrixXcd jm = j_matrix(n);
        const Eigen::MatrixXcd via_j = jm * d2.matrix().cast<Complex>() * jm.adjoint();
        const HermitianMatrix hc = complex_hessian(d2);
        res.expect((via_j - hc.matrix()).norm() <= 1e-13 * (1.0 + via_j.norm()), "entry formula differs from J D2 J^*");
        res.expect(std::abs(hc.trace() - 0.25 * d2.trace()) <= 1e-13 * (1.0 + std::abs(d2.trace())),
                   "trace(ddbar u) differs from Laplacian / 4");
    }
    for (int n = 1; n <= 4; ++n) {
        // |z|^2 has real Hessian 2I and complex Hessian I.
        const HermitianMatrix id = complex_hessian(RealSymmetricMatrix(2.0 * Eigen::MatrixXd::Identity(2 * n, 2 * n)));
        res.expect((id.matrix() - Eigen::MatrixXcd::Identity(n, n)).norm() < 1e-15, "ddbar |z|^2 != I");
        if (n >= 2) {
            // Re(z_1 z_2) = x1 x2 - y1 y2 is pluriharmonic.
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
            m(0, 1) = m(1, 0) = 1.0;
            m(n, n + 1) = m(n + 1, n) = -1.0;
            res.expect(complex_hessian(RealSymmetricMatrix(m)).frobenius_norm() < 1e-15, "Re(z1 z2) not pluriharmonic");
        }
    }
    res.metric("max_eigenvalue_diff", worst);
    return res;
}

} // namespace suites

/// Registry in fixed order; output ordering follows it.
[[nodiscard]] inline std::vector<Suite> verification_suites()
{
    return {
        {"symmetric_functions", "sigma_j against subset sums, cone nesting, Maclaurin chain",
         [] { return suites::symmetric_invariants(); }},
        {"complex_calculus", "Jacobi eigenvalues, J-reduction identities", [] { return suites::complex_calculus_invariants(); }},
        {"determinant", "sigma_k of the assembled barrier Hessian vs closed form", [] { return suites::determinant_identity(); }},
        {"eigenvalues", "Gamma spectrum and lambda_1^{k-2} lambda_2", [] { return suites::eigenvalue_identity(); }},
        {"ellipticity", "two-sided ellipticity on randomized admissible pairs", [] { return suites::ellipticity(); }},
        {"barrier_signs", "sub/super-solution signs of psi_eps, phi_eps, u_lambda*", [] { return suites::barrier_signs(); }},
        {"gradient_bounds", "|Dw_eps| and |D psi_eps| bounds", [] { return suites::gradient_bounds(); }},
    };
}

[[nodiscard]] inline SuiteResult run_suite(const Suite& s)
{
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult r;
    try {
        r = s.run();
    } catch (const std::exception& e) {
        r.name = s.name;
        r.expect(false, std::string("exception: ") + e.what());
    }
    r.name = s.name;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace kpsh
