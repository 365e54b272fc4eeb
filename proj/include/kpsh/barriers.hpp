#pragma once

#include "kpsh/complex_calculus.hpp"
#include "kpsh/core.hpp"
#include "kpsh/operators.hpp"
#include "kpsh/sampling.hpp"
#include "kpsh/symmetric_functions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace kpsh {

/// Parameters of the Pogorelov family
///   w_eps(z) = (r^2 + |z_1|^2)(eps^2 + |z'|^2)^alpha,  alpha = 1 - 1/k,
/// with z = (z_1, z', z''), z' = (z_2..z_k), z'' = (z_{k+1}..z_n).
struct PogorelovParams {
    int n = 2;
    int k = 2;
    double r = 0.5;
    double eps = 0.1;
    double bigM = 1.0;

    [[nodiscard]] double alpha() const { return 1.0 - 1.0 / k; }

    void validate() const
    {
        if (k < 2 || n < k) {
            throw DomainError("Pogorelov family needs 2 <= k <= n");
        }
        if (!(r > 0.0 && r < 1.0)) {
            throw DomainError("Pogorelov radius must lie in (0, 1)");
        }
        if (!(eps >= 0.0) || !(bigM > 0.0)) {
            throw DomainError("Pogorelov family needs eps >= 0 and M > 0");
        }
    }
};

namespace detail {

struct SplitNorms {
    double z1_sq = 0.0;    ///< |z_1|^2
    double zp_sq = 0.0;    ///< |z'|^2
    double a = 0.0;        ///< r^2 + |z_1|^2
    double b = 0.0;        ///< eps^2 + |z'|^2
};

inline SplitNorms split_norms(const PogorelovParams& p, const Point& z)
{
    if (complex_dimension(z) != p.n) {
        throw DomainError("point dimension does not match Pogorelov n");
    }
    SplitNorms s;
    s.z1_sq = std::norm(complex_coordinate(z, 0));
    for (int j = 1; j < p.k; ++j) {
        s.zp_sq += std::norm(complex_coordinate(z, j));
    }
    s.a = p.r * p.r + s.z1_sq;
    s.b = p.eps * p.eps + s.zp_sq;
    return s;
}

/// ddbar of g(|z'|^2) = c (eps^2 + |z'|^2)^alpha on the z' block, written into h.
inline void add_zprime_block(Eigen::MatrixXcd& h, const Point& z, int k, double alpha, double b, double coeff)
{
    const double base = coeff * alpha * std::pow(b, alpha - 1.0);
    for (int j = 1; j < k; ++j) {
        const Complex zj = complex_coordinate(z, j);
        for (int l = 1; l < k; ++l) {
            const Complex zl = complex_coordinate(z, l);
            h(j, l) += base * ((j == l ? 1.0 : 0.0) + (alpha - 1.0) * std::conj(zj) * zl / b);
        }
    }
}

} // namespace detail

[[nodiscard]] inline double pogorelov_value(const PogorelovParams& p, const Point& z)
{
    const auto s = detail::split_norms(p, z);
    return s.a * std::pow(s.b, p.alpha());
}

/// Real gradient of w_eps; refused on {z' = 0} when eps = 0.
[[nodiscard]] inline RealVector pogorelov_gradient(const PogorelovParams& p, const Point& z)
{
    const auto s = detail::split_norms(p, z);
    if (s.b == 0.0) {
        throw SingularityError("w_0 gradient is singular on {z' = 0}");
    }
    const double alpha = p.alpha();
    const int n = p.n;
    RealVector g = RealVector::Zero(2 * n);
    const double b_alpha = std::pow(s.b, alpha);
    g(0) = 2.0 * z(0) * b_alpha;
    g(n) = 2.0 * z(n) * b_alpha;
    const double c = 2.0 * s.a * alpha * std::pow(s.b, alpha - 1.0);
    for (int j = 1; j < p.k; ++j) {
        g(j) = c * z(j);
        g(n + j) = c * z(n + j);
    }
    return g;
}

/// ddbar w_eps as the explicit block matrix, zero-extended over z''.
[[nodiscard]] inline HermitianMatrix pogorelov_hessian(const PogorelovParams& p, const Point& z)
{
    const auto s = detail::split_norms(p, z);
    if (s.b == 0.0) {
        throw SingularityError("w_0 complex Hessian is singular on {z' = 0}");
    }
    const double alpha = p.alpha();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(p.n, p.n);
    h(0, 0) = std::pow(s.b, alpha);
    const Complex z1 = complex_coordinate(z, 0);
    const double cross = alpha * std::pow(s.b, alpha - 1.0);
    for (int l = 1; l < p.k; ++l) {
        const Complex zl = complex_coordinate(z, l);
        h(0, l) = cross * std::conj(z1) * zl;
        h(l, 0) = std::conj(h(0, l));
    }
    detail::add_zprime_block(h, z, p.k, alpha, s.b, s.a);
    return HermitianMatrix(std::move(h));
}

[[nodiscard]] inline Jet pogorelov_jet(const PogorelovParams& p, const Point& z)
{
    return Jet::from_complex(z, pogorelov_value(p, z), pogorelov_gradient(p, z), pogorelov_hessian(p, z));
}

/// Closed form of sigma_k(ddbar w_eps) = det of the (z_1, z') block:
///   alpha^k (r^2+|z_1|^2)^{k-2} [r^2(eps^2/alpha + |z'|^2) + (eps^2/alpha)|z_1|^2] / (eps^2 + |z'|^2).
[[nodiscard]] inline double pogorelov_det(const PogorelovParams& p, const Point& z)
{
    const auto s = detail::split_norms(p, z);
    if (s.b == 0.0) {
        throw SingularityError("determinant formula needs eps > 0 or z' != 0");
    }
    const double alpha = p.alpha();
    const double e2a = p.eps * p.eps / alpha;
    return std::pow(alpha, p.k) * std::pow(s.a, p.k - 2) *
           (p.r * p.r * (e2a + s.zp_sq) + e2a * s.z1_sq) / s.b;
}

/// The (k-1)x(k-1) Schur complement
///   Gamma = a (alpha I + alpha(alpha-1) P) - alpha^2 |z_1|^2 P,  P_{jl} = conj(z_j) z_l / b.
[[nodiscard]] inline HermitianMatrix gamma_matrix(const PogorelovParams& p, const Point& z)
{
    const auto s = detail::split_norms(p, z);
    if (s.b == 0.0) {
        throw SingularityError("Gamma matrix needs eps > 0 or z' != 0");
    }
    const double alpha = p.alpha();
    const int m = p.k - 1;
    Eigen::MatrixXcd g(m, m);
    for (int j = 0; j < m; ++j) {
        const Complex zj = complex_coordinate(z, j + 1);
        for (int l = 0; l < m; ++l) {
            const Complex zl = complex_coordinate(z, l + 1);
            const Complex pjl = std::conj(zj) * zl / s.b;
            g(j, l) = s.a * (alpha * (j == l ? 1.0 : 0.0) + alpha * (alpha - 1.0) * pjl) -
                      alpha * alpha * s.z1_sq * pjl;
        }
    }
    return HermitianMatrix(std::move(g));
}

struct GammaEigenvalues {
    double lambda1 = 0.0; ///< alpha (r^2 + |z_1|^2)
    int multiplicity = 0; ///< k - 2
    double lambda2 = 0.0;
};

[[nodiscard]] inline GammaEigenvalues gamma_matrix_eigs(const PogorelovParams& p, const Point& z)
{
    const auto s = detail::split_norms(p, z);
    if (s.b == 0.0) {
        throw SingularityError("Gamma eigenvalues need eps > 0 or z' != 0");
    }
    const double alpha = p.alpha();
    const double e2a = p.eps * p.eps / alpha;
    GammaEigenvalues ev;
    ev.lambda1 = alpha * s.a;
    ev.multiplicity = p.k - 2;
    ev.lambda2 = alpha * alpha * (p.r * p.r * (e2a + s.zp_sq) + e2a * s.z1_sq) / s.b;
    return ev;
}

struct BarrierPair {
    double psi = 0.0;
    double phi = 0.0;
};

/// psi_eps = M w_eps and phi_eps = 2M (eps^2 + |z'|^2)^alpha.
[[nodiscard]] inline BarrierPair psi_and_phi(const PogorelovParams& p, const Point& z)
{
    const auto s = detail::split_norms(p, z);
    const double b_alpha = std::pow(s.b, p.alpha());
    return {p.bigM * s.a * b_alpha, 2.0 * p.bigM * b_alpha};
}

[[nodiscard]] inline Jet psi_jet(const PogorelovParams& p, const Point& z)
{
    return Jet::from_complex(z, p.bigM * pogorelov_value(p, z), p.bigM * pogorelov_gradient(p, z),
                             p.bigM * pogorelov_hessian(p, z));
}

[[nodiscard]] inline Jet phi_jet(const PogorelovParams& p, const Point& z)
{
    const auto s = detail::split_norms(p, z);
    if (s.b == 0.0) {
        throw SingularityError("phi_0 jet is singular on {z' = 0}");
    }
    const double alpha = p.alpha();
    const int n = p.n;
    RealVector g = RealVector::Zero(2 * n);
    const double c = 4.0 * p.bigM * alpha * std::pow(s.b, alpha - 1.0);
    for (int j = 1; j < p.k; ++j) {
        g(j) = c * z(j);
        g(n + j) = c * z(n + j);
    }
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    detail::add_zprime_block(h, z, p.k, alpha, s.b, 2.0 * p.bigM);
    return Jet::from_complex(z, 2.0 * p.bigM * std::pow(s.b, alpha), std::move(g), HermitianMatrix(std::move(h)));
}

/// |Dw_eps|^2 = 4(|z_1|^2 b^{2 alpha} + alpha^2 |z'|^2 a^2 b^{2(alpha-1)}).
[[nodiscard]] inline double gradient_norm_sq_formula(const PogorelovParams& p, const Point& z)
{
    const auto s = detail::split_norms(p, z);
    const double alpha = p.alpha();
    return 4.0 * (s.z1_sq * std::pow(s.b, 2.0 * alpha) +
                  alpha * alpha * s.zp_sq * s.a * s.a * std::pow(s.b, 2.0 * (alpha - 1.0)));
}

/// M = 2^{-alpha-3/2} r^{-2 alpha - 1}, which makes |D psi_eps| <= 1 in B_r.
[[nodiscard]] inline double choose_M(double r, int k)
{
    if (!(r > 0.0 && r < 1.0) || k < 2) {
        throw DomainError("choose_M needs 0 < r < 1 and k >= 2");
    }
    const double alpha = 1.0 - 1.0 / k;
    return std::pow(2.0, -alpha - 1.5) * std::pow(r, -2.0 * alpha - 1.0);
}

struct GradientBoundReport {
    bool pass = false;
    std::size_t samples = 0;
    std::size_t violations = 0;        ///< points with |Dw|^2 above the bound
    std::size_t psi_violations = 0;    ///< points with |D psi| > 1 + 1e-9 (M = choose_M)
    double bound = 0.0;                ///< 2^{2 alpha + 3}
    double max_ratio = 0.0;            ///< max |Dw|^2 / r^{4 alpha + 2}
    double max_psi_gradient = 0.0;     ///< max |D psi| with M = choose_M(r, k)
    double formula_max_rel_diff = 0.0; ///< explicit |Dw|^2 vs finite differences
};

/// Dense-sample verification of |Dw_eps|^2 <= 2^{2 alpha + 3} r^{4 alpha + 2} in B_r,
/// and of the explicit |Dw_eps|^2 formula against central differences of w_eps.
[[nodiscard]] inline GradientBoundReport gradient_bound_check(const PogorelovParams& p, std::size_t count = 10000)
{
    p.validate();
    if (!(p.eps < p.r)) {
        throw DomainError("gradient bound needs eps < r");
    }
    const double alpha = p.alpha();
    GradientBoundReport rep;
    rep.bound = std::pow(2.0, 2.0 * alpha + 3.0);
    const double scale = std::pow(p.r, 4.0 * alpha + 2.0);
    const double m_choice = choose_M(p.r, p.k);
    const auto pts = sobol_ball(2 * p.n, count, p.r);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Point& z = pts[i];
        const double g2 = gradient_norm_sq_formula(p, z);
        const double ratio = g2 / scale;
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        if (ratio > rep.bound * (1.0 + 1e-12)) {
            ++rep.violations;
        }
        const double psi_grad = m_choice * std::sqrt(g2);
        rep.max_psi_gradient = std::max(rep.max_psi_gradient, psi_grad);
        if (psi_grad > 1.0 + 1e-9) {
            ++rep.psi_violations;
        }
        if (i % 10 == 0) {
            const double step = 1e-6;
            double fd = 0.0;
            for (int a = 0; a < 2 * p.n; ++a) {
                Point zp = z;
                Point zm = z;
                zp(a) += step;
                zm(a) -= step;
                const double d = (pogorelov_value(p, zp) - pogorelov_value(p, zm)) / (2.0 * step);
                fd += d * d;
            }
            rep.formula_max_rel_diff = std::max(rep.formula_max_rel_diff, std::abs(fd - g2) / (scale + g2));
        }
    }
    rep.samples = pts.size();
    rep.pass = rep.violations == 0 && rep.psi_violations == 0 && rep.formula_max_rel_diff <= 1e-6;
    return rep;
}

/// Largest dyadic r = 2^{-m} with sup_{B_1 x B_1} f(z, 1, p) < alpha^alpha 2^{-alpha-3/2} / r
/// and r < r0.
[[nodiscard]] inline double choose_r(const RhsSpec& f, int k, double r0 = 1.0, int n = 0)
{
    if (k < 2) {
        throw DomainError("choose_r needs k >= 2");
    }
    const int dim = n > 0 ? n : k;
    const double alpha = 1.0 - 1.0 / k;
    const double sup_f = f.sup_at_u(1.0, 1.0, dim);
    const double coeff = std::pow(alpha, alpha) * std::pow(2.0, -alpha - 1.5);
    for (int m = 1; m <= 40; ++m) {
        const double r = std::ldexp(1.0, -m);
        if (sup_f < coeff / r && r < r0) {
            return r;
        }
    }
    throw InfeasibleRhs("no dyadic radius above 2^-40 satisfies the sup-f condition for " + f.describe());
}

/// A boundary datum / convex reference function with optional closed-form sups over B_1.
struct DatumSpec {
    Candidate jet;                                 ///< exact jet; may be empty for value-only data
    std::function<double(const Point&)> value_fn;  ///< used when jet is empty
    std::string label;
    std::optional<double> sup_value;    ///< sup_{B_1} phi
    std::optional<double> sup_gradient; ///< sup_{B_1} |D phi|
    std::optional<double> sup_trace;    ///< sup_{B_1} trace(ddbar phi)

    [[nodiscard]] double value(const Point& z) const { return jet ? jet(z).u : value_fn(z); }
    [[nodiscard]] bool has_jet() const { return static_cast<bool>(jet); }
};

[[nodiscard]] inline DatumSpec zero_datum(int n)
{
    DatumSpec d;
    d.label = "zero";
    d.jet = [n](const Point& z) {
        return Jet::from_complex(z, 0.0, RealVector::Zero(2 * n), HermitianMatrix::zero(n));
    };
    d.sup_value = 0.0;
    d.sup_gradient = 0.0;
    d.sup_trace = 0.0;
    return d;
}

/// phi(z) = c + <g, z> (real pairing).
[[nodiscard]] inline DatumSpec affine_datum(double c, RealVector g)
{
    const int n = static_cast<int>(g.size() / 2);
    DatumSpec d;
    d.label = "affine";
    const double gnorm = g.norm();
    d.jet = [c, g, n](const Point& z) {
        return Jet::from_complex(z, c + g.dot(z), g, HermitianMatrix::zero(n));
    };
    d.sup_value = c + gnorm;
    d.sup_gradient = gnorm;
    d.sup_trace = 0.0;
    return d;
}

/// phi(z) = c (|z|^2 - r^2): zero on the sphere |z| = r, extended to the collar as a quadratic.
[[nodiscard]] inline DatumSpec sphere_quadratic_datum(int n, double r, double c = 1.0)
{
    DatumSpec d;
    d.label = "sphere_quadratic";
    d.jet = [n, r, c](const Point& z) {
        return Jet::from_complex(z, c * (z.squaredNorm() - r * r), 2.0 * c * z,
                                 c * HermitianMatrix::identity(n));
    };
    d.sup_value = std::abs(c) * std::max(1.0 - r * r, r * r);
    d.sup_gradient = 2.0 * std::abs(c);
    d.sup_trace = std::abs(c) * n;
    return d;
}

/// phi(z) = |z_1|^2: sigma_k(ddbar phi) = 0 for k >= 2, trace 1.
[[nodiscard]] inline DatumSpec z1_square_datum(int n)
{
    DatumSpec d;
    d.label = "|z1|^2";
    d.jet = [n](const Point& z) {
        RealVector g = RealVector::Zero(2 * n);
        g(0) = 2.0 * z(0);
        g(n) = 2.0 * z(n);
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
        h(0, 0) = 1.0;
        return Jet::from_complex(z, z(0) * z(0) + z(n) * z(n), g, HermitianMatrix(std::move(h)));
    };
    d.sup_value = 1.0;
    d.sup_gradient = 2.0;
    d.sup_trace = 1.0;
    return d;
}

/// phi_eps = 2M (eps^2 + |z'|^2)^alpha with its sups over B_1 (attained at |z'| = 1 for the
/// value and gradient, at z' = 0 for the trace). Needs eps > 0.
[[nodiscard]] inline DatumSpec phi_eps_datum(const PogorelovParams& p)
{
    p.validate();
    if (!(p.eps > 0.0)) {
        throw DomainError("phi_eps datum needs eps > 0");
    }
    DatumSpec d;
    d.label = "phi_eps";
    d.jet = [p](const Point& z) { return phi_jet(p, z); };
    const double alpha = p.alpha();
    const double e2 = p.eps * p.eps;
    d.sup_value = 2.0 * p.bigM * std::pow(e2 + 1.0, alpha);
    d.sup_gradient = 4.0 * p.bigM * alpha * std::pow(e2 + 1.0, alpha - 1.0);
    d.sup_trace = (p.k - 1) * 2.0 * p.bigM * alpha * std::pow(e2, alpha - 1.0);
    return d;
}

/// Jet of u_lambda = phi + lambda (|z|^2 - r^2).
[[nodiscard]] inline Jet lower_barrier(const Candidate& phi, double lambda, double r, const Point& z)
{
    if (!(lambda > 0.0)) {
        throw DomainError("lower barrier needs lambda > 0");
    }
    const Jet base = phi(z);
    return Jet::from_complex(z, base.u + lambda * (z.squaredNorm() - r * r), base.du + 2.0 * lambda * z,
                             base.hc.shifted(lambda));
}

struct LambdaStar {
    double L = 0.0;       ///< sup_{B_1} |D phi|
    double sup_phi = 0.0; ///< sup_{B_1} phi
    double E = 0.0;       ///< sup_{B_1 x B_{L+2}} f(z, sup phi, p)
    double lambda_star = 1.0;
    double r0 = 1.0;
};

[[nodiscard]] inline LambdaStar choose_lambda_star(const RhsSpec& f, const DatumSpec& phi, int n)
{
    LambdaStar ls;
    if (phi.sup_gradient && phi.sup_value) {
        ls.L = *phi.sup_gradient;
        ls.sup_phi = *phi.sup_value;
    } else {
        if (!phi.has_jet()) {
            throw DomainError("choose_lambda_star needs a datum jet or closed-form sups");
        }
        double L = 0.0;
        double sup_v = -std::numeric_limits<double>::infinity();
        for (const auto& z : sup_sample(2 * n, 1.0)) {
            const Jet j = phi.jet(z);
            L = std::max(L, j.du.norm());
            sup_v = std::max(sup_v, j.u);
        }
        ls.L = phi.sup_gradient.value_or(inflate_sup(L));
        ls.sup_phi = phi.sup_value.value_or(inflate_sup(sup_v));
    }
    ls.E = f.sup_at_u(ls.sup_phi, ls.L + 2.0, n);
    ls.lambda_star = std::max(1.0, ls.E);
    ls.r0 = 1.0 / ls.lambda_star;
    return ls;
}

/// eps_0 = min{1, c0^k / (k c* Mbar^k)} with Mbar = sup_{B_1} trace(ddbar phi); eps_0 = 1
/// when Mbar = 0. Verifies sigma_k(ddbar phi) = 0 by sampling.
[[nodiscard]] inline double choose_eps0(const DatumSpec& phi, int k, const RhsSpec& f, int n)
{
    ConeLevel(k).check(n);
    if (k < 2) {
        throw DomainError("choose_eps0 needs k >= 2");
    }
    if (!phi.has_jet()) {
        throw DomainError("choose_eps0 needs the datum jet");
    }
    const auto cert = certify_rhs(f, n);
    double sampled_trace = 0.0;
    for (const auto& z : sup_sample(2 * n, 1.0)) {
        const Jet j = phi.jet(z);
        const Spectrum ev = hermitian_eigenvalues(j.hc);
        const double sk = sigma(k, ev);
        if (sk > 1e-10 * std::pow(1.0 + ev.max_abs(), k)) {
            throw PreconditionError(PreconditionKind::inadmissible_base,
                                    "sigma_k(ddbar phi) > 0 at a sample point; eps_0 needs sigma_k(ddbar phi) = 0");
        }
        sampled_trace = std::max(sampled_trace, j.hc.trace());
    }
    const double m_bar = phi.sup_trace.value_or(inflate_sup(sampled_trace));
    if (m_bar <= 0.0) {
        return 1.0;
    }
    return std::min(1.0, std::pow(cert.c0, k) / (k * c_star(n, k) * std::pow(m_bar, k)));
}

struct BarrierConstants {
    double lambda_star = 1.0;
    double eps0 = 1.0;
    double L = 0.0;
    double E = 0.0;
    double c_star = 1.0;
    double r0 = 1.0;
};

[[nodiscard]] inline BarrierConstants barrier_constants(const RhsSpec& f, const DatumSpec& phi, int k, int n)
{
    const auto ls = choose_lambda_star(f, phi, n);
    BarrierConstants bc;
    bc.lambda_star = ls.lambda_star;
    bc.L = ls.L;
    bc.E = ls.E;
    bc.r0 = ls.r0;
    bc.c_star = c_star(n, k);
    bc.eps0 = choose_eps0(phi, k, f, n);
    return bc;
}

} // namespace kpsh
