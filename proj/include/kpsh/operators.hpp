#pragma once

#include "kpsh/complex_calculus.hpp"
#include "kpsh/core.hpp"
#include "kpsh/sampling.hpp"
#include "kpsh/symmetric_functions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace kpsh {

enum class RhsKind { constant, affine_u, bounded_monotone, custom };

using RhsFunction = std::function<double(const Point& z, double u, const RealVector& p)>;

/// Right-hand side f(z, u, p) with its certified constants. Catalogued kinds:
///   constant          f = c
///   affine_u          f = a + b u         (constants certified on |u| <= u_bound)
///   bounded_monotone  f = a + b (1/2 + atan(u)/pi)
/// Custom callables carry no constants until certify_rhs samples them.
class RhsSpec {
public:
    static RhsSpec constant(double c)
    {
        RhsSpec f(RhsKind::constant, {c});
        f.c0_ = c;
        f.deriv_bound_ = 0.0;
        f.monotone_u_ = true;
        return f;
    }

    static RhsSpec affine_u(double a, double b, double u_bound)
    {
        if (b < 0.0 || u_bound <= 0.0) {
            throw DomainError("affine_u needs b >= 0 and u_bound > 0");
        }
        RhsSpec f(RhsKind::affine_u, {a, b, u_bound});
        f.c0_ = a - b * u_bound;
        f.deriv_bound_ = b;
        f.monotone_u_ = true;
        return f;
    }

    static RhsSpec bounded_monotone(double a, double b)
    {
        if (b < 0.0) {
            throw DomainError("bounded_monotone needs b >= 0");
        }
        RhsSpec f(RhsKind::bounded_monotone, {a, b});
        f.c0_ = a;
        f.deriv_bound_ = b / std::numbers::pi;
        f.monotone_u_ = true;
        return f;
    }

    static RhsSpec custom(RhsFunction fn, std::string label = "custom")
    {
        RhsSpec f(RhsKind::custom, {});
        f.fn_ = std::move(fn);
        f.label_ = std::move(label);
        f.rigorous_ = false;
        return f;
    }

    /// Parses "const:c", "affine:a,b,U" or "arctan:a,b".
    static RhsSpec parse(const std::string& text)
    {
        const auto colon = text.find(':');
        if (colon == std::string::npos) {
            throw ParseError("rhs spec '" + text + "' must look like kind:params");
        }
        const std::string kind = text.substr(0, colon);
        std::vector<double> params;
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                params.push_back(std::stod(item, &used));
                if (used != item.size()) {
                    throw ParseError("trailing characters");
                }
            } catch (const std::exception&) {
                throw ParseError("bad number '" + item + "' in rhs spec '" + text + "'");
            }
        }
        auto need = [&](std::size_t count) {
            if (params.size() != count) {
                throw ParseError("rhs kind '" + kind + "' takes " + std::to_string(count) + " parameters");
            }
        };
        if (kind == "const") {
            need(1);
            return constant(params[0]);
        }
        if (kind == "affine") {
            need(3);
            return affine_u(params[0], params[1], params[2]);
        }
        if (kind == "arctan") {
            need(2);
            return bounded_monotone(params[0], params[1]);
        }
        throw ParseError("unknown rhs kind '" + kind + "'");
    }

    [[nodiscard]] double operator()(const Point& z, double u, const RealVector& p) const
    {
        switch (kind_) {
        case RhsKind::constant:
            return params_[0];
        case RhsKind::affine_u:
            return params_[0] + params_[1] * u;
        case RhsKind::bounded_monotone:
            return params_[0] + params_[1] * (0.5 + std::atan(u) / std::numbers::pi);
        case RhsKind::custom:
            break;
        }
        return fn_(z, u, p);
    }

    /// Partial derivative in u (exact for the catalogue).
    [[nodiscard]] double df_du(const Point& z, double u, const RealVector& p) const
    {
        switch (kind_) {
        case RhsKind::constant:
            return 0.0;
        case RhsKind::affine_u:
            return params_[1];
        case RhsKind::bounded_monotone:
            return params_[1] / (std::numbers::pi * (1.0 + u * u));
        case RhsKind::custom:
            break;
        }
        const double step = 1e-6 * (1.0 + std::abs(u));
        return (fn_(z, u + step, p) - fn_(z, u - step, p)) / (2.0 * step);
    }

    /// Gradient in p (zero for the catalogue).
    [[nodiscard]] RealVector df_dp(const Point& z, double u, const RealVector& p) const
    {
        RealVector g = RealVector::Zero(p.size());
        if (kind_ != RhsKind::custom) {
            return g;
        }
        for (Eigen::Index a = 0; a < p.size(); ++a) {
            const double step = 1e-6 * (1.0 + std::abs(p(a)));
            RealVector pp = p;
            RealVector pm = p;
            pp(a) += step;
            pm(a) -= step;
            g(a) = (fn_(z, u, pp) - fn_(z, u, pm)) / (2.0 * step);
        }
        return g;
    }

    [[nodiscard]] bool depends_on_gradient() const { return kind_ == RhsKind::custom; }

    /// sup over (z, p) in B_1 x B_{p_radius} of f(z, u, p). Exact for the catalogue;
    /// for custom callables a deterministic sample inflated by 5%.
    [[nodiscard]] double sup_at_u(double u, double p_radius, int n) const
    {
        if (kind_ != RhsKind::custom) {
            return (*this)(Point::Zero(2 * n), u, RealVector::Zero(2 * n));
        }
        std::mt19937_64 rng(0x5eed);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < 4096; ++i) {
            const Point z = random_ball_point(rng, 2 * n, 1.0);
            const RealVector p = random_ball_point(rng, 2 * n, p_radius);
            best = std::max(best, fn_(z, u, p));
        }
        return inflate_sup(best);
    }

    [[nodiscard]] RhsKind kind() const { return kind_; }
    [[nodiscard]] const std::vector<double>& params() const { return params_; }
    [[nodiscard]] double c0() const { return c0_; }
    [[nodiscard]] double deriv_bound() const { return deriv_bound_; }
    [[nodiscard]] bool monotone_u() const { return monotone_u_; }
    [[nodiscard]] bool rigorous() const { return rigorous_; }
    [[nodiscard]] bool certified() const { return std::isfinite(c0_); }

    [[nodiscard]] std::string describe() const
    {
        std::ostringstream out;
        out.precision(17);
        switch (kind_) {
        case RhsKind::constant:
            out << "const:" << params_[0];
            break;
        case RhsKind::affine_u:
            out << "affine:" << params_[0] << ',' << params_[1] << ',' << params_[2];
            break;
        case RhsKind::bounded_monotone:
            out << "arctan:" << params_[0] << ',' << params_[1];
            break;
        case RhsKind::custom:
            out << label_;
            break;
        }
        return out.str();
    }

    /// Copy carrying the constants of an empirical certificate.
    [[nodiscard]] RhsSpec with_constants(double c0, double deriv_bound, bool monotone) const
    {
        RhsSpec f = *this;
        f.c0_ = c0;
        f.deriv_bound_ = deriv_bound;
        f.monotone_u_ = monotone;
        return f;
    }

private:
    RhsSpec(RhsKind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {}

    RhsKind kind_;
    std::vector<double> params_;
    RhsFunction fn_;
    std::string label_;
    double c0_ = std::numeric_limits<double>::quiet_NaN();
    double deriv_bound_ = std::numeric_limits<double>::quiet_NaN();
    bool monotone_u_ = false;
    bool rigorous_ = true;
};

struct RhsCertificate {
    double c0 = 0.0;
    double deriv_bound = 0.0;
    bool monotone_u = false;
    bool rigorous = false;
    std::size_t samples = 0;
};

struct CertifyOptions {
    double u_range = 2.0;
    double p_radius = 2.0;
    std::size_t samples = 4096;
};

/// (H1)/(H2) certificate. Exact for the catalogue, sampled (and flagged
/// non-rigorous) for custom callables. Throws CertificationError when f <= 0 or
/// f_u < 0 is observed.
[[nodiscard]] inline RhsCertificate certify_rhs(const RhsSpec& f, int n, const CertifyOptions& opts = {})
{
    RhsCertificate cert;
    if (f.kind() != RhsKind::custom) {
        cert.c0 = f.c0();
        cert.deriv_bound = f.deriv_bound();
        cert.monotone_u = f.monotone_u();
        cert.rigorous = true;
    } else {
        std::mt19937_64 rng(0xce27);
        std::uniform_real_distribution<double> uu(-opts.u_range, opts.u_range);
        double inf_f = std::numeric_limits<double>::infinity();
        double bound = 0.0;
        double min_fu = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < opts.samples; ++i) {
            const Point z = random_ball_point(rng, 2 * n, 1.0);
            const double u = uu(rng);
            const RealVector p = random_ball_point(rng, 2 * n, opts.p_radius);
            inf_f = std::min(inf_f, f(z, u, p));
            const double fu = f.df_du(z, u, p);
            min_fu = std::min(min_fu, fu);
            RealVector gz(2 * n);
            for (int a = 0; a < 2 * n; ++a) {
                const double step = 1e-6;
                Point zp = z;
                Point zm = z;
                zp(a) += step;
                zm(a) -= step;
                gz(a) = (f(zp, u, p) - f(zm, u, p)) / (2.0 * step);
            }
            bound = std::max({bound, gz.norm(), std::abs(fu), f.df_dp(z, u, p).norm()});
        }
        cert.c0 = inf_f;
        cert.deriv_bound = inflate_sup(bound);
        cert.monotone_u = min_fu >= -1e-8;
        cert.rigorous = false;
        cert.samples = opts.samples;
    }
    if (!(cert.c0 > 0.0)) {
        std::ostringstream msg;
        msg << "positivity failure: inf f = " << cert.c0 << " for " << f.describe();
        throw CertificationError(msg.str());
    }
    if (!cert.monotone_u) {
        throw CertificationError("(H1) failure: f_u < 0 observed for " + f.describe());
    }
    return cert;
}

/// sigma_k^{1/k}(H + eps trace(H) I), or nullopt outside the closed cone.
[[nodiscard]] inline std::optional<double> regularized_root(ConeLevel k, double eps, const HermitianMatrix& h)
{
    if (eps < 0.0) {
        throw DomainError("eps must be >= 0");
    }
    k.check(h.size());
    const Spectrum lambda = hermitian_eigenvalues(h.regularized(eps));
    if (!in_cone(k, lambda, ConeMode::closed)) {
        return std::nullopt;
    }
    return sigma_root(k, lambda);
}

/// F^eps(z, u, Du, ddbar u); nullopt is the inadmissible flag.
[[nodiscard]] inline std::optional<double> eval_F_eps(ConeLevel k, double eps, const RhsSpec& f, const Jet& jet)
{
    const auto root = regularized_root(k, eps, jet.hc);
    if (!root) {
        return std::nullopt;
    }
    return -*root + f(jet.z, jet.u, jet.du);
}

[[nodiscard]] inline std::optional<double> eval_F(ConeLevel k, const RhsSpec& f, const Jet& jet)
{
    return eval_F_eps(k, 0.0, f, jet);
}

struct EllipticityConstants {
    double lambda_eps = 0.0;
    double Lambda_eps = 0.0;
};

/// lambda_eps = eps binomial(n,k)^{1/k}, Lambda_eps = (1+eps) binomial(n,k)^{1/k}.
[[nodiscard]] inline EllipticityConstants ellipticity_constants(ConeLevel k, int n, double eps)
{
    k.check(n);
    if (!(eps > 0.0)) {
        throw DomainError("ellipticity constants need eps > 0");
    }
    const double root = std::pow(binomial(n, k.value()), 1.0 / k.value());
    return {eps * root, (1.0 + eps) * root};
}

enum class PreconditionKind { not_positive_definite, inadmissible_base, size_mismatch };

class PreconditionError : public Error {
public:
    PreconditionError(PreconditionKind kind, const std::string& what) : Error(what), kind_(kind) {}
    [[nodiscard]] PreconditionKind kind() const { return kind_; }

private:
    PreconditionKind kind_;
};

struct EllipticityReport {
    double lhs = 0.0; ///< lambda_eps trace(N)
    double mid = 0.0; ///< F^eps(M) - F^eps(M+N)
    double rhs = 0.0; ///< Lambda_eps trace(N)
    bool pass = false;
};

[[nodiscard]] inline EllipticityReport check_ellipticity(ConeLevel k, double eps, const HermitianMatrix& m,
                                                         const HermitianMatrix& nn)
{
    if (m.size() != nn.size()) {
        throw PreconditionError(PreconditionKind::size_mismatch, "M and N differ in size");
    }
    const int n = m.size();
    const Spectrum nev = hermitian_eigenvalues(nn);
    if (!(nev[0] > 0.0)) {
        throw PreconditionError(PreconditionKind::not_positive_definite, "N is not positive definite");
    }
    const Spectrum base = hermitian_eigenvalues(m.regularized(eps));
    if (!in_cone(k, base, ConeMode::strict)) {
        throw PreconditionError(PreconditionKind::inadmissible_base,
                                "M + eps trace(M) I is not in Gamma_k");
    }
    const auto c = ellipticity_constants(k, n, eps);
    const double tr = nn.trace();
    const Spectrum sum = hermitian_eigenvalues((m + nn).regularized(eps));
    EllipticityReport rep;
    rep.mid = sigma_root(k, sum) - sigma_root(k, base);
    rep.lhs = c.lambda_eps * tr;
    rep.rhs = c.Lambda_eps * tr;
    const double tol = 1e-9 * (1.0 + std::abs(rep.rhs));
    rep.pass = rep.lhs - tol <= rep.mid && rep.mid <= rep.rhs + tol;
    return rep;
}

/// C^2 candidate evaluated with its exact jet.
using Candidate = std::function<Jet(const Point&)>;

enum class Side { sub, super };

struct SignWitness {
    Point z;
    std::optional<double> value; ///< nullopt when inadmissible
};

struct SignVerdict {
    bool pass = true;
    std::size_t checked = 0;
    std::size_t inadmissible = 0;
    double max_value = -std::numeric_limits<double>::infinity();
    double min_value = std::numeric_limits<double>::infinity();
    std::vector<SignWitness> witnesses; ///< first failing points (at most 16)
};

struct SignCheckOptions {
    double eps = 0.0;   ///< evaluate F^eps instead of F
    double tol = 1e-12; ///< allowed overshoot of the sign condition
};

/// Classical sub/super-solution test at sample points. Sub: admissible and F <= tol
/// everywhere. Super: at each point inadmissible or F >= -tol.
[[nodiscard]] inline SignVerdict classical_sign_check(ConeLevel k, const RhsSpec& f, const Candidate& candidate,
                                                      const std::vector<Point>& sample, Side side,
                                                      const SignCheckOptions& opts = {})
{
    SignVerdict v;
    for (const auto& z : sample) {
        const Jet jet = candidate(z);
        const auto value = eval_F_eps(k, opts.eps, f, jet);
        ++v.checked;
        bool ok = true;
        if (!value) {
            ++v.inadmissible;
            ok = side == Side::super;
        } else {
            v.max_value = std::max(v.max_value, *value);
            v.min_value = std::min(v.min_value, *value);
            ok = side == Side::sub ? *value <= opts.tol : *value >= -opts.tol;
        }
        if (!ok) {
            v.pass = false;
            if (v.witnesses.size() < 16) {
                v.witnesses.push_back({z, value});
            }
        }
    }
    return v;
}

} // namespace kpsh
