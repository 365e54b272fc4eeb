#pragma once

#include "kpsh/core.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace kpsh {

/// Ordered eigenvalue vector of a Hermitian matrix.
class Spectrum {
public:
    Spectrum() = default;

    explicit Spectrum(std::vector<double> values) : values_(std::move(values))
    {
        if (values_.empty()) {
            throw DomainError("spectrum must have at least one entry");
        }
        for (double v : values_) {
            if (!std::isfinite(v)) {
                throw DomainError("spectrum entries must be finite");
            }
        }
    }

    Spectrum(std::initializer_list<double> values) : Spectrum(std::vector<double>(values)) {}

    [[nodiscard]] int size() const { return static_cast<int>(values_.size()); }
    [[nodiscard]] double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] const std::vector<double>& vector() const { return values_; }

    [[nodiscard]] double max_abs() const
    {
        double m = 0.0;
        for (double v : values_) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }

    [[nodiscard]] Spectrum scaled(double t) const
    {
        auto v = values_;
        for (double& x : v) {
            x *= t;
        }
        return Spectrum(std::move(v));
    }

    [[nodiscard]] Spectrum shifted(double s) const
    {
        auto v = values_;
        for (double& x : v) {
            x += s;
        }
        return Spectrum(std::move(v));
    }

    friend bool operator==(const Spectrum&, const Spectrum&) = default;

private:
    std::vector<double> values_;
};

/// Index k of the cone Gamma_k; validated against the dimension at each use.
class ConeLevel {
public:
    explicit ConeLevel(int k) : k_(k)
    {
        if (k < 1) {
            throw DomainError("cone level must be >= 1");
        }
    }

    [[nodiscard]] int value() const { return k_; }

    void check(int n) const
    {
        if (k_ > n) {
            throw DomainError("cone level k=" + std::to_string(k_) + " exceeds dimension n=" +
                              std::to_string(n));
        }
    }

private:
    int k_;
};

enum class ConeMode { strict, closed };

inline constexpr double kDefaultConeTolerance = 1e-10;

/// e_0..e_order of the entries, by the incremental recurrence
/// e_j(l_1..l_m) = e_j(l_1..l_{m-1}) + l_m e_{j-1}(l_1..l_{m-1}).
[[nodiscard]] inline std::vector<double> elementary_symmetric(std::span<const double> lambda,
                                                              int order)
{
    std::vector<double> e(static_cast<std::size_t>(order) + 1, 0.0);
    e[0] = 1.0;
    int seen = 0;
    for (double x : lambda) {
        ++seen;
        for (int j = std::min(seen, order); j >= 1; --j) {
            e[j] += x * e[j - 1];
        }
    }
    return e;
}

[[nodiscard]] inline double sigma(int j, const Spectrum& lambda)
{
    if (j < 0 || j > lambda.size()) {
        throw DomainError("sigma index " + std::to_string(j) + " outside [0, " +
                          std::to_string(lambda.size()) + "]");
    }
    return elementary_symmetric(lambda.values(), j)[static_cast<std::size_t>(j)];
}

[[nodiscard]] inline bool in_cone(ConeLevel k, const Spectrum& lambda, ConeMode mode,
                                  double tol = kDefaultConeTolerance)
{
    if (k.value() > lambda.size()) {
        return false;
    }
    const auto e = elementary_symmetric(lambda.values(), k.value());
    const double base = 1.0 + lambda.max_abs();
    double scale = 1.0;
    for (int j = 1; j <= k.value(); ++j) {
        scale *= base;
        if (mode == ConeMode::strict) {
            if (!(e[j] > 0.0)) {
                return false;
            }
        } else if (e[j] < -tol * scale) {
            return false;
        }
    }
    return true;
}

/// sigma_k^{1/k}; values within the closed-cone tolerance below zero are clamped to 0.
[[nodiscard]] inline double sigma_root(ConeLevel k, const Spectrum& lambda,
                                       double tol = kDefaultConeTolerance)
{
    k.check(lambda.size());
    if (!in_cone(k, lambda, ConeMode::closed, tol)) {
        throw InadmissibleSpectrum("spectrum outside closed cone Gamma_" + std::to_string(k.value()));
    }
    const double s = sigma(k.value(), lambda);
    return s <= 0.0 ? 0.0 : std::pow(s, 1.0 / k.value());
}

/// Gradient of sigma_k: component j is sigma_{k-1} of lambda with entry j removed.
[[nodiscard]] inline Spectrum sigma_gradient(ConeLevel k, const Spectrum& lambda)
{
    k.check(lambda.size());
    const int n = lambda.size();
    std::vector<double> grad(static_cast<std::size_t>(n));
    std::vector<double> rest;
    rest.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        rest.clear();
        for (int i = 0; i < n; ++i) {
            if (i != j) {
                rest.push_back(lambda[i]);
            }
        }
        grad[static_cast<std::size_t>(j)] =
            elementary_symmetric(rest, k.value() - 1)[static_cast<std::size_t>(k.value() - 1)];
    }
    return Spectrum(std::move(grad));
}

/// Maclaurin normalization c_j = binomial(n, j)^{-1/j}.
[[nodiscard]] inline double maclaurin_constant(int n, int j)
{
    if (j < 1 || j > n) {
        throw DomainError("Maclaurin index outside [1, n]");
    }
    return std::pow(binomial(n, j), -1.0 / j);
}

/// c* = max{c_1/c_j : 2 <= j <= k-1}. For k = 2 the range is empty and the single
/// ratio c_1/c_1 = 1 is used.
[[nodiscard]] inline double c_star(int n, int k)
{
    if (k < 2 || k > n) {
        throw DomainError("c* needs 2 <= k <= n");
    }
    if (k == 2) {
        return 1.0;
    }
    const double c1 = maclaurin_constant(n, 1);
    double best = 0.0;
    for (int j = 2; j <= k - 1; ++j) {
        best = std::max(best, c1 / maclaurin_constant(n, j));
    }
    return best;
}

struct MaclaurinChain {
    std::vector<double> means; ///< c_j sigma_j^{1/j}, j = 1..n
    bool guaranteed = false;   ///< lambda in closed Gamma_n, so the chain is non-increasing
};

[[nodiscard]] inline MaclaurinChain maclaurin_chain(const Spectrum& lambda)
{
    const int n = lambda.size();
    const auto e = elementary_symmetric(lambda.values(), n);
    MaclaurinChain chain;
    chain.guaranteed = in_cone(ConeLevel(n), lambda, ConeMode::closed);
    chain.means.reserve(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) {
        const double s = e[j];
        const double root = s >= 0.0 ? std::pow(s, 1.0 / j) : -std::pow(-s, 1.0 / j);
        chain.means.push_back(maclaurin_constant(n, j) * root);
    }
    return chain;
}

} // namespace kpsh
