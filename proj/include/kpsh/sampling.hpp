#pragma once

#include "kpsh/core.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace kpsh {

inline constexpr std::size_t kSupSampleCount = 1u << 14;
inline constexpr double kSupInflation = 1.05;

/// Low-discrepancy points of the closed ball of given radius in R^dim. The first
/// dim Sobol coordinates are pushed through the inverse normal CDF to give a
/// direction; coordinate dim+1 gives the radius as radius * s^{1/dim}.
[[nodiscard]] inline std::vector<Point> sobol_ball(int dim, std::size_t count, double radius)
{
    if (dim < 1) {
        throw DomainError("ball dimension must be positive");
    }
    const auto sdim = static_cast<std::size_t>(dim) + 1;
    boost::random::sobol engine(sdim);
    engine.discard(sdim); // skip the all-zero first point
    const double scale = 1.0 / (static_cast<double>((boost::random::sobol::max)()) + 1.0);
    std::vector<Point> points;
    points.reserve(count);
    std::vector<double> s(sdim);
    for (std::size_t i = 0; i < count; ++i) {
        for (auto& c : s) {
            c = std::clamp(static_cast<double>(engine()) * scale, 1e-16, 1.0 - 1e-16);
        }
        Point p(dim);
        double norm2 = 0.0;
        for (int d = 0; d < dim; ++d) {
            p(d) = std::sqrt(2.0) * boost::math::erf_inv(2.0 * s[static_cast<std::size_t>(d)] - 1.0);
            norm2 += p(d) * p(d);
        }
        const double rad = radius * std::pow(s.back(), 1.0 / dim);
        if (norm2 == 0.0) {
            p.setZero();
        } else {
            p *= rad / std::sqrt(norm2);
        }
        points.push_back(std::move(p));
    }
    return points;
}

/// Sobol points plus the origin and the endpoints +-radius*e_d of every axis, so
/// that sups attained on coordinate subspaces are not missed.
[[nodiscard]] inline std::vector<Point> sup_sample(int dim, double radius,
                                                   std::size_t count = kSupSampleCount)
{
    auto pts = sobol_ball(dim, count, radius);
    pts.emplace_back(Point::Zero(dim));
    for (int d = 0; d < dim; ++d) {
        for (double s : {-1.0, -0.5, 0.5, 1.0}) {
            Point p = Point::Zero(dim);
            p(d) = s * radius;
            pts.push_back(std::move(p));
        }
    }
    return pts;
}

/// Inflate a sampled sup by the 5% safety margin (works for either sign).
[[nodiscard]] inline double inflate_sup(double sampled) { return sampled + (kSupInflation - 1.0) * std::abs(sampled); }

/// Seeded uniform point of the ball of given radius (for randomized property checks).
template <class Rng>
[[nodiscard]] Point random_ball_point(Rng& rng, int dim, double radius)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Point p(dim);
    for (int d = 0; d < dim; ++d) {
        p(d) = normal(rng);
    }
    const double nrm = p.norm();
    if (nrm == 0.0) {
        return p;
    }
    return p * (radius * std::pow(unif(rng), 1.0 / dim) / nrm);
}

} // namespace kpsh
