#pragma once

#include "kpsh/core.hpp"
#include "kpsh/grid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kpsh {

/// Real coordinate index of x_2 (first real coordinate of z') in (x_1..x_n, y_1..y_n).
inline constexpr int kDefaultProfileAxis = 1;

class InsufficientData : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

struct ProfileSample {
    double t = 0.0;
    double value = 0.0;
};

struct ProfileMeta {
    int k = 2;
    double r = 0.0;
    double bigM = 0.0;
    double h = 0.0;        ///< grid spacing; 0 for closed-form sources
    int axis = kDefaultProfileAxis;
    std::string source;    ///< "barrier" or "solved"
};

struct AxisProfile {
    std::vector<ProfileSample> samples; ///< strictly increasing t, origin excluded
    std::optional<double> origin_value;
    ProfileMeta meta;

    [[nodiscard]] double alpha() const { return 1.0 - 1.0 / meta.k; }
};

enum class ProfileSpacing { uniform, geometric };

/// Node values along the chosen real axis, no interpolation.
[[nodiscard]] inline AxisProfile axis_profile(const GridFunction& u, ProfileMeta meta, std::optional<double> t_max = {})
{
    const BallGrid& g = *u.grid;
    if (meta.axis < 0 || meta.axis >= g.dim()) {
        throw DomainError("profile axis index out of range");
    }
    meta.h = g.spacing();
    if (meta.source.empty()) {
        meta.source = "solved";
    }
    AxisProfile p;
    p.meta = meta;
    const double limit = t_max.value_or(g.radius());
    std::vector<int> c(static_cast<std::size_t>(g.dim()), 0);
    for (int i = -g.half_width(); i <= g.half_width(); ++i) {
        c[static_cast<std::size_t>(meta.axis)] = i;
        const auto node = g.find(c);
        const double t = i * g.spacing();
        if (!node || std::abs(t) > limit * (1.0 + 1e-12)) {
            continue;
        }
        if (i == 0) {
            p.origin_value = u[*node];
        } else {
            p.samples.push_back({t, u[*node]});
        }
    }
    if (p.samples.size() < 8) {
        throw InsufficientData("axis profile has fewer than 8 usable samples");
    }
    return p;
}

/// Samples of fn(t e_axis) at count points on each side of the origin.
[[nodiscard]] inline AxisProfile axis_profile(const std::function<double(const Point&)>& fn, int dim, int count,
                                              double t_max, ProfileMeta meta,
                                              ProfileSpacing spacing = ProfileSpacing::uniform, double decades = 2.0)
{
    if (meta.axis < 0 || meta.axis >= dim) {
        throw DomainError("profile axis index out of range");
    }
    if (!(t_max > 0.0)) {
        throw DomainError("profile needs t_max > 0");
    }
    if (count < 8) {
        throw InsufficientData("axis profile has fewer than 8 usable samples");
    }
    if (meta.source.empty()) {
        meta.source = "barrier";
    }
    AxisProfile p;
    p.meta = meta;
    std::vector<double> ts;
    for (int i = 1; i <= count; ++i) {
        if (spacing == ProfileSpacing::uniform) {
            ts.push_back(t_max * i / count);
        } else {
            const double frac = count == 1 ? 1.0 : static_cast<double>(i - 1) / (count - 1);
            ts.push_back(t_max * std::pow(10.0, -decades * (1.0 - frac)));
        }
    }
    auto eval = [&](double t) {
        Point z = Point::Zero(dim);
        z(meta.axis) = t;
        return fn(z);
    };
    for (auto it = ts.rbegin(); it != ts.rend(); ++it) {
        p.samples.push_back({-*it, eval(-*it)});
    }
    for (double t : ts) {
        p.samples.push_back({t, eval(t)});
    }
    p.origin_value = eval(0.0);
    return p;
}

struct HolderFit {
    double exponent_hat = 0.0;
    double ci_halfwidth = 0.0; ///< 1.96 standard errors of the slope
    double prefactor = 0.0;    ///< exp(intercept)
    std::pair<double, double> window{0.0, 0.0};
    std::size_t used = 0;
    bool passed_sandwich = false;
    double worst_band_violation = 0.0; ///< most negative distance to the band (0 if inside)
};

/// Default window: [2h, r/4] for grid sources, the sampled |t| range otherwise.
[[nodiscard]] inline std::pair<double, double> default_window(const AxisProfile& p)
{
    if (p.meta.h > 0.0 && p.meta.r > 0.0) {
        return {2.0 * p.meta.h, p.meta.r / 4.0};
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& s : p.samples) {
        lo = std::min(lo, std::abs(s.t));
        hi = std::max(hi, std::abs(s.t));
    }
    return {lo, hi};
}

/// Distance of the profile to the band [M r^2 |t|^{2a} - slack, 2M |t|^{2a} + slack]; 0 if inside.
[[nodiscard]] inline double band_violation(const AxisProfile& p, double slack)
{
    const double two_a = 2.0 * p.alpha();
    const double m = p.meta.bigM;
    const double r2 = p.meta.r * p.meta.r;
    double worst = 0.0;
    for (const auto& s : p.samples) {
        const double pw = std::pow(std::abs(s.t), two_a);
        worst = std::min(worst, s.value - (m * r2 * pw - slack));
        worst = std::min(worst, (2.0 * m * pw + slack) - s.value);
    }
    return worst;
}

/// Least-squares slope of log(u(t) - u(0)) against log|t| over the window.
[[nodiscard]] inline HolderFit holder_fit(const AxisProfile& p, std::optional<std::pair<double, double>> window = {},
                                          double band_slack = 0.0)
{
    if (!p.origin_value) {
        throw FitError("holder fit needs the origin value");
    }
    const auto win = window.value_or(default_window(p));
    if (!(win.first > 0.0) || !(win.second >= win.first)) {
        throw FitError("holder fit window must satisfy 0 < t_min <= t_max");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& s : p.samples) {
        const double at = std::abs(s.t);
        if (at < win.first * (1.0 - 1e-12) || at > win.second * (1.0 + 1e-12)) {
            continue;
        }
        const double inc = s.value - *p.origin_value;
        if (!(inc > 0.0)) {
            throw FitError("nonpositive increment u(t) - u(0) at t = " + std::to_string(s.t));
        }
        xs.push_back(std::log(at));
        ys.push_back(std::log(inc));
    }
    if (xs.size() < 3) {
        throw InsufficientData("holder fit window holds fewer than 3 samples");
    }
    const double count = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= count;
    my /= count;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw FitError("holder fit window has a single |t| value");
    }
    HolderFit fit;
    fit.exponent_hat = sxy / sxx;
    const double intercept = my - fit.exponent_hat * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (intercept + fit.exponent_hat * xs[i]);
        rss += e * e;
    }
    fit.ci_halfwidth = 1.96 * std::sqrt(rss / std::max(1.0, count - 2.0) / sxx);
    fit.prefactor = std::exp(intercept);
    fit.window = win;
    fit.used = xs.size();
    fit.worst_band_violation = band_violation(p, band_slack);
    fit.passed_sandwich = fit.worst_band_violation >= 0.0;
    return fit;
}

struct KinkReport {
    double right_slope = 0.0;
    double left_slope = 0.0;
    double gap = 0.0;
    double step_right = 0.0;
    double step_left = 0.0;
};

/// One-sided difference quotients at the sample nearest the origin on each side.
[[nodiscard]] inline KinkReport kink_detector(const AxisProfile& p)
{
    if (!p.origin_value) {
        throw InsufficientData("kink detector needs the origin value");
    }
    std::optional<ProfileSample> right;
    std::optional<ProfileSample> left;
    for (const auto& s : p.samples) {
        if (s.t > 0.0 && (!right || s.t < right->t)) {
            right = s;
        }
        if (s.t < 0.0 && (!left || s.t > left->t)) {
            left = s;
        }
    }
    if (!right || !left) {
        throw InsufficientData("kink detector needs samples on both sides of the origin");
    }
    KinkReport k;
    k.step_right = right->t;
    k.step_left = -left->t;
    k.right_slope = (right->value - *p.origin_value) / right->t;
    k.left_slope = (*p.origin_value - left->value) / (-left->t);
    k.gap = k.right_slope - k.left_slope;
    return k;
}

} // namespace kpsh
