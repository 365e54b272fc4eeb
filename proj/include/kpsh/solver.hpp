#pragma once

#include "kpsh/barriers.hpp"
#include "kpsh/complex_calculus.hpp"
#include "kpsh/core.hpp"
#include "kpsh/grid.hpp"
#include "kpsh/operators.hpp"
#include "kpsh/symmetric_functions.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace kpsh {

enum class LinearSolverKind {
    relaxation, ///< SOR sweeps only
    direct,     ///< sparse LU only
    automatic,  ///< SOR sweeps, sparse LU when the sweeps fail to reach the tolerance
};

struct SolverConfig {
    double tol = 1e-8;                         ///< max |G| at termination
    int max_iter = 60;                         ///< Newton iteration cap
    double damping_floor = std::ldexp(1.0, -20);
    double mu_lift = 1e-8;                     ///< first admissibility lift
    double mu_lift_cap = 1e3;
    double linear_tol = 1e-10;                 ///< linear residual relative to max |G|
    int linear_max_sweeps = 4000;
    double sor_omega = 1.0;
    LinearSolverKind linear = LinearSolverKind::automatic;
    int divergence_window = 5;
    int threads = 0;                           ///< 0: KPSH_THREADS or 1
    std::optional<double> init_lambda;         ///< overrides lambda* for the initial barrier
    double min_boundary_step = 1.0 / 4096;     ///< smallest collar ramp step
};

[[nodiscard]] inline int resolve_threads(int requested)
{
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("KPSH_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) {
            return t;
        }
    }
    return 1;
}

/// Static partition of [0, count) over a fixed number of threads.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn)
{
    if (threads <= 1 || count < 2 * threads) {
        fn(0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const int chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = t * chunk;
        const int end = std::min(count, begin + chunk);
        if (begin < end) {
            pool.emplace_back([&fn, begin, end] { fn(begin, end); });
        }
    }
    for (auto& th : pool) {
        th.join();
    }
}

struct SolveReport {
    double eps = 0.0;
    int k = 0;
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
    std::vector<double> residual_history;
    std::vector<double> damping_history;
    std::vector<int> linear_sweeps;   ///< per Newton step; -1 when sparse LU was used
    int linear_fallbacks = 0;
    int repairs = 0;                  ///< admissibility lifts applied
    double lambda_init = 0.0;
    double lipschitz_estimate = 0.0;
    bool converged = false;
    std::string status;
    int boundary_stages = 0;          ///< collar ramp stages solved
    double boundary_progress = 0.0;   ///< fraction of the collar ramp completed
    double seconds = 0.0;
};

enum class SolveFailure { certification, divergence, admissibility, iteration_cap, linear };

[[nodiscard]] inline const char* to_string(SolveFailure f)
{
    switch (f) {
    case SolveFailure::certification:
        return "certification";
    case SolveFailure::divergence:
        return "divergence";
    case SolveFailure::admissibility:
        return "admissibility";
    case SolveFailure::iteration_cap:
        return "iteration_cap";
    case SolveFailure::linear:
        return "linear";
    }
    return "unknown";
}

class SolveError : public Error {
public:
    SolveError(SolveFailure kind, const std::string& what, SolveReport report, std::optional<GridFunction> last)
        : Error(what), kind_(kind), report_(std::move(report)), last_(std::move(last))
    {
    }
    [[nodiscard]] SolveFailure kind() const { return kind_; }
    [[nodiscard]] const SolveReport& report() const { return report_; }
    [[nodiscard]] const std::optional<GridFunction>& last_iterate() const { return last_; }

private:
    SolveFailure kind_;
    SolveReport report_;
    std::optional<GridFunction> last_;
};

[[nodiscard]] inline std::shared_ptr<const BallGrid> build_grid(int n, double r, double h)
{
    return std::make_shared<const BallGrid>(n, r, h);
}

/// Max over axis-adjacent node pairs of |u(a) - u(b)| / h.
[[nodiscard]] inline double lipschitz_estimate(const GridFunction& u)
{
    const BallGrid& g = *u.grid;
    double best = 0.0;
    for (int node = 0; node < g.node_count(); ++node) {
        for (int a = 0; a < g.dim(); ++a) {
            if (const auto nb = g.neighbor(node, a, 1)) {
                best = std::max(best, std::abs(u[*nb] - u[node]) / g.spacing());
            }
        }
    }
    return best;
}

/// Newton tensor T_{k-1}(A) = sum_j (-1)^j sigma_{k-1-j}(A) A^j = d sigma_k / dA.
[[nodiscard]] inline Eigen::MatrixXcd newton_tensor(int k, const Eigen::MatrixXcd& a, std::span<const double> e)
{
    const auto n = a.rows();
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Identity(n, n);
    for (int m = 1; m <= k - 1; ++m) {
        Eigen::MatrixXcd next = e[m] * Eigen::MatrixXcd::Identity(n, n) - a * t;
        t = std::move(next);
    }
    return t;
}

namespace detail {

struct NodeState {
    bool admissible = false;
    double residual = 0.0;
    double root = 0.0;
    Eigen::MatrixXd coeff; ///< d root / d D2u_ab (symmetric, 2n x 2n)
    double f_u = 0.0;
    RealVector f_p;
};

/// Residual G = sigma_k^{1/k}(H + eps tr(H) I) - f and, optionally, its derivative data.
class ResidualModel {
public:
    ResidualModel(ConeLevel k, double eps, const RhsSpec& f, std::shared_ptr<const BallGrid> grid, int threads)
        : k_(k), eps_(eps), f_(f), grid_(std::move(grid)), threads_(threads), jmat_(j_matrix(grid_->n()))
    {
    }

    [[nodiscard]] NodeState evaluate(const GridFunction& u, int node, bool with_derivative) const
    {
        NodeState s;
        const Jet jet = finite_difference_jet(u, node);
        const HermitianMatrix a = jet.hc.regularized(eps_);
        const Spectrum lambda = hermitian_eigenvalues(a);
        if (!in_cone(k_, lambda, ConeMode::strict)) {
            return s;
        }
        const int k = k_.value();
        const auto e = elementary_symmetric(lambda.values(), k);
        s.admissible = true;
        s.root = std::pow(e[k], 1.0 / k);
        s.residual = s.root - f_(jet.z, jet.u, jet.du);
        if (with_derivative) {
            Eigen::MatrixXcd t = newton_tensor(k, a.matrix(), e);
            const Complex tr = t.trace();
            t.diagonal().array() += eps_ * tr;
            const Eigen::MatrixXcd q = jmat_.adjoint() * t * jmat_;
            const double c = std::pow(e[k], 1.0 / k - 1.0) / k;
            s.coeff = c * q.real();
            s.f_u = f_.df_du(jet.z, jet.u, jet.du);
            s.f_p = f_.df_dp(jet.z, jet.u, jet.du);
        }
        return s;
    }

    /// Residuals at all interior nodes, or nullopt if some node is inadmissible.
    [[nodiscard]] std::optional<std::vector<double>> residuals(const GridFunction& u) const
    {
        const auto& interior = grid_->interior_nodes();
        std::vector<double> g(interior.size());
        std::vector<char> ok(interior.size(), 1);
        parallel_for(static_cast<int>(interior.size()), threads_, [&](int begin, int end) {
            for (int i = begin; i < end; ++i) {
                const auto s = evaluate(u, interior[i], false);
                ok[i] = s.admissible ? 1 : 0;
                g[i] = s.residual;
            }
        });
        for (char c : ok) {
            if (!c) {
                return std::nullopt;
            }
        }
        return g;
    }

    [[nodiscard]] Eigen::SparseMatrix<double, Eigen::RowMajor> jacobian(const GridFunction& u) const
    {
        const BallGrid& grid = *grid_;
        const auto& interior = grid.interior_nodes();
        const int count = static_cast<int>(interior.size());
        const int dim = grid.dim();
        const double h = grid.spacing();
        const double h2 = h * h;
        std::vector<std::vector<Eigen::Triplet<double>>> rows(static_cast<std::size_t>(count));
        parallel_for(count, threads_, [&](int begin, int end) {
            for (int i = begin; i < end; ++i) {
                const int node = interior[i];
                const auto s = evaluate(u, node, true);
                auto& row = rows[i];
                if (!s.admissible) {
                    row.emplace_back(i, i, 1.0);
                    continue;
                }
                auto add = [&](int nb, double v) {
                    const int col = grid.unknown_index(nb);
                    if (col >= 0 && v != 0.0) {
                        row.emplace_back(i, col, v);
                    }
                };
                double diag = -s.f_u;
                for (int a = 0; a < dim; ++a) {
                    const double caa = s.coeff(a, a);
                    const double gp = s.f_p.size() > 0 ? s.f_p(a) : 0.0;
                    diag += -2.0 * caa / h2;
                    add(grid.stencil_neighbor(node, a, 1), caa / h2 - gp / (2.0 * h));
                    add(grid.stencil_neighbor(node, a, -1), caa / h2 + gp / (2.0 * h));
                    for (int b = a + 1; b < dim; ++b) {
                        const double w = s.coeff(a, b) / (2.0 * h2);
                        add(grid.stencil_neighbor(node, a, 1, b, 1), w);
                        add(grid.stencil_neighbor(node, a, 1, b, -1), -w);
                        add(grid.stencil_neighbor(node, a, -1, b, 1), -w);
                        add(grid.stencil_neighbor(node, a, -1, b, -1), w);
                    }
                }
                row.emplace_back(i, i, diag);
            }
        });
        std::vector<Eigen::Triplet<double>> all;
        for (auto& row : rows) {
            all.insert(all.end(), row.begin(), row.end());
        }
        Eigen::SparseMatrix<double, Eigen::RowMajor> jac(count, count);
        jac.setFromTriplets(all.begin(), all.end());
        return jac;
    }

private:
    ConeLevel k_;
    double eps_;
    const RhsSpec& f_;
    std::shared_ptr<const BallGrid> grid_;
    int threads_;
    Eigen::MatrixXcd jmat_;
};

inline double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

inline double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

/// SOR sweeps on jac x = rhs from x = 0. Returns the sweep count, or nullopt when the
/// tolerance is not reached within the cap (or the iteration blows up).
inline std::optional<int> relax(const Eigen::SparseMatrix<double, Eigen::RowMajor>& jac, const Eigen::VectorXd& rhs,
                                Eigen::VectorXd& x, double target, int max_sweeps, double omega)
{
    const auto count = jac.rows();
    x.setZero(count);
    Eigen::VectorXd diag(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        diag(i) = jac.coeff(i, i);
        if (diag(i) == 0.0) {
            return std::nullopt;
        }
    }
    const double start = max_abs(rhs);
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (Eigen::Index i = 0; i < count; ++i) {
            double acc = rhs(i);
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(jac, i); it; ++it) {
                acc -= it.value() * x(it.col());
            }
            x(i) += omega * acc / diag(i);
        }
        if (sweep % 10 == 0 || sweep == max_sweeps) {
            const double res = max_abs(Eigen::VectorXd(rhs - jac * x));
            if (!std::isfinite(res) || res > 1e6 * (start + 1e-300)) {
                return std::nullopt;
            }
            if (res <= target) {
                return sweep;
            }
        }
    }
    return std::nullopt;
}

inline void set_interior(GridFunction& u, const std::vector<int>& interior, const Eigen::VectorXd& base,
                         const Eigen::VectorXd& step, double t)
{
    for (std::size_t i = 0; i < interior.size(); ++i) {
        u.values[interior[i]] = base(static_cast<Eigen::Index>(i)) + t * step(static_cast<Eigen::Index>(i));
    }
}

} // namespace detail

namespace detail {

/// Damped Newton iteration on the interior unknowns of u with fixed collar values.
/// Accumulates into report; throws SolveError on failure.
inline void newton(const ResidualModel& model, GridFunction& u, const std::vector<double>& rho, double tol,
                   const SolverConfig& config, SolveReport& report)
{
    const auto& interior = u.grid->interior_nodes();
    const int count = static_cast<int>(interior.size());
    auto lift = [&](GridFunction& v, double mu) {
        for (int i = 0; i < count; ++i) {
            v.values[interior[i]] += mu * rho[i];
        }
    };
    auto fail = [&](SolveFailure kind, const std::string& msg, double res) {
        report.residual = res;
        report.status = to_string(kind);
        throw SolveError(kind, msg, report, u);
    };

    auto g = model.residuals(u);
    if (!g) {
        fail(SolveFailure::admissibility, "iterate is not admissible", std::numeric_limits<double>::infinity());
    }
    double res = max_abs(*g);
    report.residual_history.push_back(res);
    int increases = 0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    bool lu_analyzed = false;
    int iter = 0;
    for (; iter < config.max_iter && res > tol; ++iter) {
        const auto jac = model.jacobian(u);
        Eigen::VectorXd rhs(count);
        for (int i = 0; i < count; ++i) {
            rhs(i) = -(*g)[i];
        }
        Eigen::VectorXd step(count);
        std::optional<int> sweeps;
        if (config.linear != LinearSolverKind::direct) {
            sweeps = relax(jac, rhs, step, config.linear_tol * res, config.linear_max_sweeps, config.sor_omega);
        }
        if (sweeps) {
            report.linear_sweeps.push_back(*sweeps);
        } else if (config.linear == LinearSolverKind::relaxation) {
            fail(SolveFailure::linear, "relaxation did not reach the linear tolerance", res);
        } else {
            if (config.linear == LinearSolverKind::automatic) {
                ++report.linear_fallbacks;
            }
            Eigen::SparseMatrix<double> jc = jac;
            if (!lu_analyzed) {
                lu.analyzePattern(jc);
                lu_analyzed = true;
            }
            lu.factorize(jc);
            if (lu.info() != Eigen::Success) {
                fail(SolveFailure::linear, "sparse LU factorization failed", res);
            }
            step = lu.solve(rhs);
            report.linear_sweeps.push_back(-1);
        }

        Eigen::VectorXd base(count);
        for (int i = 0; i < count; ++i) {
            base(i) = u.values[interior[i]];
        }
        GridFunction trial = u;
        double t = 1.0;
        bool accepted = false;
        std::optional<std::vector<double>> gt;
        while (t >= config.damping_floor) {
            set_interior(trial, interior, base, step, t);
            gt = model.residuals(trial);
            if (gt && max_abs(*gt) < (1.0 - 1e-4 * t) * res) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            t = config.damping_floor;
            set_interior(trial, interior, base, step, t);
            gt = model.residuals(trial);
            for (double mu = config.mu_lift; !gt && mu <= config.mu_lift_cap; mu *= 2.0) {
                GridFunction lifted = trial;
                lift(lifted, mu);
                gt = model.residuals(lifted);
                if (gt) {
                    trial = std::move(lifted);
                    ++report.repairs;
                }
            }
            if (!gt) {
                fail(SolveFailure::admissibility, "admissibility could not be restored", res);
            }
        }
        const double new_res = max_abs(*gt);
        increases = new_res > res ? increases + 1 : 0;
        u = std::move(trial);
        g = std::move(gt);
        res = new_res;
        report.damping_history.push_back(t);
        report.residual_history.push_back(res);
        ++report.iterations;
        if (increases >= config.divergence_window) {
            fail(SolveFailure::divergence, "residual increased over consecutive damped steps", res);
        }
    }
    report.residual = res;
    if (res > tol) {
        std::ostringstream msg;
        msg << "Newton iteration cap reached with residual " << res;
        fail(SolveFailure::iteration_cap, msg.str(), res);
    }
}

} // namespace detail

/// Damped Newton solve of sigma_k^{1/k}(ddbar u + eps tr(ddbar u) I) = f(z, u, Du) in B_r
/// with u = boundary on the collar.
///
/// The initial iterate is u_{lambda*} = boundary + lambda*(|z|^2 - r^2) at every node, or the
/// warm start shifted by (boundary - warm_boundary) when the warm start's datum is given. Its collar values differ from the datum by O(h); they are moved to the datum
/// in stages collar(s) = (1 - s) start + s datum, each stage solved by Newton, with the stage
/// step halved whenever a stage fails.
[[nodiscard]] inline std::pair<GridFunction, SolveReport>
solve_regularized(ConeLevel k, double eps, const RhsSpec& f, const DatumSpec& boundary,
                  std::shared_ptr<const BallGrid> grid, const SolverConfig& config = {},
                  const GridFunction* warm_start = nullptr, const DatumSpec* warm_boundary = nullptr)
{
    const auto clock_start = std::chrono::steady_clock::now();
    SolveReport report;
    report.eps = eps;
    report.k = k.value();
    k.check(grid->n());
    if (!(eps > 0.0)) {
        throw DomainError("solve_regularized needs eps > 0");
    }
    if (warm_start && warm_start->values.size() != static_cast<std::size_t>(grid->node_count())) {
        throw DomainError("warm start lives on a different grid");
    }
    try {
        (void)certify_rhs(f, grid->n());
    } catch (const CertificationError& e) {
        report.status = "certification";
        throw SolveError(SolveFailure::certification, e.what(), report, std::nullopt);
    }
    const int threads = resolve_threads(config.threads);
    const auto& interior = grid->interior_nodes();
    const int count = static_cast<int>(interior.size());
    const double r = grid->radius();

    double lambda = 1.0;
    if (config.init_lambda) {
        lambda = *config.init_lambda;
    } else if (boundary.has_jet() || (boundary.sup_value && boundary.sup_gradient)) {
        lambda = choose_lambda_star(f, boundary, grid->n()).lambda_star;
    } else {
        const auto sampled = GridFunction::sample(grid, boundary.value_fn);
        const double sup_phi = *std::max_element(sampled.values.begin(), sampled.values.end());
        lambda = std::max(1.0, f.sup_at_u(inflate_sup(sup_phi), inflate_sup(lipschitz_estimate(sampled)) + 2.0,
                                          grid->n()));
    }
    report.lambda_init = lambda;

    const GridFunction datum = GridFunction::sample(grid, [&](const Point& z) { return boundary.value(z); });
    GridFunction u = datum;
    if (warm_start) {
        u.values = warm_start->values;
        if (warm_boundary) {
            // Carry the warm start over to the new datum: u_prev + (datum - datum_prev).
            for (int node = 0; node < grid->node_count(); ++node) {
                u.values[node] += datum[node] - warm_boundary->value(grid->position(node));
            }
        }
    } else {
        for (int node = 0; node < grid->node_count(); ++node) {
            u.values[node] += lambda * (grid->position(node).squaredNorm() - r * r);
        }
    }
    detail::ResidualModel model(k, eps, f, grid, threads);
    if (!model.residuals(u)) {
        // Admissibility lift of the whole starting iterate (collar included, so that no
        // jump is introduced); the collar ramp below removes it from the boundary.
        bool lifted = false;
        for (double mu = config.mu_lift; mu <= config.mu_lift_cap && !lifted; mu *= 2.0) {
            GridFunction trial = u;
            for (int node = 0; node < grid->node_count(); ++node) {
                trial.values[node] += mu * (grid->position(node).squaredNorm() - r * r);
            }
            if (model.residuals(trial)) {
                u = std::move(trial);
                ++report.repairs;
                lifted = true;
            }
        }
        if (!lifted) {
            report.status = "admissibility";
            throw SolveError(SolveFailure::admissibility, "starting iterate could not be made admissible", report, u);
        }
    }
    const GridFunction start = u;
    std::vector<double> rho(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        rho[i] = grid->position(interior[i]).squaredNorm() - r * r;
    }
    std::vector<int> collar;
    for (int node = 0; node < grid->node_count(); ++node) {
        if (!grid->is_interior(node)) {
            collar.push_back(node);
        }
    }
    double collar_gap = 0.0;
    for (int node : collar) {
        collar_gap = std::max(collar_gap, std::abs(start[node] - datum[node]));
    }

    const double stage_tol = std::max(config.tol, 1e-6);
    double s = collar_gap == 0.0 ? 1.0 : 0.0;
    double ds = 1.0;
    bool done = false;
    while (!done) {
        const double target = s >= 1.0 ? 1.0 : std::min(1.0, s + ds);
        GridFunction trial = u;
        for (int node : collar) {
            trial.values[node] = (1.0 - target) * start[node] + target * datum[node];
        }
        SolveReport attempt = report;
        try {
            detail::newton(model, trial, rho, target >= 1.0 ? config.tol : stage_tol, config, attempt);
            report = std::move(attempt);
            u = std::move(trial);
            ++report.boundary_stages;
            s = target;
            done = s >= 1.0;
            ds = std::min(1.0, 2.0 * ds);
        } catch (const SolveError& e) {
            const bool can_refine = target > s && ds > config.min_boundary_step &&
                                    e.kind() != SolveFailure::linear;
            if (!can_refine) {
                SolveReport failed = e.report();
                failed.boundary_stages = report.boundary_stages;
                failed.boundary_progress = s;
                failed.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
                throw SolveError(e.kind(), e.what(), failed, e.last_iterate());
            }
            report.iterations = attempt.iterations;
            ds *= 0.5;
        }
    }
    report.boundary_progress = 1.0;
    report.lipschitz_estimate = lipschitz_estimate(u);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    report.converged = true;
    report.status = "converged";
    return {std::move(u), std::move(report)};
}

struct ContinuationStage {
    RhsSpec f;
    DatumSpec boundary;
    double reg_eps; ///< regularization parameter of F^eps for this stage
};

using StageBuilder = std::function<ContinuationStage(double eps)>;

struct ContinuationResult {
    std::vector<double> schedule;
    std::vector<GridFunction> solutions;
    std::vector<SolveReport> reports;
    std::vector<double> successive_gaps; ///< max |u_{j+1} - u_j| over nodes
    bool lipschitz_flag = false;         ///< estimate grew beyond 2x its value at the largest eps
    std::optional<std::string> error;    ///< set when a stage failed; results are partial
};

/// Sequential solves over a strictly decreasing eps schedule, each warm-started from the
/// previous stage.
[[nodiscard]] inline ContinuationResult continuation_in_eps(ConeLevel k, const StageBuilder& build,
                                                            std::shared_ptr<const BallGrid> grid,
                                                            const std::vector<double>& schedule,
                                                            const SolverConfig& config = {})
{
    if (schedule.empty()) {
        throw DomainError("continuation schedule is empty");
    }
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] > 0.0) || (i > 0 && !(schedule[i] < schedule[i - 1]))) {
            throw DomainError("continuation schedule must be positive and strictly decreasing");
        }
    }
    ContinuationResult out;
    out.schedule = schedule;
    DatumSpec previous_boundary;
    for (double eps : schedule) {
        const ContinuationStage stage = build(eps);
        try {
            const GridFunction* warm = out.solutions.empty() ? nullptr : &out.solutions.back();
            auto [u, rep] = solve_regularized(k, stage.reg_eps, stage.f, stage.boundary, grid, config, warm,
                                              warm ? &previous_boundary : nullptr);
            previous_boundary = stage.boundary;
            if (!out.solutions.empty()) {
                double gap = 0.0;
                for (std::size_t i = 0; i < u.values.size(); ++i) {
                    gap = std::max(gap, std::abs(u.values[i] - out.solutions.back().values[i]));
                }
                out.successive_gaps.push_back(gap);
            }
            out.solutions.push_back(std::move(u));
            out.reports.push_back(std::move(rep));
        } catch (const SolveError& e) {
            out.reports.push_back(e.report());
            std::ostringstream msg;
            msg << "stage eps=" << eps << " failed: " << e.what();
            out.error = msg.str();
            break;
        }
        if (out.reports.back().lipschitz_estimate > 2.0 * out.reports.front().lipschitz_estimate) {
            out.lipschitz_flag = true;
        }
    }
    return out;
}

/// Same-data convenience overload: fixed f and boundary, regularization eps per stage.
[[nodiscard]] inline ContinuationResult continuation_in_eps(ConeLevel k, const RhsSpec& f, const DatumSpec& boundary,
                                                            std::shared_ptr<const BallGrid> grid,
                                                            const std::vector<double>& schedule,
                                                            const SolverConfig& config = {})
{
    return continuation_in_eps(
        k, [&](double eps) { return ContinuationStage{f, boundary, eps}; }, std::move(grid), schedule, config);
}

struct SandwichReport {
    double min_lower_gap = std::numeric_limits<double>::infinity(); ///< min (u - lower)
    double min_upper_gap = std::numeric_limits<double>::infinity(); ///< min (upper - u)
    int worst_lower_node = -1;
    int worst_upper_node = -1;
    Point worst_lower_position;
    Point worst_upper_position;
    double slack = 0.0;
    bool pass = false;
};

/// lower <= u <= upper at every node, up to the discretization slack.
[[nodiscard]] inline SandwichReport compare(const GridFunction& u, const std::function<double(const Point&)>& lower,
                                            const std::function<double(const Point&)>& upper, double slack)
{
    SandwichReport rep;
    rep.slack = slack;
    const BallGrid& g = *u.grid;
    for (int node = 0; node < g.node_count(); ++node) {
        const Point z = g.position(node);
        const double lo = u[node] - lower(z);
        const double hi = upper(z) - u[node];
        if (lo < rep.min_lower_gap) {
            rep.min_lower_gap = lo;
            rep.worst_lower_node = node;
            rep.worst_lower_position = z;
        }
        if (hi < rep.min_upper_gap) {
            rep.min_upper_gap = hi;
            rep.worst_upper_node = node;
            rep.worst_upper_position = z;
        }
    }
    rep.pass = rep.min_lower_gap >= -slack && rep.min_upper_gap >= -slack;
    return rep;
}

/// Regularization used against a barrier datum: min(eps, eps_0(datum)/2), which keeps the
/// datum a classical super-solution of F^eps.
[[nodiscard]] inline double regularization_for(double eps, const DatumSpec& datum, int k, const RhsSpec& f, int n)
{
    return std::min(eps, 0.5 * choose_eps0(datum, k, f, n));
}

} // namespace kpsh
