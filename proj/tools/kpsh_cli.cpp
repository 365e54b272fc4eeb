// Command-line front end: verification suites, barrier constants, solves and profile analysis.

#include "kpsh/kpsh.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using kpsh::Json;

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kNumerical = 3 };

struct Options {
    bool json = false;
    bool timing = false;
};

std::string sibling_json(const std::string& csv)
{
    std::filesystem::path p(csv);
    p.replace_extension(".json");
    return p.string();
}

Json read_json(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw kpsh::ParseError("cannot open " + path);
    }
    try {
        return Json::parse(is);
    } catch (const std::exception& e) {
        throw kpsh::ParseError("bad JSON in " + path + ": " + e.what());
    }
}

void write_json(const std::string& path, const Json& j)
{
    std::ofstream os(path);
    if (!os) {
        throw kpsh::ParseError("cannot open " + path + " for writing");
    }
    os << j.dump(2) << '\n';
}

/// Loaded solution with its parameter echo.
struct Loaded {
    kpsh::Problem problem;
    kpsh::GridFunction u;
};

Loaded load_solution(const std::string& csv)
{
    const Json meta = read_json(sibling_json(csv));
    kpsh::ProblemParams params = kpsh::problem_params_from_json(meta.at("params"));
    params.reg = meta.at("reg").get<double>();
    auto u = kpsh::read_grid_function(csv, params.n, params.r, params.spacing());
    kpsh::Problem pr = kpsh::make_problem(params, u.grid);
    return {std::move(pr), std::move(u)};
}

int report_error(const Options& opt, int code, const std::string& kind, const std::string& message,
                 const Json& extra = Json())
{
    if (opt.json) {
        Json j;
        j["error"] = kind;
        j["message"] = message;
        j["exit_code"] = code;
        if (!extra.is_null()) {
            j["details"] = extra;
        }
        std::cout << j.dump(2) << '\n';
    } else {
        std::cerr << "error (" << kind << "): " << message << '\n';
    }
    return code;
}

int cmd_verify(const Options& opt)
{
    bool all = true;
    Json out = Json::array();
    for (const auto& suite : kpsh::verification_suites()) {
        const auto r = kpsh::run_suite(suite);
        all = all && r.pass();
        if (opt.json) {
            Json j;
            j["suite"] = r.name;
            j["pass"] = r.pass();
            j["checks"] = r.checks;
            j["failures"] = r.failures;
            for (const auto& [k, v] : r.metrics) {
                j["metrics"][k] = v;
            }
            j["notes"] = r.notes;
            if (opt.timing) {
                j["seconds"] = r.seconds;
            }
            out.push_back(j);
            continue;
        }
        std::cout << (r.pass() ? "PASS " : "FAIL ") << r.name << "  checks=" << r.checks
                  << " failures=" << r.failures;
        for (const auto& [k, v] : r.metrics) {
            std::cout << ' ' << k << '=' << kpsh::format_g17(v);
        }
        if (opt.timing) {
            std::cout << " seconds=" << r.seconds;
        }
        std::cout << '\n';
        for (const auto& note : r.notes) {
            std::cout << "    " << note << '\n';
        }
    }
    if (opt.json) {
        Json j;
        j["suites"] = out;
        j["pass"] = all;
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << (all ? "all suites passed" : "some suites failed") << '\n';
    }
    return all ? kOk : kCheckFailed;
}

struct ConstantsArgs {
    int k = 2;
    std::optional<int> n;
    double r = 0.5;
    std::optional<double> eps;
    std::string f = "const:1";
    double r0 = 1.0;
};

int cmd_constants(const ConstantsArgs& a)
{
    const int n = a.n.value_or(a.k);
    const auto f = kpsh::RhsSpec::parse(a.f);
    const double bigM = kpsh::choose_M(a.r, a.k);
    const double eps = a.eps.value_or(a.r / 4.0);
    const kpsh::PogorelovParams p{n, a.k, a.r, eps, bigM};
    const auto datum = kpsh::phi_eps_datum(p);
    const auto bc = kpsh::barrier_constants(f, datum, a.k, n);
    Json j;
    j["k"] = a.k;
    j["n"] = n;
    j["r"] = a.r;
    j["eps"] = eps;
    j["f"] = f.describe();
    j["alpha"] = p.alpha();
    j["M"] = bigM;
    j["lambda_star"] = bc.lambda_star;
    j["eps0"] = bc.eps0;
    j["c_star"] = bc.c_star;
    j["r0"] = bc.r0;
    j["chosen_r"] = kpsh::choose_r(f, a.k, std::min(a.r0, bc.r0), n);
    std::cout << j.dump(2) << '\n';
    return kOk;
}

struct SolveArgs {
    kpsh::ProblemParams params;
    std::optional<std::string> config;
    std::string out = "solution";
    std::vector<double> schedule;
};

kpsh::SolverConfig solver_config(const SolveArgs& a, std::vector<double>* schedule = nullptr)
{
    if (!a.config) {
        return {};
    }
    auto cfg = kpsh::read_config(*a.config);
    if (schedule && schedule->empty()) {
        *schedule = cfg.eps_schedule;
    }
    return cfg.solver;
}

Json solution_meta(const kpsh::Problem& pr, const kpsh::SolveReport& rep, bool timing)
{
    Json j;
    j["params"] = kpsh::to_json(pr.params);
    j["reg"] = pr.reg;
    j["f"] = pr.f.describe();
    j["grid"] = {{"nodes", pr.grid->node_count()},
                 {"interior", pr.grid->interior_count()},
                 {"collar", pr.grid->collar_count()}};
    j["report"] = kpsh::to_json(rep, timing);
    return j;
}

int cmd_solve(const SolveArgs& a, const Options& opt)
{
    const auto cfg = solver_config(a);
    const kpsh::Problem pr = kpsh::make_problem(a.params);
    try {
        auto [u, rep] = kpsh::solve_regularized(kpsh::ConeLevel(a.params.k), pr.reg, pr.f, pr.datum, pr.grid, cfg);
        kpsh::write_csv(a.out + ".csv", u);
        const Json meta = solution_meta(pr, rep, opt.timing);
        write_json(a.out + ".json", meta);
        std::cout << meta.dump(2) << '\n';
        return kOk;
    } catch (const kpsh::SolveError& e) {
        if (e.last_iterate()) {
            kpsh::write_csv(a.out + ".partial.csv", *e.last_iterate());
        }
        const int code = e.kind() == kpsh::SolveFailure::certification ? kCheckFailed : kNumerical;
        return report_error(opt, code, std::string("solve:") + kpsh::to_string(e.kind()), e.what(),
                            solution_meta(pr, e.report(), opt.timing));
    }
}

int cmd_continue(SolveArgs a, const Options& opt)
{
    const auto cfg = solver_config(a, &a.schedule);
    if (a.schedule.empty()) {
        throw kpsh::ParseError("continuation needs --schedule or eps_schedule in the config file");
    }
    const auto grid = kpsh::build_grid(a.params.n, a.params.r, a.params.spacing());
    std::vector<kpsh::Problem> problems;
    auto build = [&](double eps) {
        kpsh::ProblemParams p = a.params;
        p.eps = eps;
        problems.push_back(kpsh::make_problem(p, grid));
        const auto& pr = problems.back();
        return kpsh::ContinuationStage{pr.f, pr.datum, pr.reg};
    };
    const auto res = kpsh::continuation_in_eps(kpsh::ConeLevel(a.params.k), build, grid, a.schedule, cfg);
    Json summary;
    summary["schedule"] = res.schedule;
    summary["successive_gaps"] = res.successive_gaps;
    summary["lipschitz_flag"] = res.lipschitz_flag;
    summary["stages"] = Json::array();
    for (std::size_t i = 0; i < res.reports.size(); ++i) {
        const Json meta = solution_meta(problems[i], res.reports[i], opt.timing);
        if (i < res.solutions.size()) {
            const std::string stem = a.out + "_" + std::to_string(i);
            kpsh::write_csv(stem + ".csv", res.solutions[i]);
            write_json(stem + ".json", meta);
        }
        summary["stages"].push_back(meta);
    }
    if (res.error) {
        summary["error"] = *res.error;
    }
    write_json(a.out + ".json", summary);
    if (res.error) {
        return report_error(opt, kNumerical, "continuation", *res.error, summary);
    }
    std::cout << summary.dump(2) << '\n';
    return res.lipschitz_flag ? kCheckFailed : kOk;
}

int cmd_sandwich(const std::string& csv, double slack_c)
{
    const Loaded l = load_solution(csv);
    const auto p = l.problem.params.pogorelov();
    const double h = l.problem.params.spacing();
    const double slack = slack_c * p.bigM * h * h;
    const auto rep = kpsh::compare(l.u, [&](const kpsh::Point& z) { return kpsh::psi_and_phi(p, z).psi; },
                                   [&](const kpsh::Point& z) { return kpsh::psi_and_phi(p, z).phi; }, slack);
    Json j;
    j["pass"] = rep.pass;
    j["slack"] = slack;
    j["min_u_minus_psi"] = rep.min_lower_gap;
    j["min_phi_minus_u"] = rep.min_upper_gap;
    j["worst_lower_point"] = std::vector<double>(rep.worst_lower_position.data(),
                                                 rep.worst_lower_position.data() + rep.worst_lower_position.size());
    j["worst_upper_point"] = std::vector<double>(rep.worst_upper_position.data(),
                                                 rep.worst_upper_position.data() + rep.worst_upper_position.size());
    j["lipschitz_estimate"] = kpsh::lipschitz_estimate(l.u);
    j["lipschitz_bound"] = 8.0 * p.bigM + 1.0;
    std::cout << j.dump(2) << '\n';
    return rep.pass ? kOk : kCheckFailed;
}

kpsh::AxisProfile load_profile(const std::string& csv, int axis)
{
    const Loaded l = load_solution(csv);
    const auto& pp = l.problem.params;
    kpsh::ProfileMeta meta{pp.k, pp.r, pp.bigM(), pp.spacing(), axis, "solved"};
    return kpsh::axis_profile(l.u, meta);
}

int cmd_holder(const std::string& csv, int axis, const std::vector<double>& window, double slack_c)
{
    const auto prof = load_profile(csv, axis);
    std::optional<std::pair<double, double>> win;
    if (!window.empty()) {
        if (window.size() != 2) {
            throw kpsh::ParseError("--window takes t_min,t_max");
        }
        win = std::make_pair(window[0], window[1]);
    }
    const double slack = slack_c * prof.meta.bigM * prof.meta.h * prof.meta.h;
    const auto fit = kpsh::holder_fit(prof, win, slack);
    Json j;
    j["exponent_hat"] = fit.exponent_hat;
    j["ci_halfwidth"] = fit.ci_halfwidth;
    j["window"] = {fit.window.first, fit.window.second};
    j["samples_used"] = fit.used;
    j["expected_exponent"] = 2.0 * prof.alpha();
    j["passed_sandwich"] = fit.passed_sandwich;
    j["band_violation"] = fit.worst_band_violation;
    j["slack"] = slack;
    std::cout << j.dump(2) << '\n';
    return fit.passed_sandwich ? kOk : kCheckFailed;
}

int cmd_kink(const std::string& csv, int axis, double slack_c)
{
    const auto prof = load_profile(csv, axis);
    const auto kink = kpsh::kink_detector(prof);
    const double threshold = 2.0 * prof.meta.bigM * prof.meta.r * prof.meta.r - slack_c * prof.meta.bigM * prof.meta.h;
    Json j;
    j["right_slope"] = kink.right_slope;
    j["left_slope"] = kink.left_slope;
    j["gap"] = kink.gap;
    j["threshold"] = threshold;
    j["pass"] = kink.gap >= threshold;
    std::cout << j.dump(2) << '\n';
    return kink.gap >= threshold ? kOk : kCheckFailed;
}

void add_problem_options(CLI::App* sub, SolveArgs& a)
{
    auto& p = a.params;
    sub->set_help_flag("--help", "print this help message and exit"); // --h is the grid spacing
    sub->add_option("--k", p.k, "cone level")->capture_default_str();
    sub->add_option("--n", p.n, "complex dimension")->capture_default_str();
    sub->add_option("--r", p.r, "ball radius")->capture_default_str();
    sub->add_option("--eps", p.eps, "barrier smoothing eps")->capture_default_str();
    sub->add_option("--h", p.h, "grid spacing (default r/8)");
    sub->add_option("--M", p.big_m, "barrier scale (default choose_M)");
    sub->add_option("--reg", p.reg, "regularization of F^eps (default min(eps, eps0/2) for phi_eps, else eps)");
    sub->add_option("--f", p.f_spec, "right-hand side: const:c | affine:a,b,U | arctan:a,b | manufactured")
        ->capture_default_str();
    sub->add_option("--boundary", p.boundary, "boundary datum")
        ->check(CLI::IsMember({"phi_eps", "zero", "quadratic", "custom"}))
        ->capture_default_str();
    sub->add_option("--boundary-file", p.boundary_file, "CSV of node values for --boundary custom");
    sub->add_option("--config", a.config, "key = value solver configuration file");
    sub->add_option("--out", a.out, "output prefix")->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"k-Hessian barrier verification and Dirichlet solver"};
    app.require_subcommand(1);
    Options opt;
    app.add_flag("--json", opt.json, "machine-readable output and errors");
    app.add_flag("--timing", opt.timing, "include wall-clock timings");

    app.add_subcommand("verify", "run all formula verification suites");

    ConstantsArgs ca;
    auto* constants = app.add_subcommand("constants", "barrier constants as JSON");
    constants->add_option("--k", ca.k)->required();
    constants->add_option("--r", ca.r)->required();
    constants->add_option("--n", ca.n);
    constants->add_option("--eps", ca.eps, "smoothing of phi_eps (default r/4)");
    constants->add_option("--f", ca.f)->capture_default_str();
    constants->add_option("--r0", ca.r0, "upper limit for the chosen radius")->capture_default_str();

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "solve F^eps = 0 on B_r");
    add_problem_options(solve, sa);

    SolveArgs co;
    auto* cont = app.add_subcommand("continue", "eps continuation with warm starts");
    add_problem_options(cont, co);
    cont->add_option("--schedule", co.schedule, "decreasing eps values")->delimiter(',');

    std::string solution;
    double slack_c = 10.0;
    int axis = kpsh::kDefaultProfileAxis;
    std::vector<double> window;
    auto* sandwich = app.add_subcommand("sandwich", "compare a solution with psi_eps and phi_eps");
    auto* holder = app.add_subcommand("holder", "growth exponent along an axis");
    auto* kink = app.add_subcommand("kink", "one-sided slopes at the origin");
    for (auto* sub : {sandwich, holder, kink}) {
        sub->add_option("--solution", solution, "solution CSV (its .json sibling holds the parameters)")->required();
        sub->add_option("--slack-c", slack_c, "slack constant C in C M h^2 (C M h for kink)")->capture_default_str();
    }
    for (auto* sub : {holder, kink}) {
        sub->add_option("--axis", axis, "real coordinate index of the profile axis")->capture_default_str();
    }
    holder->add_option("--window", window, "t_min,t_max (default 2h,r/4)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        if (opt.json) {
            return report_error(opt, kUsage, "usage", e.what());
        }
        app.exit(e);
        return kUsage;
    }

    try {
        if (app.got_subcommand("verify")) {
            return cmd_verify(opt);
        }
        if (app.got_subcommand(constants)) {
            return cmd_constants(ca);
        }
        if (app.got_subcommand(solve)) {
            return cmd_solve(sa, opt);
        }
        if (app.got_subcommand(cont)) {
            return cmd_continue(co, opt);
        }
        if (app.got_subcommand(sandwich)) {
            return cmd_sandwich(solution, slack_c);
        }
        if (app.got_subcommand(holder)) {
            return cmd_holder(solution, axis, window, slack_c);
        }
        if (app.got_subcommand(kink)) {
            return cmd_kink(solution, axis, slack_c);
        }
    } catch (const kpsh::ParseError& e) {
        return report_error(opt, kUsage, "parse", e.what());
    } catch (const kpsh::CertificationError& e) {
        return report_error(opt, kCheckFailed, "certification", e.what());
    } catch (const kpsh::InsufficientData& e) {
        return report_error(opt, kCheckFailed, "insufficient_data", e.what());
    } catch (const kpsh::FitError& e) {
        return report_error(opt, kCheckFailed, "fit", e.what());
    } catch (const kpsh::DomainError& e) {
        return report_error(opt, kUsage, "domain", e.what());
    } catch (const kpsh::Error& e) {
        return report_error(opt, kNumerical, "numerical", e.what());
    } catch (const std::exception& e) {
        return report_error(opt, kNumerical, "internal", e.what());
    }
    return kUsage;
}
