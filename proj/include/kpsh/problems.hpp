#pragma once

#include "kpsh/barriers.hpp"
#include "kpsh/grid.hpp"
#include "kpsh/io.hpp"
#include "kpsh/operators.hpp"
#include "kpsh/solver.hpp"

#include <memory>
#include <optional>
#include <string>

namespace kpsh {

/// Parameter echo for a Dirichlet problem on B_r. f_spec "manufactured" means
/// f = 1 + 2 reg, which together with boundary "quadratic" has the exact solution |z|^2 - r^2.
struct ProblemParams {
    int n = 2;
    int k = 2;
    double r = 0.125;
    std::optional<double> h;      ///< default r/8
    double eps = 0.03125;         ///< barrier smoothing of phi_eps / psi_eps
    std::optional<double> big_m;  ///< default choose_M(r, k)
    std::optional<double> reg;    ///< regularization of F^eps; see regularization_for
    std::string f_spec = "const:1";
    std::string boundary = "phi_eps"; ///< phi_eps | zero | quadratic | custom
    std::string boundary_file;        ///< CSV of node values for "custom"

    [[nodiscard]] double spacing() const { return h.value_or(r / 8.0); }
    [[nodiscard]] double bigM() const { return big_m.value_or(choose_M(r, k)); }
    [[nodiscard]] PogorelovParams pogorelov() const { return {n, k, r, eps, bigM()}; }
};

struct Problem {
    ProblemParams params;
    std::shared_ptr<const BallGrid> grid;
    RhsSpec f = RhsSpec::constant(1.0);
    DatumSpec datum;
    double reg = 0.0;
};

[[nodiscard]] inline Problem make_problem(const ProblemParams& params, std::shared_ptr<const BallGrid> grid = nullptr)
{
    Problem pr;
    pr.params = params;
    pr.grid = grid ? std::move(grid) : build_grid(params.n, params.r, params.spacing());
    const bool manufactured = params.f_spec == "manufactured";
    if (params.boundary == "phi_eps") {
        pr.datum = phi_eps_datum(params.pogorelov());
    } else if (params.boundary == "zero") {
        pr.datum = zero_datum(params.n);
    } else if (params.boundary == "quadratic") {
        pr.datum = sphere_quadratic_datum(params.n, params.r);
    } else if (params.boundary == "custom") {
        if (params.boundary_file.empty()) {
            throw DomainError("custom boundary needs a boundary file");
        }
        const GridFunction g = read_grid_function(params.boundary_file, params.n, params.r, params.spacing());
        auto values = std::make_shared<const GridFunction>(g);
        const double h = params.spacing();
        pr.datum.label = "custom:" + params.boundary_file;
        pr.datum.value_fn = [values, h](const Point& z) {
            std::vector<int> c(static_cast<std::size_t>(z.size()));
            for (Eigen::Index d = 0; d < z.size(); ++d) {
                c[static_cast<std::size_t>(d)] = static_cast<int>(std::lround(z(d) / h));
            }
            const auto node = values->grid->find(c);
            if (!node) {
                throw DomainError("custom boundary evaluated off the grid");
            }
            return (*values)[*node];
        };
    } else {
        throw ParseError("unknown boundary '" + params.boundary + "'");
    }
    if (params.reg) {
        pr.reg = *params.reg;
    } else if (params.boundary == "phi_eps") {
        pr.reg = -1.0; // resolved below once f is known
    } else {
        pr.reg = params.eps;
    }
    if (manufactured) {
        if (pr.reg < 0.0) {
            throw DomainError("manufactured right-hand side needs an explicit regularization");
        }
        pr.f = RhsSpec::constant(1.0 + 2.0 * pr.reg);
    } else {
        pr.f = RhsSpec::parse(params.f_spec);
    }
    if (pr.reg < 0.0) {
        pr.reg = regularization_for(params.eps, pr.datum, params.k, pr.f, params.n);
    }
    return pr;
}

[[nodiscard]] inline Json to_json(const ProblemParams& p)
{
    Json j;
    j["n"] = p.n;
    j["k"] = p.k;
    j["r"] = p.r;
    j["h"] = p.spacing();
    j["eps"] = p.eps;
    j["M"] = p.bigM();
    j["f"] = p.f_spec;
    j["boundary"] = p.boundary;
    if (!p.boundary_file.empty()) {
        j["boundary_file"] = p.boundary_file;
    }
    if (p.reg) {
        j["reg"] = *p.reg;
    }
    return j;
}

[[nodiscard]] inline ProblemParams problem_params_from_json(const Json& j)
{
    ProblemParams p;
    p.n = j.at("n").get<int>();
    p.k = j.at("k").get<int>();
    p.r = j.at("r").get<double>();
    p.h = j.at("h").get<double>();
    p.eps = j.at("eps").get<double>();
    p.big_m = j.at("M").get<double>();
    p.f_spec = j.at("f").get<std::string>();
    p.boundary = j.at("boundary").get<std::string>();
    if (j.contains("boundary_file")) {
        p.boundary_file = j.at("boundary_file").get<std::string>();
    }
    if (j.contains("reg")) {
        p.reg = j.at("reg").get<double>();
    }
    return p;
}

} // namespace kpsh
