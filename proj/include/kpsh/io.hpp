#pragma once

#include "kpsh/core.hpp"
#include "kpsh/grid.hpp"
#include "kpsh/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace kpsh {

using Json = nlohmann::ordered_json;

/// Header x1,y1,x2,y2,...,xn,yn,value; columns follow the header.
[[nodiscard]] inline std::string csv_header(int n)
{
    std::string h;
    for (int j = 1; j <= n; ++j) {
        h += "x" + std::to_string(j) + ",y" + std::to_string(j) + ",";
    }
    return h + "value";
}

[[nodiscard]] inline std::string format_g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& os, const GridFunction& u)
{
    const BallGrid& g = *u.grid;
    const int n = g.n();
    os << csv_header(n) << '\n';
    for (int node = 0; node < g.node_count(); ++node) {
        const Point z = g.position(node);
        for (int j = 0; j < n; ++j) {
            os << format_g17(z(j)) << ',' << format_g17(z(n + j)) << ',';
        }
        os << format_g17(u[node]) << '\n';
    }
}

inline void write_csv(const std::string& path, const GridFunction& u)
{
    std::ofstream os(path);
    if (!os) {
        throw ParseError("cannot open " + path + " for writing");
    }
    write_csv(os, u);
}

struct CsvTable {
    int n = 0;
    std::vector<Point> points;
    std::vector<double> values;
};

[[nodiscard]] inline CsvTable read_csv(std::istream& is)
{
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) {
        throw ParseError("empty CSV");
    }
    const auto columns = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
    if (columns < 3 || columns % 2 == 0) {
        throw ParseError("CSV header must list x1,y1,...,xn,yn,value");
    }
    t.n = (columns - 1) / 2;
    if (line != csv_header(t.n)) {
        throw ParseError("unexpected CSV header: " + line);
    }
    int row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                cells.push_back(std::stod(cell, &used));
                if (used != cell.size()) {
                    throw ParseError("");
                }
            } catch (const std::exception&) {
                throw ParseError("bad number '" + cell + "' on CSV row " + std::to_string(row));
            }
        }
        if (static_cast<int>(cells.size()) != columns) {
            throw ParseError("CSV row " + std::to_string(row) + " has the wrong column count");
        }
        Point z(2 * t.n);
        for (int j = 0; j < t.n; ++j) {
            z(j) = cells[2 * j];
            z(t.n + j) = cells[2 * j + 1];
        }
        t.points.push_back(std::move(z));
        t.values.push_back(cells.back());
    }
    return t;
}

/// Rebuild a GridFunction on the grid (n, r, h); every grid node must appear exactly once.
[[nodiscard]] inline GridFunction read_grid_function(const std::string& path, int n, double r, double h)
{
    std::ifstream is(path);
    if (!is) {
        throw ParseError("cannot open " + path);
    }
    const CsvTable table = read_csv(is);
    if (table.n != n) {
        throw ParseError("CSV dimension does not match the report");
    }
    auto grid = build_grid(n, r, h);
    GridFunction u{grid, std::vector<double>(static_cast<std::size_t>(grid->node_count()),
                                             std::numeric_limits<double>::quiet_NaN())};
    std::vector<int> c(static_cast<std::size_t>(2 * n));
    for (std::size_t i = 0; i < table.points.size(); ++i) {
        for (int d = 0; d < 2 * n; ++d) {
            c[d] = static_cast<int>(std::lround(table.points[i](d) / h));
        }
        const auto node = grid->find(c);
        if (!node) {
            throw ParseError("CSV row outside the grid");
        }
        u.values[*node] = table.values[i];
    }
    for (double v : u.values) {
        if (!std::isfinite(v)) {
            throw ParseError("CSV does not cover every grid node");
        }
    }
    return u;
}

/// Timing is left out unless asked for, so that reports are reproducible byte for byte.
[[nodiscard]] inline Json to_json(const SolveReport& r, bool with_timing = false)
{
    Json j;
    j["converged"] = r.converged;
    j["status"] = r.status;
    j["k"] = r.k;
    j["eps"] = r.eps;
    j["iterations"] = r.iterations;
    j["residual"] = r.residual;
    j["residual_history"] = r.residual_history;
    j["damping_history"] = r.damping_history;
    j["linear_sweeps"] = r.linear_sweeps;
    j["linear_fallbacks"] = r.linear_fallbacks;
    j["repairs"] = r.repairs;
    j["lambda_init"] = r.lambda_init;
    j["boundary_stages"] = r.boundary_stages;
    if (with_timing) {
        j["seconds"] = r.seconds;
    }
    j["lipschitz_estimate"] = r.lipschitz_estimate;
    return j;
}

/// key = value lines; '#' starts a comment.
struct ConfigFile {
    SolverConfig solver;
    std::vector<double> eps_schedule;
};

[[nodiscard]] inline std::vector<double> parse_number_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) {
                ++used;
            }
            if (used != item.size()) {
                throw ParseError("");
            }
        } catch (const std::exception&) {
            throw ParseError("bad number in list: '" + item + "'");
        }
    }
    if (out.empty()) {
        throw ParseError("empty number list");
    }
    return out;
}

[[nodiscard]] inline ConfigFile parse_config(std::istream& is)
{
    ConfigFile cfg;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "tol") {
                cfg.solver.tol = std::stod(value);
            } else if (key == "max_iter") {
                cfg.solver.max_iter = std::stoi(value);
            } else if (key == "damping_floor") {
                cfg.solver.damping_floor = std::stod(value);
            } else if (key == "mu_lift") {
                cfg.solver.mu_lift = std::stod(value);
            } else if (key == "eps_schedule") {
                cfg.eps_schedule = parse_number_list(value);
            } else {
                throw ParseError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("config line " + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    return cfg;
}

[[nodiscard]] inline ConfigFile read_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw ParseError("cannot open config " + path);
    }
    return parse_config(is);
}

} // namespace kpsh
