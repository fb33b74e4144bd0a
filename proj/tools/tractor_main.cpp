#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "tractor/report.hpp"

using tractor::RunConfig;

namespace {

// "4" | "3,3,3,3" | "lo:hi:n,lo:hi:n,..."
void parse_grid_spec(const std::string& spec, RunConfig& cfg) {
    if (spec.empty()) return;
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    const bool ranged = spec.find(':') != std::string::npos;
    if (!ranged) {
        std::vector<int> counts;
        for (const auto& p : parts) counts.push_back(std::stoi(p));
        if (counts.size() == 1) cfg.grid_counts.assign(8, counts[0]);  // trimmed to dim later
        cfg.grid_counts = counts;
        return;
    }
    std::vector<double> lo, hi;
    std::vector<int> counts;
    for (const auto& p : parts) {
        std::stringstream ps(p);
        std::string a, b, c;
        if (!std::getline(ps, a, ':') || !std::getline(ps, b, ':') || !std::getline(ps, c, ':'))
            throw tractor::ValidationError("grid axis spec must be lo:hi:count");
        lo.push_back(std::stod(a));
        hi.push_back(std::stod(b));
        counts.push_back(std::stoi(c));
    }
    tractor::Box box;
    box.lo = Eigen::Map<const tractor::Vec>(lo.data(), lo.size());
    box.hi = Eigen::Map<const tractor::Vec>(hi.data(), hi.size());
    cfg.grid_box = box;
    cfg.grid_counts = counts;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"conformal tractor calculus task runner"};
    app.get_formatter()->column_width(30);

    std::string task, metric, field, grid_spec, out_path, config_path;
    std::vector<std::string> param_kv;
    double fd_step = 1e-4, tol = 1e-5;
    int transport_steps = 192;
    uint64_t seed = 1;

    app.add_option("task", task,
                   "curvature-report | normalization-check | holonomy-estimate | "
                   "sparling-check | su-check | lemma-residuals")
        ->required();
    app.add_option("--metric", metric, "catalog metric name");
    app.add_option("--param", param_kv, "metric parameter k=v (repeatable)");
    app.add_option("--field", field, "distinguished vector field name");
    app.add_option("--grid", grid_spec, "counts 'c,c,..' or axes 'lo:hi:c,lo:hi:c,..'");
    app.add_option("--fd-step", fd_step, "finite difference step");
    app.add_option("--transport-steps", transport_steps, "integrator steps per edge");
    app.add_option("--seed", seed, "seed echoed into the report and used by seeded metrics");
    app.add_option("--tol", tol, "verdict tolerance");
    app.add_option("--out", out_path, "report output path");
    app.add_option("--config", config_path, "JSON config file; file values win over flags");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg;
        cfg.task = task;
        cfg.metric = metric;
        cfg.field = field;
        cfg.fd_step = fd_step;
        cfg.transport_steps = transport_steps;
        cfg.seed = seed;
        cfg.tol = tol;
        cfg.out = out_path;
        for (const auto& kv : param_kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw tractor::ValidationError("--param needs k=v, got '" + kv + "'");
            cfg.params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        }
        parse_grid_spec(grid_spec, cfg);

        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw tractor::ValidationError("cannot read config file '" + config_path + "'");
            nlohmann::json j = nlohmann::json::parse(in);
            RunConfig file_cfg = tractor::config_from_json(j);
            // config file wins on conflict
            if (j.contains("metric")) cfg.metric = file_cfg.metric;
            if (j.contains("task")) cfg.task = file_cfg.task;
            if (j.contains("field")) cfg.field = file_cfg.field;
            if (j.contains("params")) cfg.params = file_cfg.params;
            if (j.contains("grid")) {
                cfg.grid_box = file_cfg.grid_box;
                cfg.grid_counts = file_cfg.grid_counts;
            }
            if (j.contains("fd_step")) cfg.fd_step = file_cfg.fd_step;
            if (j.contains("transport_steps")) cfg.transport_steps = file_cfg.transport_steps;
            if (j.contains("seed")) cfg.seed = file_cfg.seed;
            if (j.contains("tol")) cfg.tol = file_cfg.tol;
            if (j.contains("out")) cfg.out = file_cfg.out;
        }

        const tractor::RunResult rr = tractor::run_task(cfg);
        const std::string text = tractor::serialize_report(rr.report);
        if (!cfg.out.empty())
            tractor::emit_report(rr.report, cfg.out);
        else
            std::cout << text;
        if (!cfg.out.empty())
            std::cout << rr.report.at("verdict").get<std::string>() << "\n";
        return rr.exit_code;
    } catch (const tractor::ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const tractor::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
