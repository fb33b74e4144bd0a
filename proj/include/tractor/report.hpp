#pragma once
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tractor/catalog.hpp"

namespace tractor {

struct RunConfig {
    std::string metric;
    std::map<std::string, double> params;
    std::string task;  // curvature-report | normalization-check | holonomy-estimate |
                       // sparling-check | su-check | lemma-residuals
    std::string field;                       // distinguished field for field tasks
    std::optional<Box> grid_box;             // chart default box when absent
    std::vector<int> grid_counts;            // per axis; default 3 each
    double fd_step = 1e-4;
    int transport_steps = 192;
    uint64_t seed = 1;
    double tol = 1e-5;
    std::string out;                         // report path; empty = stdout only

    void validate() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);

struct RunResult {
    nlohmann::json report;
    int exit_code = 0;  // 0 pass/report-only, 1 verdict fail
};

// Dispatches the task; throws ValidationError (exit 2 at the CLI) for config
// errors and NumericalError (exit 3) for numerical failures.
RunResult run_task(const RunConfig& config);

// Deterministic serialization (sorted keys, shortest round-trip floats,
// trailing newline); rejects NaN/Inf anywhere in the document.
std::string serialize_report(const nlohmann::json& report);
void emit_report(const nlohmann::json& report, const std::string& path);

} // namespace tractor
