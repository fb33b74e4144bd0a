#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tractor/conventions.hpp"
#include "tractor/report.hpp"

using namespace tractor;
using nlohmann::json;

namespace {

std::string tool_path;  // set from the command line by CMake

RunConfig base_config(const std::string& metric, const std::string& task) {
    RunConfig cfg;
    cfg.metric = metric;
    cfg.task = task;
    cfg.grid_counts = {2, 2, 2, 2};
    cfg.transport_steps = 96;
    return cfg;
}

} // namespace

TEST_CASE("run_task: su-check on the flat chart passes with tiny residuals") {
    const RunResult rr = run_task(base_config("flat", "su-check"));
    CHECK(rr.exit_code == 0);
    CHECK(rr.report.at("verdict") == "pass");
    const json& s = rr.report.at("summary");
    CHECK(s.at("rank").get<int>() == 0);
    CHECK(s.at("max_trace_residual").get<double>() <= 1e-10);
    CHECK(s.at("classification") == "su-compatible");
    CHECK(s.at("j_field") == "j_complex");
}

TEST_CASE("run_task: sparling-check on the heisenberg entry") {
    RunConfig cfg = base_config("heisenberg_fefferman", "sparling-check");
    cfg.field = "j";
    const RunResult rr = run_task(cfg);
    CHECK(rr.exit_code == 0);
    CHECK(rr.report.at("verdict") == "pass");
    const json& s = rr.report.at("summary");
    CHECK(s.at("ric_jj_normalized").get<double>() == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(s.at("dj_pairing_normalized").get<double>() == doctest::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("run_task: unknown metric and unknown task are config errors") {
    CHECK_THROWS_WITH_AS(run_task(base_config("nonsense", "su-check")),
                         doctest::Contains("valid names"), ValidationError);
    CHECK_THROWS_WITH_AS(run_task(base_config("flat", "dance")),
                         doctest::Contains("valid tasks"), ValidationError);
    RunConfig cfg = base_config("heisenberg_fefferman", "sparling-check");
    CHECK_THROWS_WITH_AS(run_task(cfg), doctest::Contains("--field"), ValidationError);
}

TEST_CASE("run_task: normalization-check verdict follows the residuals") {
    const RunResult rr = run_task(base_config("perturbed_flat", "normalization-check"));
    CHECK(rr.exit_code == 0);
    CHECK(rr.report.at("summary").at("max_torsion").get<double>() <= 1e-5);
    CHECK(rr.report.at("summary").at("max_trace").get<double>() <= 1e-5);
}

TEST_CASE("run_task: holonomy-estimate emits descending singular values") {
    RunConfig cfg = base_config("perturbed_flat", "holonomy-estimate");
    const RunResult rr = run_task(cfg);
    const auto sv = rr.report.at("summary").at("singular_values").get<std::vector<double>>();
    REQUIRE(sv.size() > 1);
    for (size_t i = 1; i < sv.size(); ++i) CHECK(sv[i - 1] >= sv[i]);
    CHECK(rr.report.at("summary").at("rank").get<int>() >= 1);
}

TEST_CASE("run_task: lemma-residuals reports killing flags") {
    RunConfig cfg = base_config("flat", "lemma-residuals");
    cfg.field = "dilation";
    const RunResult rr = run_task(cfg);
    CHECK(rr.exit_code == 0);
    CHECK(rr.report.at("summary").at("killing_ok").get<bool>());
    CHECK(rr.report.at("summary").at("max_lm1").get<double>() <= 1e-7);
}

TEST_CASE("reports: identical config produces byte-identical output") {
    RunConfig cfg = base_config("perturbed_flat", "curvature-report");
    cfg.seed = 9;
    const std::string a = serialize_report(run_task(cfg).report);
    const std::string b = serialize_report(run_task(cfg).report);
    CHECK(a == b);
    CHECK(a.find("conventions_hash") != std::string::npos);
}

TEST_CASE("reports: non-finite values are rejected") {
    json bad;
    bad["value"] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(serialize_report(bad), NumericalError);
    json nested;
    nested["a"] = json::array({1.0, std::numeric_limits<double>::infinity()});
    CHECK_THROWS_AS(serialize_report(nested), NumericalError);
}

TEST_CASE("reports: emit writes the serialized bytes") {
    RunConfig cfg = base_config("flat", "curvature-report");
    const RunResult rr = run_task(cfg);
    const std::string path = "test_cli_report.json";
    emit_report(rr.report, path);
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == serialize_report(rr.report));
    std::remove(path.c_str());
    CHECK_THROWS_AS(emit_report(rr.report, "no_such_dir/x.json"), NumericalError);
}

TEST_CASE("config: json round trip and validation") {
    RunConfig cfg = base_config("berger_fefferman", "su-check");
    cfg.params["lambda"] = 1.2;
    cfg.field = "j";
    cfg.tol = 2e-4;
    const RunConfig back = config_from_json(config_to_json(cfg));
    CHECK(back.metric == cfg.metric);
    CHECK(back.task == cfg.task);
    CHECK(back.params.at("lambda") == 1.2);
    CHECK(back.tol == 2e-4);
    CHECK(back.grid_counts == cfg.grid_counts);

    RunConfig bad = cfg;
    bad.fd_step = 1e-9;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = cfg;
    bad.transport_steps = 2;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("cli binary: exit codes and determinism end to end") {
    if (tool_path.empty()) {
        MESSAGE("tool path not provided, skipping binary checks");
        return;
    }
    auto run = [&](const std::string& args) {
        const std::string cmd = tool_path + " " + args + " > cli_stdout.txt 2> cli_stderr.txt";
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    CHECK(run("su-check --metric flat --grid 2,2,2,2 --transport-steps 96 --out cli_a.json") == 0);
    CHECK(run("su-check --metric flat --grid 2,2,2,2 --transport-steps 96 --out cli_b.json") == 0);
    std::ifstream a("cli_a.json", std::ios::binary), b("cli_b.json", std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK_FALSE(sa.str().empty());

    CHECK(run("su-check --metric nonsense") == 2);
    {
        std::ifstream err("cli_stderr.txt");
        std::stringstream se;
        se << err.rdbuf();
        CHECK(se.str().find("valid names") != std::string::npos);
    }
    CHECK(run("dance --metric flat") == 2);

    // config file wins over the conflicting flag
    {
        std::ofstream cf("cli_cfg.json");
        cf << R"({"metric": "flat", "grid": {"counts": [2,2,2,2]}, "transport_steps": 96})";
    }
    CHECK(run("su-check --metric nonsense --config cli_cfg.json") == 0);

    for (const char* f : {"cli_a.json", "cli_b.json", "cli_cfg.json", "cli_stdout.txt",
                          "cli_stderr.txt"})
        std::remove(f);
}

int main(int argc, char** argv) {
    doctest::Context ctx;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--tool-path") tool_path = argv[i + 1];
    ctx.applyCommandLine(argc, argv);
    return ctx.run();
}
