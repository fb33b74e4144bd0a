#include "tractor/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tractor/conventions.hpp"

namespace tractor {

using nlohmann::json;

uint64_t conventions_hash() { return fnv1a(conventions_ledger()); }

void RunConfig::validate() const {
    static const std::vector<std::string> tasks = {"curvature-report", "normalization-check",
                                                   "holonomy-estimate", "sparling-check",
                                                   "su-check",          "lemma-residuals"};
    bool ok = false;
    for (const auto& t : tasks) ok = ok || t == task;
    if (!ok) {
        std::ostringstream os;
        os << "unknown task '" << task << "'; valid tasks:";
        for (const auto& t : tasks) os << " " << t;
        throw ValidationError(os.str());
    }
    if (metric.empty()) throw ValidationError("config needs a metric name");
    if (fd_step <= 0) throw ValidationError("fd_step must be positive");
    if (fd_step < 1e-8) throw ValidationError("fd_step below 1e-8 rejected");
    if (transport_steps < 16) throw ValidationError("transport_steps must be >= 16");
    if (tol <= 0) throw ValidationError("tol must be positive");
    for (int c : grid_counts)
        if (c < 1) throw ValidationError("grid counts must be positive");
    if ((task == "sparling-check" || task == "lemma-residuals") && field.empty())
        throw ValidationError("task '" + task + "' needs --field");
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    if (j.contains("metric")) c.metric = j.at("metric").get<std::string>();
    if (j.contains("task")) c.task = j.at("task").get<std::string>();
    if (j.contains("field")) c.field = j.at("field").get<std::string>();
    if (j.contains("params"))
        for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it)
            c.params[it.key()] = it.value().get<double>();
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        if (g.contains("counts")) c.grid_counts = g.at("counts").get<std::vector<int>>();
        if (g.contains("lo") && g.contains("hi")) {
            const auto lo = g.at("lo").get<std::vector<double>>();
            const auto hi = g.at("hi").get<std::vector<double>>();
            if (lo.size() != hi.size()) throw ValidationError("grid lo/hi length mismatch");
            Box b;
            b.lo = Eigen::Map<const Vec>(lo.data(), lo.size());
            b.hi = Eigen::Map<const Vec>(hi.data(), hi.size());
            c.grid_box = b;
        }
    }
    if (j.contains("fd_step")) c.fd_step = j.at("fd_step").get<double>();
    if (j.contains("transport_steps")) c.transport_steps = j.at("transport_steps").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("tol")) c.tol = j.at("tol").get<double>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    return c;
}

json config_to_json(const RunConfig& c) {
    json j;
    j["metric"] = c.metric;
    j["task"] = c.task;
    if (!c.field.empty()) j["field"] = c.field;
    json p = json::object();
    for (const auto& [k, v] : c.params) p[k] = v;
    j["params"] = p;
    json g;
    if (c.grid_box) {
        g["lo"] = std::vector<double>(c.grid_box->lo.data(),
                                      c.grid_box->lo.data() + c.grid_box->lo.size());
        g["hi"] = std::vector<double>(c.grid_box->hi.data(),
                                      c.grid_box->hi.data() + c.grid_box->hi.size());
    }
    g["counts"] = c.grid_counts;
    j["grid"] = g;
    j["fd_step"] = c.fd_step;
    j["transport_steps"] = c.transport_steps;
    j["seed"] = c.seed;
    j["tol"] = c.tol;
    if (!c.out.empty()) j["out"] = c.out;
    return j;
}

namespace {

std::vector<Vec> task_grid(const RunConfig& cfg, const Chart& chart) {
    Box box = cfg.grid_box.value_or(chart.domain);
    if (box.lo.size() != chart.dim) throw ValidationError("grid box has wrong dimension");
    // keep loops and FD stencils inside the chart domain
    if (!cfg.grid_box) {
        const Vec span = box.hi - box.lo;
        box.lo += 0.2 * span;
        box.hi -= 0.2 * span;
    }
    std::vector<int> counts = cfg.grid_counts;
    if (counts.empty()) counts.assign(chart.dim, 3);
    if (static_cast<int>(counts.size()) != chart.dim)
        throw ValidationError("grid counts have wrong dimension");
    return grid_points(box, counts);
}

json vec_to_json(const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

struct WeylResiduals {
    double trace_free = 0.0, pair_symmetry = 0.0, bianchi1 = 0.0, cyclic_last3 = 0.0;
};

WeylResiduals weyl_residuals(const CurvatureSuite& cs) {
    const int n = static_cast<int>(cs.g.rows());
    WeylResiduals wr;
    // contractions over every index pair
    for (int p = 0; p < 4; ++p)
        for (int q = p + 1; q < 4; ++q) {
            double worst = 0.0;
            int free1 = -1, free2 = -1;
            for (int d = 0; d < 4; ++d)
                if (d != p && d != q) (free1 < 0 ? free1 : free2) = d;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    double t = 0.0;
                    for (int c = 0; c < n; ++c)
                        for (int d = 0; d < n; ++d) {
                            int idx[4];
                            idx[p] = c;
                            idx[q] = d;
                            idx[free1] = a;
                            idx[free2] = b;
                            t += cs.ginv(c, d) * cs.weyl4(idx[0], idx[1], idx[2], idx[3]);
                        }
                    worst = std::max(worst, std::abs(t));
                }
            wr.trace_free = std::max(wr.trace_free, worst);
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    wr.pair_symmetry = std::max(
                        wr.pair_symmetry, std::abs(cs.weyl4(i, j, k, l) - cs.weyl4(k, l, i, j)));
                    wr.bianchi1 = std::max(
                        wr.bianchi1, std::abs(cs.weyl4(i, j, k, l) + cs.weyl4(j, k, i, l) +
                                              cs.weyl4(k, i, j, l)));
                    wr.cyclic_last3 = std::max(
                        wr.cyclic_last3, std::abs(cs.weyl4(i, j, k, l) + cs.weyl4(i, k, l, j) +
                                                  cs.weyl4(i, l, j, k)));
                }
    return wr;
}

VectorField scaled_field(const VectorField& f, double c) {
    VectorField out;
    out.name = f.name;
    auto eval = f.eval;
    out.eval = [eval, c](const Vec& x) { return Vec(c * eval(x)); };
    if (f.jet) {
        auto jet = f.jet;
        out.jet = [jet, c](const Vec& x, Vec& V, Mat& dV, std::vector<Mat>& ddV) {
            jet(x, V, dV, ddV);
            V *= c;
            dV *= c;
            for (auto& h : ddV) h *= c;
        };
    }
    return out;
}

json run_curvature_report(const RunConfig& cfg, const catalog::CatalogEntry& entry,
                          const std::vector<Vec>& grid, int* exit_code) {
    json points = json::array();
    std::vector<json> recs(grid.size());
    parallel_for(static_cast<int>(grid.size()), [&](int i) {
        const CurvatureSuite cs = curvature_suite(entry.chart, grid[i]);
        const WeylResiduals wr = weyl_residuals(cs);
        json r;
        r["x"] = vec_to_json(grid[i]);
        r["scal"] = cs.scal;
        r["ric_norm"] = cs.ric.norm();
        r["schouten_norm"] = cs.schouten.norm();
        r["weyl_norm"] = cs.weyl4.norm();
        r["cotton_norm"] = cs.cotton.norm();
        r["weyl_trace_free"] = wr.trace_free;
        r["weyl_pair_symmetry"] = wr.pair_symmetry;
        r["weyl_bianchi1"] = wr.bianchi1;
        r["weyl_cyclic_last3"] = wr.cyclic_last3;
        recs[i] = std::move(r);
    });
    json summary;
    double wmax = 0, cmax = 0, tf = 0, ps = 0, b1 = 0, c3 = 0;
    double smin = std::numeric_limits<double>::infinity(), smax = -smin;
    for (const auto& r : recs) {
        points.push_back(r);
        wmax = std::max(wmax, r.at("weyl_norm").get<double>());
        cmax = std::max(cmax, r.at("cotton_norm").get<double>());
        tf = std::max(tf, r.at("weyl_trace_free").get<double>());
        ps = std::max(ps, r.at("weyl_pair_symmetry").get<double>());
        b1 = std::max(b1, r.at("weyl_bianchi1").get<double>());
        c3 = std::max(c3, r.at("weyl_cyclic_last3").get<double>());
        smin = std::min(smin, r.at("scal").get<double>());
        smax = std::max(smax, r.at("scal").get<double>());
    }
    summary["max_weyl_norm"] = wmax;
    summary["max_cotton_norm"] = cmax;
    summary["max_weyl_trace_free"] = tf;
    summary["max_weyl_pair_symmetry"] = ps;
    summary["max_weyl_bianchi1"] = b1;
    summary["max_weyl_cyclic_last3"] = c3;
    summary["scal_min"] = smin;
    summary["scal_max"] = smax;
    *exit_code = 0;
    json out;
    out["points"] = points;
    out["summary"] = summary;
    out["verdict"] = "report-only";
    return out;
}

json run_normalization_check(const RunConfig& cfg, const catalog::CatalogEntry& entry,
                             const std::vector<Vec>& grid, int* exit_code) {
    const int n = entry.chart.dim;
    std::vector<json> recs(grid.size());
    parallel_for(static_cast<int>(grid.size()), [&](int i) {
        double torsion = 0.0, trace = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                const AdjointTractorMatrix om =
                    tractor_curvature(entry.chart, grid[i], Vec::Unit(n, a), Vec::Unit(n, b),
                                      CurvatureMethod::commutator);
                torsion = std::max(torsion, om.xi().norm());
                trace = std::max(trace, std::abs(om.phi().trace()));
            }
        json r;
        r["x"] = vec_to_json(grid[i]);
        r["torsion"] = torsion;
        r["trace"] = trace;
        recs[i] = std::move(r);
    });
    json points = json::array();
    double tmax = 0, trmax = 0;
    for (const auto& r : recs) {
        points.push_back(r);
        tmax = std::max(tmax, r.at("torsion").get<double>());
        trmax = std::max(trmax, r.at("trace").get<double>());
    }
    json summary;
    summary["max_torsion"] = tmax;
    summary["max_trace"] = trmax;
    const bool pass = tmax <= cfg.tol && trmax <= cfg.tol;
    *exit_code = pass ? 0 : 1;
    json out;
    out["points"] = points;
    out["summary"] = summary;
    out["verdict"] = pass ? "pass" : "fail";
    return out;
}

json holonomy_to_json(const HolonomyReport& rep) {
    json h;
    h["base_point"] = vec_to_json(rep.base_point);
    h["rank"] = rep.rank;
    h["rank_loops"] = rep.rank_loops;
    h["rank_span"] = rep.rank_span;
    h["sample_count"] = rep.samples.size();
    h["singular_values"] = rep.singular_values;  // descending from the SVD
    h["max_skew_defect"] = rep.max_skew_defect;
    h["final_loop_eps"] = rep.final_loop_eps;
    if (!rep.classification.empty()) h["classification"] = rep.classification;
    if (rep.J_used) {
        h["max_commutator_residual"] = rep.max_commutator_residual;
        h["max_trace_residual"] = rep.max_trace_residual;
    }
    return h;
}

HolonomyOptions holonomy_options(const RunConfig& cfg) {
    HolonomyOptions opts;
    opts.transport_steps = cfg.transport_steps;
    return opts;
}

json run_holonomy_estimate(const RunConfig& cfg, const catalog::CatalogEntry& entry,
                           const std::vector<Vec>& grid, int* exit_code) {
    const Vec x0 = grid[grid.size() / 2];
    const HolonomyReport rep = holonomy_algebra_estimate(entry.chart, x0, holonomy_options(cfg));
    json out;
    out["summary"] = holonomy_to_json(rep);
    out["points"] = json::array();
    out["verdict"] = "report-only";
    *exit_code = 0;
    return out;
}

json sparling_to_json(const SparlingCertificate& cert) {
    json s;
    s["killing_residual"] = cert.killing_residual;
    s["lightlike_residual"] = cert.lightlike_residual;
    s["weyl_residual"] = cert.weyl_residual;
    s["cotton_residual"] = cert.cotton_residual;
    s["div_residual"] = cert.div_residual;
    s["ric_jj_min"] = cert.ric_jj_min;
    s["ric_jj_max"] = cert.ric_jj_max;
    s["ric_constant"] = cert.ric_constant;
    if (cert.normalization_scale) s["normalization_scale"] = *cert.normalization_scale;
    if (cert.ric_jj_normalized) s["ric_jj_normalized"] = *cert.ric_jj_normalized;
    if (cert.dj_pairing_normalized) s["dj_pairing_normalized"] = *cert.dj_pairing_normalized;
    s["pass"] = cert.pass;
    if (!cert.failed_conditions.empty()) s["failed_conditions"] = cert.failed_conditions;
    return s;
}

json run_sparling_check(const RunConfig& cfg, const catalog::CatalogEntry& entry,
                        const std::vector<Vec>& grid, int* exit_code) {
    const VectorField& j = catalog::get_field(entry, cfg.field);
    const SparlingCertificate cert = sparling_report(entry.chart, j, grid, cfg.tol);
    json out;
    out["summary"] = sparling_to_json(cert);
    out["points"] = json::array();
    out["verdict"] = cert.pass ? "pass" : "fail";
    *exit_code = cert.pass ? 0 : 1;
    return out;
}

json run_su_check(const RunConfig& cfg, const catalog::CatalogEntry& entry,
                  const std::vector<Vec>& grid, int* exit_code) {
    const Vec x0 = grid[grid.size() / 2];
    HolonomyReport rep = holonomy_algebra_estimate(entry.chart, x0, holonomy_options(cfg));

    std::string field_name = cfg.field;
    std::string j_note;
    if (field_name.empty()) {
        for (const auto& f : entry.fields)
            if (f.name == "j" || f.name == "j_complex") {
                field_name = f.name;
                break;
            }
    }
    std::optional<Mat> J;
    if (!field_name.empty()) {
        VectorField f = catalog::get_field(entry, field_name);
        const SparlingCertificate cert = sparling_report(entry.chart, f, grid, cfg.tol);
        double scale = 1.0;
        if (cert.normalization_scale) scale = *cert.normalization_scale;
        const VectorField fs = scaled_field(f, scale);
        const Mat cand = splitting_matrix(entry.chart, fs, x0).matrix();
        const ComplexStructureReport csr =
            complex_structure_report(cand, entry.chart.metric(x0), 1e-4);
        if (csr.is_complex_structure) {
            J = cand;
        } else if (!cfg.field.empty()) {
            throw ValidationError("field '" + field_name +
                                  "' does not induce a complex structure, ||J^2 + id|| = " +
                                  std::to_string(csr.square_residual));
        } else {
            j_note = "candidate field '" + field_name + "' rejected, ||J^2 + id|| = " +
                     std::to_string(csr.square_residual);
        }
    }
    rep = classify_holonomy(entry.chart, std::move(rep), J, cfg.tol > 1e-4 ? 1e-4 : cfg.tol);
    json summary = holonomy_to_json(rep);
    if (!field_name.empty()) summary["j_field"] = field_name;
    if (!j_note.empty()) summary["j_note"] = j_note;
    summary["max_trace_residual"] = rep.max_trace_residual;
    const bool pass =
        rep.classification == "su-compatible" || rep.classification == "flat";
    json out;
    out["summary"] = summary;
    out["points"] = json::array();
    out["verdict"] = pass ? "pass" : "fail";
    *exit_code = pass ? 0 : 1;
    return out;
}

json run_lemma_residuals(const RunConfig& cfg, const catalog::CatalogEntry& entry,
                         const std::vector<Vec>& grid, int* exit_code) {
    const VectorField& f = catalog::get_field(entry, cfg.field);
    const int n = entry.chart.dim;
    std::vector<json> recs(grid.size());
    parallel_for(static_cast<int>(grid.size()), [&](int i) {
        double lm1 = 0, par = 0, kil = 0;
        bool ok = true;
        for (int d = 0; d < n; ++d) {
            const LemmaResiduals lr =
                lemma_residuals(entry.chart, f, grid[i], Vec::Unit(n, d), cfg.tol);
            lm1 = std::max(lm1, lr.lm1);
            par = std::max(par, lr.parallel);
            kil = std::max(kil, lr.killing);
            ok = ok && lr.killing_ok;
        }
        json r;
        r["x"] = vec_to_json(grid[i]);
        r["lm1"] = lm1;
        r["parallel"] = par;
        r["killing"] = kil;
        r["killing_ok"] = ok;
        recs[i] = std::move(r);
    });
    json points = json::array();
    double lm1 = 0, par = 0, kil = 0;
    bool ok = true;
    for (const auto& r : recs) {
        points.push_back(r);
        lm1 = std::max(lm1, r.at("lm1").get<double>());
        par = std::max(par, r.at("parallel").get<double>());
        kil = std::max(kil, r.at("killing").get<double>());
        ok = ok && r.at("killing_ok").get<bool>();
    }
    json summary;
    summary["max_lm1"] = lm1;
    summary["max_parallel"] = par;
    summary["max_killing"] = kil;
    summary["killing_ok"] = ok;
    json out;
    out["points"] = points;
    out["summary"] = summary;
    out["verdict"] = "report-only";
    *exit_code = 0;
    return out;
}

void reject_non_finite(const json& j, const std::string& path) {
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (!std::isfinite(v))
            throw NumericalError("non-finite value in report at " + path);
    } else if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            reject_non_finite(it.value(), path + "/" + it.key());
    } else if (j.is_array()) {
        for (size_t i = 0; i < j.size(); ++i)
            reject_non_finite(j[i], path + "/" + std::to_string(i));
    }
}

} // namespace

std::string serialize_report(const json& report) {
    reject_non_finite(report, "");
    return report.dump(2) + "\n";
}

void emit_report(const json& report, const std::string& path) {
    const std::string text = serialize_report(report);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericalError("cannot open report path '" + path + "'");
    out << text;
    if (!out.good()) throw NumericalError("write failed for report path '" + path + "'");
}

RunResult run_task(const RunConfig& config) {
    config.validate();
    catalog::CatalogEntry entry = catalog::get_chart(config.metric, config.params);
    entry.chart.fd_step = config.fd_step;
    const std::vector<Vec> grid = task_grid(config, entry.chart);

    int exit_code = 0;
    json body;
    if (config.task == "curvature-report")
        body = run_curvature_report(config, entry, grid, &exit_code);
    else if (config.task == "normalization-check")
        body = run_normalization_check(config, entry, grid, &exit_code);
    else if (config.task == "holonomy-estimate")
        body = run_holonomy_estimate(config, entry, grid, &exit_code);
    else if (config.task == "sparling-check")
        body = run_sparling_check(config, entry, grid, &exit_code);
    else if (config.task == "su-check")
        body = run_su_check(config, entry, grid, &exit_code);
    else if (config.task == "lemma-residuals")
        body = run_lemma_residuals(config, entry, grid, &exit_code);

    json report;
    report["schema_version"] = 1;
    json tool;
    tool["name"] = "tractor";
    tool["version"] = tool_version();
    {
        std::ostringstream os;
        os << "fnv1a:" << std::hex << conventions_hash();
        tool["conventions_hash"] = os.str();
    }
    report["tool"] = tool;
    report["config"] = config_to_json(config);
    report["points"] = body.at("points");
    report["summary"] = body.at("summary");
    report["verdict"] = body.at("verdict");

    RunResult rr;
    rr.report = std::move(report);
    rr.exit_code = exit_code;
    return rr;
}

} // namespace tractor
