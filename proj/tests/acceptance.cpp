// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit code 0 only when all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "tractor/catalog.hpp"
#include "tractor/killing_analysis.hpp"
#include "tractor/report.hpp"

using namespace tractor;

namespace {

struct Criterion {
    int id;
    std::string label;
    double budget_seconds;
    std::function<void(std::ostringstream&)> body;  // throws or CHECK-fails via exceptions
};

int failures = 0;

struct CheckFail : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw CheckFail(what);
}

std::vector<Vec> inner_grid(const Chart& chart, const std::vector<int>& counts,
                            double margin = 0.25) {
    Box inner = chart.domain;
    const Vec span = inner.hi - inner.lo;
    inner.lo += margin * span;
    inner.hi -= margin * span;
    return grid_points(inner, counts);
}

double max_parallel_residual(const Chart& chart, const VectorField& f, const Vec& x) {
    double worst = 0.0;
    for (int d = 0; d < chart.dim; ++d)
        worst = std::max(worst, lemma_residuals(chart, f, x, Vec::Unit(chart.dim, d)).parallel);
    return worst;
}

// ---------------------------------------------------------------- criteria

void criterion_algebra(std::ostringstream& info) {
    std::mt19937_64 rng(20240901);
    const Signature sigs[2] = {{3, 1}, {5, 1}};
    double basis_dev = 0.0, norm_res = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Signature sig = sigs[trial % 2];
        const Mat Jn = metric_form(sig);
        // commutator table, exact
        const GradedParts p = decompose_graded(random_graded(sig, rng));
        const GradedParts q = decompose_graded(random_graded(sig, rng));
        {
            const GradedMatrix out = bracket(GradedMatrix::embed_g0(sig, p.A, p.a),
                                             GradedMatrix::embed_m(sig, q.m));
            require((out.part_m() - (p.A * q.m + p.a * q.m)).cwiseAbs().maxCoeff() == 0.0,
                    "g0 x g-1 table entry not exact");
        }
        {
            const GradedMatrix out = bracket(GradedMatrix::embed_m(sig, p.m),
                                             GradedMatrix::embed_l(sig, q.l));
            const Mat ml = p.m * q.l;
            require((out.part_A() - (ml - Jn * ml.transpose() * Jn)).cwiseAbs().maxCoeff() ==
                        0.0 &&
                        out.part_a() == (q.l * p.m)(0, 0),
                    "g-1 x g1 table entry not exact");
        }
        {
            const GradedMatrix out = bracket(GradedMatrix::embed_l(sig, p.l),
                                             GradedMatrix::embed_g0(sig, q.A, q.a));
            require((out.part_l() - (p.l * q.A + q.a * p.l)).cwiseAbs().maxCoeff() == 0.0,
                    "g1 x g0 table entry not exact");
        }
        // codifferential basis independence
        const TwoChain psi = random_two_chain(sig, rng);
        Mat P = random_mat(sig.n(), sig.n(), rng) + 2.0 * Mat::Identity(sig.n(), sig.n());
        const OneChain c1 = lie_codifferential(psi);
        const OneChain c2 = lie_codifferential(psi, P);
        for (int i = 0; i < sig.n(); ++i)
            basis_dev = std::max(basis_dev,
                                 (c1.value(i).matrix() - c2.value(i).matrix()).norm() /
                                     std::max(1.0, psi.norm()));
        // normalization equivalence
        const NormalizationResidual raw = normalization_residual(psi);
        require((raw.codiff_norm <= 1e-10) ==
                    (raw.torsion_norm <= 1e-10 && raw.trace_norm <= 1e-10),
                "normalization equivalence failed on a raw chain");
        const NormalizationResidual proj =
            normalization_residual(project_to_normalized(psi));
        norm_res = std::max({norm_res, proj.codiff_norm / std::max(1.0, psi.norm()),
                             proj.torsion_norm, proj.trace_norm / std::max(1.0, psi.norm())});
    }
    require(basis_dev <= 1e-12, "codifferential depends on the basis");
    require(norm_res <= 1e-10, "projected chains keep a residual");
    info << "basis dev " << basis_dev << ", projected residual " << norm_res;
}

void criterion_lemma1(std::ostringstream& info) {
    std::mt19937_64 rng(20240902);
    const Signature sigs[2] = {{3, 1}, {5, 1}};
    double square = 0.0, recover = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Signature sig = sigs[trial % 2];
        const int N = sig.ambient();
        const GradedMatrix beta = make_complex_structure(sig, unit_uniform(rng), rng);
        square = std::max(square, (beta.matrix() * beta.matrix() + Mat::Identity(N, N))
                                      .cwiseAbs()
                                      .maxCoeff());
    }
    for (int trial = 0; trial < 100; ++trial) {
        const Signature sig = sigs[trial % 2];
        const GradedMatrix beta0 = make_complex_structure(sig, 0.7 * unit_uniform(rng), rng);
        const Mat Q = random_pseudo_orthogonal(sig, rng);
        const Mat beta = Q * beta0.matrix() * Q.inverse();
        const ComplexStructureReport rep =
            complex_structure_report(beta, metric_form(sig), 1e-8);
        require(rep.is_complex_structure, "conjugated structure lost beta^2 = -id");
        recover = std::max({recover, rep.eigen_residual_m, rep.eigen_residual_v,
                            rep.lightlike_residual_m, rep.lightlike_residual_v,
                            rep.pairing_residual, rep.restriction_residual});
    }
    require(square <= 1e-10, "construction square residual too large");
    require(recover <= 1e-8, "condition recovery residual too large");
    info << "max square " << square << ", max condition residual " << recover;
}

void criterion_curvature_gate(std::ostringstream& info) {
    double worst_rel = 0.0, worst_flat = 0.0;
    for (const char* name : {"flat", "sphere_round", "perturbed_flat"}) {
        auto entry = catalog::get_chart(name);
        const std::vector<Vec> pts = inner_grid(entry.chart, {3, 3, 2, 2});
        require(pts.size() >= 20, "needs at least 20 points per chart");
        const bool expect_flat =
            std::string(name) == "flat" || std::string(name) == "sphere_round";
        for (const Vec& x : pts)
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j) {
                    const CurvatureCrossCheck cc =
                        curvature_cross_check(entry.chart, x, Vec::Unit(4, i), Vec::Unit(4, j));
                    if (expect_flat) {
                        worst_flat = std::max({worst_flat, cc.assembled.matrix().norm(),
                                               cc.commutator.matrix().norm()});
                    } else if (cc.assembled.matrix().norm() > 1e-6) {
                        worst_rel = std::max(worst_rel, cc.rel_deviation);
                    }
                }
    }
    require(worst_rel <= 1e-3, "methods disagree beyond 1e-3");
    require(worst_flat <= 1e-5, "flat charts show curvature above 1e-5");
    info << "max relative deviation " << worst_rel << ", max flat-chart norm " << worst_flat;
}

void criterion_normalization(std::ostringstream& info) {
    double torsion = 0.0, trace = 0.0;
    for (const std::string& name : catalog::valid_names()) {
        auto entry = catalog::get_chart(name);
        for (const Vec& x : inner_grid(entry.chart, {2, 2, 2, 1}))
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j) {
                    const AdjointTractorMatrix om =
                        tractor_curvature(entry.chart, x, Vec::Unit(4, i), Vec::Unit(4, j),
                                          CurvatureMethod::commutator);
                    torsion = std::max(torsion, om.xi().norm());
                    trace = std::max(trace, std::abs(om.phi().trace()));
                }
    }
    require(torsion <= 1e-5, "torsion slot above 1e-5");
    require(trace <= 1e-5, "curvature trace above 1e-5");
    info << "max torsion " << torsion << ", max trace " << trace;
}

void criterion_weyl(std::ostringstream& info) {
    double sym = 0.0;
    for (const std::string& name : catalog::valid_names()) {
        auto entry = catalog::get_chart(name);
        const std::vector<Vec> pts = inner_grid(entry.chart, {3, 2, 2, 2}, 0.25);
        require(pts.size() >= 20, "needs at least 20 points");
        const int n = 4;
        for (const Vec& x : pts) {
            const CurvatureSuite cs = curvature_suite(entry.chart, x);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    double t13 = 0.0, t14 = 0.0, t23 = 0.0;
                    for (int c = 0; c < n; ++c)
                        for (int d = 0; d < n; ++d) {
                            t13 += cs.ginv(c, d) * cs.weyl4(c, a, d, b);
                            t14 += cs.ginv(c, d) * cs.weyl4(c, a, b, d);
                            t23 += cs.ginv(c, d) * cs.weyl4(a, c, d, b);
                        }
                    sym = std::max({sym, std::abs(t13), std::abs(t14), std::abs(t23)});
                }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) {
                            sym = std::max(sym, std::abs(cs.weyl4(i, j, k, l) -
                                                         cs.weyl4(k, l, i, j)));
                            sym = std::max(sym, std::abs(cs.weyl4(i, j, k, l) +
                                                         cs.weyl4(j, k, i, l) +
                                                         cs.weyl4(k, i, j, l)));
                            sym = std::max(sym, std::abs(cs.weyl4(i, j, k, l) +
                                                         cs.weyl4(i, k, l, j) +
                                                         cs.weyl4(i, l, j, k)));
                        }
        }
    }
    require(sym <= 1e-6, "a Weyl symmetry residual exceeds 1e-6");

    // conformal invariance of the (1,3) tensor, and non-invariance of the
    // Schouten-derivative antisymmetrization
    double weyl_change = 0.0, cotton_change = 0.0;
    for (const char* name : {"perturbed_flat", "berger_fefferman"}) {
        auto entry = catalog::get_chart(name);
        for (const auto& resc : catalog::rescalings()) {
            const Chart re = conformal_rescale(entry.chart, resc.phi);
            for (const Vec& x : inner_grid(entry.chart, {2, 2, 2, 1})) {
                const CurvatureSuite a = curvature_suite(entry.chart, x);
                const CurvatureSuite b = curvature_suite(re, x);
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j)
                        weyl_change = std::max(
                            weyl_change, (a.weyl_endo(i, j) - b.weyl_endo(i, j)).norm());
                Tensor3 diff(4);
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j)
                        for (int k = 0; k < 4; ++k)
                            diff(i, j, k) = a.cotton(i, j, k) - b.cotton(i, j, k);
                cotton_change = std::max(cotton_change, diff.norm());
            }
        }
    }
    require(weyl_change <= 1e-5, "(1,3) Weyl moved under a rescaling");
    require(cotton_change > 1e-3, "no witness for the non-invariant tensor");
    info << "symmetry residual " << sym << ", weyl change " << weyl_change
         << ", cotton change " << cotton_change;
}

void criterion_flat_killing(std::ostringstream& info) {
    auto entry = catalog::get_chart("flat");
    const Signature sig = entry.chart.sig;
    const int n = sig.n();
    const Mat Jn = metric_form(sig);
    std::vector<VectorField> basis;
    for (int i = 0; i < n; ++i)
        basis.push_back(catalog::moebius_field(sig, Vec::Unit(n, i), Mat::Zero(n, n), 0.0,
                                               RowVec::Zero(n), "t" + std::to_string(i)));
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const Mat A = Vec::Unit(n, a) * (Vec::Unit(n, b).transpose() * Jn) -
                          Vec::Unit(n, b) * (Vec::Unit(n, a).transpose() * Jn);
            basis.push_back(catalog::moebius_field(sig, Vec::Zero(n), A, 0.0, RowVec::Zero(n),
                                                   "r" + std::to_string(a) + std::to_string(b)));
        }
    basis.push_back(
        catalog::moebius_field(sig, Vec::Zero(n), Mat::Zero(n, n), 1.0, RowVec::Zero(n), "d"));
    for (int i = 0; i < n; ++i)
        basis.push_back(catalog::moebius_field(sig, Vec::Zero(n), Mat::Zero(n, n), 0.0,
                                               RowVec::Unit(n, i), "s" + std::to_string(i)));
    require(basis.size() == 15, "flat (3,1) conformal algebra should have 15 generators");
    double worst = 0.0;
    for (const auto& f : basis)
        for (const Vec& x : {Vec(Vec::Constant(4, -0.35)), Vec(Vec::Zero(4)),
                             Vec(Vec::Constant(4, 0.3))})
            worst = std::max(worst, max_parallel_residual(entry.chart, f, x));
    require(worst <= 1e-6, "a generator is not parallel");
    info << "15 generators, max parallel residual " << worst;
}

void criterion_sparling(std::ostringstream& info) {
    auto entry = catalog::get_chart("heisenberg_fefferman");
    const VectorField& j = catalog::get_field(entry, "j");
    const SparlingCertificate cert =
        sparling_report(entry.chart, j, inner_grid(entry.chart, {3, 3, 2, 2}, 0.2), 1e-5);
    require(cert.pass, "certificate failed: " + cert.failed_conditions);
    require(cert.killing_residual <= 1e-5, "killing residual");
    require(cert.lightlike_residual <= 1e-5, "lightlike residual");
    require(cert.weyl_residual <= 1e-5, "weyl insertion residual");
    require(cert.cotton_residual <= 1e-5, "cotton insertion residual");
    require(cert.ric_constant && cert.ric_jj_min > 0.0, "Ric(j,j) not constant positive");
    require(cert.ric_jj_normalized &&
                std::abs(*cert.ric_jj_normalized - 2.0) <= 1e-5,
            "normalized Ric(j,j) != 2");
    require(cert.dj_pairing_normalized &&
                std::abs(*cert.dj_pairing_normalized + 1.0) <= 1e-5,
            "normalized pairing != -1");
    info << "Ric(j,j) -> " << *cert.ric_jj_normalized << ", pairing -> "
         << *cert.dj_pairing_normalized;
}

void criterion_theorem1(std::ostringstream& info) {
    catalog::CatalogEntry entry;
    bool fallback = false;
    try {
        entry = catalog::get_chart("berger_fefferman", {{"lambda", 1.2}});
    } catch (const NumericalError& e) {
        fallback = true;
        entry = catalog::get_chart("heisenberg_fefferman");
    }
    const VectorField& j = catalog::get_field(entry, "j");
    const std::vector<Vec> grid = inner_grid(entry.chart, {2, 2, 2, 2}, 0.3);
    const SparlingCertificate cert = sparling_report(entry.chart, j, grid, 1e-5);
    require(cert.pass, "entry lost its certificate");
    const double scale = cert.normalization_scale.value_or(1.0);

    const Vec x0 = entry.chart.domain.center();
    VectorField js = j;
    if (scale != 1.0) {
        // normalized field
        auto eval = j.eval;
        auto jet = j.jet;
        js.eval = [eval, scale](const Vec& x) { return Vec(scale * eval(x)); };
        js.jet = [jet, scale](const Vec& x, Vec& V, Mat& dV, std::vector<Mat>& ddV) {
            jet(x, V, dV, ddV);
            V *= scale;
            dV *= scale;
            for (auto& h : ddV) h *= scale;
        };
    }
    const Mat J = splitting_matrix(entry.chart, js, x0).matrix();
    const ComplexStructureReport csr =
        complex_structure_report(J, entry.chart.metric(x0), 1e-4);
    require(csr.square_residual <= 1e-4, "||A_Q^2 + id|| above 1e-4");
    require(csr.is_complex_structure, "A_Q is not a complex structure");

    double par = 0.0;
    for (const Vec& x : grid) par = std::max(par, max_parallel_residual(entry.chart, js, x));
    require(par <= 1e-4, "A_Q parallel residual above 1e-4");

    double curv = 0.0;
    for (const Vec& x : grid)
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b)
                curv = std::max(curv,
                                tractor_curvature(entry.chart, x, Vec::Unit(4, a),
                                                  Vec::Unit(4, b), CurvatureMethod::assembled)
                                    .matrix()
                                    .norm());
    if (!fallback)
        require(curv > 1e-3, "tractor curvature unexpectedly vanishes");

    HolonomyOptions opts;
    opts.transport_steps = 256;
    HolonomyReport rep = holonomy_algebra_estimate(entry.chart, x0, opts);
    rep = classify_holonomy(entry.chart, std::move(rep), J, 1e-4);
    require(rep.max_commutator_residual <= 1e-4, "a holonomy sample fails [A,J] = 0");
    require(rep.max_trace_residual <= 1e-4, "a holonomy sample has complex trace");
    require(rep.classification == "su-compatible", "classification is not su-compatible");
    if (!fallback) require(rep.rank >= 1, "anisotropic entry should have positive rank");
    info << (fallback ? "FALLBACK to heisenberg_fefferman; " : "")
         << "rank " << rep.rank << ", max [A,J] " << rep.max_commutator_residual
         << ", max trace " << rep.max_trace_residual;
}

void criterion_negative_control(std::ostringstream& info) {
    HolonomyOptions opts;
    opts.transport_steps = 128;
    auto perturbed = catalog::get_chart("perturbed_flat", {{"eps", 0.01}, {"seed", 7}});
    HolonomyReport rep = holonomy_algebra_estimate(perturbed.chart, Vec::Zero(4), opts);
    rep = classify_holonomy(perturbed.chart, std::move(rep), std::nullopt, 1e-4);
    require(rep.rank >= 1, "perturbed flat rank is zero");
    require(rep.classification == "generic", "perturbed flat should classify generic");

    auto flat = catalog::get_chart("flat");
    const HolonomyReport fr = holonomy_algebra_estimate(flat.chart, Vec::Zero(4), opts);
    require(fr.rank == 0, "flat rank is nonzero");
    info << "perturbed rank " << rep.rank << " (generic), flat rank " << fr.rank;
}

void criterion_determinism(std::ostringstream& info) {
    RunConfig cfg;
    cfg.metric = "perturbed_flat";
    cfg.params = {{"eps", 0.01}, {"seed", 7}};
    cfg.task = "holonomy-estimate";
    cfg.grid_counts = {2, 2, 2, 2};
    cfg.transport_steps = 96;
    cfg.seed = 7;
    const std::string a = serialize_report(run_task(cfg).report);
    const std::string b = serialize_report(run_task(cfg).report);
    require(a == b, "holonomy reports differ between runs");
    RunConfig cfg2;
    cfg2.metric = "heisenberg_fefferman";
    cfg2.task = "sparling-check";
    cfg2.field = "j";
    cfg2.grid_counts = {2, 2, 2, 2};
    cfg2.seed = 3;
    const std::string c = serialize_report(run_task(cfg2).report);
    const std::string d = serialize_report(run_task(cfg2).report);
    require(c == d, "sparling reports differ between runs");
    info << "byte-identical reports (" << a.size() << " and " << c.size() << " bytes)";
}

} // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "algebra suite: table exact, basis-independent codifferential, normalization", 5.0,
         criterion_algebra},
        {2, "complex-structure round trip over 100 + 100 seeded cases", 5.0, criterion_lemma1},
        {3, "curvature conventions gate: assembled vs commutator", 60.0,
         criterion_curvature_gate},
        {4, "normalization holds numerically on every catalog metric", 120.0,
         criterion_normalization},
        {5, "Weyl symmetries, conformal invariance, non-invariance witness", 120.0,
         criterion_weyl},
        {6, "flat-model conformal algebra maps to parallel tractors", 30.0,
         criterion_flat_killing},
        {7, "null-Killing certificate with both normalized identities", 60.0,
         criterion_sparling},
        {8, "unitary holonomy reduction end to end on the anisotropic entry", 300.0,
         criterion_theorem1},
        {9, "negative control: generic rank vs flat rank", 120.0, criterion_negative_control},
        {10, "byte-identical reports for identical config and seed", 60.0,
         criterion_determinism},
    };

    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::ostringstream info;
        bool ok = true;
        std::string why;
        try {
            c.body(info);
        } catch (const std::exception& e) {
            ok = false;
            why = e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ok && secs > c.budget_seconds) {
            ok = false;
            why = "runtime " + std::to_string(secs) + "s exceeds budget";
        }
        if (!ok) ++failures;
        std::printf("criterion %2d [%s] %s (%.2fs%s%s)\n", c.id, ok ? "PASS" : "FAIL",
                    c.label.c_str(), secs, info.str().empty() ? "" : "; ",
                    ok ? info.str().c_str() : why.c_str());
        std::fflush(stdout);
    }
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
