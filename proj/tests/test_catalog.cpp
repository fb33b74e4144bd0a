#include <doctest.h>

#include <cmath>

#include "tractor/catalog.hpp"
#include "tractor/tractor_bundle.hpp"

using namespace tractor;

TEST_CASE("catalog: unknown names are rejected with the list of valid ones") {
    CHECK_THROWS_WITH_AS(catalog::get_chart("nonsense"),
                         doctest::Contains("heisenberg_fefferman"), ValidationError);
}

TEST_CASE("catalog: flat entry has the documented constant metric") {
    auto entry = catalog::get_chart("flat", {{"r", 3}, {"s", 1}});
    const Mat g = entry.chart.metric(Vec::Zero(4));
    Mat expect = Mat::Identity(4, 4);
    expect(0, 0) = -1.0;
    CHECK((g - expect).norm() == 0.0);
    CHECK(curvature_suite(entry.chart, Vec::Zero(4)).riem.norm() == 0.0);
    CHECK(entry.reference.expected_rank == 0);
}

TEST_CASE("catalog: every entry is invertible with its declared signature on a grid") {
    for (const std::string& name : catalog::valid_names()) {
        auto entry = catalog::get_chart(name);
        std::vector<int> counts(entry.chart.dim, 4);  // 256 points at n = 4
        const std::vector<Vec> pts = grid_points(entry.chart.domain, counts);
        CHECK(pts.size() >= 100);
        int shown = 0;
        for (const Vec& x : pts) {
            Eigen::SelfAdjointEigenSolver<Mat> es(entry.chart.metric(x));
            int neg = 0;
            for (int i = 0; i < entry.chart.dim; ++i) {
                CHECK(std::abs(es.eigenvalues()(i)) > 1e-8);
                if (es.eigenvalues()(i) < 0) ++neg;
            }
            CHECK(neg == entry.chart.sig.s);
            ++shown;
        }
        CHECK(shown >= 100);
    }
}

TEST_CASE("catalog: perturbed flat is seeded, reproducible and genuinely curved") {
    auto a = catalog::get_chart("perturbed_flat", {{"eps", 0.01}, {"seed", 7}});
    auto b = catalog::get_chart("perturbed_flat", {{"eps", 0.01}, {"seed", 7}});
    auto c = catalog::get_chart("perturbed_flat", {{"eps", 0.01}, {"seed", 8}});
    const Vec x = Vec::Constant(4, 0.3);
    CHECK((a.chart.metric(x) - b.chart.metric(x)).norm() == 0.0);
    CHECK((a.chart.metric(x) - c.chart.metric(x)).norm() > 1e-6);
    double weyl = 0.0;
    for (const Vec& p : grid_points(a.chart.domain, {3, 3, 1, 1}))
        weyl = std::max(weyl, curvature_suite(a.chart, p).weyl4.norm());
    CHECK(weyl > 1e-4);
}

TEST_CASE("catalog: fefferman entries ship a certified gate") {
    for (const char* name : {"heisenberg_fefferman", "berger_fefferman"}) {
        auto entry = catalog::get_chart(name);
        REQUIRE(entry.gate.has_value());
        CHECK(entry.gate->pass);
        CHECK(entry.gate->killing_residual <= 1e-6);
        CHECK(entry.gate->lightlike_residual <= 1e-5);
        CHECK(entry.gate->weyl_residual <= 1e-5);
        CHECK(entry.gate->cotton_residual <= 1e-5);
        CHECK(entry.gate->ric_jj_min > 0.0);
    }
}

TEST_CASE("catalog: berger family is flat exactly at lambda = 1") {
    auto round = catalog::get_chart("berger_fefferman", {{"lambda", 1.0}});
    auto squashed = catalog::get_chart("berger_fefferman", {{"lambda", 1.2}});
    double flat_weyl = 0.0, squashed_weyl = 0.0;
    Box inner = round.chart.domain;
    const Vec span = inner.hi - inner.lo;
    inner.lo += 0.25 * span;
    inner.hi -= 0.25 * span;
    for (const Vec& x : grid_points(inner, {2, 2, 2, 1})) {
        flat_weyl = std::max(flat_weyl, curvature_suite(round.chart, x).weyl4.norm());
        squashed_weyl = std::max(squashed_weyl, curvature_suite(squashed.chart, x).weyl4.norm());
    }
    CHECK(flat_weyl < 1e-9);
    CHECK(squashed_weyl > 1.0);
    // and the tractor curvature follows suit
    const Vec x0 = round.chart.domain.center();
    CHECK(tractor_curvature(round.chart, x0, Vec::Unit(4, 0), Vec::Unit(4, 1),
                            CurvatureMethod::assembled)
              .matrix()
              .norm() < 1e-7);
    CHECK(tractor_curvature(squashed.chart, x0, Vec::Unit(4, 0), Vec::Unit(4, 1),
                            CurvatureMethod::assembled)
              .matrix()
              .norm() > 0.1);
}

TEST_CASE("catalog: reference data matches the spec'd expectations") {
    CHECK(catalog::reference_data("flat").expected_rank == 0);
    CHECK(catalog::reference_data("flat").expected_class == "flat");
    CHECK(catalog::reference_data("sphere_round").expected_rank == 0);
    const auto pf = catalog::reference_data("perturbed_flat");
    CHECK(pf.expected_rank == 1);
    CHECK(pf.rank_is_lower_bound);
    CHECK(pf.expected_class == "generic");
    const auto hf = catalog::reference_data("heisenberg_fefferman");
    CHECK(hf.expected_class == "su-compatible");
    CHECK(hf.expected_rank == 0);  // conformally flat entry
    CHECK_FALSE(catalog::reference_data("berger_fefferman").expected_class.empty());
}

TEST_CASE("catalog: entries carry provenance notes for their expectations") {
    for (const std::string& name : catalog::valid_names()) {
        auto entry = catalog::get_chart(name);
        CHECK_FALSE(entry.reference.notes.empty());
        CHECK_FALSE(entry.docs.empty());
    }
}

TEST_CASE("catalog: field lookup errors list the available names") {
    auto entry = catalog::get_chart("heisenberg_fefferman");
    CHECK_THROWS_WITH_AS(catalog::get_field(entry, "nope"), doctest::Contains("j"),
                         ValidationError);
}

TEST_CASE("catalog: invalid parameters are rejected") {
    CHECK_THROWS_AS(catalog::get_chart("berger_fefferman", {{"lambda", -1.0}}), ValidationError);
    CHECK_THROWS_AS(catalog::get_chart("sphere_round", {{"radius", 0.0}}), ValidationError);
    CHECK_THROWS_AS(catalog::get_chart("flat", {{"r", 1}, {"s", 1}}), ValidationError);
}
