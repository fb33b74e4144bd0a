#include "tractor/killing_analysis.hpp"

#include <cmath>
#include <sstream>

namespace tractor {

static Mat grad_endo_at(const Chart& chart, const VectorField& V, const Vec& x) {
    return covariant_derivative_endo(chart, V, x);
}

Vec curved_laplacian_field(const Chart& chart, const VectorField& V, const Vec& x) {
    const int n = chart.dim;
    const CurvatureSuite cs = curvature_suite_no_cotton(chart, x);
    const double h = chart.fd_step;
    // d_c (nabla_b V)^a by central differences over the exact first derivative
    std::vector<Mat> dN(n);
    for (int c = 0; c < n; ++c) {
        Vec xp = x, xm = x;
        xp(c) += h;
        xm(c) -= h;
        dN[c] = (grad_endo_at(chart, V, xp) - grad_endo_at(chart, V, xm)) / (2.0 * h);
    }
    const Mat N = grad_endo_at(chart, V, x);  // N(a,b) = (nabla_b V)^a
    Vec lap = Vec::Zero(n);
    for (int a = 0; a < n; ++a) {
        double t = 0.0;
        for (int c = 0; c < n; ++c)
            for (int b = 0; b < n; ++b) {
                double term = dN[c](a, b);
                for (int m = 0; m < n; ++m)
                    term += cs.gamma[a](c, m) * N(m, b) - cs.gamma[m](c, b) * N(a, m);
                t += cs.ginv(c, b) * term;
            }
        lap(a) = t;
    }
    const Vec val = V.eval(x);
    return (lap + cs.scal / (2.0 * (n - 1)) * val) / (n - 2);
}

AdjointTractorMatrix splitting_matrix(const Chart& chart, const VectorField& V, const Vec& x) {
    const int n = chart.dim;
    const Mat g = chart.metric(x);
    const Mat ginv = metric_inverse_checked(g);
    const Mat M = grad_endo_at(chart, V, x);
    const double div = M.trace();
    const Mat Mstar = ginv * M.transpose() * g;
    const Mat asym = 0.5 * (M - Mstar);
    const Vec DV = curved_laplacian_field(chart, V, x);
    const RowVec eta = (g * DV).transpose();
    const Vec val = V.eval(x);

    Mat A = Mat::Zero(n + 2, n + 2);
    A(0, 0) = -div / n;
    A(n + 1, n + 1) = div / n;
    A.block(0, 1, 1, n) = eta;
    A.block(1, 0, n, 1) = val;
    A.block(1, 1, n, n) = asym + (div / n) * Mat::Identity(n, n);
    A.block(1, n + 1, n, 1) = -ginv * eta.transpose();
    A.block(n + 1, 1, 1, n) = -(g * val).transpose();
    return AdjointTractorMatrix(std::move(A));
}

SplittingResult splitting_operator(const Chart& chart, const VectorField& V) {
    SplittingResult out;
    out.A_Q = [&chart, V](const Vec& x) { return splitting_matrix(chart, V, x); };
    out.components = [&chart, V](const Vec& x) {
        SplittingResult::At at;
        const Mat g = chart.metric(x);
        const Mat ginv = metric_inverse_checked(g);
        const Mat M = grad_endo_at(chart, V, x);
        at.V = V.eval(x);
        at.div = M.trace();
        at.asym_grad = 0.5 * (M - ginv * M.transpose() * g);
        at.DV = curved_laplacian_field(chart, V, x);
        return at;
    };
    return out;
}

LemmaResiduals lemma_residuals(const Chart& chart, const VectorField& V, const Vec& x,
                               const Vec& X, double killing_tol) {
    LemmaResiduals out;
    const KillingResidual kr = conformal_killing_residual(chart, V, x);
    out.killing = kr.residual;
    out.killing_ok = kr.residual <= killing_tol;

    auto section = [&chart, &V](const Vec& y) { return splitting_matrix(chart, V, y).matrix(); };
    const Mat nabA = adjoint_covariant_derivative(chart, section, x, X);
    out.parallel = nabA.norm();
    const Mat om = tractor_curvature(chart, x, V.eval(x), X, CurvatureMethod::assembled).matrix();
    out.lm1 = (nabA + om).norm();
    return out;
}

bool SparlingCertificate::evaluate(double tol) {
    std::ostringstream failed;
    auto check = [&](bool ok, const char* label) {
        if (!ok) {
            if (failed.tellp() > 0) failed << ", ";
            failed << label;
        }
    };
    check(killing_residual <= tol, "killing");
    check(lightlike_residual <= tol, "lightlike");
    check(weyl_residual <= tol, "weyl-insertion");
    check(cotton_residual <= tol, "cotton-insertion");
    check(ric_jj_min > 0.0, "ricci-positivity");
    failed_conditions = failed.str();
    pass = failed_conditions.empty();
    return pass;
}

SparlingCertificate sparling_report(const Chart& chart, const VectorField& j,
                                    const std::vector<Vec>& grid, double tol) {
    if (grid.empty()) throw ValidationError("sparling report needs a nonempty grid");
    const int n = chart.dim;
    SparlingCertificate cert;
    cert.ric_jj_min = std::numeric_limits<double>::infinity();
    cert.ric_jj_max = -std::numeric_limits<double>::infinity();

    for (const Vec& x : grid) {
        chart.require_inside(x);
        const CurvatureSuite cs = curvature_suite(chart, x);
        const Vec jv = j.eval(x);
        const KillingResidual kr = conformal_killing_residual(chart, j, x);
        // plain Killing residual: ||L_j g||
        const Mat M = covariant_derivative_endo(chart, j, x);
        const Mat gM = cs.g * M;
        cert.killing_residual = std::max(cert.killing_residual, (gM + gM.transpose()).norm());
        cert.div_residual = std::max(cert.div_residual, std::abs(kr.div));
        cert.lightlike_residual =
            std::max(cert.lightlike_residual, std::abs(jv.dot(cs.g * jv)));
        double w2 = 0.0;
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double t = 0.0;
                    for (int a = 0; a < n; ++a) t += jv(a) * cs.weyl4(a, b, c, d);
                    w2 += t * t;
                }
        cert.weyl_residual = std::max(cert.weyl_residual, std::sqrt(w2));
        double c2 = 0.0;
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                double t = 0.0;
                for (int a = 0; a < n; ++a) t += jv(a) * cs.cotton(a, b, c);
                c2 += t * t;
            }
        cert.cotton_residual = std::max(cert.cotton_residual, std::sqrt(c2));
        const double ric_jj = jv.dot(cs.ric * jv);
        cert.ric_jj_min = std::min(cert.ric_jj_min, ric_jj);
        cert.ric_jj_max = std::max(cert.ric_jj_max, ric_jj);
    }

    cert.ric_constant = (cert.ric_jj_max - cert.ric_jj_min) <= 1e-6;
    if (cert.ric_constant && cert.ric_jj_min > 0.0) {
        const double c = std::sqrt((n - 2) / (0.5 * (cert.ric_jj_min + cert.ric_jj_max)));
        cert.normalization_scale = c;
        cert.ric_jj_normalized = c * c * 0.5 * (cert.ric_jj_min + cert.ric_jj_max);
        if (cert.killing_residual <= tol && cert.div_residual <= tol) {
            // pairing of the scaled field with its own normalized laplacian;
            // in a Fefferman gauge this is -1 - (div j / n)^2 = -1 at div j = 0
            const Vec x = grid[grid.size() / 2];
            const Vec jv = j.eval(x);
            const Vec Dj = curved_laplacian_field(chart, j, x);
            const Mat g = chart.metric(x);
            cert.dj_pairing_normalized = c * c * jv.dot(g * Dj);
        }
    }
    cert.evaluate(tol);
    return cert;
}

} // namespace tractor
