#include "tractor/tractor_bundle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tractor {

AdjointTractorMatrix AdjointTractorMatrix::from_parts(const Vec& xi, const Mat& phi_ss,
                                                      double phi_c, const RowVec& eta,
                                                      const Mat& g) {
    const int n = static_cast<int>(g.rows());
    Mat m = compose_graded_general(xi, phi_ss + phi_c * Mat::Identity(n, n), phi_c, eta, g);
    return AdjointTractorMatrix(std::move(m));
}

ConnectionPoint connection_point(const Chart& chart, const Vec& x) {
    const CurvatureSuite cs = curvature_suite_no_cotton(chart, x);
    ConnectionPoint cp;
    cp.g = cs.g;
    cp.ginv = cs.ginv;
    cp.gamma = cs.gamma;
    cp.schouten = cs.schouten;
    return cp;
}

Mat ConnectionPoint::direction_matrix(const Vec& X) const {
    const int n = static_cast<int>(g.rows());
    Mat M = Mat::Zero(n + 2, n + 2);
    const RowVec KX = (schouten * X).transpose();  // K(X, .)
    M.block(0, 1, 1, n) = KX;
    M.block(1, 0, n, 1) = X;
    Mat GamX = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) {
            double t = 0.0;
            for (int i = 0; i < n; ++i) t += gamma[k](i, m) * X(i);
            GamX(k, m) = t;
        }
    M.block(1, 1, n, n) = GamX;
    M.block(1, n + 1, n, 1) = -(ginv * KX.transpose());
    M.block(n + 1, 1, 1, n) = -(g * X).transpose();
    return M;
}

AdjointTractorMatrix tractor_connection_matrix(const Chart& chart, const Vec& x, const Vec& X) {
    return AdjointTractorMatrix(connection_point(chart, x).direction_matrix(X));
}

TractorTriple tractor_covariant_derivative(const Chart& chart, const TractorField& t,
                                           const Vec& x, const Vec& X) {
    const double h = chart.fd_step;
    const double xn = X.norm();
    if (xn == 0.0) return TractorTriple::from_column(Vec::Zero(chart.dim + 2));
    const Vec dir = X / xn;
    const Vec dt =
        xn * (t(x + h * dir).column() - t(x - h * dir).column()) / (2.0 * h);
    const Mat G = connection_point(chart, x).direction_matrix(X);
    return TractorTriple::from_column(dt + G * t(x).column());
}

static AdjointTractorMatrix assembled_from_suite(const CurvatureSuite& cs, const Vec& X,
                                                 const Vec& Y) {
    const int n = static_cast<int>(cs.g.rows());
    Mat M = Mat::Zero(n + 2, n + 2);
    Mat W = Mat::Zero(n, n);
    RowVec C = RowVec::Zero(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double w = X(i) * Y(j);
            if (w == 0.0) continue;
            W += w * cs.weyl_endo(i, j);
            C += w * cs.cotton_cov(i, j);
        }
    M.block(1, 1, n, n) = W;
    M.block(0, 1, 1, n) = -C;
    M.block(1, n + 1, n, 1) = cs.ginv * C.transpose();
    return AdjointTractorMatrix(std::move(M));
}

AdjointTractorMatrix tractor_curvature(const Chart& chart, const Vec& x, const Vec& X,
                                       const Vec& Y, CurvatureMethod method) {
    chart.require_inside(x);
    const int n = chart.dim;
    if (method == CurvatureMethod::assembled) {
        return assembled_from_suite(curvature_suite(chart, x), X, Y);
    }
    // commutator of covariant derivatives on coordinate pairs, extended bilinearly
    const double h = chart.fd_step;
    std::vector<Mat> G0(n);
    const ConnectionPoint cp = connection_point(chart, x);
    for (int k = 0; k < n; ++k) G0[k] = cp.direction_matrix(Vec::Unit(n, k));
    std::vector<std::vector<Mat>> dG(n, std::vector<Mat>(n));  // dG[c][k] = d_c Gamma(d_k)
    for (int c = 0; c < n; ++c) {
        Vec xp = x, xm = x;
        xp(c) += h;
        xm(c) -= h;
        const ConnectionPoint cpp = connection_point(chart, xp);
        const ConnectionPoint cpm = connection_point(chart, xm);
        for (int k = 0; k < n; ++k)
            dG[c][k] = (cpp.direction_matrix(Vec::Unit(n, k)) -
                        cpm.direction_matrix(Vec::Unit(n, k))) /
                       (2.0 * h);
    }
    Mat M = Mat::Zero(n + 2, n + 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double w = X(i) * Y(j);
            if (w == 0.0) continue;
            M += w * (dG[i][j] - dG[j][i] + G0[i] * G0[j] - G0[j] * G0[i]);
        }
    return AdjointTractorMatrix(std::move(M));
}

CurvatureCrossCheck curvature_cross_check(const Chart& chart, const Vec& x, const Vec& X,
                                          const Vec& Y) {
    CurvatureCrossCheck out;
    out.assembled = tractor_curvature(chart, x, X, Y, CurvatureMethod::assembled);
    out.commutator = tractor_curvature(chart, x, X, Y, CurvatureMethod::commutator);
    const double na = out.assembled.matrix().norm();
    const double diff = (out.assembled.matrix() - out.commutator.matrix()).norm();
    out.rel_deviation = diff / std::max(na, 1e-6);
    return out;
}

AdjointTractorMatrix tractor_curvature_checked(const Chart& chart, const Vec& x, const Vec& X,
                                               const Vec& Y, double tol) {
    const CurvatureCrossCheck cc = curvature_cross_check(chart, x, X, Y);
    if (cc.rel_deviation > tol) {
        std::ostringstream os;
        os << "curvature method mismatch: relative deviation " << cc.rel_deviation
           << ", ||assembled|| = " << cc.assembled.matrix().norm()
           << ", ||commutator|| = " << cc.commutator.matrix().norm();
        throw NumericalError(os.str());
    }
    return cc.assembled;
}

Mat adjoint_covariant_derivative(const Chart& chart,
                                 const std::function<Mat(const Vec&)>& section, const Vec& x,
                                 const Vec& X) {
    const double h = chart.fd_step;
    const double xn = X.norm();
    const int N = chart.dim + 2;
    if (xn == 0.0) return Mat::Zero(N, N);
    const Vec dir = X / xn;
    const Mat dA = xn * (section(x + h * dir) - section(x - h * dir)) / (2.0 * h);
    const Mat G = connection_point(chart, x).direction_matrix(X);
    const Mat A = section(x);
    return dA + G * A - A * G;
}

Mat parallel_transport(const Chart& chart, const Curve& curve, int steps) {
    if (steps < 16) throw ValidationError("transport needs at least 16 steps");
    const int N = chart.dim + 2;
    auto vel = curve.velocity;
    if (!vel) {
        auto gamma = curve.gamma;
        const double dt = 1e-6 * (curve.t1 - curve.t0);
        vel = [gamma, dt](double t) { return Vec((gamma(t + dt) - gamma(t - dt)) / (2.0 * dt)); };
    }
    auto rhs = [&](double t, const Mat& T) {
        const Vec x = curve.gamma(t);
        chart.require_inside(x);
        return Mat(-connection_point(chart, x).direction_matrix(vel(t)) * T);
    };
    Mat T = Mat::Identity(N, N);
    const double h = (curve.t1 - curve.t0) / steps;
    double t = curve.t0;
    for (int s = 0; s < steps; ++s) {
        const Mat k1 = rhs(t, T);
        const Mat k2 = rhs(t + 0.5 * h, T + 0.5 * h * k1);
        const Mat k3 = rhs(t + 0.5 * h, T + 0.5 * h * k2);
        const Mat k4 = rhs(t + h, T + h * k3);
        T += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    return T;
}

Mat parallel_transport_polyline(const Chart& chart, const std::vector<Vec>& points,
                                int steps_per_edge) {
    const int N = chart.dim + 2;
    Mat T = Mat::Identity(N, N);
    for (size_t e = 0; e + 1 < points.size(); ++e) {
        const Vec p = points[e], q = points[e + 1];
        if ((q - p).norm() == 0.0) continue;
        Curve c;
        c.gamma = [p, q](double t) { return Vec(p + t * (q - p)); };
        c.velocity = [p, q](double) { return Vec(q - p); };
        T = parallel_transport(chart, c, steps_per_edge) * T;
    }
    return T;
}

// loop holonomy log divided by the enclosed coordinate area, so samples sit at
// curvature scale regardless of the final loop size
static Mat loop_sample(const Chart& chart, const Vec& x0, const Vec& y, int i, int j,
                       double& eps, int steps) {
    const int n = chart.dim;
    for (int attempt = 0; attempt < 40; ++attempt) {
        if (eps < 1e-7)
            throw NumericalError("holonomy loop size underflow at eps = " + std::to_string(eps));
        std::vector<Vec> loop = {y,
                                 y + eps * Vec::Unit(n, i),
                                 y + eps * Vec::Unit(n, i) + eps * Vec::Unit(n, j),
                                 y + eps * Vec::Unit(n, j),
                                 y};
        bool inside = true;
        for (const Vec& p : loop) inside = inside && chart.domain.contains(p);
        if (!inside) {
            eps *= 0.5;
            continue;
        }
        Mat H = parallel_transport_polyline(chart, loop, steps);
        if ((y - x0).norm() > 0.0) {
            const Mat out = parallel_transport_polyline(chart, {x0, y}, steps);
            const Mat back = parallel_transport_polyline(chart, {y, x0}, steps);
            H = back * H * out;
        }
        const double dist = (H - Mat::Identity(n + 2, n + 2)).norm();
        if (dist < 0.5) return log_near_identity(H) / (eps * eps);
        eps *= 0.5;
    }
    throw NumericalError("holonomy loop did not contract enough");
}

static RankResult rank_with_floor(const std::vector<Mat>& samples, int n, double rel_tol,
                                  double abs_floor) {
    Mat rows(std::max<int>(1, static_cast<int>(samples.size())), (n + 2) * (n + 2));
    rows.setZero();
    int r = 0;
    for (const Mat& s : samples) {
        Eigen::Map<const Vec> v(s.data(), s.size());
        rows.row(r++) = v.transpose();
    }
    RankResult rr = numerical_rank(rows, rel_tol);
    // integration noise sits at machine-ish scale; require curvature-scale signal
    int rank = 0;
    const double cutoff =
        std::max(rel_tol * (rr.singular_values.empty() ? 0.0 : rr.singular_values[0]), abs_floor);
    for (double sv : rr.singular_values)
        if (sv > cutoff) ++rank;
    rr.rank = rank;
    return rr;
}

HolonomyReport holonomy_algebra_estimate(const Chart& chart, const Vec& x0,
                                         const HolonomyOptions& opts) {
    chart.require_inside(x0);
    const int n = chart.dim;
    HolonomyReport rep;
    rep.base_point = x0;
    const Mat Jg = tractor_form_of_metric(chart.metric(x0));

    // deterministic anchors: x0 plus scaled corner offsets inside the box
    std::vector<Vec> anchors = {x0};
    for (int a = 0; a < opts.base_points; ++a) {
        Vec off = Vec::Zero(n);
        for (int d = 0; d < n; ++d)
            off(d) = 0.15 * (chart.domain.hi(d) - chart.domain.lo(d)) *
                     (((a + d) % 3) - 1);  // pattern in {-1,0,1}
        const Vec y = x0 + off;
        if (chart.domain.contains(y) && off.norm() > 0) anchors.push_back(y);
    }

    std::vector<Mat> raw;
    double used_eps = opts.loop_eps;
    if (opts.use_loops) {
        for (const Vec& y : anchors)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    double eps = opts.loop_eps;
                    raw.push_back(loop_sample(chart, x0, y, i, j, eps, opts.transport_steps));
                    used_eps = std::min(used_eps, eps);
                }
        rep.final_loop_eps = used_eps;
        rep.rank_loops = rank_with_floor(raw, n, opts.rank_rel_tol, opts.rank_abs_floor).rank;
    }

    std::vector<Mat> span_samples;
    if (opts.use_curvature_span) {
        for (const Vec& y : anchors) {
            const CurvatureSuite cs = curvature_suite(chart, y);
            Mat out, back;
            const bool away = (y - x0).norm() > 0.0;
            if (away) {
                out = parallel_transport_polyline(chart, {x0, y}, opts.transport_steps);
                back = parallel_transport_polyline(chart, {y, x0}, opts.transport_steps);
            }
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    Mat om = assembled_from_suite(cs, Vec::Unit(n, i), Vec::Unit(n, j)).matrix();
                    if (away) om = back * om * out;
                    span_samples.push_back(om);
                }
        }
        rep.rank_span =
            rank_with_floor(span_samples, n, opts.rank_rel_tol, opts.rank_abs_floor).rank;
    }

    // loop samples drive the reported rank and classification when available
    std::vector<Mat>& primary = opts.use_loops ? raw : span_samples;
    for (const Mat& s : primary) {
        if (s.norm() > opts.rank_abs_floor) {
            Mat u = s / s.norm();
            rep.max_skew_defect = std::max(
                rep.max_skew_defect, (u.transpose() * Jg + Jg * u).cwiseAbs().maxCoeff());
            rep.samples.push_back(std::move(u));
        }
    }
    const RankResult rr = rank_with_floor(primary, n, opts.rank_rel_tol, opts.rank_abs_floor);
    rep.rank = rr.rank;
    rep.singular_values = rr.singular_values;
    return rep;
}

HolonomyReport classify_holonomy(const Chart& chart, HolonomyReport report,
                                 const std::optional<Mat>& J, double tol) {
    if (!J.has_value()) {
        report.classification = report.rank == 0 ? "flat" : "generic";
        return report;
    }
    const Mat g0 = chart.metric(report.base_point);
    const ComplexStructureReport csr = complex_structure_report(*J, g0, tol);
    if (!csr.is_complex_structure) {
        std::ostringstream os;
        os << "J fails the complex structure check:";
        if (csr.eigen_residual_m > tol || csr.eigen_residual_v > tol ||
            csr.lightlike_residual_m > tol || csr.lightlike_residual_v > tol)
            os << " condition (1) residuals " << csr.eigen_residual_m << ", "
               << csr.eigen_residual_v << ", lightlike " << csr.lightlike_residual_m << ", "
               << csr.lightlike_residual_v << ";";
        if (csr.pairing_residual > tol || !csr.pairing_sign_ok)
            os << " condition (2) pairing residual " << csr.pairing_residual
               << (csr.pairing_sign_ok ? "" : " (non-positive pairing)") << ";";
        if (csr.restriction_residual > tol)
            os << " condition (3) restriction residual " << csr.restriction_residual << ";";
        os << " ||J^2 + id|| = " << csr.square_residual;
        throw ValidationError(os.str());
    }
    report.J_used = *J;
    report.max_commutator_residual = 0.0;
    report.max_trace_residual = 0.0;
    for (const Mat& A : report.samples) {
        const SuResiduals r = su_residuals(*J, A);
        report.max_commutator_residual = std::max(report.max_commutator_residual,
                                                  r.commutator_norm);
        report.max_trace_residual = std::max(report.max_trace_residual,
                                             std::abs(r.complex_trace));
    }
    if (report.max_commutator_residual <= tol) {
        report.classification =
            report.max_trace_residual <= tol ? "su-compatible" : "u-compatible";
    } else {
        report.classification = "generic";
    }
    return report;
}

} // namespace tractor
