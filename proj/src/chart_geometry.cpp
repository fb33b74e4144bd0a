#include "tractor/chart_geometry.hpp"

#include <cmath>
#include <sstream>

namespace tractor {

double Tensor3::norm() const {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

double Tensor4::norm() const {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

void Chart::require_inside(const Vec& x) const {
    if (x.size() != dim) throw ValidationError("point has wrong dimension");
    if (!domain.contains(x))
        throw ValidationError("point is outside the chart domain");
}

Mat metric_inverse_checked(const Mat& g) {
    Eigen::FullPivLU<Mat> lu(g);
    Eigen::JacobiSVD<Mat> svd(g);
    const Vec& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1)
                                              : std::numeric_limits<double>::infinity();
    if (!lu.isInvertible() || cond > 1e12) {
        std::ostringstream os;
        os << "metric is numerically singular, condition number " << cond;
        throw NumericalError(os.str());
    }
    return lu.inverse();
}

Chart make_numeric_chart(Signature sig, Box domain, std::function<Mat(const Vec&)> metric,
                         double fd_step) {
    sig.validate();
    if (fd_step < 1e-8) throw ValidationError("fd_step below 1e-8 rejected");
    Chart c;
    c.dim = sig.n();
    c.sig = sig;
    c.fd_step = fd_step;
    c.domain = std::move(domain);
    c.metric = std::move(metric);
    c.analytic = false;
    const int n = c.dim;
    auto f = c.metric;
    const double h = fd_step;
    c.metric_jet = [f, n, h](const Vec& x) {
        MetricJet mj;
        mj.g = f(x);
        mj.dg.assign(n, Mat(n, n));
        mj.ddg.assign(n, std::vector<Mat>(n, Mat(n, n)));
        std::vector<Mat> plus(n), minus(n);
        for (int k = 0; k < n; ++k) {
            Vec xp = x, xm = x;
            xp(k) += h;
            xm(k) -= h;
            plus[k] = f(xp);
            minus[k] = f(xm);
            mj.dg[k] = (plus[k] - minus[k]) / (2.0 * h);
        }
        for (int k = 0; k < n; ++k) {
            mj.ddg[k][k] = (plus[k] - 2.0 * mj.g + minus[k]) / (h * h);
            for (int l = k + 1; l < n; ++l) {
                Vec xpp = x, xpm = x, xmp = x, xmm = x;
                xpp(k) += h; xpp(l) += h;
                xpm(k) += h; xpm(l) -= h;
                xmp(k) -= h; xmp(l) += h;
                xmm(k) -= h; xmm(l) -= h;
                mj.ddg[k][l] = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h);
                mj.ddg[l][k] = mj.ddg[k][l];
            }
        }
        return mj;
    };
    return c;
}

void christoffels_with_derivs(const MetricJet& mj, std::vector<Mat>& gamma,
                              std::vector<std::vector<Mat>>& dgamma) {
    const int n = static_cast<int>(mj.g.rows());
    const Mat ginv = metric_inverse_checked(mj.g);
    gamma.assign(n, Mat::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double s = 0.0;
                for (int l = 0; l < n; ++l)
                    s += ginv(k, l) * (mj.dg[i](j, l) + mj.dg[j](i, l) - mj.dg[l](i, j));
                gamma[k](i, j) = 0.5 * s;
                gamma[k](j, i) = gamma[k](i, j);
            }
    dgamma.assign(n, std::vector<Mat>(n, Mat::Zero(n, n)));
    std::vector<Mat> dginv(n);
    for (int c = 0; c < n; ++c) dginv[c] = -ginv * mj.dg[c] * ginv;
    for (int c = 0; c < n; ++c)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < n; ++l) {
                        s += dginv[c](k, l) * (mj.dg[i](j, l) + mj.dg[j](i, l) - mj.dg[l](i, j));
                        s += ginv(k, l) *
                             (mj.ddg[c][i](j, l) + mj.ddg[c][j](i, l) - mj.ddg[c][l](i, j));
                    }
                    dgamma[c][k](i, j) = 0.5 * s;
                    dgamma[c][k](j, i) = dgamma[c][k](i, j);
                }
}

std::vector<Mat> christoffels_unchecked(const Chart& chart, const Vec& x) {
    const MetricJet mj = chart.metric_jet(x);
    const Mat ginv = metric_inverse_checked(mj.g);
    const int n = chart.dim;
    std::vector<Mat> gamma(n, Mat::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double s = 0.0;
                for (int l = 0; l < n; ++l)
                    s += ginv(k, l) * (mj.dg[i](j, l) + mj.dg[j](i, l) - mj.dg[l](i, j));
                gamma[k](i, j) = 0.5 * s;
                gamma[k](j, i) = gamma[k](i, j);
            }
    return gamma;
}

std::vector<Mat> christoffels(const Chart& chart, const Vec& x) {
    chart.require_inside(x);
    return christoffels_unchecked(chart, x);
}

// no domain check: differentiation stencils step marginally past the box
CurvatureSuite curvature_suite_no_cotton(const Chart& chart, const Vec& x) {
    const int n = chart.dim;
    const MetricJet mj = chart.metric_jet(x);
    CurvatureSuite cs;
    cs.g = mj.g;
    cs.ginv = metric_inverse_checked(mj.g);
    std::vector<std::vector<Mat>> dgamma;
    christoffels_with_derivs(mj, cs.gamma, dgamma);

    cs.riem = Tensor4(n);
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    double t = dgamma[i][l](j, k) - dgamma[j][l](i, k);
                    for (int m = 0; m < n; ++m)
                        t += cs.gamma[l](i, m) * cs.gamma[m](j, k) -
                             cs.gamma[l](j, m) * cs.gamma[m](i, k);
                    cs.riem(l, k, i, j) = t;
                    cs.riem(l, k, j, i) = -t;
                }

    cs.ric = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double t = 0.0;
            for (int i = 0; i < n; ++i) t += cs.riem(i, k, i, j);
            cs.ric(j, k) = t;
        }
    cs.scal = (cs.ginv * cs.ric).trace();
    cs.schouten = (cs.scal / (2.0 * (n - 1)) * cs.g - cs.ric) / (n - 2);

    Tensor4 r4(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double t = 0.0;
                    for (int m = 0; m < n; ++m) t += cs.g(l, m) * cs.riem(m, k, i, j);
                    r4(i, j, k, l) = t;
                }
    cs.weyl4 = Tensor4(n);
    const Mat& K = cs.schouten;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    const double kn = K(i, k) * cs.g(j, l) + K(j, l) * cs.g(i, k) -
                                      K(i, l) * cs.g(j, k) - K(j, k) * cs.g(i, l);
                    cs.weyl4(i, j, k, l) = r4(i, j, k, l) - kn;
                }
    cs.cotton = Tensor3(n);
    return cs;
}

static Mat schouten_at(const Chart& chart, const Vec& x) {
    return curvature_suite_no_cotton(chart, x).schouten;
}

CurvatureSuite curvature_suite(const Chart& chart, const Vec& x) {
    chart.require_inside(x);
    CurvatureSuite cs = curvature_suite_no_cotton(chart, x);
    const int n = chart.dim;
    const double h = chart.fd_step;
    // nabla K from central differences of the exact Schouten tensor
    std::vector<Mat> dK(n);
    for (int c = 0; c < n; ++c) {
        Vec xp = x, xm = x;
        xp(c) += h;
        xm(c) -= h;
        dK[c] = (schouten_at(chart, xp) - schouten_at(chart, xm)) / (2.0 * h);
    }
    Tensor3 nabK(n);  // nabK(i,j,k) = (nabla_i K)(j,k)
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double t = dK[i](j, k);
                for (int m = 0; m < n; ++m)
                    t -= cs.gamma[m](i, j) * cs.schouten(m, k) +
                         cs.gamma[m](i, k) * cs.schouten(j, m);
                nabK(i, j, k) = t;
            }
    cs.cotton = Tensor3(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                cs.cotton(i, j, k) = nabK(j, i, k) - nabK(i, j, k);
    return cs;
}

Mat CurvatureSuite::weyl_endo(int i, int j) const {
    const int n = static_cast<int>(g.rows());
    Mat W(n, n);
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k) {
            double t = 0.0;
            for (int m = 0; m < n; ++m) t += ginv(l, m) * weyl4(i, j, k, m);
            W(l, k) = t;
        }
    return W;
}

RowVec CurvatureSuite::cotton_cov(int i, int j) const {
    const int n = static_cast<int>(g.rows());
    RowVec c(n);
    for (int k = 0; k < n; ++k) c(k) = cotton(i, j, k);
    return c;
}

Chart conformal_rescale(const Chart& chart, const ScalarJetField& phi) {
    Chart out = chart;
    const int n = chart.dim;
    auto base_metric = chart.metric;
    auto base_jet = chart.metric_jet;
    out.metric = [base_metric, phi](const Vec& x) {
        return Mat(std::exp(2.0 * phi(x).v) * base_metric(x));
    };
    out.metric_jet = [base_jet, phi, n](const Vec& x) {
        const MetricJet mj = base_jet(x);
        const Jet2 p = phi(x);
        const double e = std::exp(2.0 * p.v);
        const Vec de = 2.0 * e * p.g;
        const Mat dde = e * (4.0 * p.g * p.g.transpose() + 2.0 * p.h);
        MetricJet out_mj;
        out_mj.g = e * mj.g;
        out_mj.dg.assign(n, Mat(n, n));
        out_mj.ddg.assign(n, std::vector<Mat>(n, Mat(n, n)));
        for (int k = 0; k < n; ++k) out_mj.dg[k] = de(k) * mj.g + e * mj.dg[k];
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                out_mj.ddg[k][l] =
                    dde(k, l) * mj.g + de(k) * mj.dg[l] + de(l) * mj.dg[k] + e * mj.ddg[k][l];
        return out_mj;
    };
    return out;
}

Mat covariant_derivative_endo(const Chart& chart, const VectorField& V, const Vec& x) {
    const int n = chart.dim;
    const std::vector<Mat> gamma = christoffels_unchecked(chart, x);
    Vec val;
    Mat dV;
    if (V.jet) {
        std::vector<Mat> ddV;
        V.jet(x, val, dV, ddV);
    } else {
        val = V.eval(x);
        dV = Mat(n, n);
        const double h = chart.fd_step;
        for (int i = 0; i < n; ++i) {
            Vec xp = x, xm = x;
            xp(i) += h;
            xm(i) -= h;
            dV.row(i) = ((V.eval(xp) - V.eval(xm)) / (2.0 * h)).transpose();
        }
    }
    Mat M(n, n);  // M(k,i) = (nabla_i V)^k
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            double t = dV(i, k);
            for (int m = 0; m < n; ++m) t += gamma[k](i, m) * val(m);
            M(k, i) = t;
        }
    return M;
}

KillingResidual conformal_killing_residual(const Chart& chart, const VectorField& V,
                                           const Vec& x) {
    const int n = chart.dim;
    const Mat g = chart.metric(x);
    const Mat M = covariant_derivative_endo(chart, V, x);
    const Mat gM = g * M;
    const Mat lie = gM + gM.transpose();
    KillingResidual out;
    out.div = M.trace();
    out.residual = (lie - (2.0 * out.div / n) * g).norm();
    return out;
}

std::vector<Vec> grid_points(const Box& box, const std::vector<int>& counts) {
    const int n = static_cast<int>(counts.size());
    std::vector<Vec> pts;
    long total = 1;
    for (int c : counts) {
        if (c < 1) throw ValidationError("grid counts must be >= 1");
        total *= c;
    }
    pts.reserve(total);
    std::vector<int> idx(n, 0);
    for (long t = 0; t < total; ++t) {
        Vec x(n);
        for (int d = 0; d < n; ++d) {
            const int c = counts[d];
            x(d) = c == 1 ? 0.5 * (box.lo(d) + box.hi(d))
                          : box.lo(d) + (box.hi(d) - box.lo(d)) * idx[d] / (c - 1);
        }
        pts.push_back(x);
        for (int d = n - 1; d >= 0; --d) {  // row-major: last axis fastest
            if (++idx[d] < counts[d]) break;
            idx[d] = 0;
        }
    }
    return pts;
}

} // namespace tractor
