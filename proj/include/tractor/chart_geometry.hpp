#pragma once
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tractor/jet.hpp"
#include "tractor/mobius_algebra.hpp"

namespace tractor {

struct Box {
    Vec lo, hi;
    bool contains(const Vec& x, double margin = 0.0) const {
        for (int i = 0; i < x.size(); ++i)
            if (x(i) < lo(i) + margin || x(i) > hi(i) - margin) return false;
        return true;
    }
    Vec center() const { return 0.5 * (lo + hi); }
};

// metric with exact first and second coordinate derivatives at a point
struct MetricJet {
    Mat g;
    std::vector<Mat> dg;               // dg[k](i,j) = d_k g_ij
    std::vector<std::vector<Mat>> ddg; // ddg[k][l]
};

class Chart {
public:
    int dim = 0;
    Signature sig;
    double fd_step = 1e-4;
    Box domain;
    std::function<Mat(const Vec&)> metric;
    std::function<MetricJet(const Vec&)> metric_jet;  // set by the builders
    bool analytic = false;

    void require_inside(const Vec& x) const;
};

// Build a chart from a metric functor templated on the scalar type; jets give
// exact derivative hooks. Functor: Mat-like via operator()(x, out) with
// out(i,j) assignable of type T.
template <class F>
Chart make_analytic_chart(Signature sig, Box domain, F functor, double fd_step = 1e-4);

// FD-only chart from a plain evaluator (second order central differences).
Chart make_numeric_chart(Signature sig, Box domain, std::function<Mat(const Vec&)> metric,
                         double fd_step = 1e-4);

struct Tensor3 {  // T(i,j,k)
    int n = 0;
    std::vector<double> a;
    explicit Tensor3(int n_ = 0) : n(n_), a(static_cast<size_t>(n_) * n_ * n_, 0.0) {}
    double& operator()(int i, int j, int k) { return a[(static_cast<size_t>(i) * n + j) * n + k]; }
    double operator()(int i, int j, int k) const { return a[(static_cast<size_t>(i) * n + j) * n + k]; }
    double norm() const;
};

struct Tensor4 {  // T(i,j,k,l)
    int n = 0;
    std::vector<double> a;
    explicit Tensor4(int n_ = 0) : n(n_), a(static_cast<size_t>(n_) * n_ * n_ * n_, 0.0) {}
    double& operator()(int i, int j, int k, int l) {
        return a[((static_cast<size_t>(i) * n + j) * n + k) * n + l];
    }
    double operator()(int i, int j, int k, int l) const {
        return a[((static_cast<size_t>(i) * n + j) * n + k) * n + l];
    }
    double norm() const;
};

struct CurvatureSuite {
    Mat g, ginv;
    std::vector<Mat> gamma;   // gamma[k](i,j) = Gamma^k_ij
    Tensor4 riem;             // riem(l,k,i,j): coeff of d_l in R(d_i,d_j)d_k
    Mat ric;
    double scal = 0.0;
    Mat schouten;             // K = (scal/(2(n-1)) g - Ric)/(n-2)
    Tensor4 weyl4;            // weyl4(i,j,k,l) = g(W(d_i,d_j)d_k, d_l)
    Tensor3 cotton;           // cotton(i,j,k) = (nab_j K)(i,k) - (nab_i K)(j,k)
    Mat weyl_endo(int i, int j) const;     // W(d_i,d_j) as an endomorphism
    RowVec cotton_cov(int i, int j) const; // cotton(i,j,.) as a covector
};

Mat metric_inverse_checked(const Mat& g);  // throws with condition number

std::vector<Mat> christoffels(const Chart& chart, const Vec& x);
// no domain check; used by differentiation stencils that shave the boundary
std::vector<Mat> christoffels_unchecked(const Chart& chart, const Vec& x);

// Christoffels plus their exact coordinate derivatives (from the metric jet).
void christoffels_with_derivs(const MetricJet& mj, std::vector<Mat>& gamma,
                              std::vector<std::vector<Mat>>& dgamma);

CurvatureSuite curvature_suite(const Chart& chart, const Vec& x);
// everything except Cotton (used internally to avoid recursion)
CurvatureSuite curvature_suite_no_cotton(const Chart& chart, const Vec& x);

// scalar field with exact jet, for conformal rescaling
using ScalarJetField = std::function<Jet2(const Vec&)>;

Chart conformal_rescale(const Chart& chart, const ScalarJetField& phi);

struct VectorField {
    std::string name;
    std::function<Vec(const Vec&)> eval;
    // optional exact derivatives: dV(i,k) = d_i V^k, ddV[k] = Hessian of V^k
    std::function<void(const Vec&, Vec&, Mat&, std::vector<Mat>&)> jet;
};

// builds the jet closure from a functor templated on the scalar type
template <class F>
VectorField make_vector_field(std::string name, int n, F functor);

// covariant derivative of V as an endomorphism: column i holds nabla_{d_i} V
Mat covariant_derivative_endo(const Chart& chart, const VectorField& V, const Vec& x);

struct KillingResidual {
    double residual = 0.0;  // || L_V g - (2/n)(div V) g ||
    double div = 0.0;
};
KillingResidual conformal_killing_residual(const Chart& chart, const VectorField& V, const Vec& x);

// row-major rectangular grid over a box
std::vector<Vec> grid_points(const Box& box, const std::vector<int>& counts);

// ------------------------------------------------------------------ inline

namespace detail {

template <class T>
struct GridOut {
    int n;
    std::vector<T> a;
    explicit GridOut(int n_, const T& init) : n(n_), a(static_cast<size_t>(n_) * n_, init) {}
    T& operator()(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    const T& operator()(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
};

} // namespace detail

template <class F>
Chart make_analytic_chart(Signature sig, Box domain, F functor, double fd_step) {
    sig.validate();
    Chart c;
    c.dim = sig.n();
    c.sig = sig;
    c.fd_step = fd_step;
    c.domain = std::move(domain);
    c.analytic = true;
    const int n = c.dim;
    c.metric = [functor, n](const Vec& x) {
        std::vector<double> xv(x.data(), x.data() + n);
        detail::GridOut<double> out(n, 0.0);
        functor(xv, out);
        Mat g(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) = out(i, j);
        return g;
    };
    c.metric_jet = [functor, n](const Vec& x) {
        std::vector<Jet2> xv;
        xv.reserve(n);
        for (int i = 0; i < n; ++i) xv.push_back(Jet2::variable(x(i), i, n));
        detail::GridOut<Jet2> out(n, Jet2(0.0, n));
        functor(xv, out);
        MetricJet mj;
        mj.g = Mat(n, n);
        mj.dg.assign(n, Mat(n, n));
        mj.ddg.assign(n, std::vector<Mat>(n, Mat(n, n)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const Jet2& e = out(i, j);
                mj.g(i, j) = e.v;
                for (int k = 0; k < n; ++k) {
                    mj.dg[k](i, j) = e.g(k);
                    for (int l = 0; l < n; ++l) mj.ddg[k][l](i, j) = e.h(k, l);
                }
            }
        return mj;
    };
    return c;
}

template <class F>
VectorField make_vector_field(std::string name, int n, F functor) {
    VectorField vf;
    vf.name = std::move(name);
    vf.eval = [functor, n](const Vec& x) {
        std::vector<double> xv(x.data(), x.data() + n);
        std::vector<double> out(n, 0.0);
        functor(xv, out);
        Vec v(n);
        for (int i = 0; i < n; ++i) v(i) = out[i];
        return v;
    };
    vf.jet = [functor, n](const Vec& x, Vec& V, Mat& dV, std::vector<Mat>& ddV) {
        std::vector<Jet2> xv;
        xv.reserve(n);
        for (int i = 0; i < n; ++i) xv.push_back(Jet2::variable(x(i), i, n));
        std::vector<Jet2> out(n, Jet2(0.0, n));
        functor(xv, out);
        V = Vec(n);
        dV = Mat(n, n);
        ddV.assign(n, Mat(n, n));
        for (int k = 0; k < n; ++k) {
            V(k) = out[k].v;
            for (int i = 0; i < n; ++i) dV(i, k) = out[k].g(i);
            ddV[k] = out[k].h;
        }
    };
    return vf;
}

} // namespace tractor
