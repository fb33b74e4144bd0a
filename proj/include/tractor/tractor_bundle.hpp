#pragma once
#include <optional>
#include <string>
#include <vector>

#include "tractor/chart_geometry.hpp"

namespace tractor {

// standard tractor in the metric gauge, column order (d, tau, b)
struct TractorTriple {
    double d = 0.0;
    Vec tau;
    double b = 0.0;

    Vec column() const {
        Vec c(tau.size() + 2);
        c(0) = d;
        c.segment(1, tau.size()) = tau;
        c(tau.size() + 1) = b;
        return c;
    }
    static TractorTriple from_column(const Vec& c) {
        TractorTriple t;
        const int n = static_cast<int>(c.size()) - 2;
        t.d = c(0);
        t.tau = c.segment(1, n);
        t.b = c(n + 1);
        return t;
    }
};

inline double tractor_pairing(const Mat& g, const TractorTriple& t, const TractorTriple& u) {
    return t.d * u.b + t.b * u.d + t.tau.dot(g * u.tau);
}

// Adjoint tractor in the metric gauge, stored as its full matrix. Genuine
// adjoint tractors are skew w.r.t. the gauge tractor form; the connection
// matrix reuses the container but is only metric (see docs/conventions.md).
class AdjointTractorMatrix {
public:
    AdjointTractorMatrix() = default;
    explicit AdjointTractorMatrix(Mat m) : m_(std::move(m)) {}
    static AdjointTractorMatrix from_parts(const Vec& xi, const Mat& phi_ss, double phi_c,
                                           const RowVec& eta, const Mat& g);
    static AdjointTractorMatrix zero(int n) { return AdjointTractorMatrix(Mat::Zero(n + 2, n + 2)); }

    int dim() const { return static_cast<int>(m_.rows()) - 2; }
    const Mat& matrix() const { return m_; }
    Mat& matrix() { return m_; }

    Vec xi() const { return m_.block(1, 0, dim(), 1); }              // Pi(A)
    Mat phi() const { return m_.block(1, 1, dim(), dim()); }
    double phi_c() const { return m_(dim() + 1, dim() + 1); }
    RowVec eta() const { return m_.block(0, 1, 1, dim()); }

    double skew_defect(const Mat& g) const { return tractor::skew_defect(m_, g); }

    TractorTriple bullet(const TractorTriple& t) const {
        return TractorTriple::from_column(m_ * t.column());
    }

    friend AdjointTractorMatrix operator+(const AdjointTractorMatrix& a,
                                          const AdjointTractorMatrix& b) {
        return AdjointTractorMatrix(a.m_ + b.m_);
    }
    friend AdjointTractorMatrix operator-(const AdjointTractorMatrix& a,
                                          const AdjointTractorMatrix& b) {
        return AdjointTractorMatrix(a.m_ - b.m_);
    }
    friend AdjointTractorMatrix operator*(double c, const AdjointTractorMatrix& a) {
        return AdjointTractorMatrix(c * a.m_);
    }

private:
    Mat m_;
};

// gauge data of the connection at a point, reused across directions
struct ConnectionPoint {
    Mat g, ginv;
    std::vector<Mat> gamma;
    Mat schouten;
    Mat direction_matrix(const Vec& X) const;  // Gamma^tr(X)
};
ConnectionPoint connection_point(const Chart& chart, const Vec& x);

AdjointTractorMatrix tractor_connection_matrix(const Chart& chart, const Vec& x, const Vec& X);

using TractorField = std::function<TractorTriple(const Vec&)>;

TractorTriple tractor_covariant_derivative(const Chart& chart, const TractorField& t,
                                           const Vec& x, const Vec& X);

enum class CurvatureMethod { assembled, commutator };

AdjointTractorMatrix tractor_curvature(const Chart& chart, const Vec& x, const Vec& X,
                                       const Vec& Y, CurvatureMethod method);

struct CurvatureCrossCheck {
    AdjointTractorMatrix assembled;
    AdjointTractorMatrix commutator;
    double rel_deviation = 0.0;  // ||A - C|| / max(||A||, floor)
};
CurvatureCrossCheck curvature_cross_check(const Chart& chart, const Vec& x, const Vec& X,
                                          const Vec& Y);
// throws NumericalError carrying both norms when the deviation exceeds tol
AdjointTractorMatrix tractor_curvature_checked(const Chart& chart, const Vec& x, const Vec& X,
                                               const Vec& Y, double tol = 1e-3);

// adjoint covariant derivative of a matrix-valued section: dA(X) + [Gamma^tr(X), A]
Mat adjoint_covariant_derivative(const Chart& chart,
                                 const std::function<Mat(const Vec&)>& section, const Vec& x,
                                 const Vec& X);

struct Curve {
    std::function<Vec(double)> gamma;
    std::function<Vec(double)> velocity;  // optional; FD fallback when missing
    double t0 = 0.0, t1 = 1.0;
};

Mat parallel_transport(const Chart& chart, const Curve& curve, int steps);
// piecewise straight path through the given coordinate points
Mat parallel_transport_polyline(const Chart& chart, const std::vector<Vec>& points,
                                int steps_per_edge);

struct HolonomyOptions {
    int transport_steps = 192;       // per polyline edge
    double loop_eps = 0.05;          // initial rectangle side
    int base_points = 4;             // loop anchors besides x0
    double rank_rel_tol = 1e-6;      // singular values below tol*max are zero
    double rank_abs_floor = 1e-5;    // curvature-scale floor (samples are area-normalized)
    bool use_loops = true;
    bool use_curvature_span = true;
};

struct HolonomyReport {
    Vec base_point;
    std::vector<Mat> samples;        // normalized gauge-algebra elements at x0
    std::vector<double> singular_values;   // descending
    int rank = 0;
    int rank_loops = -1;             // -1 when the strategy did not run
    int rank_span = -1;
    double max_skew_defect = 0.0;    // w.r.t. the gauge form at x0
    double final_loop_eps = 0.0;
    std::string classification;      // flat | generic | u-compatible | su-compatible
    std::optional<Mat> J_used;
    double max_commutator_residual = 0.0;
    double max_trace_residual = 0.0;
};

HolonomyReport holonomy_algebra_estimate(const Chart& chart, const Vec& x0,
                                         const HolonomyOptions& opts = {});

// Classification against a complex tractor structure J at the base point.
// Without J: flat (rank 0) or generic. With J: J must pass the complex
// structure report w.r.t. g(x0), otherwise a ValidationError names the
// failing condition.
HolonomyReport classify_holonomy(const Chart& chart, HolonomyReport report,
                                 const std::optional<Mat>& J, double tol = 1e-4);

} // namespace tractor
