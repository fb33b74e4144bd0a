#pragma once
#include <optional>

#include "tractor/tractor_bundle.hpp"

namespace tractor {

// V -> (V, nabla V, D(V)) packed into an adjoint tractor; corners carry
// -(1/n) div V (top) and +(1/n) div V (bottom), eta = g(D(V), .), with
// D = (tr_g nabla^2 + scal/(2(n-1))) / (n-2).
struct SplittingResult {
    std::function<AdjointTractorMatrix(const Vec&)> A_Q;
    // components at a point
    struct At {
        Vec V;
        Mat asym_grad;     // g-skew part of nabla V
        double div = 0.0;
        Vec DV;            // D(V) as a vector
    };
    std::function<At(const Vec&)> components;
};

SplittingResult splitting_operator(const Chart& chart, const VectorField& V);
AdjointTractorMatrix splitting_matrix(const Chart& chart, const VectorField& V, const Vec& x);

// D(V) as a vector at x
Vec curved_laplacian_field(const Chart& chart, const VectorField& V, const Vec& x);

struct LemmaResiduals {
    double lm1 = 0.0;          // || nabla^nor_X A_Q + Omega(V, X) ||
    double parallel = 0.0;     // || nabla^nor_X A_Q ||
    double killing = 0.0;      // conformal Killing residual at x
    bool killing_ok = true;    // false -> residuals are diagnostic only
};
LemmaResiduals lemma_residuals(const Chart& chart, const VectorField& V, const Vec& x,
                               const Vec& X, double killing_tol = 1e-6);

struct SparlingCertificate {
    double killing_residual = 0.0;    // max over grid
    double lightlike_residual = 0.0;  // max |g(j,j)|
    double weyl_residual = 0.0;       // max ||iota_j W||
    double cotton_residual = 0.0;     // max ||iota_j C||
    double div_residual = 0.0;        // max |div j|
    double ric_jj_min = 0.0;
    double ric_jj_max = 0.0;
    bool ric_constant = false;                 // max-min <= 1e-6
    std::optional<double> normalization_scale; // c with Ric(c j, c j) = n-2
    std::optional<double> ric_jj_normalized;
    std::optional<double> dj_pairing_normalized;  // g(cj, D(cj)); -1 for a Fefferman gauge
    bool pass = false;
    std::string failed_conditions;  // labels of failed conditions, empty on pass

    bool evaluate(double tol);  // fills pass/failed_conditions at the tolerance
};

SparlingCertificate sparling_report(const Chart& chart, const VectorField& j,
                                    const std::vector<Vec>& grid, double tol = 1e-5);

} // namespace tractor
