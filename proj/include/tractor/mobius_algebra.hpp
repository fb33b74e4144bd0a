#pragma once
#include <optional>
#include <random>
#include <vector>

#include "tractor/linalg.hpp"

namespace tractor {

// Signature counts (positive, negative); n = r + s >= 3. The model quadratic
// form on R^n is Jn = diag(-I_s, +I_r) (negative block first), and the
// ambient (n+2)-dimensional tractor form pairs the first and last basis
// vectors hyperbolically:  <x,y> = x_- y_+ + x_+ y_- + x_mid Jn y_mid,
// basis order (e_-, e_1..e_n, e_+).
struct Signature {
    int r = 0;  // positive directions
    int s = 0;  // negative directions

    int n() const { return r + s; }
    int ambient() const { return r + s + 2; }
    bool complex_admissible() const { return (r % 2 == 1) && (s % 2 == 1); }
    void validate() const;
};

Mat metric_form(const Signature& sig);             // Jn, n x n
Mat tractor_form(const Signature& sig);            // (n+2) x (n+2)
Mat tractor_form_of_metric(const Mat& g);          // gauge version, any symmetric g

// ---------------------------------------------------------------------------
// graded matrices

struct GradedParts {
    Vec m;      // g_{-1}
    Mat A;      // so(Jn) block
    double a;   // center scalar
    RowVec l;   // g_1
};

// Element of so(r+1, s+1) stored as its full (n+2)x(n+2) matrix.
class GradedMatrix {
public:
    GradedMatrix() = default;
    GradedMatrix(Signature sig, Mat entries);

    static GradedMatrix zero(Signature sig);
    static GradedMatrix from_parts(Signature sig, const Vec& m, const Mat& A, double a,
                                   const RowVec& l);
    static GradedMatrix embed_m(Signature sig, const Vec& m);
    static GradedMatrix embed_g0(Signature sig, const Mat& A, double a);
    static GradedMatrix embed_l(Signature sig, const RowVec& l);

    const Mat& matrix() const { return entries_; }
    const Signature& sig() const { return sig_; }
    int n() const { return sig_.n(); }

    Vec part_m() const;
    Mat part_A() const;
    double part_a() const;
    RowVec part_l() const;

    GradedMatrix graded_piece(int degree) const;  // -1, 0, +1

    double norm() const { return entries_.norm(); }

    friend GradedMatrix operator+(const GradedMatrix& x, const GradedMatrix& y);
    friend GradedMatrix operator-(const GradedMatrix& x, const GradedMatrix& y);
    friend GradedMatrix operator*(double c, const GradedMatrix& x);

private:
    Signature sig_;
    Mat entries_;
};

// Validates skewness w.r.t. the ambient form; the error message carries the
// largest violating entry.
GradedParts decompose_graded(const GradedMatrix& beta, double tol = 1e-12);

// Shared with the metric gauge: decompose any matrix skew w.r.t. the form
// built from the symmetric n x n form G.
GradedParts decompose_graded_general(const Mat& beta, const Mat& G, double tol = 1e-12);
Mat compose_graded_general(const Vec& m, const Mat& A, double a, const RowVec& l, const Mat& G);

GradedMatrix bracket(const GradedMatrix& x, const GradedMatrix& y);

double skew_defect(const Mat& beta, const Mat& G);  // max |(beta^T Jg + Jg beta)_{ij}|

GradedMatrix random_graded(Signature sig, std::mt19937_64& rng);
Mat random_pseudo_orthogonal(Signature sig, std::mt19937_64& rng);  // exp of random algebra elt

// ---------------------------------------------------------------------------
// chains of the abelian algebra g_{-1} with values in g

class OneChain {
public:
    OneChain() = default;
    OneChain(Signature sig, std::vector<GradedMatrix> values);  // values[i] = phi(e_i)
    static OneChain zero(Signature sig);

    const Signature& sig() const { return sig_; }
    const GradedMatrix& value(int i) const { return values_[i]; }
    GradedMatrix eval(const Vec& X) const;  // linear extension
    double norm() const;

private:
    Signature sig_;
    std::vector<GradedMatrix> values_;
};

class TwoChain {
public:
    TwoChain() = default;
    explicit TwoChain(Signature sig);  // zero chain
    static TwoChain zero(Signature sig) { return TwoChain(sig); }

    const Signature& sig() const { return sig_; }
    const GradedMatrix& value(int i, int j) const;  // requires i < j
    void set(int i, int j, const GradedMatrix& v);  // i < j; (j,i) implied
    GradedMatrix eval(const Vec& X, const Vec& Y) const;  // bilinear, antisymmetric
    GradedMatrix eval_basis(int i, int j) const;          // signed lookup

    double norm() const;
    double torsion_norm() const;        // norm of the g_{-1} parts
    Mat trace_form() const;             // T(X=e_j, e_k) = sum_i eta_i(psi_0(e_i, e_j) e_k)
    TwoChain graded_piece(int degree) const;

private:
    int idx(int i, int j) const;
    Signature sig_;
    std::vector<GradedMatrix> values_;  // i < j, lexicographic
};

class ThreeChain {
public:
    explicit ThreeChain(Signature sig);
    const Signature& sig() const { return sig_; }
    const GradedMatrix& value(int i, int j, int k) const;  // i < j < k
    void set(int i, int j, int k, const GradedMatrix& v);
    GradedMatrix eval_basis(int i, int j, int k) const;    // signed, any order
    double norm() const;

private:
    Signature sig_;
    std::vector<GradedMatrix> values_;
};

OneChain zero_chain_differential(const GradedMatrix& beta);  // X -> [X, beta]
TwoChain lie_differential(const OneChain& phi);
ThreeChain two_chain_differential(const TwoChain& psi);

// dual basis w.r.t. the trace form: eta_i = delta^i / 2 for the standard basis
OneChain lie_codifferential(const TwoChain& psi);
// arbitrary basis of g_{-1} given by the columns of P
OneChain lie_codifferential(const TwoChain& psi, const Mat& P);

struct NormalizationResidual {
    double codiff_norm = 0.0;
    double torsion_norm = 0.0;
    double trace_norm = 0.0;
};
NormalizationResidual normalization_residual(const TwoChain& psi);

// Zeroes the torsion part and subtracts the differential of a g_1-valued
// 1-chain chosen so the g_0 trace form vanishes; afterwards codiff_norm = 0
// up to roundoff.
TwoChain project_to_normalized(const TwoChain& psi);

TwoChain random_two_chain(Signature sig, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// complex structures (so(2p,2q) conditions on beta^2 = -id)

struct ComplexStructureReport {
    bool is_complex_structure = false;
    double square_residual = 0.0;           // ||beta^2 + id||
    double eigen_residual_m = 0.0;          // ||A m - a m||
    double eigen_residual_v = 0.0;          // ||A v + a v||, v = -Jn l^T
    double lightlike_residual_m = 0.0;      // |<m,m>|
    double lightlike_residual_v = 0.0;      // |<v,v>|
    double pairing_residual = 0.0;          // |<m,v> - (1 + a^2)|
    double restriction_residual = 0.0;      // ||(A^2 + id)|_W||
    bool pairing_sign_ok = true;            // <m,v> > 0
    Mat adapted_complement;                 // columns span W = span{m,v}^perp, n-2 of them
};

ComplexStructureReport complex_structure_report(const Mat& beta, const Mat& G,
                                                double tol = 1e-8);
ComplexStructureReport complex_structure_report(const GradedMatrix& beta, double tol = 1e-8);

// Build a complex structure from the eigenvector/pairing/rotation conditions.
GradedMatrix make_complex_structure(Signature sig, double a, std::mt19937_64& rng);

struct SuResiduals {
    double commutator_norm = 0.0;  // ||JA - AJ||
    double complex_trace = 0.0;    // tr(J A)
};
SuResiduals su_residuals(const Mat& J, const Mat& A);

// Projections used by tests: nearest u(p,q) / su(p,q) member relative to J.
Mat project_to_u(const Mat& M, const Mat& J, const Mat& G);
Mat project_to_su(const Mat& M, const Mat& J, const Mat& G);

// ---------------------------------------------------------------------------

// iota(beta, alpha, x) for beta in O(Jn), alpha > 0, covector x; preserves the
// ambient form and is upper block triangular.
Mat parabolic_embed(const Mat& beta, double alpha, const RowVec& x, const Signature& sig);

} // namespace tractor
