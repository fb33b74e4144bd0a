#include "tractor/mobius_algebra.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace tractor {

void Signature::validate() const {
    if (r < 0 || s < 0 || n() < 3)
        throw ValidationError("signature (" + std::to_string(r) + "," + std::to_string(s) +
                              ") needs r,s >= 0 and r+s >= 3");
}

Mat metric_form(const Signature& sig) {
    Mat J = Mat::Identity(sig.n(), sig.n());
    for (int i = 0; i < sig.s; ++i) J(i, i) = -1.0;
    return J;
}

Mat tractor_form_of_metric(const Mat& g) {
    const int n = static_cast<int>(g.rows());
    Mat B = Mat::Zero(n + 2, n + 2);
    B(0, n + 1) = 1.0;
    B(n + 1, 0) = 1.0;
    B.block(1, 1, n, n) = g;
    return B;
}

Mat tractor_form(const Signature& sig) { return tractor_form_of_metric(metric_form(sig)); }

// ---------------------------------------------------------------------------

GradedMatrix::GradedMatrix(Signature sig, Mat entries) : sig_(sig), entries_(std::move(entries)) {
    sig_.validate();
    if (entries_.rows() != sig_.ambient() || entries_.cols() != sig_.ambient())
        throw ValidationError("graded matrix has wrong size");
}

GradedMatrix GradedMatrix::zero(Signature sig) {
    return GradedMatrix(sig, Mat::Zero(sig.ambient(), sig.ambient()));
}

GradedMatrix GradedMatrix::from_parts(Signature sig, const Vec& m, const Mat& A, double a,
                                      const RowVec& l) {
    return GradedMatrix(sig, compose_graded_general(m, A, a, l, metric_form(sig)));
}

GradedMatrix GradedMatrix::embed_m(Signature sig, const Vec& m) {
    const int n = sig.n();
    return from_parts(sig, m, Mat::Zero(n, n), 0.0, RowVec::Zero(n));
}
GradedMatrix GradedMatrix::embed_g0(Signature sig, const Mat& A, double a) {
    const int n = sig.n();
    return from_parts(sig, Vec::Zero(n), A, a, RowVec::Zero(n));
}
GradedMatrix GradedMatrix::embed_l(Signature sig, const RowVec& l) {
    const int n = sig.n();
    return from_parts(sig, Vec::Zero(n), Mat::Zero(n, n), 0.0, l);
}

Vec GradedMatrix::part_m() const { return entries_.block(1, 0, n(), 1); }
Mat GradedMatrix::part_A() const { return entries_.block(1, 1, n(), n()); }
double GradedMatrix::part_a() const { return entries_(n() + 1, n() + 1); }
RowVec GradedMatrix::part_l() const { return entries_.block(0, 1, 1, n()); }

GradedMatrix GradedMatrix::graded_piece(int degree) const {
    const int nn = n();
    switch (degree) {
        case -1: return embed_m(sig_, part_m());
        case 0: return embed_g0(sig_, part_A(), part_a());
        case 1: return embed_l(sig_, part_l());
        default: throw ValidationError("graded piece must be -1, 0 or 1");
    }
    (void)nn;
}

GradedMatrix operator+(const GradedMatrix& x, const GradedMatrix& y) {
    return GradedMatrix(x.sig_, x.entries_ + y.entries_);
}
GradedMatrix operator-(const GradedMatrix& x, const GradedMatrix& y) {
    return GradedMatrix(x.sig_, x.entries_ - y.entries_);
}
GradedMatrix operator*(double c, const GradedMatrix& x) {
    return GradedMatrix(x.sig_, c * x.entries_);
}

double skew_defect(const Mat& beta, const Mat& G) {
    const Mat B = tractor_form_of_metric(G);
    return (beta.transpose() * B + B * beta).cwiseAbs().maxCoeff();
}

GradedParts decompose_graded_general(const Mat& beta, const Mat& G, double tol) {
    const int n = static_cast<int>(G.rows());
    const Mat B = tractor_form_of_metric(G);
    const Mat viol = beta.transpose() * B + B * beta;
    double worst = 0.0;
    int wi = 0, wj = 0;
    for (int i = 0; i < viol.rows(); ++i)
        for (int j = 0; j < viol.cols(); ++j)
            if (std::abs(viol(i, j)) > worst) { worst = std::abs(viol(i, j)); wi = i; wj = j; }
    const double scale = std::max(1.0, beta.cwiseAbs().maxCoeff());
    if (worst > tol * scale) {
        std::ostringstream os;
        os << "matrix is not skew w.r.t. the tractor form: worst violation " << worst
           << " at entry (" << wi << "," << wj << ")";
        throw ValidationError(os.str());
    }
    GradedParts p;
    p.m = beta.block(1, 0, n, 1);
    p.A = beta.block(1, 1, n, n);
    p.a = beta(n + 1, n + 1);
    p.l = beta.block(0, 1, 1, n);
    return p;
}

Mat compose_graded_general(const Vec& m, const Mat& A, double a, const RowVec& l, const Mat& G) {
    const int n = static_cast<int>(G.rows());
    Mat out = Mat::Zero(n + 2, n + 2);
    out(0, 0) = -a;
    out(n + 1, n + 1) = a;
    out.block(1, 1, n, n) = A;
    out.block(1, 0, n, 1) = m;
    out.block(0, 1, 1, n) = l;
    // derived blocks; G must be used (not its inverse) only through duals
    Eigen::LDLT<Mat> ldlt(G);
    out.block(1, n + 1, n, 1) = -ldlt.solve(l.transpose());
    out.block(n + 1, 1, 1, n) = -(G * m).transpose();
    return out;
}

GradedParts decompose_graded(const GradedMatrix& beta, double tol) {
    return decompose_graded_general(beta.matrix(), metric_form(beta.sig()), tol);
}

GradedMatrix bracket(const GradedMatrix& x, const GradedMatrix& y) {
    return GradedMatrix(x.sig(), x.matrix() * y.matrix() - y.matrix() * x.matrix());
}

GradedMatrix random_graded(Signature sig, std::mt19937_64& rng) {
    const int N = sig.ambient();
    const Mat raw = random_mat(N, N, rng);
    const Mat B = tractor_form(sig);
    // skew projection w.r.t. <,>: beta - B beta^T B has the right symmetry, halve it
    const Mat skew = 0.5 * (raw - B * raw.transpose() * B);
    return GradedMatrix(sig, skew);
}

Mat random_pseudo_orthogonal(Signature sig, std::mt19937_64& rng) {
    const GradedMatrix beta = random_graded(sig, rng);
    const Mat scaled = 0.5 * beta.matrix() / std::max(1.0, beta.matrix().norm());
    return scaled.exp();
}

// ---------------------------------------------------------------------------
// chains

OneChain::OneChain(Signature sig, std::vector<GradedMatrix> values)
    : sig_(sig), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != sig_.n())
        throw ValidationError("one-chain needs one value per basis vector");
}

OneChain OneChain::zero(Signature sig) {
    return OneChain(sig, std::vector<GradedMatrix>(sig.n(), GradedMatrix::zero(sig)));
}

GradedMatrix OneChain::eval(const Vec& X) const {
    GradedMatrix out = GradedMatrix::zero(sig_);
    for (int i = 0; i < sig_.n(); ++i) out = out + X(i) * values_[i];
    return out;
}

double OneChain::norm() const {
    double s = 0.0;
    for (const auto& v : values_) s += v.matrix().squaredNorm();
    return std::sqrt(s);
}

TwoChain::TwoChain(Signature sig) : sig_(sig) {
    const int n = sig_.n();
    values_.assign(n * (n - 1) / 2, GradedMatrix::zero(sig_));
}

int TwoChain::idx(int i, int j) const {
    const int n = sig_.n();
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

const GradedMatrix& TwoChain::value(int i, int j) const {
    if (!(0 <= i && i < j && j < sig_.n())) throw ValidationError("two-chain index needs i < j");
    return values_[idx(i, j)];
}

void TwoChain::set(int i, int j, const GradedMatrix& v) {
    if (!(0 <= i && i < j && j < sig_.n())) throw ValidationError("two-chain index needs i < j");
    values_[idx(i, j)] = v;
}

GradedMatrix TwoChain::eval_basis(int i, int j) const {
    if (i == j) return GradedMatrix::zero(sig_);
    if (i < j) return value(i, j);
    return -1.0 * value(j, i);
}

GradedMatrix TwoChain::eval(const Vec& X, const Vec& Y) const {
    GradedMatrix out = GradedMatrix::zero(sig_);
    const int n = sig_.n();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            out = out + (X(i) * Y(j) - X(j) * Y(i)) * value(i, j);
    return out;
}

double TwoChain::norm() const {
    double s = 0.0;
    for (const auto& v : values_) s += v.matrix().squaredNorm();
    return std::sqrt(s);
}

double TwoChain::torsion_norm() const {
    double s = 0.0;
    for (const auto& v : values_) s += v.part_m().squaredNorm();
    return std::sqrt(s);
}

Mat TwoChain::trace_form() const {
    // T(e_j, e_k) = sum_i eta_i( psi_0(e_i, e_j) . e_k ), eta_i = delta^i / 2
    const int n = sig_.n();
    Mat T = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const GradedMatrix v = eval_basis(i, j);
            const Mat A = v.part_A();
            const double a = v.part_a();
            for (int k = 0; k < n; ++k) {
                T(j, k) += 0.5 * A(i, k);
                if (i == k) T(j, k) += 0.5 * a;
            }
        }
    }
    return T;
}

TwoChain TwoChain::graded_piece(int degree) const {
    TwoChain out(sig_);
    const int n = sig_.n();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out.set(i, j, value(i, j).graded_piece(degree));
    return out;
}

ThreeChain::ThreeChain(Signature sig) : sig_(sig) {
    const int n = sig_.n();
    values_.assign(n * (n - 1) * (n - 2) / 6, GradedMatrix::zero(sig_));
}

static int tri_index(int n, int i, int j, int k) {
    // lexicographic rank of (i<j<k)
    int rank = 0;
    for (int a = 0; a < i; ++a) rank += (n - a - 1) * (n - a - 2) / 2;
    for (int b = i + 1; b < j; ++b) rank += n - b - 1;
    rank += k - j - 1;
    return rank;
}

const GradedMatrix& ThreeChain::value(int i, int j, int k) const {
    if (!(0 <= i && i < j && j < k && k < sig_.n()))
        throw ValidationError("three-chain index needs i < j < k");
    return values_[tri_index(sig_.n(), i, j, k)];
}

void ThreeChain::set(int i, int j, int k, const GradedMatrix& v) {
    if (!(0 <= i && i < j && j < k && k < sig_.n()))
        throw ValidationError("three-chain index needs i < j < k");
    values_[tri_index(sig_.n(), i, j, k)] = v;
}

GradedMatrix ThreeChain::eval_basis(int i, int j, int k) const {
    int p[3] = {i, j, k};
    if (i == j || j == k || i == k) return GradedMatrix::zero(sig_);
    // sort with sign
    double sign = 1.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2 - a; ++b)
            if (p[b] > p[b + 1]) { std::swap(p[b], p[b + 1]); sign = -sign; }
    return sign * value(p[0], p[1], p[2]);
}

double ThreeChain::norm() const {
    double s = 0.0;
    for (const auto& v : values_) s += v.matrix().squaredNorm();
    return std::sqrt(s);
}

OneChain zero_chain_differential(const GradedMatrix& beta) {
    const Signature sig = beta.sig();
    std::vector<GradedMatrix> vals;
    vals.reserve(sig.n());
    for (int i = 0; i < sig.n(); ++i) {
        const GradedMatrix Xi = GradedMatrix::embed_m(sig, Vec::Unit(sig.n(), i));
        vals.push_back(bracket(Xi, beta));
    }
    return OneChain(sig, vals);
}

TwoChain lie_differential(const OneChain& phi) {
    const Signature sig = phi.sig();
    const int n = sig.n();
    TwoChain out(sig);
    std::vector<GradedMatrix> basis;
    basis.reserve(n);
    for (int i = 0; i < n; ++i) basis.push_back(GradedMatrix::embed_m(sig, Vec::Unit(n, i)));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            out.set(i, j, bracket(basis[i], phi.value(j)) - bracket(basis[j], phi.value(i)));
    return out;
}

ThreeChain two_chain_differential(const TwoChain& psi) {
    const Signature sig = psi.sig();
    const int n = sig.n();
    ThreeChain out(sig);
    std::vector<GradedMatrix> basis;
    basis.reserve(n);
    for (int i = 0; i < n; ++i) basis.push_back(GradedMatrix::embed_m(sig, Vec::Unit(n, i)));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                GradedMatrix v = bracket(psi.eval_basis(i, j), basis[k]) +
                                 bracket(psi.eval_basis(j, k), basis[i]) +
                                 bracket(psi.eval_basis(k, i), basis[j]);
                out.set(i, j, k, -1.0 * v);
            }
    return out;
}

OneChain lie_codifferential(const TwoChain& psi) {
    const Signature sig = psi.sig();
    const int n = sig.n();
    std::vector<GradedMatrix> vals;
    vals.reserve(n);
    for (int x = 0; x < n; ++x) {
        GradedMatrix acc = GradedMatrix::zero(sig);
        for (int i = 0; i < n; ++i) {
            const GradedMatrix eta = GradedMatrix::embed_l(sig, 0.5 * RowVec::Unit(n, i));
            acc = acc + bracket(eta, psi.eval_basis(i, x));
        }
        vals.push_back(acc);
    }
    return OneChain(sig, vals);
}

OneChain lie_codifferential(const TwoChain& psi, const Mat& P) {
    const Signature sig = psi.sig();
    const int n = sig.n();
    if (P.rows() != n || P.cols() != n) throw ValidationError("basis matrix must be n x n");
    const Mat Pinv = P.inverse();
    std::vector<GradedMatrix> vals;
    vals.reserve(n);
    for (int x = 0; x < n; ++x) {
        const Vec X = Vec::Unit(n, x);
        GradedMatrix acc = GradedMatrix::zero(sig);
        for (int i = 0; i < n; ++i) {
            const Vec xi = P.col(i);
            // trace-dual of xi in g_1: tr(embed(xi) embed(l)) = 2 l(xi)
            const RowVec eta_i = 0.5 * Pinv.row(i);
            const GradedMatrix eta = GradedMatrix::embed_l(sig, eta_i);
            acc = acc + bracket(eta, psi.eval(xi, X));
        }
        vals.push_back(acc);
    }
    return OneChain(sig, vals);
}

NormalizationResidual normalization_residual(const TwoChain& psi) {
    NormalizationResidual out;
    out.codiff_norm = lie_codifferential(psi).norm();
    out.torsion_norm = psi.torsion_norm();
    out.trace_norm = psi.trace_form().norm();
    return out;
}

TwoChain project_to_normalized(const TwoChain& psi) {
    const Signature sig = psi.sig();
    const int n = sig.n();
    // drop the torsion part
    TwoChain work(sig);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            work.set(i, j, psi.value(i, j) - psi.value(i, j).graded_piece(-1));
    // kill the g_0 trace with the differential of a g_1-valued one-chain;
    // the map phi -> trace_form(d phi) is n^2 x n^2 and invertible for n >= 3
    Mat L(n * n, n * n);
    for (int col = 0; col < n * n; ++col) {
        const int p = col / n, q = col % n;
        std::vector<GradedMatrix> vals(n, GradedMatrix::zero(sig));
        vals[p] = GradedMatrix::embed_l(sig, RowVec::Unit(n, q));
        const Mat T = lie_differential(OneChain(sig, vals)).trace_form();
        for (int row = 0; row < n * n; ++row) L(row, col) = T(row / n, row % n);
    }
    const Mat T0 = work.trace_form();
    Vec rhs(n * n);
    for (int row = 0; row < n * n; ++row) rhs(row) = T0(row / n, row % n);
    Eigen::ColPivHouseholderQR<Mat> qr(L);
    if (!qr.isInvertible())
        throw NumericalError("trace correction system is singular");
    const Vec sol = qr.solve(rhs);
    std::vector<GradedMatrix> corr(n, GradedMatrix::zero(sig));
    for (int p = 0; p < n; ++p) {
        RowVec l = RowVec::Zero(n);
        for (int q = 0; q < n; ++q) l(q) = sol(p * n + q);
        corr[p] = GradedMatrix::embed_l(sig, l);
    }
    const TwoChain dphi = lie_differential(OneChain(sig, corr));
    TwoChain out(sig);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out.set(i, j, work.value(i, j) - dphi.value(i, j));
    return out;
}

TwoChain random_two_chain(Signature sig, std::mt19937_64& rng) {
    TwoChain out(sig);
    const int n = sig.n();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out.set(i, j, random_graded(sig, rng));
    return out;
}

// ---------------------------------------------------------------------------
// complex structures

ComplexStructureReport complex_structure_report(const Mat& beta, const Mat& G, double tol) {
    const int n = static_cast<int>(G.rows());
    ComplexStructureReport rep;
    rep.square_residual =
        (beta * beta + Mat::Identity(n + 2, n + 2)).cwiseAbs().maxCoeff();

    const GradedParts p = decompose_graded_general(beta, G, 1e-8);
    Eigen::LDLT<Mat> ldlt(G);
    const Vec v = -ldlt.solve(p.l.transpose());  // -G^{-1} l^T

    rep.eigen_residual_m = (p.A * p.m - p.a * p.m).norm();
    rep.eigen_residual_v = (p.A * v + p.a * v).norm();
    rep.lightlike_residual_m = std::abs(p.m.dot(G * p.m));
    rep.lightlike_residual_v = std::abs(v.dot(G * v));
    const double pairing = p.m.dot(G * v);
    rep.pairing_residual = std::abs(pairing - (1.0 + p.a * p.a));
    rep.pairing_sign_ok = pairing > 0.0;

    // W = span{m, v}^perp w.r.t. G; full-pivot kernel of the 2 x n pairing map
    Mat rows(2, n);
    rows.row(0) = (G * p.m).transpose();
    rows.row(1) = (G * v).transpose();
    Eigen::FullPivLU<Mat> lu(rows);
    lu.setThreshold(1e-10);
    rep.adapted_complement = lu.kernel();
    if (rep.adapted_complement.cols() == n - 2) {
        const Mat AW = p.A * rep.adapted_complement;
        const Mat res = p.A * AW + rep.adapted_complement;  // (A^2 + id) W
        rep.restriction_residual = res.norm() / std::max(1.0, rep.adapted_complement.norm());
    } else {
        rep.restriction_residual = std::numeric_limits<double>::infinity();
    }

    rep.is_complex_structure = rep.square_residual <= tol;
    return rep;
}

ComplexStructureReport complex_structure_report(const GradedMatrix& beta, double tol) {
    if (beta.sig().ambient() % 2 != 0)
        throw ValidationError("complex structure needs even tractor dimension");
    return complex_structure_report(beta.matrix(), metric_form(beta.sig()), tol);
}

GradedMatrix make_complex_structure(Signature sig, double a, std::mt19937_64& rng) {
    sig.validate();
    if (!sig.complex_admissible())
        throw ValidationError("complex structure needs odd r and odd s");
    const int n = sig.n();
    const Mat J = metric_form(sig);

    // random frame F with F^T J F = diag(-1.., +1..): rotate the standard one
    const Mat Q = [&] {
        GradedMatrix raw = random_graded(sig, rng);
        Mat A = raw.part_A();
        A = 0.5 * A / std::max(1.0, A.norm());
        return Mat(A.exp());
    }();
    Mat F0 = Mat::Identity(n, n);  // standard frame, e_0..e_{s-1} negative
    const Mat F = Q * F0;

    const Vec that = F.col(0);                 // <that,that> = -1
    const Vec shat = F.col(sig.s);             // <shat,shat> = +1
    const double alpha = 0.5 + std::abs(unit_uniform(rng));
    const Vec m = alpha * (that + shat);
    const Vec v = ((1.0 + a * a) / (2.0 * alpha)) * (shat - that);

    // complement basis: remaining frame columns, like-signature pairs rotated
    std::vector<int> wcols;
    for (int c = 1; c < sig.s; ++c) wcols.push_back(c);
    for (int c = sig.s + 1; c < n; ++c) wcols.push_back(c);

    Mat Bas(n, n);
    Bas.col(0) = m;
    Bas.col(1) = v;
    for (int k = 0; k < n - 2; ++k) Bas.col(2 + k) = F.col(wcols[k]);

    Mat D = Mat::Zero(n, n);  // action in the basis (m, v, w...)
    D(0, 0) = a;
    D(1, 1) = -a;
    // negatives: columns 2 .. 2+(s-1)-1, positives after; rotate inside each block
    const int negs = sig.s - 1;
    for (int k = 0; k + 1 < negs; k += 2) {
        D(2 + k, 2 + k + 1) = -1.0;
        D(2 + k + 1, 2 + k) = 1.0;
    }
    for (int k = 0; k + 1 < n - 2 - negs; k += 2) {
        const int off = 2 + negs;
        D(off + k, off + k + 1) = -1.0;
        D(off + k + 1, off + k) = 1.0;
    }
    const Mat A = Bas * D * Bas.inverse();
    const RowVec l = -(J * v).transpose();
    return GradedMatrix::from_parts(sig, m, A, a, l);
}

SuResiduals su_residuals(const Mat& J, const Mat& A) {
    SuResiduals out;
    out.commutator_norm = (J * A - A * J).norm();
    out.complex_trace = (J * A).trace();
    return out;
}

Mat project_to_u(const Mat& M, const Mat& J, const Mat& G) {
    const Mat B = tractor_form_of_metric(G);
    const Mat commuting = 0.5 * (M - J * M * J);            // J^2 = -id
    const Mat Binv = B;                                     // B is an involution
    return 0.5 * (commuting - Binv * commuting.transpose() * B);
}

Mat project_to_su(const Mat& M, const Mat& J, const Mat& G) {
    const Mat U = project_to_u(M, J, G);
    const double c = (J * U).trace() / (J * J).trace();
    return U - c * J;
}

// ---------------------------------------------------------------------------

Mat parabolic_embed(const Mat& beta, double alpha, const RowVec& x, const Signature& sig) {
    sig.validate();
    const int n = sig.n();
    if (alpha <= 0.0) throw ValidationError("parabolic embedding needs alpha > 0");
    if (beta.rows() != n || beta.cols() != n || x.cols() != n)
        throw ValidationError("parabolic embedding has wrong block sizes");
    const Mat J = metric_form(sig);
    const double og = (beta.transpose() * J * beta - J).cwiseAbs().maxCoeff();
    if (og > 1e-8)
        throw ValidationError("beta is not orthogonal w.r.t. the model form, defect " +
                              std::to_string(og));
    Mat out = Mat::Zero(n + 2, n + 2);
    out(0, 0) = 1.0 / alpha;
    out.block(0, 1, 1, n) = x;
    out(0, n + 1) = -(alpha / 2.0) * (x * J * x.transpose())(0, 0);
    out.block(1, 1, n, n) = beta;
    out.block(1, n + 1, n, 1) = -alpha * beta * J * x.transpose();
    out(n + 1, n + 1) = alpha;
    return out;
}

} // namespace tractor
