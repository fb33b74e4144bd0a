#include "tractor/catalog.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace tractor {
namespace catalog {

namespace {

double param_or(const std::map<std::string, double>& p, const std::string& key, double dflt) {
    auto it = p.find(key);
    return it == p.end() ? dflt : it->second;
}

Box cube(int n, double half) {
    Box b;
    b.lo = Vec::Constant(n, -half);
    b.hi = Vec::Constant(n, half);
    return b;
}

// ----------------------------------------------------------------- metrics

struct FlatMetric {
    int r, s;
    template <class X, class G>
    void operator()(const X& x, G& out) const {
        const int n = r + s;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out(i, j) = (i == j) ? ((i < s) ? -1.0 : 1.0) * (x[0] * 0.0 + 1.0) : x[0] * 0.0;
    }
};

struct SphereStereographic {
    int n;
    double radius;
    template <class X, class G>
    void operator()(const X& x, G& out) const {
        auto rho2 = x[0] * x[0];
        for (int i = 1; i < n; ++i) rho2 += x[i] * x[i];
        const double R2 = radius * radius;
        auto denom = (rho2 + R2) * (rho2 + R2);
        auto f = (4.0 * R2 * R2) / denom;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out(i, j) = (i == j) ? f : 0.0 * f;
    }
};

struct ConformallyFlatMetric {
    int r, s;
    double amp;
    template <class X, class G>
    void operator()(const X& x, G& out) const {
        using std::cos;
        using std::exp;
        using std::sin;
        const int n = r + s;
        auto factor = exp(2.0 * amp * sin(x[0]) * cos(x[1]));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out(i, j) = (i == j) ? ((i < s) ? -1.0 : 1.0) * factor : 0.0 * factor;
    }
};

struct PerturbedFlatMetric {
    int r, s;
    double eps;
    std::vector<Mat> amps;       // symmetric coefficient matrices
    std::vector<Vec> waves;      // wave covectors
    std::vector<double> phases;
    template <class X, class G>
    void operator()(const X& x, G& out) const {
        using std::sin;
        const int n = r + s;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out(i, j) = (i == j) ? ((i < s) ? -1.0 : 1.0) + 0.0 * x[0] : 0.0 * x[0];
        for (size_t k = 0; k < amps.size(); ++k) {
            auto arg = phases[k] + 0.0 * x[0];
            for (int d = 0; d < n; ++d) arg += waves[k](d) * x[d];
            auto wave = sin(arg);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out(i, j) += eps * amps[k](i, j) * wave;
        }
    }
};

struct HeisenbergFeffermanMetric {
    double scale;  // fiber scale, 1 after normalization
    template <class X, class G>
    void operator()(const X& x, G& out) const {
        // coordinates (x, y, u, gamma); theta = du + x dy - y dx
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) out(i, j) = 0.0 * x[0];
        out(0, 0) = 1.0 + 0.0 * x[0];
        out(1, 1) = 1.0 + 0.0 * x[0];
        out(0, 3) = -scale * x[1];
        out(3, 0) = -scale * x[1];
        out(1, 3) = scale * x[0];
        out(3, 1) = scale * x[0];
        out(2, 3) = scale + 0.0 * x[0];
        out(3, 2) = scale + 0.0 * x[0];
    }
};

struct BergerFeffermanMetric {
    double a, b, e, c;
    template <class X, class G>
    void operator()(const X& x, G& out) const {
        using std::cos;
        using std::sin;
        // left-invariant coframe pulled back through
        //   h = exp(x0 T1) exp(x1 T2) exp(x2 T3), fiber coordinate x3
        auto c2 = cos(2.0 * x[1]);
        auto s2 = sin(2.0 * x[1]);
        auto c3 = cos(2.0 * x[2]);
        auto s3 = sin(2.0 * x[2]);
        const auto zero = 0.0 * x[0];
        // sigma^1, sigma^2, sigma^3, dgamma as covector components
        std::array<decltype(zero), 4> s1 = {c2 * c3, s3 + zero, zero, zero};
        std::array<decltype(zero), 4> sg2 = {-1.0 * c2 * s3, c3 + zero, zero, zero};
        std::array<decltype(zero), 4> sg3 = {s2 + zero, zero, 1.0 + zero, zero};
        std::array<decltype(zero), 4> dga = {zero, zero, zero, 1.0 + zero};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                out(i, j) = a * sg2[i] * sg2[j] + b * sg3[i] * sg3[j] + 2.0 * e * s1[i] * s1[j] +
                            c * (s1[i] * dga[j] + dga[i] * s1[j]);
    }
};

// ------------------------------------------------------------ vector fields

struct ConstantField {
    Vec dir;
    template <class X, class V>
    void operator()(const X& x, V& out) const {
        for (int i = 0; i < dir.size(); ++i) out[i] = dir(i) + 0.0 * x[0];
    }
};

// flat-model generator V(x) = m + A x + a x - l(x) x + (1/2) <x,x> Jn l^T
struct MoebiusField {
    Vec m;
    Mat A;
    double a;
    RowVec l;
    Mat Jn;
    template <class X, class V>
    void operator()(const X& x, V& out) const {
        const int n = m.size();
        auto lx = 0.0 * x[0];
        for (int i = 0; i < n; ++i) lx += l(i) * x[i];
        auto xx = 0.0 * x[0];
        for (int i = 0; i < n; ++i) xx += Jn(i, i) * x[i] * x[i];
        const Vec w = Jn * l.transpose();
        for (int k = 0; k < n; ++k) {
            auto t = m(k) + a * x[k] - lx * x[k] + 0.5 * xx * w(k);
            for (int i = 0; i < n; ++i) t += A(k, i) * x[i];
            out[k] = t;
        }
    }
};

VectorField coordinate_field(int n, int index, const std::string& name) {
    ConstantField f{Vec::Unit(n, index)};
    return make_vector_field(name, n, f);
}

// ---------------------------------------------------------------- assembly

CatalogEntry make_flat(const std::map<std::string, double>& params) {
    CatalogEntry e;
    const int r = static_cast<int>(param_or(params, "r", 3));
    const int s = static_cast<int>(param_or(params, "s", 1));
    const Signature sig{r, s};
    sig.validate();
    const int n = sig.n();
    e.name = "flat";
    e.params = {{"r", double(r)}, {"s", double(s)}};
    e.chart = make_analytic_chart(sig, cube(n, 1.0), FlatMetric{r, s});
    e.reference.expected_rank = 0;
    e.reference.expected_class = "flat";
    e.reference.notes = "constant-coefficient metric: every curvature quantity vanishes";
    const Mat Jn = metric_form(sig);

    e.fields.push_back(coordinate_field(n, s, "translation"));
    {
        MoebiusField dil{Vec::Zero(n), Mat::Zero(n, n), 1.0, RowVec::Zero(n), Jn};
        e.fields.push_back(make_vector_field("dilation", n, dil));
    }
    if (n >= 2) {
        Mat A = Mat::Zero(n, n);  // rotation in the last two (positive) axes
        A(n - 1, n - 2) = 1.0;
        A(n - 2, n - 1) = -1.0;
        MoebiusField rot{Vec::Zero(n), A, 0.0, RowVec::Zero(n), Jn};
        e.fields.push_back(make_vector_field("rotation", n, rot));
    }
    {
        RowVec l = RowVec::Zero(n);
        l(0) = 0.4;
        l(n - 1) = -0.3;
        MoebiusField sc{Vec::Zero(n), Mat::Zero(n, n), 0.0, l, Jn};
        e.fields.push_back(make_vector_field("special_conformal", n, sc));
    }
    if (s >= 1) {
        Vec dir = Vec::Zero(n);
        dir(0) = 1.0;   // negative direction
        dir(n - 1) = 1.0;  // positive direction
        ConstantField f{dir};
        e.fields.push_back(make_vector_field("j_null", n, f));
    }
    if (sig.complex_admissible() && r == 3 && s == 1) {
        // generator whose adjoint tractor is the standard complex structure:
        // m, v lightlike with <m,v> = 1, quarter turn on the complement
        Vec m(4), v(4);
        m << 1, 0, 0, 1;
        v << -0.5, 0, 0, 0.5;
        Mat A = Mat::Zero(4, 4);
        A(2, 1) = 1.0;
        A(1, 2) = -1.0;
        const RowVec l = -(Jn * v).transpose();
        MoebiusField jc{m, A, 0.0, l, Jn};
        e.fields.push_back(make_vector_field("j_complex", n, jc));
    }
    e.docs =
        "Constant metric diag(-I_s, +I_r). Reference rank 0 and class flat follow from the "
        "vanishing of the curvature; the j_complex generator integrates the standard complex "
        "structure of the model algebra.";
    return e;
}

CatalogEntry make_sphere(const std::map<std::string, double>& params) {
    CatalogEntry e;
    const int n = static_cast<int>(param_or(params, "n", 4));
    const double radius = param_or(params, "radius", 1.0);
    if (n < 3) throw ValidationError("sphere_round needs n >= 3");
    if (radius <= 0) throw ValidationError("sphere_round needs radius > 0");
    const Signature sig{n, 0};
    e.name = "sphere_round";
    e.params = {{"n", double(n)}, {"radius", radius}};
    // stereographic chart; no coordinate singularities on any bounded box
    e.chart = make_analytic_chart(sig, cube(n, 0.6), SphereStereographic{n, radius});
    e.reference.expected_rank = 0;
    e.reference.expected_class = "flat";
    e.reference.notes =
        "round metric is Einstein and locally conformally flat; Weyl and the Schouten "
        "derivative antisymmetrization vanish, so the tractor curvature is zero";
    e.docs = "Round sphere in a stereographic chart, g = 4R^4/(R^2+|x|^2)^2 delta.";
    return e;
}

CatalogEntry make_conformally_flat(const std::map<std::string, double>& params) {
    CatalogEntry e;
    const int r = static_cast<int>(param_or(params, "r", 3));
    const int s = static_cast<int>(param_or(params, "s", 1));
    const double amp = param_or(params, "amp", 0.2);
    const Signature sig{r, s};
    sig.validate();
    e.name = "conformally_flat";
    e.params = {{"r", double(r)}, {"s", double(s)}, {"amp", amp}};
    e.chart = make_analytic_chart(sig, cube(sig.n(), 1.0), ConformallyFlatMetric{r, s, amp});
    e.reference.expected_rank = 0;
    e.reference.expected_class = "flat";
    e.reference.notes = "rescaled flat metric: tractor curvature vanishes";
    e.docs = "exp(2 phi) * flat with phi = amp sin(x0) cos(x1).";
    return e;
}

CatalogEntry make_perturbed_flat(const std::map<std::string, double>& params) {
    CatalogEntry e;
    const int r = static_cast<int>(param_or(params, "r", 3));
    const int s = static_cast<int>(param_or(params, "s", 1));
    const double eps = param_or(params, "eps", 0.01);
    const int seed = static_cast<int>(param_or(params, "seed", 7));
    const Signature sig{r, s};
    sig.validate();
    const int n = sig.n();
    e.name = "perturbed_flat";
    e.params = {{"r", double(r)}, {"s", double(s)}, {"eps", eps}, {"seed", double(seed)}};

    std::mt19937_64 rng(static_cast<uint64_t>(seed));
    PerturbedFlatMetric pm;
    pm.r = r;
    pm.s = s;
    pm.eps = eps;
    for (int k = 0; k < 3; ++k) {
        Mat A = random_mat(n, n, rng);
        pm.amps.push_back(0.5 * (A + A.transpose()));
        Vec w(n);
        for (int d = 0; d < n; ++d) w(d) = std::round(2.0 * unit_uniform(rng));
        if (w.cwiseAbs().maxCoeff() == 0.0) w(0) = 1.0;
        pm.waves.push_back(w);
        pm.phases.push_back(1.5 * unit_uniform(rng));
    }
    e.chart = make_analytic_chart(sig, cube(n, 1.0), pm);
    e.reference.expected_rank = 1;
    e.reference.rank_is_lower_bound = true;
    e.reference.expected_class = "generic";
    e.reference.notes =
        "seeded wave perturbation of the flat metric; Weyl is generically nonzero and no "
        "distinguished null Killing field exists";
    e.docs = "Flat metric plus eps * sum of three seeded symmetric sine waves.";
    return e;
}

const double kSparlingGateTol = 1e-5;

std::vector<Vec> gate_grid(const Chart& chart, int per_axis) {
    Box inner = chart.domain;
    const Vec span = inner.hi - inner.lo;
    inner.lo += 0.2 * span;
    inner.hi -= 0.2 * span;
    return grid_points(inner, std::vector<int>(chart.dim, per_axis));
}

void run_gate(CatalogEntry& e, const std::string& field) {
    SparlingCertificate cert =
        sparling_report(e.chart, get_field(e, field), gate_grid(e.chart, 2), kSparlingGateTol);
    if (!cert.pass) {
        std::ostringstream os;
        os << e.name << " failed its certificate gate on conditions [" << cert.failed_conditions
           << "]: killing " << cert.killing_residual << ", lightlike " << cert.lightlike_residual
           << ", weyl " << cert.weyl_residual << ", cotton " << cert.cotton_residual
           << ", Ric(j,j) in [" << cert.ric_jj_min << ", " << cert.ric_jj_max << "]";
        throw NumericalError(os.str());
    }
    e.gate = cert;
}

CatalogEntry make_heisenberg(const std::map<std::string, double>&) {
    CatalogEntry e;
    const Signature sig{3, 1};
    e.name = "heisenberg_fefferman";
    // fiber scale 1 makes Ric(j,j) = 2 = n-2 on the nose; the certificate gate
    // re-derives this at construction time
    e.chart = make_analytic_chart(sig, cube(4, 1.0), HeisenbergFeffermanMetric{1.0});
    e.fields.push_back(coordinate_field(4, 3, "j"));
    e.fields.push_back(coordinate_field(4, 2, "du"));
    e.reference.expected_rank = 0;
    e.reference.expected_class = "su-compatible";
    e.reference.notes =
        "null-Killing certificate passes by construction (fiber scale tuned so Ric(j,j) = n-2); "
        "the metric is conformally flat, hence rank 0 and the unitary compatibility is the "
        "trivial one";
    e.docs =
        "dx^2 + dy^2 + 2 dgamma . (du + x dy - y dx) on coordinates (x, y, u, gamma); j = "
        "d/dgamma. Scale fixed by the Ric(j,j) = n-2 normalization, certified at build time.";
    run_gate(e, "j");
    return e;
}

CatalogEntry make_berger(const std::map<std::string, double>& params) {
    CatalogEntry e;
    const double lambda = param_or(params, "lambda", 1.2);
    if (lambda <= 0) throw ValidationError("berger_fefferman needs lambda > 0");
    const Signature sig{3, 1};
    e.name = "berger_fefferman";
    e.params = {{"lambda", lambda}};
    const double a = 1.0, b = lambda * lambda;
    // gauge constants from the certificate conditions: the mixed-term
    // coefficient (a+b)/4 kills the null insertions of Weyl and the Schouten
    // antisymmetrization, and c = sqrt(ab) normalizes Ric(j,j) to n-2
    BergerFeffermanMetric bm{a, b, (a + b) / 4.0, std::sqrt(a * b)};
    Box box;
    box.lo = Vec(4);
    box.hi = Vec(4);
    box.lo << -0.35, -0.35, -0.35, -1.0;
    box.hi << 0.35, 0.35, 0.35, 1.0;
    e.chart = make_analytic_chart(sig, box, bm);
    e.fields.push_back(coordinate_field(4, 3, "j"));
    e.reference.expected_rank = (std::abs(lambda - 1.0) < 1e-9) ? 0 : 1;
    e.reference.rank_is_lower_bound = std::abs(lambda - 1.0) >= 1e-9;
    e.reference.expected_class = "su-compatible";
    e.reference.notes =
        "certificate gate passes for every lambda > 0; the isotropic case lambda = 1 is "
        "conformally flat (rank 0), anisotropic cases have nonzero Weyl tensor";
    e.docs =
        "Left-invariant metric a sigma2^2 + b sigma3^2 + 2 sigma1 . (sqrt(ab) dgamma + "
        "((a+b)/4) sigma1) on SU(2) x R with a = 1, b = lambda^2, in the chart h = exp(x0 T1) "
        "exp(x1 T2) exp(x2 T3); j = d/dgamma. Constants fixed by the build-time certificate, "
        "not by an external formula.";
    run_gate(e, "j");
    return e;
}

} // namespace

std::vector<std::string> valid_names() {
    return {"flat",           "sphere_round",         "conformally_flat",
            "perturbed_flat", "heisenberg_fefferman", "berger_fefferman"};
}

CatalogEntry get_chart(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "flat") return make_flat(params);
    if (name == "sphere_round") return make_sphere(params);
    if (name == "conformally_flat") return make_conformally_flat(params);
    if (name == "perturbed_flat") return make_perturbed_flat(params);
    if (name == "heisenberg_fefferman") return make_heisenberg(params);
    if (name == "berger_fefferman") return make_berger(params);
    std::ostringstream os;
    os << "unknown metric '" << name << "'; valid names:";
    for (const auto& v : valid_names()) os << " " << v;
    throw ValidationError(os.str());
}

ReferenceData reference_data(const std::string& name) {
    return get_chart(name).reference;
}

const VectorField& get_field(const CatalogEntry& entry, const std::string& name) {
    for (const auto& f : entry.fields)
        if (f.name == name) return f;
    std::ostringstream os;
    os << "entry '" << entry.name << "' has no field '" << name << "'; available:";
    for (const auto& f : entry.fields) os << " " << f.name;
    throw ValidationError(os.str());
}

VectorField moebius_field(const Signature& sig, const Vec& m, const Mat& A, double a,
                          const RowVec& l, const std::string& name) {
    MoebiusField f{m, A, a, l, metric_form(sig)};
    return make_vector_field(name, sig.n(), f);
}

std::vector<NamedRescaling> rescalings() {
    std::vector<NamedRescaling> out;
    out.push_back({"zero", [](const Vec& x) { return Jet2(0.0, static_cast<int>(x.size())); }});
    out.push_back({"log2", [](const Vec& x) {
                       return Jet2(std::log(2.0), static_cast<int>(x.size()));
                   }});
    out.push_back({"sin_wave", [](const Vec& x) {
                       const int n = static_cast<int>(x.size());
                       return 0.1 * sin(Jet2::variable(x(0), 0, n));
                   }});
    out.push_back({"bump", [](const Vec& x) {
                       const int n = static_cast<int>(x.size());
                       return 0.3 * (sin(Jet2::variable(x(0), 0, n)) *
                                     cos(Jet2::variable(x(1), 1, n)));
                   }});
    return out;
}

} // namespace catalog
} // namespace tractor
