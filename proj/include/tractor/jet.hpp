#pragma once
#include <Eigen/Dense>
#include <cmath>

namespace tractor {

// Second-order forward-mode scalar: value, gradient and Hessian with respect
// to a fixed set of n seed variables. Used to evaluate metric components and
// vector fields together with their exact first and second derivatives.
class Jet2 {
public:
    double v = 0.0;
    Eigen::VectorXd g;  // size n
    Eigen::MatrixXd h;  // n x n, symmetric

    Jet2() = default;
    Jet2(double value, int n)
        : v(value), g(Eigen::VectorXd::Zero(n)), h(Eigen::MatrixXd::Zero(n, n)) {}

    static Jet2 variable(double value, int index, int n) {
        Jet2 j(value, n);
        j.g(index) = 1.0;
        return j;
    }

    int vars() const { return static_cast<int>(g.size()); }

    Jet2 operator-() const {
        Jet2 r = *this;
        r.v = -r.v; r.g = -r.g; r.h = -r.h;
        return r;
    }

    Jet2& operator+=(const Jet2& o) { v += o.v; g += o.g; h += o.h; return *this; }
    Jet2& operator-=(const Jet2& o) { v -= o.v; g -= o.g; h -= o.h; return *this; }
    Jet2& operator+=(double c) { v += c; return *this; }
    Jet2& operator-=(double c) { v -= c; return *this; }
    Jet2& operator*=(double c) { v *= c; g *= c; h *= c; return *this; }

    friend Jet2 operator+(Jet2 a, const Jet2& b) { a += b; return a; }
    friend Jet2 operator-(Jet2 a, const Jet2& b) { a -= b; return a; }
    friend Jet2 operator+(Jet2 a, double c) { a.v += c; return a; }
    friend Jet2 operator+(double c, Jet2 a) { a.v += c; return a; }
    friend Jet2 operator-(Jet2 a, double c) { a.v -= c; return a; }
    friend Jet2 operator-(double c, const Jet2& a) { return (-a) + c; }
    friend Jet2 operator*(const Jet2& a, const Jet2& b) {
        Jet2 r(a.v * b.v, a.vars());
        r.g = a.g * b.v + b.g * a.v;
        r.h = a.h * b.v + b.h * a.v + a.g * b.g.transpose() + b.g * a.g.transpose();
        return r;
    }
    friend Jet2 operator*(Jet2 a, double c) { a *= c; return a; }
    friend Jet2 operator*(double c, Jet2 a) { a *= c; return a; }
    friend Jet2 operator/(const Jet2& a, const Jet2& b) { return a * b.reciprocal(); }
    friend Jet2 operator/(Jet2 a, double c) { a *= 1.0 / c; return a; }
    friend Jet2 operator/(double c, const Jet2& b) { return b.reciprocal() * c; }

    Jet2 reciprocal() const {
        const double iv = 1.0 / v;
        Jet2 r(iv, vars());
        r.g = -iv * iv * g;
        r.h = (2.0 * iv * iv * iv) * (g * g.transpose()) - iv * iv * h;
        return r;
    }

    // chain rule for f with f' = d1, f'' = d2 at v
    Jet2 lift(double fv, double d1, double d2) const {
        Jet2 r(fv, vars());
        r.g = d1 * g;
        r.h = d1 * h + d2 * (g * g.transpose());
        return r;
    }
};

inline Jet2 sin(const Jet2& a) { return a.lift(std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet2 cos(const Jet2& a) { return a.lift(std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet2 exp(const Jet2& a) { const double e = std::exp(a.v); return a.lift(e, e, e); }
inline Jet2 log(const Jet2& a) { return a.lift(std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
inline Jet2 sqrt(const Jet2& a) {
    const double s = std::sqrt(a.v);
    return a.lift(s, 0.5 / s, -0.25 / (s * a.v));
}

// double fallbacks so templated metric code works with T = double
inline double reciprocal(double a) { return 1.0 / a; }

template <class T> struct JetTraits;
template <> struct JetTraits<double> {
    static double constant(double c, int) { return c; }
    static double variable(double x, int, int) { return x; }
};
template <> struct JetTraits<Jet2> {
    static Jet2 constant(double c, int n) { return Jet2(c, n); }
    static Jet2 variable(double x, int i, int n) { return Jet2::variable(x, i, n); }
};

} // namespace tractor
