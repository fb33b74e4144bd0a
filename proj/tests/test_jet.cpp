#include <doctest.h>

#include "tractor/jet.hpp"

using tractor::Jet2;

namespace {

// reference: central differences of f at x
template <class F>
void check_against_fd(F f, const Eigen::Vector2d& x, double tol = 1e-6) {
    const int n = 2;
    std::vector<Jet2> xv = {Jet2::variable(x(0), 0, n), Jet2::variable(x(1), 1, n)};
    const Jet2 out = f(xv[0], xv[1]);

    auto fd = [&](double a, double b) {
        return f(Jet2(a, n), Jet2(b, n)).v;
    };
    const double h = 1e-5;
    CHECK(out.v == doctest::Approx(fd(x(0), x(1))).epsilon(1e-12));
    const double gx = (fd(x(0) + h, x(1)) - fd(x(0) - h, x(1))) / (2 * h);
    const double gy = (fd(x(0), x(1) + h) - fd(x(0), x(1) - h)) / (2 * h);
    CHECK(out.g(0) == doctest::Approx(gx).epsilon(tol));
    CHECK(out.g(1) == doctest::Approx(gy).epsilon(tol));
    const double hxx = (fd(x(0) + h, x(1)) - 2 * fd(x(0), x(1)) + fd(x(0) - h, x(1))) / (h * h);
    const double hxy = (fd(x(0) + h, x(1) + h) - fd(x(0) + h, x(1) - h) -
                        fd(x(0) - h, x(1) + h) + fd(x(0) - h, x(1) - h)) /
                       (4 * h * h);
    CHECK(out.h(0, 0) == doctest::Approx(hxx).epsilon(1e-4));
    CHECK(out.h(0, 1) == doctest::Approx(hxy).epsilon(1e-4));
    CHECK(out.h(1, 0) == doctest::Approx(out.h(0, 1)).epsilon(1e-12));
}

} // namespace

TEST_CASE("jet arithmetic matches finite differences") {
    const Eigen::Vector2d x(0.7, -0.3);
    check_against_fd([](const Jet2& a, const Jet2& b) { return a * b + 2.0 * a - b / 3.0; }, x);
    check_against_fd([](const Jet2& a, const Jet2& b) { return a * a * b - 1.0 / (b + 2.0); }, x);
    check_against_fd([](const Jet2& a, const Jet2& b) { return sin(a) * cos(b); }, x);
    check_against_fd([](const Jet2& a, const Jet2& b) { return exp(a * b); }, x);
    check_against_fd([](const Jet2& a, const Jet2& b) { return log(a + 2.0) * sqrt(b + 1.0); },
                     x);
    check_against_fd([](const Jet2& a, const Jet2& b) { return (a - b) / (a * a + b * b + 1.0); },
                     x);
}

TEST_CASE("jet seeds and constants") {
    const Jet2 v = Jet2::variable(2.5, 1, 3);
    CHECK(v.v == 2.5);
    CHECK(v.g(1) == 1.0);
    CHECK(v.g(0) == 0.0);
    CHECK(v.h.norm() == 0.0);
    const Jet2 c(4.0, 3);
    CHECK(c.g.norm() == 0.0);
}
