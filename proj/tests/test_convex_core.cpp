#include <doctest.h>

#include <cmath>

#include "pgs/convex_core.hpp"

using namespace pgs;
using namespace pgs::convex;

namespace {

Functional quadratic_1d(double a = 1.0) {
    Functional f;
    f.eval = [a](const Vec& v) { return 0.5 * a * v[0] * v[0]; };
    f.grad = [a](const Vec& v) { return Vec{a * v[0]}; };
    f.convex = true;
    return f;
}

Functional abs_1d() {
    Functional f;
    f.eval = [](const Vec& v) { return std::abs(v[0]); };
    f.convex = true;
    return f;
}

Functional quartic_1d() {
    Functional f;
    f.eval = [](const Vec& v) { return 0.25 * std::pow(v[0], 4); };
    f.convex = true;
    return f;
}

// independent conjugate oracle: dense scan, nothing shared with the library path
double conjugate_scan_oracle(const std::function<double(double)>& f, double xi, double lo,
                             double hi, int points = 4'000'000) {
    double best = -1e300;
    for (int k = 0; k <= points; ++k) {
        double v = lo + (hi - lo) * k / points;
        best = std::max(best, xi * v - f(v));
    }
    return best;
}

}  // namespace

TEST_CASE("conjugate of the unit quadratic is the unit quadratic") {
    auto f = quadratic_1d();
    double val = legendre_fenchel(f, {3.0}, SearchBox::cube(1, 10.0));
    CHECK(val == doctest::Approx(4.5).epsilon(1e-9));
}

TEST_CASE("conjugate of the absolute value is the unit-ball indicator") {
    auto f = abs_1d();
    CHECK(legendre_fenchel(f, {0.5}, SearchBox::cube(1, 10.0)) ==
          doctest::Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(legendre_fenchel(f, {2.0}, SearchBox::cube(1, 1e9)), UnboundedConjugate);
}

TEST_CASE("conjugate of the quartic against the dense-scan oracle") {
    auto f = quartic_1d();
    double oracle =
        conjugate_scan_oracle([](double v) { return 0.25 * std::pow(v, 4); }, 2.0, 0.0, 3.0);
    double closed = 0.75 * std::pow(2.0, 4.0 / 3.0);  // stationary point v = xi^(1/3)
    CHECK(oracle == doctest::Approx(closed).epsilon(1e-10));
    double val = legendre_fenchel(f, {2.0}, SearchBox::cube(1, 4.0));
    CHECK(val == doctest::Approx(oracle).epsilon(1e-8));
    CHECK(val == doctest::Approx(1.88988).epsilon(1e-4));
}

TEST_CASE("conjugate is monotone under box enlargement") {
    auto f = quartic_1d();
    double prev = -1e300;
    for (double radius : {0.5, 1.0, 2.0, 4.0}) {
        double val = legendre_fenchel(f, {2.0}, SearchBox::cube(1, radius));
        CHECK(val >= prev - 1e-12);
        prev = val;
    }
}

TEST_CASE("closed-form conjugate short-circuits the search") {
    auto f = quadratic_1d();
    f.conjugate = [](const Vec& xi) { return 0.5 * xi[0] * xi[0]; };
    CHECK(legendre_fenchel(f, {3.0}, SearchBox::cube(1, 0.1)) == doctest::Approx(4.5));
}

TEST_CASE("fenchel-young gap on the quadratic") {
    auto f = quadratic_1d();
    Functional fs = quadratic_1d();  // self-dual
    CHECK(fenchel_young_gap(f, fs, {2.0}, {2.0}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fenchel_young_gap(f, fs, {2.0}, {0.0}) == doctest::Approx(2.0));
}

TEST_CASE("fenchel-young gap on the quartic with an oracle conjugate value") {
    auto f = quartic_1d();
    double fstar_at_1 =
        conjugate_scan_oracle([](double v) { return 0.25 * std::pow(v, 4); }, 1.0, 0.0, 2.0);
    CHECK(fstar_at_1 == doctest::Approx(0.75).epsilon(1e-10));
    Functional fs;
    fs.eval = [fstar_at_1](const Vec&) { return fstar_at_1; };
    fs.convex = true;
    CHECK(fenchel_young_gap(f, fs, {1.0}, {1.0}) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("gap evaluation rejects infinite values") {
    Functional f;
    f.eval = [](const Vec& v) { return v[0] >= 0 ? v[0] : kInf; };
    f.dom = [](const Vec& v) { return v[0] >= 0; };
    f.convex = true;
    Functional fs = quadratic_1d();
    CHECK_THROWS_AS(fenchel_young_gap(f, fs, {-1.0}, {0.0}), InfiniteValue);
}

TEST_CASE("subdifferential residual certifies membership for the absolute value") {
    auto f = abs_1d();
    CHECK(subdiff_residual(f, {0.0}, {0.3}) <= 1e-12);
    double r = subdiff_residual(f, {0.0}, {1.5});
    CHECK(r > 0.4);
    CHECK(r < 0.6);
    CHECK(subdiff_residual(quadratic_1d(), {1.0}, {1.0}) <= 1e-12);
}

TEST_CASE("subdifferential residual requires the convexity flag") {
    Functional f;
    f.eval = [](const Vec& v) { return std::cos(v[0]); };
    CHECK_THROWS_AS(subdiff_residual(f, {0.0}, {0.0}), NotConvex);
}

TEST_CASE("fenchel-young inequality holds on random samples") {
    Rng rng(7);
    for (int k = 0; k < 500; ++k) {
        double a = rng.uniform(0.5, 3.0);
        Functional f = quadratic_1d(a);
        Functional fs;
        fs.eval = [a](const Vec& xi) { return 0.5 * xi[0] * xi[0] / a; };
        fs.convex = true;
        double u = rng.uniform(-3.0, 3.0);
        double xi = rng.uniform(-3.0, 3.0);
        double gap = fenchel_young_gap(f, fs, {u}, {xi});
        double scale = 1.0 + std::abs(f.eval({u})) + std::abs(fs.eval({xi}));
        CHECK(gap >= -1e-10 * scale);
    }
}

TEST_CASE("gap <= tol and subdifferential residual <= tol agree") {
    Rng rng(11);
    int disagreements = 0;
    for (int k = 0; k < 300; ++k) {
        double a = rng.uniform(0.5, 3.0);
        Functional f = quadratic_1d(a);
        Functional fs;
        fs.eval = [a](const Vec& xi) { return 0.5 * xi[0] * xi[0] / a; };
        fs.convex = true;
        double u = rng.uniform(-3.0, 3.0);
        // alternate constructed members and random covectors
        double xi = (k % 2 == 0) ? a * u : rng.uniform(-3.0, 3.0);
        double gap = fenchel_young_gap(f, fs, {u}, {xi});
        double tol = gap_tolerance(f.eval({u}), fs.eval({xi}));
        SubdiffOptions so;
        so.radius = 2.0 * (std::abs(u) + std::abs(xi) / a) + 1.0;
        double resid = subdiff_residual(f, {u}, {xi}, so);
        if ((gap <= tol) != (resid <= tol)) ++disagreements;
    }
    CHECK(disagreements == 0);
}

TEST_CASE("biconjugation recovers a convex function on a grid") {
    auto f = quartic_1d();
    Functional fstar;
    fstar.eval = [&](const Vec& xi) {
        return legendre_fenchel(f, xi, SearchBox::cube(1, 6.0));
    };
    fstar.convex = true;
    for (double v = -1.5; v <= 1.5; v += 0.25) {
        double fss = legendre_fenchel(fstar, {v}, SearchBox::cube(1, 8.0));
        CHECK(fss == doctest::Approx(0.25 * std::pow(v, 4)).epsilon(5e-6).scale(1.0));
    }
}

TEST_CASE("conjugates of a convergent quadratic family converge pointwise") {
    // dual counterpart of the variational convergence of 0.5 a_n v^2
    double a_lim = 2.0;
    for (double xi : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
        double prev_err = 1e300;
        for (int n = 1; n <= 4; ++n) {
            double a_n = a_lim + 1.0 / (n * n);
            Functional f = quadratic_1d(a_n);
            double conj = legendre_fenchel(f, {xi}, SearchBox::cube(1, 10.0));
            double err = std::abs(conj - 0.5 * xi * xi / a_lim);
            CHECK(err <= prev_err + 1e-12);
            prev_err = err;
        }
        CHECK(prev_err < 1e-2);
    }
}

TEST_CASE("dual pair records the gap") {
    auto f = quadratic_1d();
    auto p = make_dual_pair(f, quadratic_1d(), {2.0}, {2.0});
    CHECK(p.gap == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.point[0] == 2.0);
}
