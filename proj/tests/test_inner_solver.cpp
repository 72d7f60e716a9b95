#include <doctest.h>

#include <cmath>

#include "pgs/inner_solver.hpp"

using namespace pgs;
using namespace pgs::solver;

TEST_CASE("shifted quadratic") {
    MinimizeSpec spec;
    spec.objective = [](const Vec& v) { return 0.5 * (v[0] - 3.0) * (v[0] - 3.0); };
    spec.gradient = [](const Vec& v) { return Vec{v[0] - 3.0}; };
    spec.start = {0.0};
    auto res = minimize(spec);
    CHECK(res.converged);
    CHECK(res.argmin[0] == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("quadratic plus quartic has its minimum at the origin") {
    MinimizeSpec spec;
    spec.objective = [](const Vec& v) {
        return 0.5 * v[0] * v[0] + 0.25 * std::pow(v[0], 4);
    };
    spec.gradient = [](const Vec& v) { return Vec{v[0] + std::pow(v[0], 3)}; };
    spec.start = {5.0};
    auto res = minimize(spec);
    CHECK(res.converged);
    CHECK(res.argmin[0] == doctest::Approx(0.0).epsilon(1e-8).scale(1.0));
}

TEST_CASE("scalar incremental objective has the closed-form minimizer") {
    // r Psi((v-u)/r) + E(v) - w v with E = Psi = squares/2: v = (u + r w)/(1 + r)
    double r = 0.5, u = 1.0, w = 0.5;
    MinimizeSpec spec;
    spec.objective = [&](const Vec& v) {
        double vhat = (v[0] - u) / r;
        return r * 0.5 * vhat * vhat + 0.5 * v[0] * v[0] - w * v[0];
    };
    spec.gradient = [&](const Vec& v) { return Vec{(v[0] - u) / r + v[0] - w}; };
    spec.start = {u};
    auto res = minimize(spec);
    CHECK(res.argmin[0] == doctest::Approx((u + r * w) / (1.0 + r)).epsilon(1e-10));
}

TEST_CASE("strictly convex quadratic in dimension 100 reaches tight gradient norms") {
    const int n = 100;
    // diagonal spectrum in [1,10] plus a rank-one coupling keeps it strictly convex
    Vec diag(n), shift(n);
    Rng rng(5);
    for (int i = 0; i < n; ++i) {
        diag[i] = 1.0 + 9.0 * i / (n - 1);
        shift[i] = rng.uniform(-2.0, 2.0);
    }
    auto apply = [&](const Vec& v) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += v[i];
        Vec out(n);
        for (int i = 0; i < n; ++i) out[i] = diag[i] * v[i] + 0.1 * s;
        return out;
    };
    MinimizeSpec spec;
    spec.objective = [&](const Vec& v) {
        Vec d(n);
        for (int i = 0; i < n; ++i) d[i] = v[i] - shift[i];
        return 0.5 * dot(d, apply(d));
    };
    spec.gradient = [&](const Vec& v) {
        Vec d(n);
        for (int i = 0; i < n; ++i) d[i] = v[i] - shift[i];
        return apply(d);
    };
    spec.start = Vec(n, 0.0);
    spec.grad_tol = 1e-10;
    spec.max_iters = 10 * n;
    auto res = minimize(spec);
    CHECK(res.converged);
    CHECK(res.grad_norm <= 1e-10);
    CHECK(res.iters <= 10 * n);
}

TEST_CASE("descent: the returned value never exceeds the start value") {
    MinimizeSpec spec;
    spec.objective = [&](const Vec& v) {
        return 0.25 * std::pow(v[0] - 1.0, 4) + 0.5 * v[1] * v[1];
    };
    spec.gradient = [&](const Vec& v) {
        return Vec{std::pow(v[0] - 1.0, 3), v[1]};
    };
    spec.start = {4.0, -3.0};
    auto res = minimize(spec);
    CHECK(res.value <= spec.objective(spec.start) + 1e-12);
    CHECK(res.argmin[0] == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(res.argmin[1] == doctest::Approx(0.0).epsilon(1e-8).scale(1.0));
}

TEST_CASE("translation equivariance") {
    auto base = [](const Vec& v) { return 0.5 * v[0] * v[0] + 0.25 * std::pow(v[0], 4); };
    auto grad = [](double x) { return x + std::pow(x, 3); };
    for (double a : {-2.0, 0.5, 3.0}) {
        MinimizeSpec spec;
        spec.objective = [&](const Vec& v) { return base({v[0] - a}); };
        spec.gradient = [&](const Vec& v) { return Vec{grad(v[0] - a)}; };
        spec.start = {a + 2.0};
        auto res = minimize(spec);
        CHECK(res.argmin[0] == doctest::Approx(a).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("derivative-free polling handles a nonsmooth objective") {
    MinimizeSpec spec;
    spec.objective = [](const Vec& v) { return std::abs(v[0] - 2.0) + 0.5 * v[1] * v[1]; };
    spec.start = {0.0, 1.0};
    spec.f_tol = 1e-16;
    auto res = minimize(spec);
    CHECK(res.argmin[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(res.argmin[1] == doctest::Approx(0.0).epsilon(1e-6).scale(1.0));
}

TEST_CASE("iteration exhaustion returns the best point unconverged") {
    MinimizeSpec spec;
    spec.objective = [](const Vec& v) { return 0.5 * v[0] * v[0]; };
    spec.gradient = [](const Vec& v) { return Vec{v[0]}; };
    spec.start = {100.0};
    spec.max_iters = 2;
    spec.grad_tol = 1e-14;
    auto res = minimize(spec);
    CHECK(!res.converged);
    CHECK(res.value <= spec.objective(spec.start));
}

TEST_CASE("NaN objectives are rejected") {
    MinimizeSpec spec;
    spec.objective = [](const Vec& v) {
        return v[0] < -1.0 ? std::nan("") : 0.5 * v[0] * v[0];
    };
    spec.gradient = [](const Vec& v) { return Vec{v[0]}; };
    spec.start = {-2.0};
    CHECK_THROWS_AS(minimize(spec), NonFiniteObjective);
}

TEST_CASE("plain descent mode also converges") {
    MinimizeSpec spec;
    spec.objective = [](const Vec& v) { return 0.5 * (v[0] - 3.0) * (v[0] - 3.0); };
    spec.gradient = [](const Vec& v) { return Vec{v[0] - 3.0}; };
    spec.start = {0.0};
    spec.accelerate = false;
    auto res = minimize(spec);
    CHECK(res.argmin[0] == doctest::Approx(3.0).epsilon(1e-7));
}
