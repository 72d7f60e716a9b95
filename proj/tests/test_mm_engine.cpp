#include <doctest.h>

#include <cmath>

#include "pgs/catalog.hpp"
#include "pgs/mm_engine.hpp"
#include "pgs/rds_fd.hpp"

using namespace pgs;
using namespace pgs::mm;

namespace {

// dense Gaussian elimination with partial pivoting; the independent oracle
// for linear incremental problems
Vec dense_solve(std::vector<Vec> A, Vec rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[piv], A[col]);
        std::swap(rhs[piv], rhs[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = A[r][col] / A[col][col];
            for (std::size_t cc = col; cc < n; ++cc) A[r][cc] -= f * A[col][cc];
            rhs[r] -= f * rhs[col];
        }
    }
    Vec x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = rhs[r];
        for (std::size_t cc = r + 1; cc < n; ++cc) s -= A[r][cc] * x[cc];
        x[r] = s / A[r][r];
    }
    return x;
}

StepProblem scalar_problem(const model::PerturbedGradientSystem& sys, double r, double t,
                           double u, double w) {
    StepProblem p;
    p.r = r;
    p.t = t;
    p.u = {u};
    p.w = {w};
    p.system = &sys;
    return p;
}

}  // namespace

TEST_CASE("step functional values on the quadratic system") {
    auto sys = catalog::ode_system("decay");
    auto p = scalar_problem(sys, 1.0, 0.0, 0.0, 0.0);
    CHECK(step_functional(p, {2.0}) == doctest::Approx(4.0));
    CHECK(step_functional(p, {0.0}) == doctest::Approx(0.0));

    auto q = scalar_problem(sys, 0.5, 0.0, 1.0, 0.5);
    double vstar = (1.0 + 0.5 * 0.5) / 1.5;  // closed-form minimizer
    double expected = 0.5 * 0.5 * std::pow((vstar - 1.0) / 0.5, 2) + 0.5 * vstar * vstar -
                      0.5 * vstar;
    CHECK(step_functional(q, {vstar}) == doctest::Approx(expected));
    CHECK(expected == doctest::Approx(0.0417).epsilon(1e-2));
    // dense scan: no admissible point does better
    double best = 1e300;
    for (int k = 0; k <= 200000; ++k) {
        double v = -2.0 + 4.0 * k / 200000.0;
        best = std::min(best, step_functional(q, {v}));
    }
    CHECK(step_functional(q, {vstar}) <= best + 1e-8);
}

TEST_CASE("step functional respects the conjugate lower bound at the base point") {
    auto sys = catalog::ode_system("quartic");
    auto p = scalar_problem(sys, 0.25, 0.0, 0.8, 0.3);
    double lower = -p.r * sys.dissipation_conj(p.u, p.w) + sys.energy(p.t + p.r, p.u) -
                   dot(p.w, p.u);
    for (double v = -2.0; v <= 2.0; v += 0.05) {
        double lb = -p.r * sys.dissipation_conj(p.u, p.w) + sys.energy(p.t + p.r, {v}) -
                    dot(p.w, p.u);
        CHECK(step_functional(p, {v}) >= lb - 1e-12);
    }
    CHECK(step_functional(p, p.u) >= lower - 1e-12);
}

TEST_CASE("step functional rejects dimension mismatches") {
    auto sys = catalog::ode_system("decay");
    auto p = scalar_problem(sys, 1.0, 0.0, 0.0, 0.0);
    CHECK_THROWS_AS(step_functional(p, {1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("solve_step on the quadratic system reproduces closed forms") {
    auto sys = catalog::ode_system("decay");
    auto r1 = solve_step(scalar_problem(sys, 0.5, 0.0, 1.0, 0.0));
    CHECK(r1.next[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(r1.xi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(r1.fy_gap <= 1e-10);
    CHECK(r1.energy_residual <= 1e-9);

    auto r2 = solve_step(scalar_problem(sys, 0.5, 0.0, 1.0, 0.5));
    CHECK(r2.next[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-10));
    CHECK(r2.xi[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("solve_step matches the dense linear oracle on a heat step") {
    rds::Grid grid;
    grid.cells = 4;
    auto sys = rds::assemble_system(catalog::rds_instance("heat"), 1.0, grid);
    const std::size_t n = sys.dim;
    Vec u0(n);
    for (std::size_t i = 0; i < n; ++i) u0[i] = std::sin(M_PI * i / (n - 1.0));

    double tau = 0.25;
    StepProblem p;
    p.r = tau;
    p.t = 0.0;
    p.u = u0;
    p.w = Vec(n, 0.0);
    p.system = &sys;
    auto res = solve_step(p);

    // assemble (M/r + K) v = M u / r from the quadratic forms themselves
    std::vector<Vec> A(n, Vec(n, 0.0));
    Vec rhs(n, 0.0);
    Vec zero(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        Vec ej(n, 0.0);
        ej[j] = 1.0;
        Vec col_m = sys.dissipation_grad(u0, ej);
        Vec col_k = sys.energy_grad(0.0, ej) - sys.energy_grad(0.0, zero);
        for (std::size_t i = 0; i < n; ++i) A[i][j] = col_m[i] / tau + col_k[i];
    }
    Vec mu = sys.dissipation_grad(u0, u0);
    Vec k0 = sys.energy_grad(0.0, zero);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = mu[i] / tau - k0[i];
    Vec oracle = dense_solve(A, rhs);

    for (std::size_t i = 0; i < n; ++i)
        CHECK(res.next[i] == doctest::Approx(oracle[i]).epsilon(1e-8));
}

TEST_CASE("solve_step flags a broken conjugate as a sum-rule violation") {
    auto sys = catalog::ode_system("decay");
    sys.dissipation_conj = [](const Vec&, const Vec& xi) {
        return 0.5 * xi[0] * xi[0] + 5.0;  // inconsistent with the potential
    };
    CHECK_THROWS_AS(solve_step(scalar_problem(sys, 0.5, 0.0, 1.0, 0.0)), SumRuleViolated);
}

TEST_CASE("run_scheme: one backward step of the decay system") {
    auto sys = catalog::ode_system("decay");
    auto traj = run_scheme(sys, {1.0}, 1.0, 1);
    REQUIRE(traj.nodes.size() == 2);
    CHECK(traj.nodes[0][0] == 1.0);
    CHECK(traj.nodes[1][0] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("run_scheme converges to the exponential flow") {
    auto sys = catalog::ode_system("decay");
    double prev_err = 1e300;
    for (int N : {8, 16, 32, 64}) {
        auto traj = run_scheme(sys, {1.0}, 1.0, N);
        double err = std::abs(traj.nodes.back()[0] - std::exp(-1.0));
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 1e-2);
}

TEST_CASE("run_scheme with constant forcing approaches the forced flow") {
    auto sys = catalog::ode_system("forced");
    double prev_err = 1e300;
    for (int N : {8, 16, 32, 64}) {
        auto traj = run_scheme(sys, {0.0}, 1.0, N);
        double err = std::abs(traj.nodes.back()[0] - (1.0 - std::exp(-1.0)));
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 1e-2);
}

TEST_CASE("interpolants coincide at the nodes") {
    auto sys = catalog::ode_system("forced");
    auto traj = run_scheme(sys, {0.0}, 1.0, 8);
    for (std::size_t n = 0; n < traj.times.size(); ++n) {
        double t = traj.times[n];
        CHECK(traj.right_constant(t) == traj.nodes[n]);
        CHECK(traj.left_constant(t) == traj.nodes[n]);
        CHECK(traj.affine(t)[0] == doctest::Approx(traj.nodes[n][0]).epsilon(1e-14));
        if (n > 0) {
            auto dg = de_giorgi_interpolant(traj, t);
            CHECK(dg.state == traj.nodes[n]);
        }
    }
}

TEST_CASE("variational interpolant follows the closed form on the quadratic system") {
    auto sys = catalog::ode_system("decay");
    auto traj = run_scheme(sys, {1.0}, 1.0, 1);
    for (double r : {0.1, 0.3, 0.5, 0.9}) {
        auto dg = de_giorgi_interpolant(traj, r);
        CHECK(dg.state[0] == doctest::Approx(1.0 / (1.0 + r)).epsilon(1e-8));
        CHECK(dg.xi[0] == doctest::Approx(1.0 / (1.0 + r)).epsilon(1e-7));
    }
    // continuity toward the base point as the step length vanishes
    double prev_gap = 1e300;
    for (double r : {0.2, 0.1, 0.05, 0.025}) {
        auto dg = de_giorgi_interpolant(traj, r);
        double gap = std::abs(dg.state[0] - 1.0);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
}

TEST_CASE("fenchel-young equality holds along the accepted steps") {
    auto sys = catalog::ode_system("quartic");
    auto traj = run_scheme(sys, {1.0}, 1.0, 16);
    for (std::size_t n = 0; n < traj.intervals(); ++n) {
        Vec vhat = (1.0 / traj.tau) * (traj.nodes[n + 1] - traj.nodes[n]);
        Vec eta = traj.w_applied[n] - traj.xi_nodes[n];
        double gap = sys.dissipation(traj.nodes[n], vhat) +
                     sys.dissipation_conj(traj.nodes[n], eta) - dot(eta, vhat);
        CHECK(std::abs(gap) <= 1e-9);
    }
}

TEST_CASE("autonomous runs are invariant under time shifts") {
    auto sys = catalog::ode_system("quartic");
    auto a = run_scheme(sys, {1.0}, 1.0, 16, {}, 0.0);
    auto b = run_scheme(sys, {1.0}, 1.0, 16, {}, 5.0);
    for (std::size_t n = 0; n < a.nodes.size(); ++n) CHECK(a.nodes[n][0] == b.nodes[n][0]);
}

TEST_CASE("energy blow-up guard fires when fed constants that forbid growth") {
    auto sys = catalog::ode_system("forced");
    SchemeOptions opts;
    opts.gronwall = GronwallConstants{0.0, 0.0, 0.5};  // claims an unforced system
    CHECK_THROWS_AS(run_scheme(sys, {0.0}, 1.0, 8, opts), EnergyBlowup);
    // with measured constants the same run is fine
    auto traj = run_scheme(sys, {0.0}, 1.0, 8);
    CHECK(traj.nodes.back()[0] > 0.0);
}

TEST_CASE("moreau-yosida scan matches the closed-form envelope") {
    auto sys = catalog::ode_system("decay");
    auto p = scalar_problem(sys, 1.0, 0.0, 1.0, 0.0);
    std::vector<double> rs;
    for (int k = 8; k >= 0; --k) rs.push_back(std::ldexp(1.0, -k));
    auto scan = moreau_yosida_scan(p, rs);
    for (const auto& row : scan.rows) {
        CHECK(row.phi == doctest::Approx(0.5 / (1.0 + row.r)).epsilon(1e-10));
        CHECK(row.phi <= row.upper_bound + 1e-12);
    }
    CHECK(scan.all_monotone);  // strictly decreasing for the autonomous quadratic
    // extrapolation to vanishing step length recovers the energy
    CHECK(extrapolate_to_zero(scan) == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("duee slack stays within the tolerance budget on the quadratic flow") {
    auto sys = catalog::ode_system("decay");
    auto traj = run_scheme(sys, {1.0}, 1.0, 8);
    for (std::size_t n = 0; n < traj.intervals(); ++n) {
        auto rep = edb_report(traj, traj.times[n], traj.times[n + 1], 8);
        CHECK(rep.duee_slack >= -10.0 * rep.tolerance_budget);
        CHECK(rep.duee_slack >= -1e-8);
        CHECK(rep.dissipation_primal >= 0.0);
        CHECK(rep.dissipation_dual >= 0.0);
    }
}

TEST_CASE("exact-flow identity: energy plus dissipation is conserved") {
    // for u' = -u from u0 = 1: 0.5 e^{-2t} + int_0^t e^{-2r} dr = 0.5
    for (double t : {0.25, 0.5, 1.0}) {
        double lhs = 0.5 * std::exp(-2.0 * t) + 0.5 * (1.0 - std::exp(-2.0 * t));
        CHECK(lhs == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("edb residual decreases under step refinement") {
    for (const char* name : {"decay", "forced"}) {
        auto sys = catalog::ode_system(name);
        Vec u0{name == std::string("forced") ? 0.0 : 1.0};
        double prev = 1e300;
        for (int N : {4, 8, 16}) {
            auto traj = run_scheme(sys, u0, 1.0, N);
            double cum = 0.0;
            for (std::size_t n = 0; n < traj.intervals(); ++n)
                cum += edb_report(traj, traj.times[n], traj.times[n + 1], 8).edb_residual;
            CHECK(cum <= 0.75 * prev);
            prev = cum;
        }
    }
}

TEST_CASE("perturbation work telescopes for constant forcing") {
    auto sys = catalog::ode_system("forced");
    auto traj = run_scheme(sys, {0.0}, 1.0, 8);
    auto rep = edb_report(traj, 0.0, 1.0, 4);
    double expected = traj.nodes.back()[0] - traj.nodes.front()[0];
    CHECK(rep.perturbation_work == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("quadrature guard fires when the tolerance is impossibly tight") {
    auto sys = catalog::ode_system("quartic");
    auto traj = run_scheme(sys, {1.0}, 1.0, 2);
    CHECK_THROWS_AS(edb_report(traj, 0.0, 1.0, 2, {}, 1e-19), QuadratureUnderResolved);
}
