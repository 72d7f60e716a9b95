#include "pgs/mm_engine.hpp"

#include <algorithm>
#include <cmath>

#include "pgs/inner_solver.hpp"

namespace pgs::mm {

namespace {

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double h = 1e-7 * (1.0 + std::abs(x[i]));
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

Vec dissipation_gradient(const PerturbedGradientSystem& sys, const Vec& base, const Vec& v) {
    if (sys.dissipation_grad) return sys.dissipation_grad(base, v);
    return fd_gradient([&](const Vec& z) { return sys.dissipation(base, z); }, v);
}

Vec energy_gradient(const PerturbedGradientSystem& sys, double t, const Vec& u) {
    if (sys.energy_grad) return sys.energy_grad(t, u);
    return fd_gradient([&](const Vec& z) { return sys.energy(t, z); }, u);
}

}  // namespace

void StepProblem::validate() const {
    if (!system) throw ConfigError("step problem has no system");
    if (!(r > 0.0)) throw ConfigError("step length must be positive");
    if (u.size() != system->dim || w.size() != system->dim)
        throw DimensionMismatch("step problem state/covector dimension mismatch");
    if (!system->in_domain(u)) throw ConfigError("base state outside the domain");
}

double step_functional(const StepProblem& p, const Vec& v) {
    p.validate();
    if (v.size() != p.u.size()) throw DimensionMismatch("step functional argument dimension");
    if (!p.system->in_domain(v)) return kInf;
    Vec vhat = (1.0 / p.r) * (v - p.u);
    double e = p.system->energy(p.t + p.r, v);
    if (!std::isfinite(e)) return kInf;
    return p.r * p.system->dissipation(p.u, vhat) + e - dot(p.w, v);
}

StepResult solve_step(const StepProblem& p, const SolverSettings& settings,
                      const Vec* warm_start) {
    p.validate();
    const PerturbedGradientSystem& sys = *p.system;
    const double t_new = p.t + p.r;

    solver::MinimizeSpec spec;
    spec.objective = [&](const Vec& v) {
        if (!sys.in_domain(v)) return kInf;
        Vec vhat = (1.0 / p.r) * (v - p.u);
        double e = sys.energy(t_new, v);
        if (!std::isfinite(e)) return kInf;
        return p.r * sys.dissipation(p.u, vhat) + e - dot(p.w, v);
    };
    spec.gradient = [&](const Vec& v) {
        Vec vhat = (1.0 / p.r) * (v - p.u);
        Vec g = dissipation_gradient(sys, p.u, vhat);
        Vec ge = energy_gradient(sys, t_new, v);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += ge[i] - p.w[i];
        return g;
    };
    spec.start = warm_start ? *warm_start : p.u;
    spec.grad_tol = 0.0;  // defaulted from the start gradient below
    {
        Vec g0 = spec.gradient(spec.start);
        spec.grad_tol = settings.grad_tol_rel * (1.0 + norm2(g0));
    }
    spec.max_iters = settings.max_iters_per_dim * (int)sys.dim;
    spec.accelerate = settings.accelerate;

    auto res = solver::minimize(spec);

    StepResult out;
    out.next = res.argmin;
    out.value = res.value;
    out.iters = res.iters;

    Vec vhat = (1.0 / p.r) * (out.next - p.u);
    Vec eta = dissipation_gradient(sys, p.u, vhat);
    out.xi = p.w - eta;

    double psi = sys.dissipation(p.u, vhat);
    double psi_star = sys.dissipation_conj(p.u, eta);
    out.fy_gap = psi + psi_star - dot(eta, vhat);

    Vec ge = energy_gradient(sys, t_new, out.next);
    out.energy_residual = norm2(ge - out.xi);

    double cert_tol = settings.cert_tol_rel * (1.0 + std::abs(psi) + std::abs(psi_star));
    double resid_tol = settings.cert_tol_rel * (1.0 + norm2(out.xi));
    if (out.fy_gap > settings.cert_hard_factor * cert_tol ||
        out.energy_residual > settings.cert_hard_factor * resid_tol)
        throw SumRuleViolated("step optimality certificates failed (gap " +
                              std::to_string(out.fy_gap) + ", residual " +
                              std::to_string(out.energy_residual) + ")");
    return out;
}

std::size_t Trajectory::interval_index(double t) const {
    if (intervals() == 0) throw ConfigError("empty trajectory");
    double x = (t - t_start) / tau;
    auto idx = (long)std::ceil(x - 1e-9) - 1;
    idx = std::max<long>(0, std::min<long>(idx, (long)intervals() - 1));
    return (std::size_t)idx;
}

Vec Trajectory::right_constant(double t) const {
    if (t <= times.front() + 1e-12 * tau) return nodes.front();
    return nodes[interval_index(t) + 1];
}

Vec Trajectory::left_constant(double t) const {
    double x = (t - t_start) / tau;
    long idx = (long)std::floor(x + 1e-9);
    idx = std::max<long>(0, std::min<long>(idx, (long)nodes.size() - 1));
    return nodes[(std::size_t)idx];
}

Vec Trajectory::affine(double t) const {
    if (t <= times.front()) return nodes.front();
    if (t >= times.back()) return nodes.back();
    std::size_t i = interval_index(t);
    double theta = (t - times[i]) / tau;
    Vec v = nodes[i];
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = (1.0 - theta) * nodes[i][k] + theta * nodes[i + 1][k];
    return v;
}

Vec Trajectory::affine_slope(double t) const {
    std::size_t i = interval_index(t);
    return (1.0 / tau) * (nodes[i + 1] - nodes[i]);
}

double Trajectory::t_right(double t) const {
    if (t <= times.front() + 1e-12 * tau) return times.front();
    return times[interval_index(t) + 1];
}

double Trajectory::t_left(double t) const {
    double x = (t - t_start) / tau;
    long idx = (long)std::floor(x + 1e-9);
    idx = std::max<long>(0, std::min<long>(idx, (long)times.size() - 1));
    return times[(std::size_t)idx];
}

Trajectory run_scheme(const PerturbedGradientSystem& sys, const Vec& u0, double T, int N,
                      const SchemeOptions& opts, double t_start) {
    if (N < 1) throw ConfigError("need at least one time step");
    if (u0.size() != sys.dim) throw DimensionMismatch("initial state dimension");
    if (!sys.in_domain(u0)) throw ConfigError("initial state outside the domain");
    double e0 = sys.energy(t_start, u0);
    if (!std::isfinite(e0)) throw ConfigError("initial energy not finite");

    Trajectory traj;
    traj.system = &sys;
    traj.t_start = t_start;
    traj.tau = T / N;
    traj.times.resize(N + 1);
    for (int n = 0; n <= N; ++n) traj.times[n] = t_start + n * traj.tau;
    traj.nodes.reserve(N + 1);
    traj.nodes.push_back(u0);
    traj.de_giorgi_substeps = opts.de_giorgi_substeps;

    // envelope constants, supplied or measured along the run
    double C = 0.0, beta = 0.0;
    const double c = opts.gronwall ? opts.gronwall->c : 0.5;
    if (opts.gronwall) {
        C = opts.gronwall->C;
        beta = opts.gronwall->beta;
    }

    auto update_measured = [&](double t, const Vec& u, double e) {
        if (opts.gronwall) return;
        if (e > 1e-12) C = std::max(C, std::abs(sys.power(t, u)) / e);
        Vec b = sys.perturbation(t, u);
        beta = std::max(beta, c * sys.dissipation_conj(u, (1.0 / c) * b) / (1.0 + e));
    };
    update_measured(t_start, u0, e0);

    for (int n = 1; n <= N; ++n) {
        StepProblem p;
        p.r = traj.tau;
        p.t = traj.times[n - 1];
        p.u = traj.nodes[n - 1];
        p.w = sys.perturbation(p.t, p.u);
        p.system = &sys;

        auto step = solve_step(p, opts.solver, &p.u);
        traj.nodes.push_back(step.next);
        traj.w_applied.push_back(p.w);
        traj.xi_nodes.push_back(step.xi);
        traj.step_iters.push_back(step.iters);

        double en = sys.energy(traj.times[n], step.next);
        update_measured(traj.times[n], step.next, en);

        double C1 = std::exp(C * T);
        double A = 2.0 * beta + C * C1;
        double envelope =
            (std::max(e0, 0.0) + 2.0 * beta * T) * std::exp(A * C1 * (traj.times[n] - t_start));
        double floor = 1e-9 * (1.0 + std::abs(e0));
        if (en > opts.blowup_factor * (envelope + floor))
            throw EnergyBlowup("node energy " + std::to_string(en) +
                               " escaped the discrete Gronwall envelope " +
                               std::to_string(envelope));
    }

    traj.de_giorgi_subnodes.assign(N, {});
    if (opts.de_giorgi_substeps > 0) {
        for (int n = 1; n <= N; ++n) {
            auto& cache = traj.de_giorgi_subnodes[n - 1];
            const int m = opts.de_giorgi_substeps;
            Vec warm = traj.nodes[n - 1];
            for (int j = 1; j <= m; ++j) {
                double s = traj.times[n - 1] + (j - 0.5) * traj.tau / m;
                StepProblem p;
                p.r = s - traj.times[n - 1];
                p.t = traj.times[n - 1];
                p.u = traj.nodes[n - 1];
                p.w = traj.w_applied[n - 1];
                p.system = &sys;
                auto step = solve_step(p, opts.solver, &warm);
                warm = step.next;
                cache.push_back({s, step.next, step.xi});
            }
        }
    }
    return traj;
}

DeGiorgiSample de_giorgi_interpolant(const Trajectory& traj, double s, int substeps,
                                     const SolverSettings& settings) {
    if (s <= traj.times.front() || s > traj.times.back() + 1e-12 * traj.tau)
        throw ConfigError("interpolation time outside (t_start, T]");
    std::size_t i = traj.interval_index(s);

    // the schemes coincide at the nodes
    if (std::abs(s - traj.times[i + 1]) <= 1e-12 * traj.tau)
        return {traj.times[i + 1], traj.nodes[i + 1], traj.xi_nodes[i]};

    // serve from the pre-sampled cache when the time matches
    if (i < traj.de_giorgi_subnodes.size())
        for (const auto& sample : traj.de_giorgi_subnodes[i])
            if (std::abs(sample.s - s) <= 1e-12 * traj.tau) return sample;

    const double r_target = s - traj.times[i];
    Vec warm = traj.affine(s);
    DeGiorgiSample out;
    const int m = std::max(1, substeps);
    for (int k = 1; k <= m; ++k) {
        StepProblem p;
        p.r = r_target * k / m;
        p.t = traj.times[i];
        p.u = traj.nodes[i];
        p.w = traj.w_applied[i];
        p.system = traj.system;
        auto step = solve_step(p, settings, &warm);
        warm = step.next;
        if (k == m) {
            out.s = s;
            out.state = step.next;
            out.xi = step.xi;
        }
    }
    return out;
}

MoreauScan moreau_yosida_scan(const StepProblem& p, const std::vector<double>& r_values,
                              std::optional<GronwallConstants> constants, double horizon,
                              const SolverSettings& settings, double tol) {
    p.validate();
    const PerturbedGradientSystem& sys = *p.system;

    double C = 0.0;
    if (constants) {
        C = constants->C;
    } else if (!sys.autonomous) {
        for (int k = 0; k <= 16; ++k) {
            double t = horizon * k / 16.0;
            double e = sys.energy(t, p.u);
            if (e > 1e-12) C = std::max(C, std::abs(sys.power(t, p.u)) / e);
        }
    }
    double G = sys.energy(p.t, p.u);
    for (int k = 0; k <= 16; ++k) G = std::max(G, sys.energy(horizon * k / 16.0, p.u));
    const double C1 = std::exp(C * horizon);
    const double psi_star_w = sys.dissipation_conj(p.u, p.w);
    const double drift_rate = C * C1 * (G + horizon * psi_star_w);

    MoreauScan scan;
    Vec warm = p.u;
    for (double r : r_values) {
        StepProblem q = p;
        q.r = r;
        auto step = solve_step(q, settings, &warm);
        warm = step.next;
        MoreauRow row;
        row.r = r;
        row.phi = step.value;
        row.upper_bound = sys.energy(p.t + r, p.u) - dot(p.w, p.u);
        if (!scan.rows.empty()) {
            const auto& prev = scan.rows.back();
            double allowed = (r - prev.r) * drift_rate + tol;
            row.monotone_ok = (row.phi - prev.phi) <= allowed;
            scan.all_monotone = scan.all_monotone && row.monotone_ok;
        }
        scan.rows.push_back(row);
    }
    return scan;
}

double extrapolate_to_zero(const MoreauScan& scan) {
    if (scan.rows.size() < 2) throw ConfigError("extrapolation needs at least two rows");
    // rows may come in any order; use the two smallest step lengths
    const MoreauRow* a = nullptr;
    const MoreauRow* b = nullptr;
    for (const auto& row : scan.rows) {
        if (!a || row.r < a->r) {
            b = a;
            a = &row;
        } else if (!b || row.r < b->r) {
            b = &row;
        }
    }
    return a->phi - a->r * (b->phi - a->phi) / (b->r - a->r);
}

EdbReport edb_report(const Trajectory& traj, double s, double t, int substeps,
                     const SolverSettings& settings, double quadrature_tol) {
    if (!(s < t)) throw ConfigError("edb_report requires s < t");
    const PerturbedGradientSystem& sys = *traj.system;
    const double tau = traj.tau;

    EdbReport rep;
    rep.s = traj.t_right(s);
    rep.t = traj.t_right(t);
    rep.quadrature_substeps = substeps;
    if (!(rep.s < rep.t)) throw ConfigError("interval collapses after snapping to nodes");

    std::size_t i0 = (std::size_t)std::llround((rep.s - traj.t_start) / tau);
    std::size_t i1 = (std::size_t)std::llround((rep.t - traj.t_start) / tau);

    rep.energy_start = sys.energy(rep.s, traj.nodes[i0]);
    rep.energy_end = sys.energy(rep.t, traj.nodes[i1]);

    double diss_primal = 0.0, diss_dual = 0.0, power_int = 0.0, work = 0.0;
    double diss_primal_c = 0.0, diss_dual_c = 0.0, power_int_c = 0.0, work_c = 0.0;
    double bar = 0.0;           // quadrature error estimate, coarse vs doubled
    double solver_budget = 0.0;

    for (std::size_t n = i0 + 1; n <= i1; ++n) {
        const Vec& u_prev = traj.nodes[n - 1];
        const Vec& u_next = traj.nodes[n];
        const Vec& w = traj.w_applied[n - 1];
        Vec vhat = (1.0 / tau) * (u_next - u_prev);

        diss_primal += tau * sys.dissipation(u_prev, vhat);
        work += dot(w, u_next - u_prev);
        diss_primal_c += tau * sys.dissipation(u_next, vhat);

        auto quad = [&](int m, double* dual, double* pow, double* dual_c, double* pow_c,
                        double* work_cc) {
            *dual = *pow = 0.0;
            if (dual_c) *dual_c = 0.0;
            if (pow_c) *pow_c = 0.0;
            if (work_cc) *work_cc = 0.0;
            for (int j = 1; j <= m; ++j) {
                double sj = traj.times[n - 1] + (j - 0.5) * tau / m;
                auto sample = de_giorgi_interpolant(traj, sj, 1, settings);
                *dual += sys.dissipation_conj(u_prev, w - sample.xi) * (tau / m);
                *pow += sys.power(sj, sample.state) * (tau / m);
                if (dual_c) {
                    Vec b = sys.perturbation(sj, u_next);
                    *dual_c += sys.dissipation_conj(u_next, b - sample.xi) * (tau / m);
                    *pow_c += sys.power(sj, u_next) * (tau / m);
                    *work_cc += dot(b, vhat) * (tau / m);
                }
            }
        };

        double d1, p1, dc1, pc1, wc1;
        quad(substeps, &d1, &p1, &dc1, &pc1, &wc1);
        double d2, p2, dc2, pc2, wc2;
        quad(2 * substeps, &d2, &p2, &dc2, &pc2, &wc2);

        double interval_bar = std::abs(d1 - d2) + std::abs(p1 - p2) + std::abs(dc1 - dc2) +
                              std::abs(pc1 - pc2) + std::abs(wc1 - wc2);
        if (std::isfinite(quadrature_tol) && interval_bar > 10.0 * quadrature_tol)
            throw QuadratureUnderResolved("doubling the substeps moved an integral by " +
                                          std::to_string(interval_bar));
        bar += interval_bar;

        // use the doubled-resolution integrals
        diss_dual += d2;
        power_int += p2;
        diss_dual_c += dc2;
        power_int_c += pc2;
        work_c += wc2;

        solver_budget += settings.grad_tol_rel * (1.0 + norm2(u_next)) * (1.0 + 3.0 * substeps);
    }

    rep.dissipation_primal = diss_primal;
    rep.dissipation_dual = diss_dual;
    rep.power_integral = power_int;
    rep.perturbation_work = work;

    double lhs = rep.energy_end + diss_primal + diss_dual;
    double rhs = rep.energy_start + power_int + work;
    rep.duee_slack = rhs - lhs;

    double lhs_c = rep.energy_end + diss_primal_c + diss_dual_c;
    double rhs_c = rep.energy_start + power_int_c + work_c;
    rep.edb_residual = std::abs(lhs_c - rhs_c);

    rep.tolerance_budget =
        2.0 * bar + solver_budget +
        1e-12 * (1.0 + std::abs(rep.energy_start) + std::abs(rep.energy_end));
    return rep;
}

}  // namespace pgs::mm
