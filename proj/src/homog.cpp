#include "pgs/homog.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace pgs::homog {

namespace {

// --- cubic Hermite interpolation on uniform grids (C1, local stencil) ---

void hermite_weights(double t, double dx, double* w, double* dw) {
    // value weights for (v0, v1, m0, m1); dw = d/dx
    double t2 = t * t, t3 = t2 * t;
    w[0] = 2 * t3 - 3 * t2 + 1;
    w[1] = -2 * t3 + 3 * t2;
    w[2] = (t3 - 2 * t2 + t) * dx;
    w[3] = (t3 - t2) * dx;
    dw[0] = (6 * t2 - 6 * t) / dx;
    dw[1] = (-6 * t2 + 6 * t) / dx;
    dw[2] = 3 * t2 - 4 * t + 1;
    dw[3] = 3 * t2 - 2 * t;
}

struct Table1D {
    double x0 = 0.0, dx = 1.0;
    Vec v;

    double slope(std::size_t k) const {
        if (k == 0) return (v[1] - v[0]) / dx;
        if (k + 1 == v.size()) return (v[k] - v[k - 1]) / dx;
        return (v[k + 1] - v[k - 1]) / (2.0 * dx);
    }

    void eval(double x, double* val, double* der) const {
        const std::size_t n = v.size();
        double xe = x0 + (n - 1) * dx;
        if (x <= x0) {  // linear extension keeps the evaluation defined everywhere
            double m = slope(0);
            *val = v[0] + m * (x - x0);
            *der = m;
            return;
        }
        if (x >= xe) {
            double m = slope(n - 1);
            *val = v[n - 1] + m * (x - xe);
            *der = m;
            return;
        }
        std::size_t k = std::min<std::size_t>((std::size_t)((x - x0) / dx), n - 2);
        double t = (x - (x0 + k * dx)) / dx;
        double w[4], dw[4];
        hermite_weights(t, dx, w, dw);
        double m0 = slope(k), m1 = slope(k + 1);
        *val = w[0] * v[k] + w[1] * v[k + 1] + w[2] * m0 + w[3] * m1;
        *der = dw[0] * v[k] + dw[1] * v[k + 1] + dw[2] * m0 + dw[3] * m1;
    }
};

struct Table2D {
    double u0 = 0.0, du = 1.0, U0 = 0.0, dU = 1.0;
    std::vector<Vec> v;  // v[i][j] at (u_i, U_j)

    void eval(double u, double U, double* val, double* d_u, double* d_U) const {
        const std::size_t nu = v.size();
        // interpolate each u-row in U, then across u
        auto row_at = [&](std::size_t i, double* rv, double* rd) {
            Table1D row{U0, dU, v[i]};
            row.eval(U, rv, rd);
        };
        double ue = u0 + (nu - 1) * du;
        double uc = std::min(std::max(u, u0), ue);
        std::size_t i = std::min<std::size_t>((std::size_t)((uc - u0) / du), nu - 2);

        // rows i-1 .. i+2 (clamped) provide values and U-derivatives
        double sv[4], sd[4];
        std::size_t rows[4];
        for (int r = 0; r < 4; ++r) {
            long idx = (long)i - 1 + r;
            idx = std::max<long>(0, std::min<long>(idx, (long)nu - 1));
            rows[r] = (std::size_t)idx;
        }
        for (int r = 0; r < 4; ++r) row_at(rows[r], &sv[r], &sd[r]);

        auto across_u = [&](const double* s, double* out_val, double* out_der) {
            double m0 = (rows[0] == rows[1]) ? (s[2] - s[1]) / du : (s[2] - s[0]) / (2.0 * du);
            double m1 = (rows[3] == rows[2]) ? (s[2] - s[1]) / du : (s[3] - s[1]) / (2.0 * du);
            if (u <= u0) {
                *out_val = s[1] + m0 * (u - u0);
                *out_der = m0;
                return;
            }
            if (u >= ue) {
                *out_val = s[2] + m1 * (u - ue);
                *out_der = m1;
                return;
            }
            double t = (u - (u0 + i * du)) / du;
            double w[4], dw[4];
            hermite_weights(t, du, w, dw);
            *out_val = w[0] * s[1] + w[1] * s[2] + w[2] * m0 + w[3] * m1;
            *out_der = dw[0] * s[1] + dw[1] * s[2] + dw[2] * m0 + dw[3] * m1;
        };

        double dum;
        across_u(sv, val, d_u);
        across_u(sd, d_U, &dum);
    }
};

double cell_average(const std::function<double(double)>& f, int quad_points) {
    double s = 0.0;
    for (int k = 0; k < quad_points; ++k) s += f((k + 0.5) / quad_points);
    return s / quad_points;
}

}  // namespace

MeanTensors mean_tensors(const PeriodicCoefficients& coeffs, double u, int quad_points) {
    if (quad_points < 2) throw ConfigError("mean_tensors needs at least two quadrature points");
    auto compute = [&](int q) {
        double aver = 0.0, inv = 0.0;
        for (int k = 0; k < q; ++k) {
            double a = coeffs.A((k + 0.5) / q, u);
            if (std::abs(a) < 1e-14) throw SingularInverse("metric density vanishes on the cell");
            aver += a;
            inv += 1.0 / a;
        }
        return std::pair<double, double>{aver / q, q / inv};
    };
    auto [aver, harm] = compute(quad_points);
    MeanTensors m;
    m.A_aver = aver;
    m.A_harm = harm;
    if (quad_points >= 4) {
        auto [aver2, harm2] = compute(quad_points / 2);
        m.quad_error = std::max(std::abs(aver - aver2), std::abs(harm - harm2));
    }
    return m;
}

CellProblem solve_cell_problem(const PeriodicCoefficients& coeffs, double u, double U,
                               int resolution,
                               const solver::MinimizeSpec* solver_overrides) {
    if (resolution < 8) throw ConfigError("cell resolution must be at least 8");
    const int R = resolution;
    Vec ymid(R);
    for (int k = 0; k < R; ++k) ymid[k] = (k + 0.5) / R;

    auto objective = [&, R](const Vec& phi) {
        double s = 0.0;
        for (int k = 0; k < R; ++k) {
            double slope = (phi[(k + 1) % R] - phi[k]) * R;
            s += coeffs.F(ymid[k], u, U + slope);
        }
        return s / R;
    };
    // telescoping cell gradient; automatically mean-free, which pins the
    // constant-shift gauge along the descent path
    auto gradient = [&, R](const Vec& phi) {
        Vec g(R, 0.0);
        Vec fU(R);
        for (int k = 0; k < R; ++k) {
            double slope = (phi[(k + 1) % R] - phi[k]) * R;
            fU[k] = coeffs.dF_dU(ymid[k], u, U + slope);
        }
        for (int k = 0; k < R; ++k) g[k] = fU[(k - 1 + R) % R] - fU[k];
        return g;
    };

    solver::MinimizeSpec spec;
    spec.objective = objective;
    spec.gradient = gradient;
    spec.start = Vec(R, 0.0);
    spec.grad_tol = 1e-11 * (1.0 + norm2(gradient(spec.start)));
    spec.max_iters = 800 * R;
    if (solver_overrides) {
        if (solver_overrides->grad_tol > 0) spec.grad_tol = solver_overrides->grad_tol;
        if (solver_overrides->max_iters > 0) spec.max_iters = solver_overrides->max_iters;
        spec.accelerate = solver_overrides->accelerate;
    }
    auto res = solver::minimize(spec);

    CellProblem cp;
    cp.u = u;
    cp.U = U;
    cp.resolution = R;
    cp.corrector = res.argmin;
    double mean = 0.0;
    for (double x : cp.corrector) mean += x;
    mean /= R;
    for (double& x : cp.corrector) x -= mean;
    cp.value = res.value;
    cp.kkt_residual = res.grad_norm;

    if (coeffs.a_grad) {
        double inv = 0.0, fvol = 0.0;
        for (int k = 0; k < R; ++k) {
            inv += 1.0 / coeffs.a_grad(ymid[k]);
            fvol += coeffs.F(ymid[k], u, 0.0);
        }
        double a_harm = R / inv;
        cp.fast_path_value = fvol / R + 0.5 * a_harm * U * U;
    }
    return cp;
}

namespace {

Vec default_u_grid() {
    Vec g;
    for (int i = 0; i <= 24; ++i) g.push_back(-3.0 + 6.0 * i / 24.0);
    return g;
}

Vec default_U_grid() {
    Vec g;
    for (int i = 0; i <= 32; ++i) g.push_back(-8.0 + 16.0 * i / 32.0);
    return g;
}

void check_uniform(const Vec& g, const char* what) {
    if (g.size() < 4) throw ConfigError(std::string(what) + " grid needs at least 4 points");
    double d = g[1] - g[0];
    for (std::size_t i = 1; i + 1 < g.size(); ++i)
        if (std::abs((g[i + 1] - g[i]) - d) > 1e-9 * std::abs(d))
            throw ConfigError(std::string(what) + " grid must be uniform");
}

}  // namespace

EffectiveModel build_effective_model(const PeriodicCoefficients& coeffs,
                                     DissipationMode dmode, EnergyMode emode,
                                     const EffectiveModelOptions& opts) {
    EffectiveModel m;
    m.dmode = dmode;
    m.emode = emode;
    m.cell_resolution = opts.cell_resolution;
    m.u_grid = opts.u_grid.empty() ? default_u_grid() : opts.u_grid;
    m.U_grid = opts.U_grid.empty() ? default_U_grid() : opts.U_grid;
    check_uniform(m.u_grid, "u");
    check_uniform(m.U_grid, "U");

    // per-state means of the metric density, tabulated once
    {
        auto aver_tab = std::make_shared<Table1D>();
        auto harm_tab = std::make_shared<Table1D>();
        aver_tab->x0 = harm_tab->x0 = -6.0;
        aver_tab->dx = harm_tab->dx = 12.0 / 256.0;
        for (int i = 0; i <= 256; ++i) {
            double u = -6.0 + 12.0 * i / 256.0;
            auto mt = mean_tensors(coeffs, u, opts.quad_points);
            aver_tab->v.push_back(mt.A_aver);
            harm_tab->v.push_back(mt.A_harm);
        }
        m.A_aver_u = [aver_tab](double u) {
            double v, d;
            aver_tab->eval(u, &v, &d);
            return v;
        };
        m.A_harm_u = [harm_tab](double u) {
            double v, d;
            harm_tab->eval(u, &v, &d);
            return v;
        };
    }
    m.A_eff = (dmode == DissipationMode::Aver) ? m.A_aver_u : m.A_harm_u;

    auto b = coeffs.b;
    m.b_aver = [b](double t, double u) {
        return cell_average([&](double y) { return b(y, t, u); }, 64);
    };

    if (coeffs.a_grad) {
        m.quadratic_path = true;
        double a_h, a_a;
        {
            double inv = 0.0, av = 0.0;
            const int Q = opts.quad_points;
            for (int k = 0; k < Q; ++k) {
                double a = coeffs.a_grad((k + 0.5) / Q);
                if (std::abs(a) < 1e-14)
                    throw SingularInverse("gradient coefficient vanishes on the cell");
                inv += 1.0 / a;
                av += a;
            }
            a_h = Q / inv;
            a_a = av / Q;
        }
        const double aU = (emode == EnergyMode::CellHom) ? a_h : a_a;

        std::function<double(double)> fvol, dfvol;
        if (coeffs.F_vol && coeffs.dF_vol) {
            fvol = coeffs.F_vol;
            dfvol = coeffs.dF_vol;
        } else {
            auto tab = std::make_shared<Table1D>();
            tab->x0 = -6.0;
            tab->dx = 12.0 / 1024.0;
            auto F = coeffs.F;
            for (int i = 0; i <= 1024; ++i) {
                double u = -6.0 + 12.0 * i / 1024.0;
                tab->v.push_back(cell_average([&](double y) { return F(y, u, 0.0); }, 128));
            }
            fvol = [tab](double u) {
                double v, d;
                tab->eval(u, &v, &d);
                return v;
            };
            dfvol = [tab](double u) {
                double v, d;
                tab->eval(u, &v, &d);
                return d;
            };
        }
        m.F = [fvol, aU](double u, double U) { return fvol(u) + 0.5 * aU * U * U; };
        m.dF_du = [dfvol](double u, double) { return dfvol(u); };
        m.dF_dU = [aU](double, double U) { return aU * U; };
    }

    auto cell_value = [&](double u, double U) -> double {
        if (emode == EnergyMode::ZeroCorrector) {
            auto F = coeffs.F;
            return cell_average([&](double y) { return F(y, u, U); }, opts.quad_points);
        }
        return solve_cell_problem(coeffs, u, U, opts.cell_resolution).value;
    };

    const bool need_table = !m.quadratic_path || opts.tabulate;
    if (need_table) {
        m.F_table.assign(m.u_grid.size(), Vec(m.U_grid.size(), 0.0));
        for (std::size_t i = 0; i < m.u_grid.size(); ++i)
            for (std::size_t j = 0; j < m.U_grid.size(); ++j)
                m.F_table[i][j] = cell_value(m.u_grid[i], m.U_grid[j]);
    }

    if (!m.quadratic_path) {
        auto tab = std::make_shared<Table2D>();
        tab->u0 = m.u_grid.front();
        tab->du = m.u_grid[1] - m.u_grid[0];
        tab->U0 = m.U_grid.front();
        tab->dU = m.U_grid[1] - m.U_grid[0];
        tab->v = m.F_table;
        m.F = [tab](double u, double U) {
            double v, du, dU;
            tab->eval(u, U, &v, &du, &dU);
            return v;
        };
        m.dF_du = [tab](double u, double U) {
            double v, du, dU;
            tab->eval(u, U, &v, &du, &dU);
            return du;
        };
        m.dF_dU = [tab](double u, double U) {
            double v, du, dU;
            tab->eval(u, U, &v, &du, &dU);
            return dU;
        };
    }

    if (need_table && opts.check_tabulation) {
        double worst = 0.0;
        for (std::size_t i = 0; i + 1 < m.u_grid.size(); i += 2)
            for (std::size_t j = 0; j + 1 < m.U_grid.size(); j += 2) {
                double um = 0.5 * (m.u_grid[i] + m.u_grid[i + 1]);
                double Um = 0.5 * (m.U_grid[j] + m.U_grid[j + 1]);
                double exact = cell_value(um, Um);
                worst = std::max(worst, std::abs(m.F(um, Um) - exact));
            }
        m.tabulation_error = worst;
        if (worst > opts.tab_tol)
            throw TabulationGapTooCoarse("interpolation error estimate " +
                                         std::to_string(worst) + " exceeds " +
                                         std::to_string(opts.tab_tol));
    }
    return m;
}

PerturbedGradientSystem assemble_from_model(const EffectiveModel& model,
                                            const PeriodicCoefficients& coeffs,
                                            const Grid& grid) {
    PeriodicCoefficients eff;
    eff.name = coeffs.name + "-effective";
    eff.components = coeffs.components;
    eff.growth = coeffs.growth;
    auto A_eff = model.A_eff;
    auto F = model.F;
    auto dF_du = model.dF_du;
    auto dF_dU = model.dF_dU;
    auto b_aver = model.b_aver;
    eff.A = [A_eff](double, double u) { return A_eff(u); };
    eff.F = [F](double, double u, double U) { return F(u, U); };
    eff.dF_du = [dF_du](double, double u, double U) { return dF_du(u, U); };
    eff.dF_dU = [dF_dU](double, double u, double U) { return dF_dU(u, U); };
    eff.b = [b_aver](double, double t, double u) { return b_aver(t, u); };
    return rds::assemble_system(eff, 1.0, grid, /*run_probes=*/false);
}

PerturbedGradientSystem build_effective_system(const PeriodicCoefficients& coeffs,
                                               const Grid& grid, DissipationMode dmode,
                                               EnergyMode emode,
                                               const EffectiveModelOptions& opts) {
    EffectiveModel model = build_effective_model(coeffs, dmode, emode, opts);
    return assemble_from_model(model, coeffs, grid);
}

std::function<double(double)> corrector_profile(const PeriodicCoefficients& coeffs,
                                                int resolution) {
    if (!coeffs.a_grad)
        throw ConfigError("corrector profile needs the quadratic gradient structure");
    const int R = resolution;
    double inv = 0.0;
    for (int k = 0; k < R; ++k) inv += 1.0 / coeffs.a_grad((k + 0.5) / R);
    const double a_h = R / inv;

    auto chi = std::make_shared<Vec>(R + 1, 0.0);
    for (int k = 0; k < R; ++k)
        (*chi)[k + 1] = (*chi)[k] + (a_h / coeffs.a_grad((k + 0.5) / R) - 1.0) / R;
    double mean = 0.0;
    for (int k = 0; k < R; ++k) mean += 0.5 * ((*chi)[k] + (*chi)[k + 1]) / R;
    for (auto& x : *chi) x -= mean;

    return [chi, R](double y) {
        double yy = y - std::floor(y);
        double pos = yy * R;
        int k = std::min((int)pos, R - 1);
        double t = pos - k;
        return (1.0 - t) * (*chi)[k] + t * (*chi)[k + 1];
    };
}

}  // namespace pgs::homog
