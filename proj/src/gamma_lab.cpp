#include "pgs/gamma_lab.hpp"

#include <algorithm>
#include <cmath>

namespace pgs::gamma {

bool strictly_decreasing(const Vec& values, double ratio_threshold) {
    if (values.size() < 2) return false;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] <= ratio_threshold * values[i - 1])) return false;
    }
    return true;
}

double primal_dissipation_integral(const mm::Trajectory& traj) {
    double s = 0.0;
    for (std::size_t n = 0; n < traj.intervals(); ++n) {
        Vec vhat = (1.0 / traj.tau) * (traj.nodes[n + 1] - traj.nodes[n]);
        s += traj.tau * traj.system->dissipation(traj.nodes[n], vhat);
    }
    return s;
}

double dual_dissipation_integral(const mm::Trajectory& traj) {
    double s = 0.0;
    for (std::size_t n = 0; n < traj.intervals(); ++n) {
        Vec arg = traj.w_applied[n] - traj.xi_nodes[n];
        s += traj.tau * traj.system->dissipation_conj(traj.nodes[n], arg);
    }
    return s;
}

namespace {

// least-squares slope of log(err) against log(param), ignoring dead values
double fit_order(const Vec& params, const Vec& errs) {
    Vec lx, ly;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (errs[i] > 1e-15) {
            lx.push_back(std::log(params[i]));
            ly.push_back(std::log(errs[i]));
        }
    }
    if (lx.size() < 2) return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= lx.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    return den > 0 ? num / den : 0.0;
}

double edb_cumulative(const mm::Trajectory& traj, const mm::SolverSettings& settings,
                      int substeps) {
    double sum = 0.0;
    for (std::size_t n = 0; n < traj.intervals(); ++n) {
        auto rep = mm::edb_report(traj, traj.times[n], traj.times[n + 1], substeps, settings);
        sum += rep.edb_residual;
    }
    return sum;
}

}  // namespace

ConvergenceTable run_tau_sweep(const PerturbedGradientSystem& sys, const Vec& u0, double T,
                               std::vector<double> tau_list, const mm::SchemeOptions& opts) {
    if (tau_list.size() < 2) throw ConfigError("tau sweep needs at least two step sizes");
    std::sort(tau_list.begin(), tau_list.end(), std::greater<>());

    std::vector<mm::Trajectory> trajs;
    for (double tau : tau_list) {
        int N = (int)std::llround(T / tau);
        if (N < 1 || std::abs(N * tau - T) > 1e-9 * T)
            throw ConfigError("step size does not divide the horizon");
        trajs.push_back(mm::run_scheme(sys, u0, T, N, opts));
    }
    const mm::Trajectory& ref = trajs.back();

    ConvergenceTable table;
    table.columns = {"tau",
                     "sup_state_err",
                     "energy_err",
                     "diss_primal_diff",
                     "diss_dual_diff",
                     "edb_residual_cum"};
    table.reference = "finest tau = " + std::to_string(tau_list.back());

    double ref_primal = primal_dissipation_integral(ref);
    double ref_dual = dual_dissipation_integral(ref);

    for (std::size_t k = 0; k + 1 < trajs.size(); ++k) {
        const auto& tr = trajs[k];
        double sup_err = 0.0, energy_err = 0.0;
        for (std::size_t n = 0; n < tr.nodes.size(); ++n) {
            double t = tr.times[n];
            Vec ref_val = ref.affine(t);
            sup_err = std::max(sup_err, sys.norm(tr.nodes[n] - ref_val));
            energy_err = std::max(
                energy_err, std::abs(sys.energy(t, tr.nodes[n]) - sys.energy(t, ref_val)));
        }
        double ed = edb_cumulative(tr, opts.solver, 4);
        table.rows.push_back({tr.tau, sup_err, energy_err,
                              std::abs(primal_dissipation_integral(tr) - ref_primal),
                              std::abs(dual_dissipation_integral(tr) - ref_dual), ed});
    }

    Vec taus, s1, s2, s3, s4;
    for (const auto& r : table.rows) {
        taus.push_back(r[0]);
        s1.push_back(r[1]);
        s2.push_back(r[2]);
        s3.push_back(r[3]);
        s4.push_back(r[4]);
    }
    table.empirical_orders["sup_state_err"] = fit_order(taus, s1);
    table.empirical_orders["energy_err"] = fit_order(taus, s2);
    table.empirical_orders["diss_primal_diff"] = fit_order(taus, s3);
    table.empirical_orders["diss_dual_diff"] = fit_order(taus, s4);
    return table;
}

Vec initial_profile(const Grid& grid, double amplitude) {
    Vec u(grid.nodes());
    for (int i = 0; i < grid.nodes(); ++i) {
        double x = i * grid.h();
        double s = std::sin(M_PI * x);
        u[i] = amplitude * s * s;
    }
    return u;
}

Vec well_prepared_u0(const PeriodicCoefficients& coeffs, const Grid& grid, double eps,
                     double amplitude) {
    Vec u = initial_profile(grid, amplitude);
    if (!coeffs.a_grad) return u;
    auto chi = homog::corrector_profile(coeffs);
    for (int i = 0; i < grid.nodes(); ++i) {
        double x = i * grid.h();
        double sprime = amplitude * M_PI * std::sin(2.0 * M_PI * x);
        u[i] += eps * chi(x / eps) * sprime;
    }
    return u;
}

EpsSweepResult run_eps_sweep(const PeriodicCoefficients& coeffs, const EpsSweepConfig& cfg) {
    if (cfg.eps_list.size() < 2) throw ConfigError("eps sweep needs at least two values");
    for (std::size_t i = 1; i < cfg.eps_list.size(); ++i)
        if (!(cfg.eps_list[i] < cfg.eps_list[i - 1]))
            throw ConfigError("eps list must be strictly decreasing");

    EpsSweepResult result;
    result.table.columns = {"eps",      "cells",           "state_sup",
                            "energy_max", "diss_primal_diff", "diss_dual_diff",
                            "wellprep_gap"};
    result.table.reference = "effective system on the matched grid";

    homog::EffectiveModel model =
        homog::build_effective_model(coeffs, cfg.dmode, cfg.emode, cfg.model_opts);

    for (double eps : cfg.eps_list) {
        Grid grid;
        grid.cells = (int)std::llround(cfg.resolution_factor / eps);
        if (!rds::oscillations_resolved(eps, grid.h()))
            throw ResolutionRuleViolated("h = " + std::to_string(grid.h()) +
                                         " violates h <= eps/16 at eps = " +
                                         std::to_string(eps));

        EpsRunArtifacts run;
        run.eps = eps;
        run.grid = grid;
        run.eps_system = rds::assemble_system(coeffs, eps, grid);
        run.eff_system = homog::assemble_from_model(model, coeffs, grid);

        Vec u0_eps = cfg.corrector_adjust ? well_prepared_u0(coeffs, grid, eps, cfg.u0_amplitude)
                                          : initial_profile(grid, cfg.u0_amplitude);
        Vec u0_eff = initial_profile(grid, cfg.u0_amplitude);

        run.eps_traj = mm::run_scheme(run.eps_system, u0_eps, cfg.T, cfg.N, cfg.scheme);
        run.eff_traj = mm::run_scheme(run.eff_system, u0_eff, cfg.T, cfg.N, cfg.scheme);

        double state_sup = 0.0, energy_max = 0.0;
        for (std::size_t n = 0; n < run.eps_traj.nodes.size(); ++n) {
            state_sup = std::max(
                state_sup, rds::l2_norm(grid, run.eps_traj.nodes[n] - run.eff_traj.nodes[n]));
            double t = run.eps_traj.times[n];
            energy_max = std::max(energy_max,
                                  std::abs(run.eps_system.energy(t, run.eps_traj.nodes[n]) -
                                           run.eff_system.energy(t, run.eff_traj.nodes[n])));
        }
        double dp = std::abs(primal_dissipation_integral(run.eps_traj) -
                             primal_dissipation_integral(run.eff_traj));
        double dd = std::abs(dual_dissipation_integral(run.eps_traj) -
                             dual_dissipation_integral(run.eff_traj));
        double wellprep = std::abs(run.eps_system.energy(0.0, u0_eps) -
                                   run.eff_system.energy(0.0, u0_eff));

        result.table.rows.push_back(
            {eps, (double)grid.cells, state_sup, energy_max, dp, dd, wellprep});
        result.runs.push_back(std::move(run));
    }

    Vec epss, errs;
    for (const auto& r : result.table.rows) {
        epss.push_back(r[0]);
        errs.push_back(r[2]);
    }
    result.table.empirical_orders["state_sup"] = fit_order(epss, errs);
    return result;
}

LiminfReport liminf_witness(const std::vector<const mm::Trajectory*>& eps_trajs,
                            const mm::Trajectory& eff_traj, double s, double t,
                            const std::vector<double>& taubar_list) {
    if (!(s < t)) throw ConfigError("liminf witness needs s < t");
    LiminfReport report;

    // coarse-grid primal dissipation of a trajectory, base frozen at the
    // right coarse node, slopes from the piecewise-affine reinterpolation
    auto coarse_dissipation = [&](const mm::Trajectory& traj, double taubar) {
        int J = (int)std::llround((t - s) / taubar);
        double sum = 0.0;
        for (int j = 1; j <= J; ++j) {
            double tj = s + j * taubar;
            Vec a = traj.affine(tj - taubar);
            Vec b = traj.affine(tj);
            Vec slope = (1.0 / taubar) * (b - a);
            sum += taubar * traj.system->dissipation(traj.right_constant(tj), slope);
        }
        return sum;
    };

    for (double taubar : taubar_list) {
        int J = (int)std::llround((t - s) / taubar);
        if (J < 1 || std::abs(J * taubar - (t - s)) > 1e-9 * (t - s))
            throw ConfigError("coarse step must divide the witness interval");
        double j_eff = coarse_dissipation(eff_traj, taubar);
        Vec slack_row;
        for (const auto* tr : eps_trajs)
            slack_row.push_back(std::max(0.0, j_eff - coarse_dissipation(*tr, taubar)));
        report.taubars.push_back(taubar);
        report.slack.push_back(slack_row);
    }

    // Jensen self-check on the fine slopes inside each coarse interval
    std::vector<const mm::Trajectory*> all = eps_trajs;
    all.push_back(&eff_traj);
    double taubar = taubar_list.front();
    for (const auto* tr : all) {
        int J = (int)std::llround((t - s) / taubar);
        for (int j = 1; j <= J; ++j) {
            double t0 = s + (j - 1) * taubar;
            double t1 = s + j * taubar;
            Vec base = tr->right_constant(t1);
            Vec mean_slope = (1.0 / taubar) * (tr->affine(t1) - tr->affine(t0));
            // fine intervals fully inside (t0, t1]
            double psi_mean = tr->system->dissipation(base, mean_slope);
            double mean_psi = 0.0;
            int count = 0;
            for (std::size_t n = 0; n < tr->intervals(); ++n) {
                double a = tr->times[n], b = tr->times[n + 1];
                if (a >= t0 - 1e-12 && b <= t1 + 1e-12) {
                    Vec slope = (1.0 / tr->tau) * (tr->nodes[n + 1] - tr->nodes[n]);
                    mean_psi += tr->system->dissipation(base, slope);
                    ++count;
                }
            }
            if (count > 0) {
                mean_psi /= count;
                report.jensen_worst =
                    std::max(report.jensen_worst, psi_mean - mean_psi);
                ++report.jensen_checks;
            }
        }
    }
    return report;
}

}  // namespace pgs::gamma
