#ifndef PGS_GAMMA_LAB_HPP
#define PGS_GAMMA_LAB_HPP

#include <map>
#include <string>
#include <vector>

#include "pgs/homog.hpp"
#include "pgs/mm_engine.hpp"
#include "pgs/rds_fd.hpp"

// Experiment harness for evolutionary Gamma-convergence: step-size sweeps
// against a fine reference, oscillation sweeps against the effective model,
// well-prepared initial data, and the liminf/Jensen reinterpolation device.

namespace pgs::gamma {

using model::PerturbedGradientSystem;
using rds::Grid;
using rds::PeriodicCoefficients;

struct ConvergenceTable {
    std::vector<std::string> columns;
    std::vector<Vec> rows;
    std::map<std::string, double> empirical_orders;  // least-squares log-log slopes
    std::string reference;
};

// Each consecutive value must shrink by at least the given ratio; the
// canonical pass test for sweep metrics (and the test negative controls must
// fail).
bool strictly_decreasing(const Vec& values, double ratio_threshold = 0.9);

// Total primal dissipation along the trajectory, sum of tau * Psi at the
// interval slopes with the base frozen at the left node.
double primal_dissipation_integral(const mm::Trajectory& traj);
// Dual counterpart with the per-step dual selections.
double dual_dissipation_integral(const mm::Trajectory& traj);

// Step-size sweep; the finest run is the reference.  Columns: tau,
// sup_state_err, energy_err, diss_primal_diff, diss_dual_diff,
// edb_residual_cum.
ConvergenceTable run_tau_sweep(const PerturbedGradientSystem& sys, const Vec& u0, double T,
                               std::vector<double> tau_list,
                               const mm::SchemeOptions& opts = {});

// sin(pi x)^2 profile sampled on the grid nodes.
Vec initial_profile(const Grid& grid, double amplitude = 1.0);

// Well-prepared oscillatory data: first-order corrector adjustment of the
// smooth profile so the eps-energies converge to the effective energy.
Vec well_prepared_u0(const PeriodicCoefficients& coeffs, const Grid& grid, double eps,
                     double amplitude = 1.0);

struct EpsSweepConfig {
    std::vector<double> eps_list;  // strictly decreasing
    int resolution_factor = 16;    // cells = resolution_factor / eps
    int N = 64;
    double T = 0.25;
    double u0_amplitude = 1.0;
    bool corrector_adjust = true;
    homog::DissipationMode dmode = homog::DissipationMode::Aver;
    homog::EnergyMode emode = homog::EnergyMode::CellHom;
    homog::EffectiveModelOptions model_opts{};
    mm::SchemeOptions scheme{};
};

struct EpsRunArtifacts {
    double eps = 0.0;
    Grid grid;
    PerturbedGradientSystem eps_system, eff_system;
    mm::Trajectory eps_traj, eff_traj;
};

struct EpsSweepResult {
    ConvergenceTable table;  // columns: eps, cells, state_sup, energy_max,
                             // diss_primal_diff, diss_dual_diff, wellprep_gap
    std::vector<EpsRunArtifacts> runs;
};

// For each eps: solve the eps-system and the effective system on the same
// grid and step size, and compare state, energy, and both dissipation
// integrals.  Throws ResolutionRuleViolated unless h <= eps/16.
EpsSweepResult run_eps_sweep(const PeriodicCoefficients& coeffs, const EpsSweepConfig& cfg);

struct LiminfReport {
    std::vector<double> taubars;
    std::vector<Vec> slack;    // slack[tb][k]: positive part of J_eff - J_eps(k)
    double jensen_worst = 0.0;  // max of Psi(mean slope) - mean Psi(slope); <= 0 expected
    std::size_t jensen_checks = 0;
};

// Reinterpolates all trajectories piecewise-affinely on coarse grids, checks
// the primal dissipation liminf estimate of the effective run against the
// eps-runs, and the per-interval Jensen inequality on the fine slopes.
LiminfReport liminf_witness(const std::vector<const mm::Trajectory*>& eps_trajs,
                            const mm::Trajectory& eff_traj, double s, double t,
                            const std::vector<double>& taubar_list);

}  // namespace pgs::gamma

#endif
