#ifndef PGS_MM_ENGINE_HPP
#define PGS_MM_ENGINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "pgs/errors.hpp"
#include "pgs/pgs_model.hpp"
#include "pgs/types.hpp"

// Semi-implicit variational time stepping: step functional, scheme loop,
// interpolants (piecewise constant/affine and the variational interpolant
// obtained by re-solving the step problem with fractional step length),
// Moreau-Yosida diagnostics, the one-sided discrete energy estimate, and the
// energy-dissipation-balance residual.

namespace pgs::mm {

using model::PerturbedGradientSystem;

// One incremental problem  v -> r Psi_u((v-u)/r) + E_{t+r}(v) - <w,v>.
struct StepProblem {
    double r = 0.0;  // step length, > 0
    double t = 0.0;  // base time
    Vec u;           // base state, in D
    Vec w;           // applied covector (frozen perturbation)
    const PerturbedGradientSystem* system = nullptr;

    void validate() const;
};

struct SolverSettings {
    double grad_tol_rel = 1e-11;     // grad_tol = grad_tol_rel * (1 + |grad at start|)
    int max_iters_per_dim = 500;
    double cert_tol_rel = 1e-8;      // certificate tolerance scale
    double cert_hard_factor = 1e3;   // certificates above factor*tol throw
    bool accelerate = true;
};

// Optional a-priori envelope guard fed by the assumption probes; when absent
// the constants are measured along the run.
struct GronwallConstants {
    double C = 0.0;     // power control
    double beta = 0.0;  // perturbation control
    double c = 0.5;
};

struct SchemeOptions {
    SolverSettings solver;
    std::optional<GronwallConstants> gronwall;  // measured on the fly if not set
    double blowup_factor = 10.0;
    int de_giorgi_substeps = 0;  // >0 pre-samples the variational interpolant
};

// Interior sample of the variational interpolant with its dual selection.
struct DeGiorgiSample {
    double s = 0.0;
    Vec state;
    Vec xi;
};

// Discrete trajectory on an equidistant grid, with the interpolants and the
// per-step dual selections.  All interpolants coincide with the nodes at the
// grid times by construction.
struct Trajectory {
    const PerturbedGradientSystem* system = nullptr;
    double t_start = 0.0;
    double tau = 0.0;
    std::vector<double> times;   // size N+1
    std::vector<Vec> nodes;      // size N+1
    std::vector<Vec> w_applied;  // size N, covector frozen on each interval
    std::vector<Vec> xi_nodes;   // size N, dual selection at the right node
    std::vector<int> step_iters;
    std::vector<std::vector<DeGiorgiSample>> de_giorgi_subnodes;  // size N, may be empty
    int de_giorgi_substeps = 0;

    std::size_t intervals() const { return w_applied.size(); }
    // index n with t in (t_{n-1}, t_n]; 0 maps to the first interval
    std::size_t interval_index(double t) const;

    Vec right_constant(double t) const;  // value at the right node of the interval
    Vec left_constant(double t) const;   // value at the left node of the interval
    Vec affine(double t) const;          // piecewise affine interpolant
    Vec affine_slope(double t) const;    // its piecewise constant derivative
    double t_right(double t) const;      // right node time of the interval of t
    double t_left(double t) const;       // left node time of the interval of t
};

// Interval report of the discrete energy estimate and the balance residual.
struct EdbReport {
    double s = 0.0, t = 0.0;
    double dissipation_primal = 0.0;   // integral of Psi along the affine slope
    double dissipation_dual = 0.0;     // integral of Psi* of (frozen B - xi~)
    double energy_start = 0.0, energy_end = 0.0;
    double power_integral = 0.0;       // integral of d/dr E_r along the variational interpolant
    double perturbation_work = 0.0;    // integral of <frozen B, affine slope>
    double duee_slack = 0.0;           // rhs - lhs of the one-sided discrete estimate
    double edb_residual = 0.0;         // |lhs - rhs| of the balance in continuous placement
    double tolerance_budget = 0.0;     // solver budget + measured quadrature error bar
    int quadrature_substeps = 0;
};

// Value of the step functional at v; +inf outside the domain.
double step_functional(const StepProblem& p, const Vec& v);

struct StepResult {
    Vec next;
    Vec xi;             // dual selection, xi = w - grad Psi_u(vhat)
    double value = 0.0; // attained step-functional value
    double fy_gap = 0.0;
    double energy_residual = 0.0;
    int iters = 0;
};

// Minimizes the step functional from the base point and recovers the dual
// selection from optimality; certifies the variational sum rule via the
// Fenchel-Young gap of (vhat, w - xi) and the subgradient residual of xi at
// the new state.  Throws SumRuleViolated when a certificate exceeds the hard
// threshold.
StepResult solve_step(const StepProblem& p, const SolverSettings& settings = {},
                      const Vec* warm_start = nullptr);

// Runs the scheme with the perturbation frozen at the left node of each
// interval.  Throws EnergyBlowup when a node energy escapes the discrete
// Gronwall envelope by more than the blow-up factor.
Trajectory run_scheme(const PerturbedGradientSystem& sys, const Vec& u0, double T,
                      int N, const SchemeOptions& opts = {}, double t_start = 0.0);

// Variational interpolant at time s: re-solves the step problem of the
// enclosing interval with the same base point and applied covector but step
// length s - t_{n-1}.  `substeps` > 1 reaches s by continuation in the step
// length, warm-starting each solve.
DeGiorgiSample de_giorgi_interpolant(const Trajectory& traj, double s, int substeps = 1,
                                     const SolverSettings& settings = {});

struct MoreauRow {
    double r = 0.0;
    double phi = 0.0;          // inf of the step functional at this step length
    double upper_bound = 0.0;  // E_{t+r}(u) - <w,u>, the zero-displacement value
    bool monotone_ok = true;   // drift-corrected monotonicity against the previous row
};

struct MoreauScan {
    std::vector<MoreauRow> rows;
    bool all_monotone = true;
};

// Envelope values along increasing step lengths with the drift-corrected
// monotonicity certificate; autonomous systems are held to plain
// monotone decrease.
MoreauScan moreau_yosida_scan(const StepProblem& p, const std::vector<double>& r_values,
                              std::optional<GronwallConstants> constants = std::nullopt,
                              double horizon = 1.0, const SolverSettings& settings = {},
                              double tol = 1e-9);

// Linear extrapolation of the envelope to step length zero from the two
// smallest rows; converges to E_t(u) - <w,u>.
double extrapolate_to_zero(const MoreauScan& scan);

// Energy estimate and balance residual over [s,t] (snapped to nodes for the
// discrete estimate), with `substeps` midpoint quadrature points per
// interval, each backed by one variational-interpolant solve.  Throws
// QuadratureUnderResolved when doubling the substeps moves an integral by
// more than 10x the configured tolerance.
EdbReport edb_report(const Trajectory& traj, double s, double t, int substeps = 8,
                     const SolverSettings& settings = {},
                     double quadrature_tol = kInf);

}  // namespace pgs::mm

#endif
