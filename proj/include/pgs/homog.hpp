#ifndef PGS_HOMOG_HPP
#define PGS_HOMOG_HPP

#include <functional>
#include <optional>
#include <vector>

#include "pgs/inner_solver.hpp"
#include "pgs/rds_fd.hpp"

// Effective-model construction: arithmetic/harmonic means of the metric
// density, cell-averaged reaction term, and the homogenized energy density
// from periodic cell problems.

namespace pgs::homog {

using model::PerturbedGradientSystem;
using rds::Grid;
using rds::PeriodicCoefficients;

struct MeanTensors {
    double A_aver = 0.0;
    double A_harm = 0.0;
    double quad_error = 0.0;  // change under halving the quadrature points
};

// Midpoint cell quadrature of A(.,u) and A(.,u)^-1; the harmonic mean is the
// inverse of the averaged inverse.  Throws SingularInverse on singular samples.
MeanTensors mean_tensors(const PeriodicCoefficients& coeffs, double u, int quad_points);

// One periodic cell problem at macroscopic state (u,U): minimize the cell
// average of F(y,u,U + corrector slope) over zero-mean periodic correctors.
struct CellProblem {
    double u = 0.0, U = 0.0;
    int resolution = 0;
    Vec corrector;             // nodal values on the cell, zero mean
    double value = 0.0;
    double kkt_residual = 0.0;
    std::optional<double> fast_path_value;  // closed form when the structure is registered
};

CellProblem solve_cell_problem(const PeriodicCoefficients& coeffs, double u, double U,
                               int resolution, const solver::MinimizeSpec* solver_overrides = nullptr);

enum class DissipationMode { Aver, Harm };  // Harm exists for diagnostic comparison only
enum class EnergyMode { CellHom, ZeroCorrector };  // ZeroCorrector: plain cell average

struct EffectiveModelOptions {
    int cell_resolution = 128;
    int quad_points = 256;
    // tabulation grids for the homogenized density (generic path and export)
    Vec u_grid, U_grid;        // empty -> defaults
    double tab_tol = 5e-3;     // grid-doubling error bound
    bool check_tabulation = true;
    bool tabulate = true;      // build the export table even on the closed-form path
};

// Homogenized density and effective tensors with exact partial derivatives.
// When the coefficients register the quadratic gradient structure the density
// is evaluated in closed form (cell value = volume part + harmonic mean of
// the gradient coefficient); otherwise a C1 cubic-Hermite interpolant of the
// tabulated cell values is used.
struct EffectiveModel {
    DissipationMode dmode = DissipationMode::Aver;
    EnergyMode emode = EnergyMode::CellHom;
    bool quadratic_path = false;

    std::function<double(double u)> A_eff;       // density used by the dissipation
    std::function<double(double u)> A_aver_u;
    std::function<double(double u)> A_harm_u;
    std::function<double(double t, double u)> b_aver;

    std::function<double(double u, double U)> F;
    std::function<double(double u, double U)> dF_du;
    std::function<double(double u, double U)> dF_dU;

    Vec u_grid, U_grid;
    std::vector<Vec> F_table;  // F_table[i][j] at (u_grid[i], U_grid[j])
    double tabulation_error = 0.0;
    int cell_resolution = 0;
};

EffectiveModel build_effective_model(const PeriodicCoefficients& coeffs,
                                     DissipationMode dmode, EnergyMode emode,
                                     const EffectiveModelOptions& opts = {});

// Assembles the eps-independent effective system on the grid with the same
// discretization contract as the eps-system assembler.
PerturbedGradientSystem build_effective_system(const PeriodicCoefficients& coeffs,
                                               const Grid& grid, DissipationMode dmode,
                                               EnergyMode emode = EnergyMode::CellHom,
                                               const EffectiveModelOptions& opts = {});

PerturbedGradientSystem assemble_from_model(const EffectiveModel& model,
                                            const PeriodicCoefficients& coeffs,
                                            const Grid& grid);

// Periodic zero-mean primitive of (a_harm/a_grad(y) - 1); the first-order
// corrector profile used to well-prepare oscillatory initial data.
std::function<double(double y)> corrector_profile(const PeriodicCoefficients& coeffs,
                                                  int resolution = 4096);

}  // namespace pgs::homog

#endif
