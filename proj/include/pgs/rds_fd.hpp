#ifndef PGS_RDS_FD_HPP
#define PGS_RDS_FD_HPP

#include <functional>
#include <string>

#include "pgs/errors.hpp"
#include "pgs/pgs_model.hpp"
#include "pgs/types.hpp"

// Finite-difference realization of the quasilinear reaction-diffusion system
// on the unit interval with cell-periodic coefficients and zero-flux
// boundaries, packaged as a perturbed gradient system.  Vertex-centered
// nodes, face-midpoint coefficient sampling, trapezoid mass lumping.  Scalar
// (single-component) fields; the abstract layer above is dimension-agnostic.

namespace pgs::rds {

using model::PerturbedGradientSystem;

struct Grid {
    int dim = 1;
    int cells = 16;

    double h() const { return 1.0 / cells; }
    int nodes() const { return cells + 1; }
    void validate() const;
};

struct GrowthConstants {
    double p = 2.0, q = 2.0, r = 1.0;
    double C_F = 0.05;  // coercivity floor of the energy density
    double C_A = 4.0;   // two-sided ellipticity bound of the metric density
    double C_B = 2.0;   // growth bound of the reaction term
};

// 1-periodic cell coefficients: metric density A(y,u), energy density
// F(y,u,U) with exact partial derivatives, reaction term b(y,t,u).
struct PeriodicCoefficients {
    std::string name;
    int components = 1;

    std::function<double(double y, double u)> A;
    std::function<double(double y, double u, double U)> F;
    std::function<double(double y, double u, double U)> dF_du;
    std::function<double(double y, double u, double U)> dF_dU;
    std::function<double(double y, double t, double u)> b;
    GrowthConstants growth;

    // Registered structure F(y,u,U) = F(y,u,0) + a_grad(y) U^2 / 2, when the
    // gradient part is quadratic with a u-independent coefficient; enables
    // the closed-form homogenization fast path.
    std::function<double(double y)> a_grad;
    // closed form of the cell average of F(.,u,0), with derivative
    std::function<double(double u)> F_vol;
    std::function<double(double u)> dF_vol;
};

// Sampled coefficient checks: 1-periodicity on integer shifts, two-sided
// ellipticity of A, coercivity floor of F.  Throws PeriodicityViolated /
// EllipticityViolated / CoercivityViolated.
void validate_coefficients(const PeriodicCoefficients& coeffs, double u_radius = 3.0,
                           double U_radius = 8.0, int samples = 200,
                           std::uint64_t seed = 2024);

// h <= eps/16, the resolution rule for oscillation sweeps.
inline bool oscillations_resolved(double eps, double h) { return h <= eps / 16.0 + 1e-15; }

// Assembles the eps-scaled system on the grid: face-sum energy with exact
// gradient, node-lumped quadratic dissipation with closed-form conjugate,
// load-vector reaction term (node weights fold the quadrature into the
// covector so the euclidean pairing is the discrete L2 pairing).
PerturbedGradientSystem assemble_system(const PeriodicCoefficients& coeffs, double eps,
                                        const Grid& grid, bool run_probes = true);

// Max relative deviation between the assembled energy gradient and central
// finite differences of the energy along random directions.
double energy_grad_check(const PerturbedGradientSystem& sys, const Vec& u, int directions,
                         std::uint64_t seed = 99, double fd_step = 1e-5);

// Trapezoid node weights of the grid (h inside, h/2 at the two boundary nodes).
Vec node_weights(const Grid& grid);

// Node coordinates including both endpoints.
Vec node_coordinates(const Grid& grid);

// Discrete L2 norm with the grid's trapezoid weights.
double l2_norm(const Grid& grid, const Vec& u);

}  // namespace pgs::rds

#endif
