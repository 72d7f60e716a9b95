#ifndef PGS_CATALOG_HPP
#define PGS_CATALOG_HPP

#include <string>
#include <vector>

#include "pgs/pgs_model.hpp"
#include "pgs/rds_fd.hpp"

// Built-in named systems selectable from the CLI: scalar ODE test systems
// and the reaction-diffusion instances.

namespace pgs::catalog {

using model::PerturbedGradientSystem;
using rds::PeriodicCoefficients;

std::vector<std::string> ode_names();
std::vector<std::string> instance_names();
std::vector<std::string> all_names();  // ode names plus "rds-<instance>"

// Scalar ODE test systems: "decay" (u' = -u), "forced" (u' = -u + 1),
// "quartic", "exp-energy", "weighted".
PerturbedGradientSystem ode_system(const std::string& name);

// Cell coefficient bundles: "heat", "const-coeff", "default",
// "osc-diffusion", "osc-dissipation".
PeriodicCoefficients rds_instance(const std::string& name);

// Resolves any catalog name; "rds-<instance>" assembles on the given grid.
PerturbedGradientSystem make_system(const std::string& name, double eps = 0.25,
                                    int cells = 32);

Vec default_initial_state(const std::string& name, double eps = 0.25, int cells = 32);

}  // namespace pgs::catalog

#endif
