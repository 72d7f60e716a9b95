#include "pgs/catalog.hpp"

#include <algorithm>
#include <cmath>

#include "pgs/gamma_lab.hpp"

namespace pgs::catalog {

namespace {

PerturbedGradientSystem scalar_quadratic(const std::string& name, double forcing) {
    PerturbedGradientSystem sys;
    sys.name = name;
    sys.dim = 1;
    sys.energy = [](double, const Vec& u) { return 0.5 * u[0] * u[0]; };
    sys.energy_grad = [](double, const Vec& u) { return Vec{u[0]}; };
    sys.power = [](double, const Vec&) { return 0.0; };
    sys.dissipation = [](const Vec&, const Vec& v) { return 0.5 * v[0] * v[0]; };
    sys.dissipation_grad = [](const Vec&, const Vec& v) { return Vec{v[0]}; };
    sys.dissipation_conj = [](const Vec&, const Vec& xi) { return 0.5 * xi[0] * xi[0]; };
    sys.perturbation = [forcing](double, const Vec&) { return Vec{forcing}; };
    sys.autonomous = true;
    return sys;
}

}  // namespace

std::vector<std::string> ode_names() {
    return {"decay", "forced", "quartic", "exp-energy", "weighted"};
}

std::vector<std::string> instance_names() {
    return {"heat", "const-coeff", "default", "osc-diffusion", "osc-dissipation"};
}

std::vector<std::string> all_names() {
    auto names = ode_names();
    for (const auto& inst : instance_names()) names.push_back("rds-" + inst);
    return names;
}

PerturbedGradientSystem ode_system(const std::string& name) {
    if (name == "decay") return scalar_quadratic(name, 0.0);
    if (name == "forced") return scalar_quadratic(name, 1.0);
    if (name == "quartic") {
        auto sys = scalar_quadratic(name, 0.0);
        sys.energy = [](double, const Vec& u) {
            return 0.5 * u[0] * u[0] + 0.25 * std::pow(u[0], 4);
        };
        sys.energy_grad = [](double, const Vec& u) {
            return Vec{u[0] + std::pow(u[0], 3)};
        };
        return sys;
    }
    if (name == "exp-energy") {
        auto sys = scalar_quadratic(name, 0.0);
        sys.energy = [](double t, const Vec& u) { return std::exp(t) * (1.0 + u[0] * u[0]); };
        sys.energy_grad = [](double t, const Vec& u) { return Vec{2.0 * std::exp(t) * u[0]}; };
        sys.power = [](double t, const Vec& u) { return std::exp(t) * (1.0 + u[0] * u[0]); };
        sys.autonomous = false;
        return sys;
    }
    if (name == "weighted") {
        auto sys = scalar_quadratic(name, 0.0);
        sys.dissipation = [](const Vec& base, const Vec& v) {
            return 0.5 * (1.0 + base[0] * base[0]) * v[0] * v[0];
        };
        sys.dissipation_grad = [](const Vec& base, const Vec& v) {
            return Vec{(1.0 + base[0] * base[0]) * v[0]};
        };
        sys.dissipation_conj = [](const Vec& base, const Vec& xi) {
            return 0.5 * xi[0] * xi[0] / (1.0 + base[0] * base[0]);
        };
        return sys;
    }
    throw ConfigError("unknown ODE system '" + name + "'");
}

PeriodicCoefficients rds_instance(const std::string& name) {
    PeriodicCoefficients c;
    c.name = "rds-" + name;

    auto osc = [](double y) { return 2.0 + std::cos(2.0 * M_PI * y); };
    auto quartic_vol = [](double u) { return 1.0 + 0.25 * std::pow(u, 4); };
    auto quartic_dvol = [](double u) { return std::pow(u, 3); };

    if (name == "heat") {
        c.A = [](double, double) { return 1.0; };
        c.F = [](double, double, double U) { return 1.0 + 0.5 * U * U; };
        c.dF_du = [](double, double, double) { return 0.0; };
        c.dF_dU = [](double, double, double U) { return U; };
        c.b = [](double, double, double) { return 0.0; };
        c.a_grad = [](double) { return 1.0; };
        c.F_vol = [](double) { return 1.0; };
        c.dF_vol = [](double) { return 0.0; };
        c.growth = {2.0, 2.0, 1.0, 0.05, 4.0, 1.0};
        return c;
    }
    if (name == "const-coeff") {
        c.A = [](double, double) { return 1.5; };
        c.F = [quartic_vol](double, double u, double U) { return quartic_vol(u) + 0.5 * U * U; };
        c.dF_du = [quartic_dvol](double, double u, double) { return quartic_dvol(u); };
        c.dF_dU = [](double, double, double U) { return U; };
        c.b = [](double, double, double) { return 0.0; };
        c.a_grad = [](double) { return 1.0; };
        c.F_vol = quartic_vol;
        c.dF_vol = quartic_dvol;
        c.growth = {2.0, 4.0, 1.0, 0.2, 4.0, 1.0};
        return c;
    }
    if (name == "default") {
        c.A = [osc](double y, double) { return osc(y); };
        c.F = [osc, quartic_vol](double y, double u, double U) {
            return quartic_vol(u) + 0.5 * osc(y) * U * U;
        };
        c.dF_du = [quartic_dvol](double, double u, double) { return quartic_dvol(u); };
        c.dF_dU = [osc](double y, double, double U) { return osc(y) * U; };
        c.b = [](double y, double t, double u) {
            return std::sin(2.0 * M_PI * y) * std::cos(M_PI * t) - 0.5 * u;
        };
        c.a_grad = osc;
        c.F_vol = quartic_vol;
        c.dF_vol = quartic_dvol;
        c.growth = {2.0, 4.0, 1.0, 0.2, 4.0, 2.0};
        return c;
    }
    if (name == "osc-diffusion") {
        c.A = [](double, double) { return 1.0; };
        c.F = [osc, quartic_vol](double y, double u, double U) {
            return quartic_vol(u) + 0.5 * osc(y) * U * U;
        };
        c.dF_du = [quartic_dvol](double, double u, double) { return quartic_dvol(u); };
        c.dF_dU = [osc](double y, double, double U) { return osc(y) * U; };
        c.b = [](double, double, double) { return 0.0; };
        c.a_grad = osc;
        c.F_vol = quartic_vol;
        c.dF_vol = quartic_dvol;
        c.growth = {2.0, 4.0, 1.0, 0.2, 4.0, 1.0};
        return c;
    }
    if (name == "osc-dissipation") {
        c.A = [osc](double y, double) { return osc(y); };
        c.F = [quartic_vol](double, double u, double U) { return quartic_vol(u) + 0.5 * U * U; };
        c.dF_du = [quartic_dvol](double, double u, double) { return quartic_dvol(u); };
        c.dF_dU = [](double, double, double U) { return U; };
        c.b = [](double, double, double) { return 0.0; };
        c.a_grad = [](double) { return 1.0; };
        c.F_vol = quartic_vol;
        c.dF_vol = quartic_dvol;
        c.growth = {2.0, 4.0, 1.0, 0.2, 4.0, 1.0};
        return c;
    }
    throw ConfigError("unknown coefficient instance '" + name + "'");
}

PerturbedGradientSystem make_system(const std::string& name, double eps, int cells) {
    auto odes = ode_names();
    if (std::find(odes.begin(), odes.end(), name) != odes.end()) return ode_system(name);
    if (name.rfind("rds-", 0) == 0) {
        rds::Grid grid;
        grid.cells = cells;
        return rds::assemble_system(rds_instance(name.substr(4)), eps, grid);
    }
    std::string listing;
    for (const auto& n : all_names()) listing += " " + n;
    throw ConfigError("unknown system '" + name + "'; catalog:" + listing);
}

Vec default_initial_state(const std::string& name, double /*eps*/, int cells) {
    if (name == "forced") return Vec{0.0};
    if (name.rfind("rds-", 0) == 0) {
        rds::Grid grid;
        grid.cells = cells;
        return gamma::initial_profile(grid);
    }
    return Vec{1.0};
}

}  // namespace pgs::catalog
