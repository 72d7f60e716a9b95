#include "pgs/rds_fd.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace pgs::rds {

void Grid::validate() const {
    if (dim != 1)
        throw NotSupported("only 1d grids are implemented; requested dim " +
                           std::to_string(dim));
    if (cells < 2) throw ConfigError("grid needs at least two cells");
}

Vec node_weights(const Grid& grid) {
    Vec w(grid.nodes(), grid.h());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

Vec node_coordinates(const Grid& grid) {
    Vec x(grid.nodes());
    for (int i = 0; i < grid.nodes(); ++i) x[i] = i * grid.h();
    return x;
}

double l2_norm(const Grid& grid, const Vec& u) {
    Vec w = node_weights(grid);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * u[i] * u[i];
    return std::sqrt(s);
}

void validate_coefficients(const PeriodicCoefficients& coeffs, double u_radius,
                           double U_radius, int samples, std::uint64_t seed) {
    if (coeffs.components != 1)
        throw NotSupported("only single-component systems are implemented");
    Rng rng(seed);
    const auto& g = coeffs.growth;
    for (int k = 0; k < samples; ++k) {
        double y = rng.uniform(0.0, 1.0);
        double u = rng.uniform(-u_radius, u_radius);
        double U = rng.uniform(-U_radius, U_radius);
        double t = rng.uniform(0.0, 1.0);
        int shift = 1 + (int)(rng.uniform() * 3.0);

        double a = coeffs.A(y, u);
        if (std::abs(coeffs.A(y + shift, u) - a) > 1e-10 * (1.0 + std::abs(a)) ||
            std::abs(coeffs.F(y + shift, u, U) - coeffs.F(y, u, U)) >
                1e-10 * (1.0 + std::abs(coeffs.F(y, u, U))) ||
            std::abs(coeffs.b(y + shift, t, u) - coeffs.b(y, t, u)) >
                1e-10 * (1.0 + std::abs(coeffs.b(y, t, u))))
            throw PeriodicityViolated("coefficient is not 1-periodic at y=" + std::to_string(y));

        if (!(a >= 1.0 / g.C_A && a <= g.C_A))
            throw EllipticityViolated("A(y,u)=" + std::to_string(a) +
                                      " violates the two-sided bound with C_A=" +
                                      std::to_string(g.C_A));

        double f = coeffs.F(y, u, U);
        double floor = g.C_F * (1.0 + std::pow(std::abs(u), g.q) + std::pow(std::abs(U), g.p));
        if (f < floor - 1e-12)
            throw CoercivityViolated("F(y,u,U)=" + std::to_string(f) +
                                     " below the declared coercivity floor " +
                                     std::to_string(floor));
    }
    if (!(1.0 - 1.0 / g.p > -1.0 / g.q) || !(g.q >= 2.0 * g.r))
        throw ConfigError("growth exponents violate the admissibility relations");
}

PerturbedGradientSystem assemble_system(const PeriodicCoefficients& coeffs, double eps,
                                        const Grid& grid, bool run_probes) {
    grid.validate();
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must lie in (0,1]");
    if (run_probes) validate_coefficients(coeffs);

    const int M = grid.cells;
    const double h = grid.h();
    auto x = std::make_shared<Vec>(node_coordinates(grid));
    auto w = std::make_shared<Vec>(node_weights(grid));

    // capture by value; the system must stay valid independently of the inputs
    auto A = coeffs.A;
    auto F = coeffs.F;
    auto dF_du = coeffs.dF_du;
    auto dF_dU = coeffs.dF_dU;
    auto b = coeffs.b;

    PerturbedGradientSystem sys;
    sys.name = coeffs.name + "[eps=" + std::to_string(eps) +
               ",cells=" + std::to_string(M) + "]";
    sys.dim = grid.nodes();
    sys.autonomous = false;  // the reaction term may carry explicit time
    sys.energy_convex = true;

    sys.energy = [=](double, const Vec& u) {
        double e = 0.0;
        for (int j = 0; j < M; ++j) {
            double xm = ((*x)[j] + (*x)[j + 1]) * 0.5;
            double um = (u[j] + u[j + 1]) * 0.5;
            double du = (u[j + 1] - u[j]) / h;
            e += h * F(xm / eps, um, du);
        }
        return e;
    };
    sys.energy_grad = [=](double, const Vec& u) {
        Vec g(u.size(), 0.0);
        for (int j = 0; j < M; ++j) {
            double xm = ((*x)[j] + (*x)[j + 1]) * 0.5;
            double um = (u[j] + u[j + 1]) * 0.5;
            double du = (u[j + 1] - u[j]) / h;
            double fu = dF_du(xm / eps, um, du);
            double fU = dF_dU(xm / eps, um, du);
            g[j] += h * (0.5 * fu - fU / h);
            g[j + 1] += h * (0.5 * fu + fU / h);
        }
        return g;
    };
    sys.power = [](double, const Vec&) { return 0.0; };

    sys.dissipation = [=](const Vec& base, const Vec& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += 0.5 * (*w)[i] * A((*x)[i] / eps, base[i]) * v[i] * v[i];
        return s;
    };
    sys.dissipation_grad = [=](const Vec& base, const Vec& v) {
        Vec g(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            g[i] = (*w)[i] * A((*x)[i] / eps, base[i]) * v[i];
        return g;
    };
    sys.dissipation_conj = [=](const Vec& base, const Vec& xi) {
        double s = 0.0;
        for (std::size_t i = 0; i < xi.size(); ++i)
            s += 0.5 * xi[i] * xi[i] / ((*w)[i] * A((*x)[i] / eps, base[i]));
        return s;
    };

    sys.perturbation = [=](double t, const Vec& u) {
        Vec out(u.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            out[i] = (*w)[i] * b((*x)[i] / eps, t, u[i]);
        return out;
    };

    auto wts = w;  // keep the weights alive inside the norm closure
    sys.state_norm = [=](const Vec& u) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += (*wts)[i] * u[i] * u[i];
        return std::sqrt(s);
    };
    return sys;
}

double energy_grad_check(const PerturbedGradientSystem& sys, const Vec& u, int directions,
                         std::uint64_t seed, double fd_step) {
    if (!sys.energy_grad) throw ConfigError("system has no assembled energy gradient");
    Rng rng(seed);
    const double t = 0.0;
    Vec g = sys.energy_grad(t, u);
    double worst = 0.0;
    for (int k = 0; k < directions; ++k) {
        Vec d = rng.uniform_vec(u.size(), -1.0, 1.0);
        double nd = norm2(d);
        for (auto& z : d) z /= nd;
        Vec up = u, um = u;
        axpy(fd_step, d, up);
        axpy(-fd_step, d, um);
        double fd = (sys.energy(t, up) - sys.energy(t, um)) / (2.0 * fd_step);
        double exact = dot(g, d);
        worst = std::max(worst, std::abs(fd - exact) / (1.0 + std::abs(exact)));
    }
    return worst;
}

}  // namespace pgs::rds
