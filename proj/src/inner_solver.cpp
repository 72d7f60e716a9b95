#include "pgs/inner_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace pgs::solver {

namespace {

double checked_eval(const std::function<double(const Vec&)>& f, const Vec& x) {
    double v = f(x);
    if (std::isnan(v) || v == -kInf)
        throw NonFiniteObjective("objective returned NaN or -inf");
    return v;  // +inf is allowed and treated as "outside the domain"
}

struct LbfgsMemory {
    std::deque<Vec> s, y;
    std::deque<double> rho;
    std::size_t m = 10;

    void push(const Vec& si, const Vec& yi) {
        double sy = dot(si, yi);
        if (sy <= 1e-30) return;  // keep curvature pairs positive definite
        s.push_back(si);
        y.push_back(yi);
        rho.push_back(1.0 / sy);
        if (s.size() > m) {
            s.pop_front();
            y.pop_front();
            rho.pop_front();
        }
    }

    // two-loop recursion, d = -H*g
    Vec direction(const Vec& g) const {
        Vec q = g;
        std::vector<double> alpha(s.size());
        for (std::size_t i = s.size(); i-- > 0;) {
            alpha[i] = rho[i] * dot(s[i], q);
            axpy(-alpha[i], y[i], q);
        }
        if (!s.empty()) {
            double gamma = dot(s.back(), y.back()) / dot(y.back(), y.back());
            for (auto& x : q) x *= gamma;
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            double beta = rho[i] * dot(y[i], q);
            axpy(alpha[i] - beta, s[i], q);
        }
        for (auto& x : q) x = -x;
        return q;
    }
};

MinimizeResult poll_minimize(const MinimizeSpec& spec, int max_iters) {
    // Compass search: poll +/- each coordinate, halve the step on failure.
    Vec x = spec.start;
    double fx = checked_eval(spec.objective, x);
    if (!std::isfinite(fx)) throw NonFiniteObjective("objective is +inf at the start point");
    double step = 1.0 + norm_inf(x);
    const double step_min = std::max(std::sqrt(std::max(spec.f_tol, 0.0)),
                                     1e-10 * (1.0 + norm_inf(spec.start)));
    int it = 0;
    while (it < max_iters && step > step_min) {
        bool moved = false;
        for (std::size_t i = 0; i < x.size() && it < max_iters; ++i) {
            for (double sgn : {+1.0, -1.0}) {
                Vec xt = x;
                xt[i] += sgn * step;
                double ft = checked_eval(spec.objective, xt);
                ++it;
                if (ft < fx) {
                    x = xt;
                    fx = ft;
                    moved = true;
                }
            }
        }
        if (!moved) step *= 0.5;
    }
    MinimizeResult res;
    res.argmin = x;
    res.value = fx;
    res.grad_norm = step;  // poll step size is the stationarity certificate here
    res.iters = it;
    res.converged = step <= step_min;
    return res;
}

}  // namespace

MinimizeResult minimize(const MinimizeSpec& spec) {
    const std::size_t n = spec.start.size();
    const int max_iters = spec.max_iters > 0 ? spec.max_iters : 500 * std::max<int>(1, (int)n);
    if (!spec.gradient) return poll_minimize(spec, max_iters);

    Vec x = spec.start;
    double fx = checked_eval(spec.objective, x);
    if (!std::isfinite(fx)) throw NonFiniteObjective("objective is +inf at the start point");
    const double f_start = fx;
    Vec g = spec.gradient(x);
    double gnorm = norm2(g);
    const double grad_tol = spec.grad_tol > 0 ? spec.grad_tol : 1e-9 * (1.0 + gnorm);

    LbfgsMemory mem;
    // lowest objective value seen at an iterate (starts at the start point)
    Vec best_x = x;
    double best_f = fx;
    double best_g = gnorm;

    const double c1 = 1e-4;
    double alpha_prev = 1.0;
    int it = 0;
    int stalls = 0;
    while (it < max_iters && gnorm > grad_tol) {
        ++it;
        Vec d = spec.accelerate ? mem.direction(g) : (-1.0) * g;
        double dg = dot(d, g);
        if (!(dg < 0.0)) {  // not a descent direction, reset to steepest
            d = (-1.0) * g;
            dg = -gnorm * gnorm;
        }
        double alpha;
        if (spec.accelerate && !mem.s.empty())
            alpha = 1.0;
        else
            alpha = std::min(1.0, 4.0 * alpha_prev) / (1.0 + (mem.s.empty() ? gnorm : 0.0));

        Vec xt;
        double ft = fx;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            xt = x;
            axpy(alpha, d, xt);
            ft = checked_eval(spec.objective, xt);
            if (ft <= fx + c1 * alpha * dg) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }

        if (accepted) {
            alpha_prev = alpha;
            Vec gt = spec.gradient(xt);
            mem.push(xt - x, gt - g);
            x = xt;
            fx = ft;
            g = gt;
            gnorm = norm2(g);
            stalls = 0;
            if (fx < best_f) {
                best_x = x;
                best_f = fx;
                best_g = gnorm;
            }
            continue;
        }

        // Armijo cannot certify decrease below the rounding resolution of the
        // objective.  Accept a full step on gradient-norm decrease so that
        // quadratic problems can be polished to near machine precision.
        const double f_round = 64.0 * 2.2e-16 * (1.0 + std::abs(fx));
        xt = x;
        axpy(1.0, d, xt);
        ft = checked_eval(spec.objective, xt);
        if (std::isfinite(ft) && ft <= fx + f_round) {
            Vec gt = spec.gradient(xt);
            double gtn = norm2(gt);
            if (gtn < gnorm) {
                mem.push(xt - x, gt - g);
                x = xt;
                fx = ft;
                g = gt;
                gnorm = gtn;
                if (fx < best_f) {
                    best_x = x;
                    best_f = fx;
                    best_g = gnorm;
                }
                stalls = 0;
                continue;
            }
        }
        if (++stalls >= 3) break;
    }

    MinimizeResult res;
    // Prefer the final (possibly polished) iterate; fall back to the best
    // recorded point if polishing drifted above the descent budget.
    if (fx <= f_start + spec.f_tol + 64.0 * 2.2e-16 * (1.0 + std::abs(f_start))) {
        res.argmin = x;
        res.value = fx;
        res.grad_norm = gnorm;
    } else {
        res.argmin = best_x;
        res.value = best_f;
        res.grad_norm = best_g;
    }
    res.iters = it;
    res.converged = res.grad_norm <= grad_tol;
    return res;
}

}  // namespace pgs::solver
