#ifndef PGS_INNER_SOLVER_HPP
#define PGS_INNER_SOLVER_HPP

#include <functional>

#include "pgs/errors.hpp"
#include "pgs/types.hpp"

// Approximate minimization of smooth convex objectives; the workhorse behind
// every variational time step.

namespace pgs::solver {

struct MinimizeSpec {
    std::function<double(const Vec&)> objective;
    std::function<Vec(const Vec&)> gradient;  // optional; derivative-free polling otherwise
    Vec start;
    double grad_tol = 0.0;   // 0 -> default 1e-9*(1+|grad at start|)
    double f_tol = 1e-16;
    int max_iters = 0;       // 0 -> default 500*dim
    bool accelerate = true;  // limited-memory quasi-Newton direction; plain descent otherwise
};

struct MinimizeResult {
    Vec argmin;
    double value = 0.0;
    double grad_norm = 0.0;
    int iters = 0;
    bool converged = false;
};

// Backtracking line-search descent (limited-memory quasi-Newton when
// accelerated).  Never increases the objective beyond rounding; when the
// objective difference falls below rounding resolution, steps are accepted
// on gradient-norm decrease instead so that quadratic problems reach
// gradient norms near machine precision.
//
// Errors: NonFiniteObjective if the objective evaluates to NaN/-inf (or is
// not finite at the start).  Iteration exhaustion is not an error: the best
// point so far is returned with converged=false.
MinimizeResult minimize(const MinimizeSpec& spec);

}  // namespace pgs::solver

#endif
