#ifndef PGS_CONVEX_CORE_HPP
#define PGS_CONVEX_CORE_HPP

#include <cstdint>
#include <functional>

#include "pgs/errors.hpp"
#include "pgs/types.hpp"

// Finite-dimensional convex-analysis primitives: numeric Legendre-Fenchel
// transform, Fenchel-Young gap, and sampled subdifferential residuals.

namespace pgs::convex {

// Extended-real functional given as evaluation oracle.  `eval` must return
// +inf exactly where `dom` is false; `grad` and `conjugate` are optional
// closed forms consulted when present.
struct Functional {
    std::function<double(const Vec&)> eval;
    std::function<Vec(const Vec&)> grad;           // optional
    std::function<bool(const Vec&)> dom;           // optional, default: everywhere
    std::function<double(const Vec&)> conjugate;   // optional closed form of f*
    bool convex = false;

    double operator()(const Vec& v) const {
        if (dom && !dom(v)) return kInf;
        return eval(v);
    }
    bool in_dom(const Vec& v) const { return !dom || dom(v); }
};

// Axis-aligned search region for the numeric conjugate.
struct SearchBox {
    Vec lo, hi;

    static SearchBox cube(std::size_t dim, double radius) {
        SearchBox b;
        b.lo.assign(dim, -radius);
        b.hi.assign(dim, radius);
        return b;
    }
    std::size_t dim() const { return lo.size(); }
};

struct ConjugateOptions {
    int grid_per_axis_1d = 2048;  // dense safeguard resolution in 1-3 dims
    int grid_per_axis_nd = 32;
    int refine_sweeps = 60;            // coordinate golden-section sweeps
    double overflow_threshold = 1e8;   // values above signal an unbounded conjugate
    int multistarts = 8;
    std::uint64_t seed = 12345;
};

// Numeric Legendre-Fenchel transform: sup over the box of <xi,v> - f(v).
// Dense grid safeguard in up to three dimensions, then multi-start
// coordinate refinement.  Monotone under box enlargement by construction.
// Throws UnboundedConjugate when the supremum exceeds the overflow threshold.
double legendre_fenchel(const Functional& f, const Vec& xi, const SearchBox& box,
                        const ConjugateOptions& opts = {});

// Relative tolerance used to classify a Fenchel-Young gap as zero.
inline double gap_tolerance(double f_at_u, double fstar_at_xi) {
    return 1e-8 * (1.0 + std::abs(f_at_u) + std::abs(fstar_at_xi));
}

// gap = f(u) + f*(xi) - <xi,u>.  Nonnegative for a true conjugate pair;
// zero (within tolerance) iff xi is a subgradient of f at u.
// Throws InfiniteValue when either evaluation is not finite.
double fenchel_young_gap(const Functional& f, const Functional& f_star, const Vec& u,
                         const Vec& xi);

struct SubdiffOptions {
    int samples = 256;
    double radius = 1.0;   // sampling box half-width around u
    bool refine = true;    // golden-section polish of the sampled maximum
    std::uint64_t seed = 777;
};

// max over sampled v of f(u) - f(v) - <xi, u - v>.  Nonpositive certifies
// xi in the convex subdifferential at u on the sample.  For convex f the
// exact supremum over all v equals the Fenchel-Young gap.
// Throws NotConvex when the convexity flag is unset.
double subdiff_residual(const Functional& f, const Vec& u, const Vec& xi,
                        const SubdiffOptions& opts = {});

// A primal/dual point pair together with its Fenchel-Young gap.
struct DualPair {
    Vec point;
    Vec covector;
    double gap = 0.0;
};

DualPair make_dual_pair(const Functional& f, const Functional& f_star, const Vec& u,
                        const Vec& xi);

}  // namespace pgs::convex

#endif
