#include "pgs/convex_core.hpp"

#include <algorithm>
#include <cmath>

namespace pgs::convex {

namespace {

// Golden-section maximization of a 1d slice; g must be unimodal on [lo,hi]
// (true for concave slices, which is the case for <xi,.> - f with convex f).
double golden_max_1d(const std::function<double(double)>& g, double lo, double hi,
                     double* arg_out) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double gc = g(c), gd = g(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (gc >= gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - gr * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + gr * (b - a);
            gd = g(d);
        }
    }
    double xm = 0.5 * (a + b);
    double gm = g(xm);
    if (gc > gm) {
        gm = gc;
        xm = c;
    }
    if (gd > gm) {
        gm = gd;
        xm = d;
    }
    if (arg_out) *arg_out = xm;
    return gm;
}

// Coordinate-wise golden-section ascent of `g` constrained to the box.
double coordinate_refine(const std::function<double(const Vec&)>& g, Vec v,
                         const SearchBox& box, int sweeps, double* best_val) {
    double val = g(v);
    for (int s = 0; s < sweeps; ++s) {
        double improved = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            Vec probe = v;
            auto slice = [&](double x) {
                probe[i] = x;
                return g(probe);
            };
            double xi_best;
            double vi = golden_max_1d(slice, box.lo[i], box.hi[i], &xi_best);
            if (vi > val) {
                improved += vi - val;
                val = vi;
                v[i] = xi_best;
            }
        }
        if (improved <= 1e-15 * (1.0 + std::abs(val))) break;
    }
    if (best_val) *best_val = val;
    return val;
}

}  // namespace

double legendre_fenchel(const Functional& f, const Vec& xi, const SearchBox& box,
                        const ConjugateOptions& opts) {
    if (f.conjugate) {
        double v = f.conjugate(xi);
        if (v > opts.overflow_threshold)
            throw UnboundedConjugate("closed-form conjugate exceeds overflow threshold");
        return v;
    }
    const std::size_t n = xi.size();
    if (box.dim() != n) throw DimensionMismatch("search box dimension != covector dimension");

    auto g = [&](const Vec& v) -> double {
        double fv = f(v);
        if (!std::isfinite(fv)) return -kInf;
        return dot(xi, v) - fv;
    };

    // Start set: box center, corners (small dims), random interior points,
    // plus a dense grid scan in up to three dimensions.
    std::vector<Vec> starts;
    Vec center(n);
    for (std::size_t i = 0; i < n; ++i) center[i] = 0.5 * (box.lo[i] + box.hi[i]);
    starts.push_back(center);
    if (n <= 3) {
        for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
            Vec c(n);
            for (std::size_t i = 0; i < n; ++i) c[i] = (mask >> i) & 1 ? box.hi[i] : box.lo[i];
            starts.push_back(c);
        }
    }
    Rng rng(opts.seed);
    for (int k = 0; k < opts.multistarts; ++k) {
        Vec v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(box.lo[i], box.hi[i]);
        starts.push_back(v);
    }

    double best = -kInf;
    Vec best_v = center;
    if (n <= 3) {
        const int m = (n == 1) ? opts.grid_per_axis_1d : opts.grid_per_axis_nd;
        std::vector<int> idx(n, 0);
        Vec v(n);
        bool done = false;
        while (!done) {
            for (std::size_t i = 0; i < n; ++i)
                v[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * (idx[i] + 0.5) / m;
            double gv = g(v);
            if (gv > best) {
                best = gv;
                best_v = v;
            }
            std::size_t i = 0;
            for (; i < n; ++i) {
                if (++idx[i] < m) break;
                idx[i] = 0;
            }
            done = (i == n);
        }
        starts.push_back(best_v);
    }

    for (const auto& s : starts) {
        double val;
        coordinate_refine(g, s, box, opts.refine_sweeps, &val);
        best = std::max(best, val);
    }

    if (!std::isfinite(best))
        throw InfiniteValue("functional is +inf on the whole search box");
    if (best > opts.overflow_threshold)
        throw UnboundedConjugate("supremum exceeds overflow threshold; covector likely outside dom f*");
    return best;
}

double fenchel_young_gap(const Functional& f, const Functional& f_star, const Vec& u,
                         const Vec& xi) {
    double fu = f(u);
    double fs = f_star(xi);
    if (!std::isfinite(fu) || !std::isfinite(fs))
        throw InfiniteValue("fenchel_young_gap requires finite evaluations");
    return fu + fs - dot(xi, u);
}

double subdiff_residual(const Functional& f, const Vec& u, const Vec& xi,
                        const SubdiffOptions& opts) {
    if (!f.convex) throw NotConvex("subdiff_residual requires the convexity flag");
    double fu = f(u);
    if (!std::isfinite(fu)) throw InfiniteValue("f(u) must be finite");

    const std::size_t n = u.size();
    SearchBox box;
    box.lo.resize(n);
    box.hi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        box.lo[i] = u[i] - opts.radius;
        box.hi[i] = u[i] + opts.radius;
    }

    // residual(v) = f(u) - f(v) - <xi, u - v>; concave in v for convex f.
    auto residual = [&](const Vec& v) -> double {
        double fv = f(v);
        if (!std::isfinite(fv)) return -kInf;
        Vec umv = u - v;
        return fu - fv - dot(xi, umv);
    };

    Rng rng(opts.seed);
    double best = -kInf;
    Vec best_v = u;
    for (int k = 0; k < opts.samples; ++k) {
        Vec v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(box.lo[i], box.hi[i]);
        double r = residual(v);
        if (r > best) {
            best = r;
            best_v = v;
        }
    }
    // box corners catch maxima on the boundary (relevant for piecewise-linear f)
    if (n <= 3) {
        for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
            Vec v(n);
            for (std::size_t i = 0; i < n; ++i) v[i] = (mask >> i) & 1 ? box.hi[i] : box.lo[i];
            double r = residual(v);
            if (r > best) {
                best = r;
                best_v = v;
            }
        }
    }
    if (opts.refine) {
        double val;
        coordinate_refine(residual, best_v, box, 40, &val);
        best = std::max(best, val);
    }
    return best;
}

DualPair make_dual_pair(const Functional& f, const Functional& f_star, const Vec& u,
                        const Vec& xi) {
    DualPair p;
    p.point = u;
    p.covector = xi;
    p.gap = fenchel_young_gap(f, f_star, u, xi);
    return p;
}

}  // namespace pgs::convex
