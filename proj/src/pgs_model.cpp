#include "pgs/pgs_model.hpp"

#include <algorithm>
#include <cmath>

namespace pgs::model {

SampleSet SampleSet::random(std::size_t dim, std::size_t n_states, double radius,
                            double t_max, std::size_t n_times, std::uint64_t seed) {
    SampleSet s;
    Rng rng(seed);
    for (std::size_t k = 0; k < n_times; ++k)
        s.times.push_back(n_times > 1 ? t_max * k / double(n_times - 1) : 0.0);
    for (std::size_t k = 0; k < n_states; ++k)
        s.states.push_back(rng.uniform_vec(dim, -radius, radius));
    return s;
}

AssumptionReport probe_power_control(const PerturbedGradientSystem& sys,
                                     const SampleSet& samples) {
    AssumptionReport rep;
    rep.probe_name = "power_control";
    double C = 0.0;
    for (const auto& u : samples.states) {
        if (!sys.in_domain(u)) continue;
        for (double t : samples.times) {
            double e = sys.energy(t, u);
            if (!(e > 0.0)) throw NonpositiveEnergy("sampled energy is not strictly positive");
            double p = std::abs(sys.power(t, u));
            C = std::max(C, p / e);
            ++rep.samples;
        }
    }
    // two-sided exponential bound on sampled time pairs, relative violation
    double worst = 0.0;
    for (const auto& u : samples.states) {
        if (!sys.in_domain(u)) continue;
        for (double s : samples.times)
            for (double t : samples.times) {
                double es = sys.energy(s, u);
                double et = sys.energy(t, u);
                double grow = std::exp(C * std::abs(t - s));
                worst = std::max(worst, (et - grow * es) / std::max(et, 1e-300));
                worst = std::max(worst, (es / grow - et) / std::max(et, 1e-300));
            }
    }
    rep.worst_violation = worst;
    rep.inferred_constants["C"] = C;
    return rep;
}

AssumptionReport probe_perturbation_control(const PerturbedGradientSystem& sys, double c,
                                            const SampleSet& samples,
                                            double overflow_threshold) {
    if (!(c > 0.0 && c < 1.0)) throw ConfigError("perturbation control requires c in (0,1)");
    AssumptionReport rep;
    rep.probe_name = "perturbation_control";
    double beta = 0.0;
    for (const auto& u : samples.states) {
        if (!sys.in_domain(u)) continue;
        for (double t : samples.times) {
            Vec b = sys.perturbation(t, u);
            Vec b_over_c = (1.0 / c) * b;
            double conj = sys.dissipation_conj(u, b_over_c);
            if (conj > overflow_threshold)
                throw ConjugateOverflow("Psi*_u(B/c) exceeds the overflow threshold");
            double e = sys.energy(t, u);
            beta = std::max(beta, c * conj / (1.0 + e));
            ++rep.samples;
        }
    }
    rep.worst_violation = 0.0;  // beta is fitted, so the bound holds by construction
    rep.inferred_constants["beta"] = beta;
    rep.inferred_constants["c"] = c;
    return rep;
}

AssumptionReport probe_dissipation_basics(const PerturbedGradientSystem& sys,
                                          const SampleSet& samples, double radius,
                                          std::uint64_t seed) {
    AssumptionReport rep;
    rep.probe_name = "dissipation_basics";
    Rng rng(seed);
    Vec zero(sys.dim, 0.0);
    double worst = 0.0;
    for (const auto& u : samples.states) {
        worst = std::max(worst, std::abs(sys.dissipation(u, zero)));
        worst = std::max(worst, std::abs(sys.dissipation_conj(u, zero)));
        for (int k = 0; k < 8; ++k) {
            Vec v = rng.uniform_vec(sys.dim, -radius, radius);
            Vec xi = rng.uniform_vec(sys.dim, -radius, radius);
            worst = std::max(worst, -sys.dissipation(u, v));
            worst = std::max(worst, -sys.dissipation_conj(u, xi));
            ++rep.samples;
        }
    }
    rep.worst_violation = worst;
    return rep;
}

AssumptionReport probe_superlinearity(const PerturbedGradientSystem& sys, const Vec& base_u,
                                      const std::vector<Vec>& rays,
                                      const std::vector<double>& s_values) {
    AssumptionReport rep;
    rep.probe_name = "superlinearity";
    double worst = -kInf;
    double min_increase = kInf;
    for (const auto& v : rays) {
        double nv = norm2(v);
        if (nv == 0.0) continue;
        double prev = -kInf;
        for (double s : s_values) {
            if (s < 1.0) continue;
            double ratio = sys.dissipation(base_u, s * v) / (s * nv);
            if (prev > -kInf) {
                worst = std::max(worst, prev - ratio);  // must increase
                min_increase = std::min(min_increase, ratio - prev);
            }
            prev = ratio;
            ++rep.samples;
        }
    }
    rep.worst_violation = worst > -kInf ? worst : 0.0;
    if (min_increase < kInf) rep.inferred_constants["min_increase"] = min_increase;
    return rep;
}

AssumptionReport probe_mosco_liminf(const MoscoSequenceSpec& spec, double tol) {
    AssumptionReport rep;
    rep.probe_name = "mosco_liminf";
    double final_dev = 0.0;
    double max_dev = 0.0;
    for (std::size_t k = 0; k < spec.n_velocities; ++k) {
        double limit_val =
            spec.limit_system->dissipation(spec.limit_base, spec.limit_velocity(k));
        for (std::size_t n = 0; n < spec.systems.size(); ++n) {
            double val = spec.systems[n]->dissipation(spec.bases[n], spec.velocity(n, k));
            double dev = std::abs(val - limit_val);
            max_dev = std::max(max_dev, dev);
            if (n + 1 == spec.systems.size()) final_dev = std::max(final_dev, dev);
            ++rep.samples;
        }
    }
    rep.inferred_constants["final_deviation"] = final_dev;
    rep.inferred_constants["max_deviation"] = max_dev;
    rep.worst_violation = final_dev - tol;
    return rep;
}

std::vector<AssumptionReport> run_standard_probes(const PerturbedGradientSystem& sys,
                                                  double radius, double t_max,
                                                  std::size_t n_samples, std::uint64_t seed) {
    SampleSet s = SampleSet::random(sys.dim, n_samples, radius, t_max, 5, seed);
    std::vector<AssumptionReport> reports;
    reports.push_back(probe_power_control(sys, s));
    reports.push_back(probe_perturbation_control(sys, 0.5, s));
    reports.push_back(probe_dissipation_basics(sys, s));
    Rng rng(seed ^ 0xabcdef);
    std::vector<Vec> rays;
    for (int k = 0; k < 4; ++k) rays.push_back(rng.uniform_vec(sys.dim, -1.0, 1.0));
    reports.push_back(
        probe_superlinearity(sys, Vec(sys.dim, 0.0), rays, {1.0, 2.0, 4.0, 8.0, 16.0}));
    return reports;
}

}  // namespace pgs::model
