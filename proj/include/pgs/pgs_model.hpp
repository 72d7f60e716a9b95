#ifndef PGS_PGS_MODEL_HPP
#define PGS_PGS_MODEL_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pgs/errors.hpp"
#include "pgs/types.hpp"

// The abstract perturbed gradient system (V, E, Psi, B) as an oracle bundle,
// with runtime probes for the structural assumptions the time stepper relies
// on (energetic power control, energy control of the perturbation,
// dissipation-potential basics, state-continuity of the dissipation).

namespace pgs::model {

struct PerturbedGradientSystem {
    std::string name;
    std::size_t dim = 1;

    // E_t(u); +inf outside the (time-independent) domain D
    std::function<double(double, const Vec&)> energy;
    // d/dt E_t(u)
    std::function<double(double, const Vec&)> power;
    // optional exact gradient of E_t
    std::function<Vec(double, const Vec&)> energy_grad;

    // Psi_u(v): convex, nonnegative, Psi_u(0) = 0
    std::function<double(const Vec&, const Vec&)> dissipation;
    // optional exact gradient of Psi_u in v (all shipped potentials are smooth)
    std::function<Vec(const Vec&, const Vec&)> dissipation_grad;
    // Psi*_u(xi)
    std::function<double(const Vec&, const Vec&)> dissipation_conj;

    // B(t,u), as a covector paired with the euclidean dot product
    std::function<Vec(double, const Vec&)> perturbation;

    std::function<bool(const Vec&)> dom_indicator;  // optional, default everywhere
    std::function<double(const Vec&)> state_norm;   // optional, default euclidean

    bool energy_convex = true;
    bool autonomous = false;  // energy independent of t and B independent of t

    bool in_domain(const Vec& u) const { return !dom_indicator || dom_indicator(u); }
    double norm(const Vec& u) const { return state_norm ? state_norm(u) : norm2(u); }
};

// Result of one sampled assumption check.  worst_violation <= 0 means no
// violation was found on the samples.
struct AssumptionReport {
    std::string probe_name;
    std::size_t samples = 0;
    double worst_violation = 0.0;
    std::map<std::string, double> inferred_constants;

    bool ok() const { return worst_violation <= 0.0; }
};

// (t,u) sample cloud for the probes; probes run over the full product
// times x states.
struct SampleSet {
    std::vector<double> times;
    std::vector<Vec> states;

    static SampleSet random(std::size_t dim, std::size_t n_states, double radius,
                            double t_max, std::size_t n_times, std::uint64_t seed);
};

// Fits the smallest C with |d/dt E_t(u)| <= C E_t(u) over the samples, and
// cross-checks the induced two-sided bound exp(-C|t-s|) E_s <= E_t <=
// exp(C|t-s|) E_s on sampled time pairs.  Constants: {"C"}.
// Throws NonpositiveEnergy when a sampled energy is <= 0.
AssumptionReport probe_power_control(const PerturbedGradientSystem& sys,
                                     const SampleSet& samples);

// Fits the smallest beta with c Psi*_u(B(t,u)/c) <= beta (1 + E_t(u)), for a
// given c in (0,1).  Constants: {"beta", "c"}.
// Throws ConjugateOverflow when the conjugate exceeds the overflow threshold.
AssumptionReport probe_perturbation_control(const PerturbedGradientSystem& sys, double c,
                                            const SampleSet& samples,
                                            double overflow_threshold = 1e12);

// Psi_u(0) = 0, Psi*_u(0) = 0, and nonnegativity of both on random
// velocity/covector samples.
AssumptionReport probe_dissipation_basics(const PerturbedGradientSystem& sys,
                                          const SampleSet& samples, double radius = 3.0,
                                          std::uint64_t seed = 31);

// Psi_u(s v)/(s |v|) strictly increasing in s >= 1 along sampled rays; the
// sampled superlinearity certificate.  Constants: {"min_increase"}.
AssumptionReport probe_superlinearity(const PerturbedGradientSystem& sys, const Vec& base_u,
                                      const std::vector<Vec>& rays,
                                      const std::vector<double>& s_values);

// A finite witness for the continuity of u -> Psi_u in the sense of Mosco:
// given systems carrying Psi^(n), base states u_n -> u, and velocity
// sequences v_n -> v, checks Psi^(n)_{u_n}(v_n) -> Psi_{u}(v).
struct MoscoSequenceSpec {
    std::vector<const PerturbedGradientSystem*> systems;  // entry n carries Psi^(n)
    std::vector<Vec> bases;                               // u_n
    const PerturbedGradientSystem* limit_system = nullptr;
    Vec limit_base;  // u
    // velocity k as seen by sequence entry n (recovery sequence)
    std::function<Vec(std::size_t n, std::size_t k)> velocity;
    // velocity k in the limit system
    std::function<Vec(std::size_t k)> limit_velocity;
    std::size_t n_velocities = 1;
};

// Report-only: constants {"final_deviation", "max_deviation"};
// worst_violation = final_deviation - tol.
AssumptionReport probe_mosco_liminf(const MoscoSequenceSpec& spec, double tol);

// Convenience: the probes run by the CLI for a catalog system.
std::vector<AssumptionReport> run_standard_probes(const PerturbedGradientSystem& sys,
                                                  double radius, double t_max,
                                                  std::size_t n_samples, std::uint64_t seed);

}  // namespace pgs::model

#endif
