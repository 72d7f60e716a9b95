#ifndef PGS_ERRORS_HPP
#define PGS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pgs {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define PGS_DEFINE_ERROR(Name)                                        \
    struct Name : Error {                                             \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

PGS_DEFINE_ERROR(UnboundedConjugate);
PGS_DEFINE_ERROR(InfiniteValue);
PGS_DEFINE_ERROR(NotConvex);
PGS_DEFINE_ERROR(NonFiniteObjective);
PGS_DEFINE_ERROR(NonpositiveEnergy);
PGS_DEFINE_ERROR(ConjugateOverflow);
PGS_DEFINE_ERROR(DimensionMismatch);
PGS_DEFINE_ERROR(SumRuleViolated);
PGS_DEFINE_ERROR(EnergyBlowup);
PGS_DEFINE_ERROR(QuadratureUnderResolved);
PGS_DEFINE_ERROR(EllipticityViolated);
PGS_DEFINE_ERROR(CoercivityViolated);
PGS_DEFINE_ERROR(PeriodicityViolated);
PGS_DEFINE_ERROR(SingularInverse);
PGS_DEFINE_ERROR(TabulationGapTooCoarse);
PGS_DEFINE_ERROR(ResolutionRuleViolated);
PGS_DEFINE_ERROR(ConfigError);
PGS_DEFINE_ERROR(NotSupported);

#undef PGS_DEFINE_ERROR

}  // namespace pgs

#endif
