#pragma once

#include <stdexcept>
#include <string>

namespace jamiton {

/// Coarse classification used by the command line to pick an exit code.
enum class ErrorClass {
  negative_result,  // no jamiton / no unstable band: a meaningful answer
  configuration,
  numerical,
};

class Error : public std::runtime_error {
public:
  Error(const std::string& name, const std::string& detail, ErrorClass cls)
      : std::runtime_error(name + ": " + detail), detail_(detail), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }
  /// Message without the leading error name.
  const std::string& detail() const noexcept { return detail_; }

private:
  std::string detail_;
  ErrorClass class_;
};

#define JAMITON_DEFINE_ERROR(Name, Class)                                  \
  class Name : public Error {                                              \
  public:                                                                  \
    explicit Name(const std::string& what)                                 \
        : Error(#Name, what, ErrorClass::Class) {}                         \
  }

// model
JAMITON_DEFINE_ERROR(DomainError, numerical);
JAMITON_DEFINE_ERROR(NoUnstableBand, negative_result);

// traveling-wave construction
JAMITON_DEFINE_ERROR(NoJamiton, negative_result);
JAMITON_DEFINE_ERROR(ConvergenceFailure, numerical);
JAMITON_DEFINE_ERROR(SonicSingularity, numerical);
JAMITON_DEFINE_ERROR(DegenerateSonic, numerical);
JAMITON_DEFINE_ERROR(NoJumpRoot, numerical);
JAMITON_DEFINE_ERROR(SonicEscapeFailure, numerical);
JAMITON_DEFINE_ERROR(IntegrationOutOfRange, numerical);
JAMITON_DEFINE_ERROR(WavelengthInfeasible, negative_result);

// particle simulation
JAMITON_DEFINE_ERROR(InvalidPerturbation, configuration);
JAMITON_DEFINE_ERROR(DegenerateSpacing, numerical);
JAMITON_DEFINE_ERROR(DensityOverflow, numerical);
JAMITON_DEFINE_ERROR(StepTooLarge, numerical);

// analysis
JAMITON_DEFINE_ERROR(InsufficientOutputRate, numerical);
JAMITON_DEFINE_ERROR(NothingToCompare, numerical);

// io
JAMITON_DEFINE_ERROR(ConfigError, configuration);

#undef JAMITON_DEFINE_ERROR

}  // namespace jamiton
