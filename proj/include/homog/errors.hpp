#pragma once

#include <stdexcept>
#include <string>

namespace homog {

// Config/constraint errors map to exit code 2, numerical ones to exit code 1.
enum class ErrorClass { Config, Numerical };

class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what, ErrorClass cls)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)), cls_(cls) {}
  const std::string& kind() const noexcept { return kind_; }
  ErrorClass error_class() const noexcept { return cls_; }

private:
  std::string kind_;
  ErrorClass cls_;
};

#define HOMOG_ERROR(Name, Cls)                                                 \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string& what) : Error(#Name, what, Cls) {}        \
  };

HOMOG_ERROR(ConstraintViolation, ErrorClass::Config)
HOMOG_ERROR(ConfigError, ErrorClass::Config)
HOMOG_ERROR(SchemaError, ErrorClass::Config)
HOMOG_ERROR(DisconnectedPhase, ErrorClass::Config)
HOMOG_ERROR(ResolutionMismatch, ErrorClass::Config)
HOMOG_ERROR(HashMismatch, ErrorClass::Config)
HOMOG_ERROR(IncompatibleRuns, ErrorClass::Config)
HOMOG_ERROR(KernelGridMismatch, ErrorClass::Config)
HOMOG_ERROR(MissingSolution, ErrorClass::Numerical)
HOMOG_ERROR(SingularSystem, ErrorClass::Numerical)
HOMOG_ERROR(NoConvergence, ErrorClass::Numerical)
HOMOG_ERROR(NotPositiveDefinite, ErrorClass::Numerical)
HOMOG_ERROR(ZeroGradient, ErrorClass::Numerical)

#undef HOMOG_ERROR

}  // namespace homog
