#pragma once

#include <stdexcept>
#include <string>

namespace dcm {

/// Bad input parameters; detected before any work starts.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure while computing with otherwise valid inputs.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DCM_DEFINE_ERROR(Name, Base)           \
  class Name : public Base {                   \
   public:                                     \
    explicit Name(const std::string& what)     \
        : Base(#Name ": " + what) {}           \
  };

DCM_DEFINE_ERROR(InvalidLaw, ValidationError)
DCM_DEFINE_ERROR(DegenerateLaw, ValidationError)
DCM_DEFINE_ERROR(ParameterOutOfRange, ValidationError)
DCM_DEFINE_ERROR(NodeOutOfRange, ValidationError)
DCM_DEFINE_ERROR(NonMonotoneInput, ValidationError)
DCM_DEFINE_ERROR(UndefinedTilt, ValidationError)
DCM_DEFINE_ERROR(OutOfValidityWindow, ValidationError)
DCM_DEFINE_ERROR(FormatError, ValidationError)

DCM_DEFINE_ERROR(RetriesExhausted, RuntimeFailure)
DCM_DEFINE_ERROR(EmptyGraph, RuntimeFailure)
DCM_DEFINE_ERROR(PopulationOverflow, RuntimeFailure)
DCM_DEFINE_ERROR(ExhaustedStubs, RuntimeFailure)
DCM_DEFINE_ERROR(NoSurvivingMass, RuntimeFailure)
DCM_DEFINE_ERROR(EmptyEmpirical, RuntimeFailure)

#undef DCM_DEFINE_ERROR

}  // namespace dcm
