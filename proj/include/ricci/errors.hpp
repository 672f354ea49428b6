#pragma once

#include <stdexcept>
#include <string>

namespace ricci {

struct FlowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define RICCI_ERROR_TYPE(Name)                 \
  struct Name : FlowError {                    \
    using FlowError::FlowError;                \
  }

RICCI_ERROR_TYPE(InvalidSpec);
RICCI_ERROR_TYPE(DegenerateProfile);
RICCI_ERROR_TYPE(TimestepUnderflow);
RICCI_ERROR_TYPE(NumericBlowup);
RICCI_ERROR_TYPE(FitFailed);
RICCI_ERROR_TYPE(WindowOutOfRange);
RICCI_ERROR_TYPE(NoNeckFound);
RICCI_ERROR_TYPE(CapConditionViolated);
RICCI_ERROR_TYPE(CapConstructionFailed);
RICCI_ERROR_TYPE(IntegrationFailed);
RICCI_ERROR_TYPE(NonMonotone);
RICCI_ERROR_TYPE(DomainError);
RICCI_ERROR_TYPE(PatchOrderViolated);
RICCI_ERROR_TYPE(NoAdmissibleParams);
RICCI_ERROR_TYPE(NotMonotone);
RICCI_ERROR_TYPE(BadT);
RICCI_ERROR_TYPE(NotIncreasing);
RICCI_ERROR_TYPE(NoBump);
RICCI_ERROR_TYPE(GridMismatch);
RICCI_ERROR_TYPE(NotNormalized);
RICCI_ERROR_TYPE(IoError);

#undef RICCI_ERROR_TYPE

}  // namespace ricci
