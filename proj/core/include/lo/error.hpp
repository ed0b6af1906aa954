#pragma once
// Error classes shared by every module. Each class maps onto one CLI exit
// code so the harness can report failures without string matching.

#include <stdexcept>
#include <string>

namespace lo {

enum class ExitCode : int {
    ok = 0,
    config = 2,
    budget = 3,
    infeasible = 4,
    consensus = 5,
};

class Error : public std::runtime_error {
  public:
    Error(std::string klass, ExitCode code, const std::string& what)
        : std::runtime_error(klass + ": " + what), klass_(std::move(klass)), code_(code) {}

    const std::string& class_name() const noexcept { return klass_; }
    ExitCode exit_code() const noexcept { return code_; }

  private:
    std::string klass_;
    ExitCode code_;
};

#define LO_DEFINE_ERROR(Name, Code)                                                   \
    class Name : public Error {                                                       \
      public:                                                                         \
        explicit Name(const std::string& what) : Error(#Name, ExitCode::Code, what) {} \
    }

LO_DEFINE_ERROR(ConfigInvalid, config);
LO_DEFINE_ERROR(InvalidParameter, config);
LO_DEFINE_ERROR(SizeMismatch, config);
LO_DEFINE_ERROR(NotSymmetric, config);
LO_DEFINE_ERROR(NotProper, config);
LO_DEFINE_ERROR(PointOutsideBox, config);
LO_DEFINE_ERROR(EmptyCenterGrid, config);
LO_DEFINE_ERROR(BudgetExceeded, budget);
LO_DEFINE_ERROR(VolumeExceedsCap, budget);
LO_DEFINE_ERROR(SearchSpaceExceeded, budget);
LO_DEFINE_ERROR(InfeasibleK, infeasible);
LO_DEFINE_ERROR(NoGoodVectors, consensus);
LO_DEFINE_ERROR(NoSpanningTuple, consensus);
LO_DEFINE_ERROR(CoverageFloorMissed, consensus);
LO_DEFINE_ERROR(InsufficientSubsetConsensus, consensus);

#undef LO_DEFINE_ERROR

}  // namespace lo
