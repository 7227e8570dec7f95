#pragma once

#include <stdexcept>
#include <string>

namespace qmn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define QMN_ERROR_TYPE(Name)                    \
  struct Name : Error {                         \
    using Error::Error;                         \
  }

QMN_ERROR_TYPE(DomainError);       // parameter outside its stated domain
QMN_ERROR_TYPE(RangeError);        // index outside the support
QMN_ERROR_TYPE(DivergenceError);   // nonterminating series with |z| >= 1
QMN_ERROR_TYPE(PoleError);         // denominator Pochhammer factor vanished
QMN_ERROR_TYPE(PoleProximityError);
QMN_ERROR_TYPE(CapacityError);     // state space / word space over cap
QMN_ERROR_TYPE(ScheduleError);     // a_i * mu_t left [nu, 1)
QMN_ERROR_TYPE(TailBoundError);    // certified tail bound cannot meet tol
QMN_ERROR_TYPE(TruncationError);
QMN_ERROR_TYPE(ContourInfeasible);
QMN_ERROR_TYPE(ConvergenceError);
QMN_ERROR_TYPE(ConfigError);
QMN_ERROR_TYPE(IllConditionedError);

#undef QMN_ERROR_TYPE

}  // namespace qmn
