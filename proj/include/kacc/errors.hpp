#pragma once

#include <stdexcept>
#include <string>

namespace kacc {

// Raised when a caller breaks an object's declared bound or protocol,
// e.g. writing 2 into a 1-bit register or incrementing a counter past
// its capacity. Signals a bug in the layer above, so it is a logic error.
struct ContractViolation : std::logic_error {
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Raised when simulated code touches shared memory outside a granted
// scheduler step, or when a schedule is malformed for the workload.
struct HarnessViolation : std::logic_error {
  explicit HarnessViolation(const std::string& what) : std::logic_error(what) {}
};

// Raised when an exhaustive exploration or checker search would exceed
// its configured budget. Distinct from a verdict: the caller asked a
// question too big to answer, and we refuse rather than guess.
struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kacc
