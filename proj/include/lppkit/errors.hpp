#pragma once

// Per-replica error codes written to the error_code column.

#include <exception>
#include <stdexcept>

#include "lppkit/passage.hpp"

namespace lppkit {

enum class ReplicaError : int {
  None = 0,
  BudgetExceeded = 1,
  NoAdmissiblePath = 2,
  InvalidInput = 3,
  Runtime = 4,
};

inline ReplicaError classify_exception(const std::exception& e) {
  if (dynamic_cast<const BudgetExceeded*>(&e)) return ReplicaError::BudgetExceeded;
  if (dynamic_cast<const std::domain_error*>(&e)) return ReplicaError::NoAdmissiblePath;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return ReplicaError::InvalidInput;
  return ReplicaError::Runtime;
}

}  // namespace lppkit
