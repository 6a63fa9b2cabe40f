#pragma once

#include <stdexcept>
#include <string>

namespace rootpeel {

// Malformed input data (text tables, matrices, JSON fixtures).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A query that is ill-posed for the current state, e.g. asking about a point
// that is absent at the requested density level or already peeled.
struct QueryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violated operation precondition (missing density, bad configuration, ...).
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The exact-arithmetic oracle refuses modules above its dimension budget.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Internal consistency failure: a morphism that should be well defined or
// idempotent is not. Reaching this indicates a bug upstream.
struct ConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace rootpeel
