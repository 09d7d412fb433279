#pragma once

#include <stdexcept>
#include <string>

namespace newsrec {

// Shape disagreement between operands of a numeric op.
struct DimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input outside an op's mathematical domain (empty softmax, NaN logits, ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed binary or text file (bad magic, truncated record, ...).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Contradictory or unknown configuration supplied by the user.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inputs that fail pre-run resource validation (missing files, unresolvable
// ids, empty training set).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A documented internal invariant was broken; indicates a bug upstream.
struct InvariantError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace newsrec
