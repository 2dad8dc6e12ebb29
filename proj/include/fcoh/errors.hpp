#pragma once

#include <stdexcept>
#include <string>

namespace fcoh {

// Error categories map to process exit codes in the CLI:
//   UsageError -> 1, DataError -> 2, NumericError -> 3.

// Bad arguments: shape mismatches, invalid parameters, malformed flags.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input files: wrong magic, truncation, inconsistent records.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values where finite numbers are required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fcoh
