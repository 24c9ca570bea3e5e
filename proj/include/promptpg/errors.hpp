#pragma once

#include <stdexcept>
#include <string>

namespace promptpg {

// Base for all library errors so callers can catch the whole family.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad arguments to an API call (shape mismatch, out-of-range index, ...).
struct InvalidInput : Error {
  using Error::Error;
};

// Invalid configuration (flags, config files, verbalizer files).
struct ConfigError : Error {
  using Error::Error;
};

// File could not be read/written or has an unreadable format.
struct IoError : Error {
  using Error::Error;
};

// The billed-call ledger would exceed its limit.
struct BudgetExceeded : Error {
  using Error::Error;
};

// The scoring backend failed permanently (after retries where applicable).
struct OracleUnavailable : Error {
  using Error::Error;
};

// Checkpoint file is corrupt or has an unsupported version.
struct CheckpointError : Error {
  using Error::Error;
};

}  // namespace promptpg
