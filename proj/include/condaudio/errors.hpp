#pragma once

#include <stdexcept>

namespace condaudio {

// Unreadable or inconsistent external data (maps to exit code 2 at the CLI).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed binary container.
struct FormatError : DataError {
  using DataError::DataError;
};

// Non-finite numerics during training or sampling (exit code 3 at the CLI).
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace condaudio
