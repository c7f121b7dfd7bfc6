#pragma once

#include <stdexcept>

namespace linkpred {

// Bad invocation: unknown flags, unknown tokens, parameters out of range.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data: files, node ids, shapes.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace linkpred
