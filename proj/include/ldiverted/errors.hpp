#pragma once

#include <stdexcept>
#include <string>

namespace ldiverted {

// Invalid or malformed input data (bad CSV cell, unknown attribute, ...).
// The CLI maps this to exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A configuration that cannot be satisfied by any run (ineligible dataset,
// group size larger than the value domain, ...). CLI exit code 4.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Bad command-line usage. CLI exit code 2.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ldiverted
