#pragma once

#include <stdexcept>
#include <string>

namespace lw {

// Bad user-supplied data: malformed files, dimension mismatches, invalid
// parameters. Maps to CLI exit code 3.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken engine invariant. Maps to CLI exit code 4.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace lw
