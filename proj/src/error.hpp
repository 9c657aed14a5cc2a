#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace cpcal {

// Error taxonomy mirrored 1:1 by the C API status codes.
enum class ErrorClass {
  domain,            // argument outside the mathematical domain of a formula
  invalid_argument,  // structurally invalid input (wrong geometry kind, empty list, ...)
  config,            // config parse or validation failure
  io,                // file I/O failure
  convergence,       // optimizer failed to converge
  contact,           // piezo voltage at or past the contact voltage
  quadrature,        // quadrature failed to reach the requested tolerance
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string msg) : std::runtime_error(std::move(msg)), cls_(cls) {}
  ErrorClass cls() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

inline void require(bool cond, ErrorClass cls, const std::string& msg) {
  if (!cond) throw Error(cls, msg);
}

}  // namespace cpcal
