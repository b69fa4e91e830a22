// Shared plumbing: error codes, compensated summation, deterministic parallel_for.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace defectforge {

enum class ErrorCode {
  CapExceeded,
  QuadratureUnderresolved,
  OutOfPhysicalRegion,
  NoConvergence,
  InvariantViolation,
  NotFound,
  UsageError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::CapExceeded: return "CAP_EXCEEDED";
    case ErrorCode::QuadratureUnderresolved: return "QUADRATURE_UNDERRESOLVED";
    case ErrorCode::OutOfPhysicalRegion: return "OUT_OF_PHYSICAL_REGION";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::InvariantViolation: return "INVARIANT_VIOLATION";
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::UsageError: return "USAGE_ERROR";
  }
  return "UNKNOWN";
}

// Largest exponent-tensor coefficient magnitude the quadratures accept.  The
// density concentrates far below quadrature resolution long before this.
inline constexpr double kCoeffCap = 200.0;

// Kahan-compensated accumulator.
struct Kahan {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

// Process-wide worker cap shared by all parallel loops (CLI --threads).
void set_max_threads(int n);
int max_threads();

// Static-partition parallel loop.  fn(begin, end) runs on half-open chunks;
// the partition depends only on (n, thread count), so per-index results are
// bitwise independent of scheduling.  Reductions must be done serially by the
// caller afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace defectforge
