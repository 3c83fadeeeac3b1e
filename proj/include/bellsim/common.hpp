#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bellsim {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi_v<double>;
inline constexpr cplx kI{0.0, 1.0};

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Error hierarchy. Every failure the library reports derives from Error so
// callers (the CLI, the runner) can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to a numerical routine (m = 0 spinor, off-grid point, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Dimension or memory guard tripped.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Input that collapses under antisymmetrization.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Two independent computations of the same quantity disagree.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

// Time stepping went unstable. Carries the step index and the norms seen.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long step, double norm_before,
                 double norm_after)
      : Error(what), step_(step), norm_before_(norm_before),
        norm_after_(norm_after) {}
  long step() const { return step_; }
  double norm_before() const { return norm_before_; }
  double norm_after() const { return norm_after_; }

 private:
  long step_;
  double norm_before_;
  double norm_after_;
};

// Neumaier-compensated accumulator. All reductions that end up in reports go
// through this so the emitted digits do not depend on evaluation order noise.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

// One named identity or property check, as it appears in reports.
struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline CheckResult make_check(std::string name, double residual,
                              double tolerance) {
  return {std::move(name), residual, tolerance, residual <= tolerance};
}

inline bool all_pass(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

}  // namespace bellsim
