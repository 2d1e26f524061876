#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace homfrac {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecView = Eigen::Map<const Eigen::VectorXd>;

// Hard cap on topological dimension; lets hot loops use stack buffers.
inline constexpr int kMaxDim = 16;

/// Numerical result with a statistical error bar and an analytic
/// truncation bound. The reported interval is value +- (2*std_err + tail_bound).
struct Estimate {
  double value = 0.0;
  double std_err = 0.0;     // 1-sigma statistical error
  double tail_bound = 0.0;  // analytic bound on truncated contributions
  long long n_evals = 0;
  std::uint64_t seed = 0;
  bool budget_exceeded = false;

  double half_width() const { return 2.0 * std_err + tail_bound; }

  Estimate& operator+=(const Estimate& o) {
    value += o.value;
    std_err = std::sqrt(std_err * std_err + o.std_err * o.std_err);
    tail_bound += o.tail_bound;
    n_evals += o.n_evals;
    budget_exceeded = budget_exceeded || o.budget_exceeded;
    return *this;
  }
  Estimate scaled(double c) const {
    Estimate e = *this;
    e.value *= c;
    e.std_err *= std::abs(c);
    e.tail_bound *= std::abs(c);
    return e;
  }
};

/// True when the reported intervals value +- (2 std_err + tail_bound) of the
/// two estimates overlap.
inline bool agree(const Estimate& a, const Estimate& b, double slack = 0.0) {
  return std::abs(a.value - b.value) <= a.half_width() + b.half_width() + slack;
}

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedStep : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownGroup : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GaugeGroupMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RootBracketFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SymmetryViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StepUnderflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ZeroField : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NormalizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OverlapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace homfrac
