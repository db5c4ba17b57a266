#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace bopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Extended-real +infinity. Off-domain function values are exactly this,
/// never a large finite number.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A point violated the domain of a kernel or objective. Carries the first
/// offending coordinate when known (-1 otherwise).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what, Index coordinate = -1)
      : std::runtime_error(coordinate >= 0
                               ? what + " (coordinate " + std::to_string(coordinate) + ")"
                               : what),
        coordinate_(coordinate) {}

  Index coordinate() const noexcept { return coordinate_; }

 private:
  Index coordinate_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nonpositive diagonal-metric entry handed to a subproblem solver.
class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closure of the open convex set C the composite problem lives on.
enum class FeasibleSet { AllSpace, NonnegOrthant };

inline bool contains(FeasibleSet set, const Vector& x) {
  if (set == FeasibleSet::AllSpace) return true;
  return (x.array() >= 0.0).all();
}

/// Structure of the convex part g that the subproblem handles in closed form.
struct GSpec {
  enum class Kind { None, L1, L1PlusNonneg };

  Kind kind = Kind::None;
  double theta = 0.0;

  static GSpec none() { return {Kind::None, 0.0}; }
  static GSpec l1(double theta) { return {Kind::L1, theta}; }
  static GSpec l1_plus_nonneg(double theta) { return {Kind::L1PlusNonneg, theta}; }
};

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace bopt
