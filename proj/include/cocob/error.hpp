#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cocob {

// Bad construction arguments (nonpositive L, alpha < 2, empty layer list, ...).
class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A gradient entry was NaN or infinite.
class InvalidGradient : public std::runtime_error {
 public:
  InvalidGradient(std::size_t coordinate, double value)
      : std::runtime_error("non-finite gradient at coordinate " + std::to_string(coordinate) +
                           " (value " + std::to_string(value) + ")"),
        coordinate(coordinate),
        value(value) {}
  std::size_t coordinate;
  double value;
};

// |g_i| exceeded the declared per-coordinate bound L_i. The strict betting
// update refuses rather than clamps: clamping would silently void the
// wealth guarantee.
class GradientRangeViolation : public std::runtime_error {
 public:
  GradientRangeViolation(std::size_t coordinate, double magnitude, double bound,
                         long long step = -1)
      : std::runtime_error("gradient magnitude " + std::to_string(magnitude) +
                           " exceeds bound " + std::to_string(bound) + " at coordinate " +
                           std::to_string(coordinate) +
                           (step >= 0 ? " (step " + std::to_string(step) + ")" : "")),
        coordinate(coordinate),
        magnitude(magnitude),
        bound(bound),
        step(step) {}
  std::size_t coordinate;
  double magnitude;
  double bound;
  long long step;  // -1 when not attached to a run
};

// observed_gap > rhs on a deterministic convex run: the convergence bound
// is violated, which means an implementation bug, so it is a hard failure.
class CertificateViolation : public std::runtime_error {
 public:
  CertificateViolation(double observed_gap, double rhs)
      : std::runtime_error("certificate violated: observed gap " + std::to_string(observed_gap) +
                           " > bound " + std::to_string(rhs)),
        observed_gap(observed_gap),
        rhs(rhs) {}
  double observed_gap;
  double rhs;
};

}  // namespace cocob
