#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "cocob/error.hpp"

namespace cocob {

// Whether GradientSample::values holds the gradient of the objective F or
// its negation. Problem oracles report the objective gradient; the betting
// updates consume the negated form ("outcome" of the coin). Keeping the
// convention explicit on the sample prevents silent sign bugs.
enum class GradConvention { objective, negative };

struct GradientSample {
  std::vector<double> values;
  GradConvention convention = GradConvention::objective;

  std::size_t size() const { return values.size(); }

  // Coin outcome for coordinate i: the negative subgradient of F.
  double outcome(std::size_t i) const {
    return convention == GradConvention::negative ? values[i] : -values[i];
  }

  // Gradient of F for coordinate i.
  double objective_grad(std::size_t i) const {
    return convention == GradConvention::objective ? values[i] : -values[i];
  }
};

inline void check_finite(const GradientSample& g) {
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (!std::isfinite(g.values[i])) throw InvalidGradient(i, g.values[i]);
  }
}

}  // namespace cocob
