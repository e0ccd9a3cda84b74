#include "cocob/cocob_backprop.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cocob/error.hpp"

namespace cocob {

std::vector<BackpropBetState> backprop_init(std::span<const double> w1, double alpha) {
  if (w1.empty()) throw InvalidConfig("backprop_init: empty parameter vector");
  if (!(alpha >= 2.0) || !std::isfinite(alpha))
    throw InvalidConfig("backprop_init: alpha = " + std::to_string(alpha) + " must be >= 2");
  std::vector<BackpropBetState> states(w1.size());
  for (std::size_t i = 0; i < w1.size(); ++i) {
    states[i].w1 = w1[i];
    states[i].w = w1[i];
    states[i].alpha = alpha;
  }
  return states;
}

void backprop_step(std::vector<BackpropBetState>& states, const GradientSample& g) {
  if (g.size() != states.size())
    throw InvalidConfig("backprop_step: gradient dimension " + std::to_string(g.size()) +
                        " does not match state dimension " + std::to_string(states.size()));
  check_finite(g);
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto& s = states[i];
    const double gi = g.outcome(i);
    const double mag = std::abs(gi);
    s.L = std::max(s.L, mag);
    s.G += mag;
    s.reward = std::max(s.reward + (s.w - s.w1) * gi, 0.0);
    s.theta += gi;
    if (s.L > 0.0) {
      const double fraction = (s.theta / s.L) *
                              (((s.L + s.reward) / s.L) / std::max(s.G / s.L + 1.0, s.alpha));
      s.w = s.w1 + fraction;
    }
    // L == 0: no gradient signal yet, leave the coordinate where it is.
  }
}

}  // namespace cocob
