#pragma once

// COCOB-Backprop: the betting update for gradients of unknown range. The
// per-coordinate scale L is tracked as the running maximum |g|, the reward
// is clipped at zero (L is no longer a guaranteed bound, so the wealth can
// go negative otherwise), the sigmoid is dropped from the fraction, and the
// denominator is capped at alpha*L so early steps move at most 1/alpha.
// No convergence certificate is attached to this variant.

#include <span>
#include <vector>

#include "cocob/gradient.hpp"

namespace cocob {

struct BackpropBetState {
  double L = 0.0;       // running max |g|, starts at zero
  double G = 0.0;       // running sum of |g|
  double reward = 0.0;  // clipped net reward, always >= 0
  double theta = 0.0;   // running sum of g
  double w1 = 0.0;
  double w = 0.0;
  double alpha = 100.0; // denominator cap; first update is sgn(g)/alpha
};

// All accumulators zero, iterate at w1. alpha must be >= 2: below that the
// cap max(G+L, alpha L) never binds on the first step and the documented
// first-update identity fails.
std::vector<BackpropBetState> backprop_init(std::span<const double> w1, double alpha = 100.0);

// One update. Coordinates that have never seen a nonzero gradient (L == 0)
// are left untouched. The iterate is computed in the scale-invariant form
//   w1 + (theta/L) * (((L + reward)/L) / max(G/L + 1, alpha)),
// algebraically equal to w1 + theta (L+reward) / (L max(G+L, alpha L));
// the ratio form keeps the first-step identity w2 - w1 = sgn(g)/alpha exact
// in floating point. Throws InvalidGradient on non-finite entries.
void backprop_step(std::vector<BackpropBetState>& states, const GradientSample& g);

}  // namespace cocob
