#pragma once

// Continuous coin betting subgradient descent (COCOB) with a known
// per-coordinate gradient range, plus the KT reference bettor and
// executable forms of the convergence guarantee: the final-wealth lower
// bound, the suboptimality certificate, and the two supporting lemmas
// checked numerically.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cocob/gradient.hpp"

namespace cocob {

// Per-coordinate betting ledger. The coordinate plays a translated game
// anchored at w1: the bet in round t is w_t - w1, the initial endowment is
// L, and the iterate is always recomputed from the aggregates (dual
// averaging), never from the previous iterate.
struct CoordinateBetState {
  double L = 1.0;      // gradient magnitude bound, doubles as initial endowment
  double G = 1.0;      // L + sum of |g| seen so far
  double reward = 0.0; // sum of (w_t - w1) * g_t
  double theta = 0.0;  // sum of g_t
  double w1 = 0.0;     // anchor of the translated game
  double w = 0.0;      // current iterate
};

// G starts at L, reward/theta at zero, iterate at w1. Throws InvalidConfig
// on dimension mismatch or nonpositive L.
std::vector<CoordinateBetState> cocob_init(std::span<const double> w1,
                                           std::span<const double> L);

// Betting fraction tanh(theta/(G+L))/L. Equals (2*sigmoid(2x)-1)/L with
// x = theta/(G+L); the tanh form avoids the cancellation near saturation.
double bet_fraction(const CoordinateBetState& s);

// Iterate as a pure function of the aggregates:
//   w1 + tanh(theta/(G+L)) * (L + reward)/L.
double bet_iterate(const CoordinateBetState& s);

// One betting round: fold g into G/reward/theta (reward uses the pre-step
// iterate), then recompute w. g is converted to the coin-outcome sign
// internally. Throws GradientRangeViolation when any |g_i| > L_i and
// InvalidGradient on non-finite entries.
void cocob_step(std::vector<CoordinateBetState>& states, const GradientSample& g);

// Exploratory variant: out-of-range coordinates are clamped to [-L, L]
// instead of refused, and the number of clamped coordinates is reported.
// The wealth guarantee no longer applies to such runs.
void cocob_step_clamped(std::vector<CoordinateBetState>& states, const GradientSample& g,
                        std::size_t* clamped = nullptr);

// KT reference bettor: identical accumulators, but the next bet is
// theta/((round+1) * L) -- normalized by time instead of gradient mass.
// `round` is the 1-based index of the round being consumed.
void kt_step(std::vector<CoordinateBetState>& states, const GradientSample& g,
             std::int64_t round);

// Current money: endowment plus net reward.
double wealth(const CoordinateBetState& s);

// Closed-form lower bound on the wealth,
//   H = L * exp(theta^2 / (2 L (G+L)) - ln(G/L)/2).
// Valid for any state produced by cocob_step with in-range gradients.
double wealth_lower_bound(const CoordinateBetState& s);

// Suboptimality certificate for a finished run.
struct BoundCertificate {
  double rhs = 0.0;          // evaluated bound
  double observed_gap = 0.0; // F(selected iterate) - F(w*)
  double tau = 1.0;          // weak quasi-convexity constant used
  std::int64_t T = 1;        // iteration count
};

// Deterministic instantiation of the convergence bound:
//   sum_i [ L_i + |w*_i - w1_i| sqrt( L_i (G_i+L_i) ln(1 + (G_i+L_i)^2 (w*_i-w1_i)^2 / L_i^2) ) ]
//   / (tau * T)
// with G taken from the finished run's states.
double theorem1_bound(std::span<const double> w_star, std::span<const double> w1,
                      std::span<const double> L, std::span<const double> G_T,
                      double tau, std::int64_t T);

// Fenchel conjugate check for f(x) = beta exp(x^2 / (2 alpha)). Returns
// {numeric f*(y), closed-form bound |y| sqrt(alpha ln(alpha y^2/beta^2 + 1)) - beta}.
// The numeric value maximizes x*y - f(x) by bisection on the stationarity
// condition; it never exceeds the closed form beyond FP noise.
std::pair<double, double> lemma1_check(double alpha, double beta, double y);

// Per-round potential recurrence behind the wealth bound: replays the
// betting accumulators over the prefix and verifies at the final round t
// (writing S_t = sum_{j<=t} |g_j| / (a G_{j-1}), beta_t the round-t bet)
//   (1 + beta_t g_t) exp(theta_{t-1}^2/(a L G_{t-1}) - S_{t-1})
//     >= exp(theta_t^2/(a L G_t) - S_t)
// within additive slack 1e-12. Requires a >= 2 and |g_j| <= L.
bool lemma2_check(double a, double L, std::span<const double> gradient_prefix);

// Iterate/gradient history of one run; iterates[t] is the point the
// gradient gradients[t] was queried at.
struct Trajectory {
  std::vector<std::vector<double>> iterates;
  std::vector<std::vector<double>> gradients;
};

// Diagnostic: the step size an accumulated-squared-gradient method would
// have needed to produce the same iterates, eta_t = w_t sqrt(sum_{j<=t} g_j^2).
std::vector<double> effective_learning_rate(const Trajectory& traj, std::size_t coordinate);

}  // namespace cocob
