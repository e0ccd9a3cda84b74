#include "cocob/coin_betting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cocob/error.hpp"

namespace cocob {

std::vector<CoordinateBetState> cocob_init(std::span<const double> w1,
                                           std::span<const double> L) {
  if (w1.size() != L.size())
    throw InvalidConfig("cocob_init: w1 has dimension " + std::to_string(w1.size()) +
                        " but L has " + std::to_string(L.size()));
  if (w1.empty()) throw InvalidConfig("cocob_init: empty parameter vector");
  std::vector<CoordinateBetState> states(w1.size());
  for (std::size_t i = 0; i < w1.size(); ++i) {
    if (!(L[i] > 0.0) || !std::isfinite(L[i]))
      throw InvalidConfig("cocob_init: L[" + std::to_string(i) + "] = " + std::to_string(L[i]) +
                          " must be positive and finite");
    states[i].L = L[i];
    states[i].G = L[i];
    states[i].reward = 0.0;
    states[i].theta = 0.0;
    states[i].w1 = w1[i];
    states[i].w = w1[i];
  }
  return states;
}

double bet_fraction(const CoordinateBetState& s) {
  return std::tanh(s.theta / (s.G + s.L)) / s.L;
}

double bet_iterate(const CoordinateBetState& s) {
  return s.w1 + std::tanh(s.theta / (s.G + s.L)) * ((s.L + s.reward) / s.L);
}

namespace {

void check_dim(const std::vector<CoordinateBetState>& states, const GradientSample& g) {
  if (g.size() != states.size())
    throw InvalidConfig("betting step: gradient dimension " + std::to_string(g.size()) +
                        " does not match state dimension " + std::to_string(states.size()));
}

void accumulate(CoordinateBetState& s, double outcome) {
  // Order matters: G, reward, theta fold in the new outcome while w still
  // holds the iterate the gradient was taken at.
  s.G += std::abs(outcome);
  s.reward += (s.w - s.w1) * outcome;
  s.theta += outcome;
}

}  // namespace

void cocob_step(std::vector<CoordinateBetState>& states, const GradientSample& g) {
  check_dim(states, g);
  check_finite(g);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double gi = g.outcome(i);
    if (std::abs(gi) > states[i].L)
      throw GradientRangeViolation(i, std::abs(gi), states[i].L);
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    accumulate(states[i], g.outcome(i));
    states[i].w = bet_iterate(states[i]);
  }
}

void cocob_step_clamped(std::vector<CoordinateBetState>& states, const GradientSample& g,
                        std::size_t* clamped) {
  check_dim(states, g);
  check_finite(g);
  std::size_t n_clamped = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    double gi = g.outcome(i);
    if (std::abs(gi) > states[i].L) {
      gi = std::copysign(states[i].L, gi);
      ++n_clamped;
    }
    accumulate(states[i], gi);
    states[i].w = bet_iterate(states[i]);
  }
  if (clamped) *clamped = n_clamped;
}

void kt_step(std::vector<CoordinateBetState>& states, const GradientSample& g,
             std::int64_t round) {
  if (round < 1) throw InvalidConfig("kt_step: round must be >= 1");
  check_dim(states, g);
  check_finite(g);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double gi = g.outcome(i);
    if (std::abs(gi) > states[i].L)
      throw GradientRangeViolation(i, std::abs(gi), states[i].L);
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto& s = states[i];
    accumulate(s, g.outcome(i));
    // Next bet is the KT fraction for round+1: theta / ((round+1) L).
    s.w = s.w1 + (s.theta / static_cast<double>(round + 1)) * ((s.L + s.reward) / s.L);
  }
}

double wealth(const CoordinateBetState& s) { return s.L + s.reward; }

double wealth_lower_bound(const CoordinateBetState& s) {
  const double quad = s.theta * s.theta / (2.0 * s.L * (s.G + s.L));
  return s.L * std::exp(quad - 0.5 * std::log(s.G / s.L));
}

double theorem1_bound(std::span<const double> w_star, std::span<const double> w1,
                      std::span<const double> L, std::span<const double> G_T,
                      double tau, std::int64_t T) {
  const std::size_t d = w_star.size();
  if (w1.size() != d || L.size() != d || G_T.size() != d)
    throw InvalidConfig("theorem1_bound: dimension mismatch");
  if (!(tau > 0.0)) throw InvalidConfig("theorem1_bound: tau must be positive");
  if (T < 1) throw InvalidConfig("theorem1_bound: T must be >= 1");
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (!(L[i] > 0.0)) throw InvalidConfig("theorem1_bound: L must be positive");
    const double dist = std::abs(w_star[i] - w1[i]);
    const double gl = G_T[i] + L[i];
    const double log_term = std::log1p(gl * gl * dist * dist / (L[i] * L[i]));
    total += L[i] + dist * std::sqrt(L[i] * gl * log_term);
  }
  return total / (tau * static_cast<double>(T));
}

std::pair<double, double> lemma1_check(double alpha, double beta, double y) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw InvalidConfig("lemma1_check: alpha and beta must be positive");
  const double ay = std::abs(y);
  const double closed = ay * std::sqrt(alpha * std::log1p(alpha * y * y / (beta * beta))) - beta;
  if (ay == 0.0) return {-beta, closed};  // maximum of -f at x = 0

  // The maximizer of x|y| - beta exp(x^2/2alpha) on x >= 0 satisfies
  // h(x) := (beta x / alpha) exp(x^2/2alpha) = |y|; h is strictly increasing.
  const auto h = [&](double x) { return beta * x / alpha * std::exp(x * x / (2.0 * alpha)); };
  double hi = 1.0;
  while (h(hi) < ay && std::isfinite(hi)) hi *= 2.0;
  double lo = 0.0;
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) < ay)
      lo = mid;
    else
      hi = mid;
  }
  const double x = 0.5 * (lo + hi);
  const double numeric = x * ay - beta * std::exp(x * x / (2.0 * alpha));
  return {numeric, closed};
}

bool lemma2_check(double a, double L, std::span<const double> gradient_prefix) {
  if (!(a >= 2.0)) throw InvalidConfig("lemma2_check: a must be >= 2");
  if (!(L > 0.0)) throw InvalidConfig("lemma2_check: L must be positive");
  if (gradient_prefix.empty()) throw InvalidConfig("lemma2_check: empty prefix");
  for (std::size_t j = 0; j < gradient_prefix.size(); ++j) {
    if (std::abs(gradient_prefix[j]) > L)
      throw GradientRangeViolation(j, std::abs(gradient_prefix[j]), L);
  }

  double G = L;
  double theta = 0.0;
  double S = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  for (std::size_t j = 0; j < gradient_prefix.size(); ++j) {
    const double g = gradient_prefix[j];
    const double G_prev = G;
    const double theta_prev = theta;
    const double S_prev = S;
    G += std::abs(g);
    theta += g;
    S += std::abs(g) / (a * G_prev);
    if (j + 1 == gradient_prefix.size()) {
      const double beta = std::tanh(2.0 * theta_prev / (a * (G_prev + L))) / L;
      lhs = (1.0 + beta * g) *
            std::exp(theta_prev * theta_prev / (a * L * G_prev) - S_prev);
      rhs = std::exp(theta * theta / (a * L * G) - S);
    }
  }
  return lhs >= rhs - 1e-12;
}

std::vector<double> effective_learning_rate(const Trajectory& traj, std::size_t coordinate) {
  if (traj.iterates.empty() || traj.iterates.size() != traj.gradients.size())
    throw InvalidConfig("effective_learning_rate: trajectory empty or inconsistent");
  if (coordinate >= traj.iterates.front().size())
    throw InvalidConfig("effective_learning_rate: coordinate " + std::to_string(coordinate) +
                        " out of range");
  std::vector<double> eta(traj.iterates.size());
  double sq_sum = 0.0;
  for (std::size_t t = 0; t < traj.iterates.size(); ++t) {
    const double g = traj.gradients[t][coordinate];
    sq_sum += g * g;
    eta[t] = traj.iterates[t][coordinate] * std::sqrt(sq_sum);
  }
  return eta;
}

}  // namespace cocob
