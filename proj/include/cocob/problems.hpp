#pragma once

// Objective suite: evaluators, subgradient oracles, known optima, gradient
// range metadata and quasi-convexity constants. Problems are immutable
// after construction; oracles are pure functions of (point, query tag), so
// concurrent evaluation is safe.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cocob/gradient.hpp"

namespace cocob {

// Identifies one oracle query deterministically: `seed` is the run-level
// stream seed, `step` the 0-based query index. Stochastic problems hash
// both; epoch-based problems derive (epoch, position) from `step`.
struct QueryTag {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

struct Problem {
  std::string name;
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> evaluate;
  std::function<GradientSample(std::span<const double>, const QueryTag&)> subgradient;
  std::optional<std::vector<double>> optimum;   // w*
  std::optional<double> optimum_value;          // F(w*)
  std::optional<std::vector<double>> lipschitz; // per-coordinate bound on |grad|
  std::optional<double> tau;                    // weak quasi-convexity constant
  bool convex = false;
  bool stochastic = false;      // subgradient depends on the query tag
  std::vector<double> initial;  // default starting iterate
  std::size_t queries_per_epoch = 0;  // 0 when iteration-based
};

// F(x) = |x - target|. Subgradient sgn(x - target), 0 at the kink (a valid
// choice, and the fixed point, so optimizers halt cleanly there). L = 1.
Problem abs_shift_problem(double target);

struct Box {
  std::vector<double> lo, hi;
};

// F(w) = 1/2 sum_i s_i (w_i - c_i)^2 with exact gradient. L_i is s_i times
// the largest distance from c_i to the box edge. Starting point defaults to
// halfway between the center and the upper box edge.
Problem quadratic_problem(std::vector<double> center, std::vector<double> scales,
                          Box domain, std::optional<std::vector<double>> start = {});

// Synthetic binary logistic regression: features N(0,1), labels from a
// random linear rule with Bernoulli(noise) flips. Mean logistic loss, exact
// full-batch gradient when minibatch == 0, otherwise seeded sampling with
// replacement. The optimum is computed at construction by full-batch
// gradient descent to |grad| <= 1e-10 and cached.
Problem logistic_problem(std::size_t n, std::size_t dim, std::uint64_t seed, double noise,
                         std::size_t minibatch = 0);

// F(x) = x^2/(1+x^2) on [-1, 1]: 1-weakly-quasi-convex on that box but not
// convex there. Gradient magnitude is globally bounded by 3 sqrt(3)/8.
Problem wqc_problem();

// Adds zero-mean uniform noise to each gradient coordinate, truncated
// symmetrically to min(sigma, L_i - |g_i|) so the range metadata stays
// valid. Requires lipschitz metadata on the base problem.
Problem noisy_wrapper(Problem base, double sigma, std::uint64_t seed);

// Registry lookup: "abs10", "quad", "logreg", "wqc", "mlp-blobs", each
// optionally suffixed with "-noisy:<sigma>". Data-defined problems fold
// `seed` into their dataset generation.
Problem make_problem(std::string_view name, std::uint64_t seed);

std::vector<std::string> problem_names();

}  // namespace cocob
