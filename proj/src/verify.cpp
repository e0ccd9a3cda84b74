#include "cocob/verify.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cocob/cocob_backprop.hpp"
#include "cocob/coin_betting.hpp"
#include "cocob/rng.hpp"
#include "cocob/small_net.hpp"

namespace cocob {

namespace {

std::string num(double v) { return std::to_string(v); }

bool close_mixed(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1.0});
}

GradientSample neg_sample(std::vector<double> values) {
  GradientSample g;
  g.convention = GradConvention::negative;
  g.values = std::move(values);
  return g;
}

CheckResult check_sigmoid_tanh_identity() {
  double worst = 0.0;
  for (int i = 0; i <= 2000000; ++i) {
    const double x = -50.0 + 100.0 * static_cast<double>(i) / 2000000.0;
    const double sig_form = 2.0 / (1.0 + std::exp(-2.0 * x)) - 1.0;
    worst = std::max(worst, std::abs(sig_form - std::tanh(x)));
  }
  return {"sigmoid-tanh identity", worst <= 1e-15, "max abs diff " + num(worst)};
}

CheckResult check_wealth_invariants(std::size_t streams) {
  Rng rng(0xaa11);
  double min_wealth = 1e300;
  double worst_gap = -1e300;  // max of (lower bound - wealth)
  for (std::size_t s = 0; s < streams; ++s) {
    const double L = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    auto states = cocob_init(std::vector<double>{rng.uniform(-2.0, 2.0)}, std::vector<double>{L});
    const auto len = static_cast<std::size_t>(rng.uniform_int(1, 100));
    for (std::size_t t = 0; t < len; ++t) {
      const double g = rng.uniform() < 0.3 ? (rng.uniform() < 0.5 ? -L : L)  // extreme coin
                                           : rng.uniform(-L, L);
      cocob_step(states, neg_sample({g}));
      const double w = wealth(states[0]);
      const double h = wealth_lower_bound(states[0]);
      min_wealth = std::min(min_wealth, w);
      worst_gap = std::max(worst_gap, h - w);
    }
  }
  const bool pass = min_wealth > 0.0 && worst_gap <= 1e-9;
  return {"wealth positivity and lower bound", pass,
          "min wealth " + num(min_wealth) + ", worst (H - wealth) " + num(worst_gap)};
}

CheckResult check_fraction_bound(std::size_t streams) {
  Rng rng(0xbb22);
  double worst = 0.0;
  for (std::size_t s = 0; s < streams; ++s) {
    const double L = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    auto states = cocob_init(std::vector<double>{0.0}, std::vector<double>{L});
    const auto len = static_cast<std::size_t>(rng.uniform_int(1, 60));
    for (std::size_t t = 0; t < len; ++t) {
      cocob_step(states, neg_sample({rng.uniform(-L, L)}));
      worst = std::max(worst, std::abs(bet_fraction(states[0])) * L);
    }
  }
  return {"betting fraction bound |beta| L < 1", worst < 1.0, "max |beta| L = " + num(worst)};
}

CheckResult check_cocob_scale_freeness(std::size_t streams) {
  Rng rng(0xcc33);
  double worst = 0.0;
  for (std::size_t s = 0; s < streams; ++s) {
    for (const double c : {1e-3, 1e3}) {
      const double L = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
      const double w1 = rng.uniform(-2.0, 2.0);
      auto base = cocob_init(std::vector<double>{w1}, std::vector<double>{L});
      auto scaled = cocob_init(std::vector<double>{w1}, std::vector<double>{c * L});
      const auto len = static_cast<std::size_t>(rng.uniform_int(1, 50));
      for (std::size_t t = 0; t < len; ++t) {
        const double g = rng.uniform(-L, L);
        cocob_step(base, neg_sample({g}));
        cocob_step(scaled, neg_sample({c * g}));
        worst = std::max(worst, std::abs(base[0].w - scaled[0].w) /
                                    std::max({std::abs(base[0].w), std::abs(scaled[0].w), 1.0}));
      }
    }
  }
  return {"cocob scale-freeness", worst <= 1e-12, "worst rel deviation " + num(worst)};
}

CheckResult check_backprop_scale_freeness(std::size_t streams) {
  Rng rng(0xdd44);
  double worst = 0.0;
  for (std::size_t s = 0; s < streams; ++s) {
    for (const double c : {1e-3, 1e3}) {
      const double w1 = rng.uniform(-2.0, 2.0);
      auto base = backprop_init(std::vector<double>{w1}, 100.0);
      auto scaled = backprop_init(std::vector<double>{w1}, 100.0);
      const auto len = static_cast<std::size_t>(rng.uniform_int(1, 50));
      for (std::size_t t = 0; t < len; ++t) {
        const double g = rng.uniform(-5.0, 5.0);
        backprop_step(base, neg_sample({g}));
        backprop_step(scaled, neg_sample({c * g}));
        worst = std::max(worst, std::abs(base[0].w - scaled[0].w) /
                                    std::max({std::abs(base[0].w), std::abs(scaled[0].w), 1.0}));
      }
    }
  }
  return {"cocob-backprop scale-freeness", worst <= 1e-12, "worst rel deviation " + num(worst)};
}

CheckResult check_backprop_first_step(std::size_t trials) {
  Rng rng(0xee55);
  for (std::size_t s = 0; s < trials; ++s) {
    const double w1 = rng.uniform(-5.0, 5.0);
    double g = rng.uniform(-10.0, 10.0);
    if (g == 0.0) g = 1.0;
    const double alpha = rng.uniform(2.0, 500.0);
    auto states = backprop_init(std::vector<double>{w1}, alpha);
    backprop_step(states, neg_sample({g}));
    const double expected = w1 + (g > 0 ? 1.0 : -1.0) / alpha;
    if (states[0].w != expected)
      return {"cocob-backprop first-step identity", false,
              "w2 = " + num(states[0].w) + " expected w1 + sgn(g)/alpha = " + num(expected)};
  }
  return {"cocob-backprop first-step identity", true, num(static_cast<double>(trials)) + " exact"};
}

CheckResult check_backprop_reward(std::size_t streams) {
  Rng rng(0xff66);
  double min_reward = 1e300;
  bool finite = true;
  for (std::size_t s = 0; s < streams; ++s) {
    auto states = backprop_init(std::vector<double>{rng.uniform(-3.0, 3.0)}, 100.0);
    const auto len = static_cast<std::size_t>(rng.uniform_int(1, 80));
    for (std::size_t t = 0; t < len; ++t) {
      // arbitrary scale drift, including decades of growth
      const double g = rng.normal(0.0, std::exp(rng.uniform(-3.0, 3.0)));
      backprop_step(states, neg_sample({g}));
      min_reward = std::min(min_reward, states[0].reward);
      finite = finite && std::isfinite(states[0].w);
    }
  }
  return {"cocob-backprop reward nonnegativity", min_reward >= 0.0 && finite,
          "min reward " + num(min_reward)};
}

CheckResult check_lemma1(std::size_t trials) {
  Rng rng(0x1177);
  double worst = -1e300;
  for (std::size_t s = 0; s < trials; ++s) {
    const double alpha = std::exp(rng.uniform(std::log(1e-2), std::log(1e2)));
    const double beta = std::exp(rng.uniform(std::log(1e-2), std::log(1e2)));
    const double y = rng.uniform(-50.0, 50.0);
    const auto [numeric, closed] = lemma1_check(alpha, beta, y);
    worst = std::max(worst, numeric - closed);
  }
  return {"lemma1 conjugate bound", worst <= 1e-8, "worst (numeric - closed) " + num(worst)};
}

CheckResult check_lemma2(std::size_t trials) {
  Rng rng(0x2288);
  for (std::size_t s = 0; s < trials; ++s) {
    const double L = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    const double a = rng.uniform() < 0.5 ? 2.0 : 3.0;
    const auto len = static_cast<std::size_t>(rng.uniform_int(1, 50));
    std::vector<double> prefix(len);
    for (auto& g : prefix) g = rng.uniform(-L, L);
    if (!lemma2_check(a, L, prefix))
      return {"lemma2 recurrence", false, "violated at trial " + std::to_string(s)};
  }
  return {"lemma2 recurrence", true, std::to_string(trials) + " prefixes"};
}

CheckResult check_net_gradient(std::size_t seeds) {
  double worst = 0.0;
  for (std::size_t seed = 1; seed <= seeds; ++seed) {
    DenseNet net = net_init({4, 8, 3}, seed);
    Rng rng(mix_seed(0x3399, seed));
    const std::size_t n = 5;
    std::vector<double> feats(n * 4);
    for (auto& v : feats) v = rng.normal();
    std::vector<int> labels(n);
    for (auto& y : labels) y = static_cast<int>(rng.uniform_int(0, 2));
    const BatchView batch{feats, labels, 4};

    ForwardCache cache;
    forward_loss(net, batch, &cache);
    const auto analytic = backward(net, cache);

    auto flat = net.flatten();
    const double h = 1e-5;
    for (int k = 0; k < 10; ++k) {
      const auto c = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(flat.size()) - 1));
      const double keep = flat[c];
      DenseNet probe = net;
      flat[c] = keep + h;
      probe.unflatten(flat);
      const double up = forward_loss(probe, batch);
      flat[c] = keep - h;
      probe.unflatten(flat);
      const double down = forward_loss(probe, batch);
      flat[c] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double rel = std::abs(numeric - analytic[c]) /
                         std::max({std::abs(numeric), std::abs(analytic[c]), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  return {"net gradient finite-difference check", worst <= 1e-4, "worst rel err " + num(worst)};
}

CheckResult check_golden_trace() {
  auto states = cocob_init(std::vector<double>{0.0}, std::vector<double>{1.0});
  const double w2_expect = std::tanh(1.0 / 3.0);
  const double w3_expect = std::tanh(0.5) * (1.0 + std::tanh(1.0 / 3.0));
  bool ok = states[0].w == 0.0;
  cocob_step(states, neg_sample({1.0}));  // negative subgradient of |x-10| left of 10
  ok = ok && close_mixed(states[0].w, w2_expect, 1e-12);
  cocob_step(states, neg_sample({1.0}));
  ok = ok && close_mixed(states[0].w, w3_expect, 1e-12);
  return {"golden trace |x-10|", ok,
          "w2 " + num(states[0].w) + " vs tanh(0.5)(1+tanh(1/3)) " + num(w3_expect)};
}

}  // namespace

std::vector<CheckResult> verification_suite(bool quick) {
  const std::size_t big = quick ? 1000 : 10000;
  const std::size_t mid = quick ? 100 : 1000;
  std::vector<CheckResult> results;
  results.push_back(check_golden_trace());
  results.push_back(check_sigmoid_tanh_identity());
  results.push_back(check_fraction_bound(mid));
  results.push_back(check_wealth_invariants(big));
  results.push_back(check_cocob_scale_freeness(100));
  results.push_back(check_backprop_scale_freeness(100));
  results.push_back(check_backprop_first_step(100));
  results.push_back(check_backprop_reward(big));
  results.push_back(check_lemma1(mid));
  results.push_back(check_lemma2(big));
  results.push_back(check_net_gradient(5));
  return results;
}

}  // namespace cocob
