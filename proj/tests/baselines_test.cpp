#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cocob/baselines.hpp"
#include "cocob/error.hpp"
#include "cocob/rng.hpp"

using namespace cocob;

namespace {

GradientSample obj(std::vector<double> v) {
  return GradientSample{std::move(v), GradConvention::objective};
}

BaselineConfig make(BaselineKind kind, double lr) {
  BaselineConfig c;
  c.kind = kind;
  c.learning_rate = lr;
  return c;
}

}  // namespace

TEST_CASE("the tuning grid is the fixed 17-point list") {
  const auto grid = paper_lr_grid();
  REQUIRE(grid.size() == 17);
  CHECK(grid.front() == 0.00001);
  CHECK(grid.back() == 0.1);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}

TEST_CASE("sgd applies the plain update") {
  auto cfg = make(BaselineKind::sgd, 0.1);
  auto st = baseline_init(cfg, 1);
  std::vector<double> w{1.0};
  baseline_step(cfg, st, w, obj({2.0}));
  CHECK(w[0] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("adagrad accumulates squared gradients") {
  auto cfg = make(BaselineKind::adagrad, 0.1);
  auto st = baseline_init(cfg, 1);
  std::vector<double> w{0.0};
  baseline_step(cfg, st, w, obj({3.0}));
  CHECK(st.acc1[0] == 9.0);
  CHECK(w[0] == doctest::Approx(-0.1 * 3.0 / (3.0 + 1e-8)).epsilon(1e-15));
  CHECK(w[0] == doctest::Approx(-0.1).epsilon(1e-8));
}

TEST_CASE("adam's first step has magnitude close to the learning rate") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto cfg = make(BaselineKind::adam, 0.004);
    auto st = baseline_init(cfg, 1);
    std::vector<double> w{0.0};
    double g = rng.uniform(-5.0, 5.0);
    if (g == 0.0) g = 1.0;
    baseline_step(cfg, st, w, obj({g}));
    // bias-corrected m/sqrt(v) equals g/|g| on the first step
    CHECK(std::abs(w[0]) == doctest::Approx(0.004).epsilon(1e-6));
    CHECK(w[0] * g < 0.0);
  }
}

TEST_CASE("rmsprop uses an EMA of squared gradients") {
  auto cfg = make(BaselineKind::rmsprop, 0.01);
  auto st = baseline_init(cfg, 1);
  std::vector<double> w{0.0};
  baseline_step(cfg, st, w, obj({2.0}));
  CHECK(st.acc1[0] == doctest::Approx(0.1 * 4.0).epsilon(1e-15));
  CHECK(w[0] == doctest::Approx(-0.01 * 2.0 / (std::sqrt(0.4) + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adadelta moves against the gradient with unit-free steps") {
  auto cfg = make(BaselineKind::adadelta, 1.0);
  auto st = baseline_init(cfg, 1);
  std::vector<double> w{0.0};
  baseline_step(cfg, st, w, obj({1.0}));
  CHECK(w[0] < 0.0);
  CHECK(std::isfinite(w[0]));
  CHECK(st.acc2[0] > 0.0);
}

TEST_CASE("identical configuration and stream give bit-identical trajectories") {
  for (const auto kind : {BaselineKind::sgd, BaselineKind::adagrad, BaselineKind::rmsprop,
                          BaselineKind::adadelta, BaselineKind::adam}) {
    auto cfg = make(kind, 0.01);
    auto s1 = baseline_init(cfg, 2);
    auto s2 = baseline_init(cfg, 2);
    std::vector<double> w1{0.5, -0.5}, w2{0.5, -0.5};
    Rng a(99), b(99);
    for (int t = 0; t < 100; ++t) {
      baseline_step(cfg, s1, w1, obj({a.normal(), a.normal()}));
      baseline_step(cfg, s2, w2, obj({b.normal(), b.normal()}));
      CHECK(w1[0] == w2[0]);
      CHECK(w1[1] == w2[1]);
    }
  }
}

TEST_CASE("sgd contracts linearly on a quadratic") {
  // F(w) = s/2 (w - c)^2, gradient s (w - c): w_t - c = (1 - eta s)^t (w_0 - c)
  const double s = 1.0, c = 3.0, eta = 0.1, w0 = -1.0;
  auto cfg = make(BaselineKind::sgd, eta);
  auto st = baseline_init(cfg, 1);
  std::vector<double> w{w0};
  for (int t = 1; t <= 120; ++t) {
    baseline_step(cfg, st, w, obj({s * (w[0] - c)}));
    const double expected = c + std::pow(1.0 - eta * s, t) * (w0 - c);
    CHECK(w[0] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(std::abs(w[0] - c) < 1e-4);  // 0.9^120 * 4
}

TEST_CASE("adagrad and rmsprop move opposite the current gradient") {
  Rng rng(13);
  for (const auto kind : {BaselineKind::adagrad, BaselineKind::rmsprop}) {
    auto cfg = make(kind, 0.05);
    auto st = baseline_init(cfg, 3);
    std::vector<double> w{0.0, 1.0, -1.0};
    for (int t = 0; t < 200; ++t) {
      std::vector<double> g{rng.normal(), rng.normal(), rng.normal()};
      const auto before = w;
      baseline_step(cfg, st, w, obj(g));
      for (std::size_t i = 0; i < w.size(); ++i)
        if (g[i] != 0.0) CHECK((w[i] - before[i]) * g[i] < 0.0);
    }
  }
}

TEST_CASE("adam moves opposite the gradient while the stream keeps its sign") {
  Rng rng(17);
  auto cfg = make(BaselineKind::adam, 0.01);
  auto st = baseline_init(cfg, 2);
  std::vector<double> w{0.0, 0.0};
  for (int t = 0; t < 100; ++t) {
    std::vector<double> g{rng.uniform(0.1, 2.0), -rng.uniform(0.1, 2.0)};
    const auto before = w;
    baseline_step(cfg, st, w, obj(g));
    CHECK(w[0] < before[0]);
    CHECK(w[1] > before[1]);
  }
}

TEST_CASE("invalid configurations and gradients are rejected") {
  CHECK_THROWS_AS(baseline_init(make(BaselineKind::sgd, 0.0), 1), InvalidConfig);
  CHECK_THROWS_AS(baseline_init(make(BaselineKind::sgd, -0.1), 1), InvalidConfig);
  auto bad = make(BaselineKind::adam, 0.1);
  bad.adam_beta2 = 1.0;
  CHECK_THROWS_AS(baseline_init(bad, 1), InvalidConfig);
  auto bad_eps = make(BaselineKind::adagrad, 0.1);
  bad_eps.epsilon = 0.0;
  CHECK_THROWS_AS(baseline_init(bad_eps, 1), InvalidConfig);

  auto cfg = make(BaselineKind::sgd, 0.1);
  auto st = baseline_init(cfg, 1);
  std::vector<double> w{0.0};
  CHECK_THROWS_AS(baseline_step(cfg, st, w, obj({std::nan("")})), InvalidGradient);
  CHECK_THROWS_AS(baseline_step(cfg, st, w, obj({1.0, 2.0})), InvalidConfig);
}

TEST_CASE("kind from name round-trips") {
  for (const char* name : {"sgd", "adagrad", "rmsprop", "adadelta", "adam"})
    CHECK(baseline_name(baseline_kind_from_name(name)) == name);
  CHECK_THROWS_AS(baseline_kind_from_name("newton"), InvalidConfig);
}
