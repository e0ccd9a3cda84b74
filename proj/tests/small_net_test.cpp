#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "cocob/error.hpp"
#include "cocob/rng.hpp"
#include "cocob/small_net.hpp"
#include "oracles.hpp"

using namespace cocob;

namespace {

BatchView view(const std::vector<double>& feats, const std::vector<int>& labels,
               std::size_t dim) {
  return BatchView{feats, labels, dim};
}

}  // namespace

TEST_CASE("net_init shapes, bias constant and determinism") {
  const auto net = net_init({4, 8, 3}, 1);
  CHECK(net.parameter_count() == 4 * 8 + 8 + 8 * 3 + 3);
  for (const auto& b : net.biases)
    for (double v : b) CHECK(v == 0.1);
  for (const auto& w : net.weights)
    for (double v : w) CHECK(std::abs(v) <= 0.2);  // 2 sigma truncation at std 0.1

  const auto again = net_init({4, 8, 3}, 1);
  CHECK(net.flatten() == again.flatten());
  const auto other = net_init({4, 8, 3}, 2);
  CHECK(net.flatten() != other.flatten());

  CHECK_THROWS_AS(net_init({4}, 1), InvalidConfig);
  CHECK_THROWS_AS(net_init({4, 0, 3}, 1), InvalidConfig);
}

TEST_CASE("flatten/unflatten round-trips exactly") {
  auto net = net_init({5, 7, 2}, 3);
  const auto flat = net.flatten();
  REQUIRE(flat.size() == net.parameter_count());
  auto copy = net;
  copy.unflatten(flat);
  CHECK(copy.flatten() == flat);
  CHECK(copy.revision == net.revision + 1);

  std::vector<double> wrong(flat.size() + 1, 0.0);
  CHECK_THROWS_AS(net.unflatten(wrong), InvalidConfig);
}

TEST_CASE("forward pass: uniform softmax at zero parameters, simplex rows") {
  auto net = net_init({4, 8, 3}, 1);
  net.unflatten(std::vector<double>(net.parameter_count(), 0.0));
  Rng rng(5);
  std::vector<double> feats(6 * 4);
  for (auto& v : feats) v = rng.normal();
  std::vector<int> labels{0, 1, 2, 0, 1, 2};

  ForwardCache cache;
  const double loss = forward_loss(net, view(feats, labels, 4), &cache);
  CHECK(loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  for (std::size_t j = 0; j < 6; ++j) {
    double row = 0.0;
    for (std::size_t k = 0; k < 3; ++k) row += cache.probs[j * 3 + k];
    CHECK(std::abs(row - 1.0) <= 1e-12);
  }
  CHECK(loss >= 0.0);
}

TEST_CASE("a saturated correct logit drives the loss to zero") {
  DenseNet net;
  net.layer_sizes = {2, 2};
  net.weights = {{50.0, 0.0, 0.0, 0.0}};  // logit_0 = 50 x_0
  net.biases = {{0.0, 0.0}};
  const std::vector<double> feats{1.0, 0.0};
  const std::vector<int> labels{0};
  CHECK(forward_loss(net, view(feats, labels, 2)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("forward pass rejects bad shapes and labels") {
  auto net = net_init({4, 8, 3}, 1);
  std::vector<double> feats(2 * 4, 0.0);
  CHECK_THROWS_AS(forward_loss(net, view(feats, {0, 3}, 4)), InvalidConfig);
  CHECK_THROWS_AS(forward_loss(net, view(feats, {0, -1}, 4)), InvalidConfig);
  std::vector<double> bad_dim(2 * 3, 0.0);
  CHECK_THROWS_AS(forward_loss(net, view(bad_dim, {0, 1}, 3)), InvalidConfig);
}

TEST_CASE("backward matches central finite differences") {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto net = net_init({4, 8, 3}, seed);
    Rng rng(mix_seed(100, seed));
    std::vector<double> feats(5 * 4);
    for (auto& v : feats) v = rng.normal();
    std::vector<int> labels(5);
    for (auto& y : labels) y = static_cast<int>(rng.uniform_int(0, 2));
    const auto batch = view(feats, labels, 4);

    ForwardCache cache;
    forward_loss(net, batch, &cache);
    const auto analytic = backward(net, cache);

    auto flat = net.flatten();
    const auto loss_at = [&](std::span<const double> p) {
      DenseNet probe = net;
      probe.unflatten(p);
      return forward_loss(probe, batch);
    };
    for (int k = 0; k < 10; ++k) {
      const auto c = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(flat.size()) - 1));
      const double fd = oracles::central_diff(loss_at, flat, c, 1e-5);
      const double rel =
          std::abs(fd - analytic[c]) / std::max({std::abs(fd), std::abs(analytic[c]), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("dead ReLUs block the signal to hidden weights") {
  auto net = net_init({4, 8, 3}, 1);
  net.unflatten(std::vector<double>(net.parameter_count(), 0.0));
  const std::vector<double> feats(3 * 4, 0.0);
  const std::vector<int> labels{0, 1, 2};
  ForwardCache cache;
  forward_loss(net, view(feats, labels, 4), &cache);
  const auto grad = backward(net, cache);
  // first-layer weights see zero input, output weights see zero activations
  for (std::size_t i = 0; i < 4 * 8; ++i) CHECK(grad[i] == 0.0);
  for (std::size_t i = 4 * 8 + 8; i < 4 * 8 + 8 + 8 * 3; ++i) CHECK(grad[i] == 0.0);
  // output bias gradient is p - onehot averaged: nonzero
  double bias_norm = 0.0;
  for (std::size_t i = grad.size() - 3; i < grad.size(); ++i) bias_norm += std::abs(grad[i]);
  CHECK(bias_norm > 0.0);
}

TEST_CASE("softmax bias gradient for one sample is p minus onehot") {
  auto net = net_init({2, 3}, 4);  // single affine layer into softmax
  Rng rng(9);
  const std::vector<double> feats{rng.normal(), rng.normal()};
  const std::vector<int> labels{1};
  ForwardCache cache;
  forward_loss(net, view(feats, labels, 2), &cache);
  const auto grad = backward(net, cache);
  for (std::size_t k = 0; k < 3; ++k) {
    const double expected = cache.probs[k] - (k == 1 ? 1.0 : 0.0);
    CHECK(grad[2 * 3 + k] == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("backward rejects a stale cache") {
  auto net = net_init({4, 8, 3}, 1);
  std::vector<double> feats(2 * 4, 0.5);
  const std::vector<int> labels{0, 2};
  ForwardCache cache;
  forward_loss(net, view(feats, labels, 4), &cache);
  net.unflatten(net.flatten());  // bumps the revision
  CHECK_THROWS_AS(backward(net, cache), InvalidConfig);
}

TEST_CASE("loss is invariant to batch order") {
  auto net = net_init({4, 8, 3}, 2);
  Rng rng(21);
  const std::size_t n = 16;
  std::vector<double> feats(n * 4);
  for (auto& v : feats) v = rng.normal();
  std::vector<int> labels(n);
  for (auto& y : labels) y = static_cast<int>(rng.uniform_int(0, 2));

  const double base = forward_loss(net, view(feats, labels, 4));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(perm);
  std::vector<double> feats2(n * 4);
  std::vector<int> labels2(n);
  for (std::size_t j = 0; j < n; ++j) {
    labels2[j] = labels[perm[j]];
    std::copy_n(feats.begin() + static_cast<std::ptrdiff_t>(perm[j] * 4), 4,
                feats2.begin() + static_cast<std::ptrdiff_t>(j * 4));
  }
  CHECK(forward_loss(net, view(feats2, labels2, 4)) ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("blobs dataset: counts, determinism, wide separation is trivial") {
  const auto ds = blobs_dataset(3, 100, 6, 50.0, 7);
  REQUIRE(ds.size() == 300);
  std::vector<int> counts(3, 0);
  for (int y : ds.labels) counts[static_cast<std::size_t>(y)]++;
  for (int c : counts) CHECK(c == 100);

  const auto same = blobs_dataset(3, 100, 6, 50.0, 7);
  CHECK(ds.features == same.features);

  // nearest-centroid classifier on per-class means: perfect at separation 50
  std::vector<std::vector<double>> mean(3, std::vector<double>(6, 0.0));
  for (std::size_t j = 0; j < ds.size(); ++j)
    for (std::size_t i = 0; i < 6; ++i)
      mean[static_cast<std::size_t>(ds.labels[j])][i] += ds.features[j * 6 + i] / 100.0;
  std::size_t correct = 0;
  for (std::size_t j = 0; j < ds.size(); ++j) {
    double best = 1e300;
    int arg = -1;
    for (int c = 0; c < 3; ++c) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < 6; ++i) {
        const double d = ds.features[j * 6 + i] - mean[static_cast<std::size_t>(c)][i];
        d2 += d * d;
      }
      if (d2 < best) {
        best = d2;
        arg = c;
      }
    }
    if (arg == ds.labels[j]) ++correct;
  }
  CHECK(correct == ds.size());

  CHECK_THROWS_AS(blobs_dataset(3, 100, 6, 0.0, 7), InvalidConfig);
  CHECK_THROWS_AS(blobs_dataset(0, 100, 6, 1.0, 7), InvalidConfig);
}

TEST_CASE("mlp-blobs problem wiring") {
  MlpBlobsSpec spec;
  spec.classes = 3;
  spec.per_class = 20;
  spec.dim = 4;
  spec.separation = 3.0;
  spec.hidden = {10};
  spec.batch = 16;
  const auto p = mlp_blobs_problem(spec, 11);
  CHECK(p.dim == 4 * 10 + 10 + 10 * 3 + 3);
  CHECK(p.queries_per_epoch == (60 + 15) / 16);  // ceil(60/16) = 4
  CHECK(p.stochastic);
  CHECK(p.initial.size() == p.dim);

  SUBCASE("oracle is a pure function of (w, tag)") {
    const auto g1 = p.subgradient(p.initial, QueryTag{3, 5}).values;
    const auto g2 = p.subgradient(p.initial, QueryTag{3, 5}).values;
    const auto g3 = p.subgradient(p.initial, QueryTag{3, 6}).values;
    CHECK(g1 == g2);
    CHECK(g1 != g3);
  }
  SUBCASE("an epoch of minibatch gradients averages to the full-batch gradient") {
    // equal-size batches (60 = 4 x 15 with batch 15): the mean over one
    // epoch equals the full gradient at the same point
    MlpBlobsSpec even = spec;
    even.batch = 15;
    const auto q = mlp_blobs_problem(even, 11);
    std::vector<double> sum(q.dim, 0.0);
    for (std::uint64_t pos = 0; pos < q.queries_per_epoch; ++pos) {
      const auto g = q.subgradient(q.initial, QueryTag{1, pos}).values;
      for (std::size_t i = 0; i < q.dim; ++i) sum[i] += g[i];
    }
    // full-batch gradient via a batch the size of the dataset
    MlpBlobsSpec full = spec;
    full.batch = 60;
    const auto fp = mlp_blobs_problem(full, 11);
    const auto fg = fp.subgradient(fp.initial, QueryTag{1, 0}).values;
    for (std::size_t i = 0; i < q.dim; ++i)
      CHECK(std::abs(sum[i] / 4.0 - fg[i]) <= 1e-12 * std::max(1.0, std::abs(fg[i])));
  }
}
