#include "cocob/problems.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <memory>
#include <string>

#include "cocob/error.hpp"
#include "cocob/rng.hpp"
#include "cocob/small_net.hpp"

namespace cocob {

namespace {

double sigmoid_neg(double m) {
  // sigma(-m) = 1/(1+e^m), computed without overflow on either side.
  if (m >= 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

double log1p_exp_neg(double m) {
  // ln(1 + e^{-m})
  if (m >= 0.0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

}  // namespace

Problem abs_shift_problem(double target) {
  Problem p;
  p.name = "abs" + std::to_string(static_cast<long long>(target));
  p.dim = 1;
  p.evaluate = [target](std::span<const double> w) { return std::abs(w[0] - target); };
  p.subgradient = [target](std::span<const double> w, const QueryTag&) {
    GradientSample g;
    g.convention = GradConvention::objective;
    g.values = {w[0] == target ? 0.0 : std::copysign(1.0, w[0] - target)};
    return g;
  };
  p.optimum = std::vector<double>{target};
  p.optimum_value = 0.0;
  p.lipschitz = std::vector<double>{1.0};
  p.tau = 1.0;
  p.convex = true;
  p.initial = {0.0};
  return p;
}

Problem quadratic_problem(std::vector<double> center, std::vector<double> scales,
                          Box domain, std::optional<std::vector<double>> start) {
  const std::size_t d = center.size();
  if (d == 0 || scales.size() != d || domain.lo.size() != d || domain.hi.size() != d)
    throw InvalidConfig("quadratic_problem: dimension mismatch");
  std::vector<double> L(d), initial(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!(scales[i] > 0.0)) throw InvalidConfig("quadratic_problem: scales must be positive");
    if (!(domain.lo[i] < domain.hi[i])) throw InvalidConfig("quadratic_problem: degenerate box");
    if (center[i] < domain.lo[i] || center[i] > domain.hi[i])
      throw InvalidConfig("quadratic_problem: center outside the box");
    L[i] = scales[i] * std::max(domain.hi[i] - center[i], center[i] - domain.lo[i]);
    initial[i] = center[i] + 0.5 * (domain.hi[i] - center[i]);
  }
  if (start) {
    if (start->size() != d) throw InvalidConfig("quadratic_problem: start dimension mismatch");
    initial = *start;
  }

  Problem p;
  p.name = "quad";
  p.dim = d;
  auto c = std::make_shared<std::vector<double>>(std::move(center));
  auto s = std::make_shared<std::vector<double>>(std::move(scales));
  p.evaluate = [c, s](std::span<const double> w) {
    double v = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double dlt = w[i] - (*c)[i];
      v += 0.5 * (*s)[i] * dlt * dlt;
    }
    return v;
  };
  p.subgradient = [c, s](std::span<const double> w, const QueryTag&) {
    GradientSample g;
    g.convention = GradConvention::objective;
    g.values.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) g.values[i] = (*s)[i] * (w[i] - (*c)[i]);
    return g;
  };
  p.optimum = *c;
  p.optimum_value = 0.0;
  p.lipschitz = std::move(L);
  p.tau = 1.0;
  p.convex = true;
  p.initial = std::move(initial);
  return p;
}

namespace {

struct LogregData {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> x;  // row-major n x dim
  std::vector<double> y;  // +-1

  double loss(std::span<const double> w) const {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dot += x[j * dim + i] * w[i];
      total += log1p_exp_neg(y[j] * dot);
    }
    return total / static_cast<double>(n);
  }

  void add_sample_grad(std::span<const double> w, std::size_t j, double weight,
                       std::vector<double>& out) const {
    double dot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) dot += x[j * dim + i] * w[i];
    const double coef = -y[j] * sigmoid_neg(y[j] * dot) * weight;
    for (std::size_t i = 0; i < dim; ++i) out[i] += coef * x[j * dim + i];
  }

  std::vector<double> full_grad(std::span<const double> w) const {
    std::vector<double> g(dim, 0.0);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) add_sample_grad(w, j, inv, g);
    return g;
  }
};

std::vector<double> solve_logreg_optimum(const LogregData& data) {
  // Plain full-batch gradient descent with the conservative smoothness
  // step 4n / sum ||x_j||^2; deterministic, converges linearly once the
  // flipped labels make the data non-separable.
  double trace = 0.0;
  for (double v : data.x) trace += v * v;
  const double step = 4.0 * static_cast<double>(data.n) / trace;
  std::vector<double> w(data.dim, 0.0);
  const std::size_t max_iters = 2'000'000;
  for (std::size_t it = 0; it < max_iters; ++it) {
    const auto g = data.full_grad(w);
    double norm_sq = 0.0;
    for (double v : g) norm_sq += v * v;
    if (std::sqrt(norm_sq) <= 1e-10) return w;
    for (std::size_t i = 0; i < data.dim; ++i) w[i] -= step * g[i];
  }
  throw InvalidConfig(
      "logistic_problem: inner solve did not reach |grad| <= 1e-10; "
      "the instance is likely separable (increase noise or n)");
}

}  // namespace

Problem logistic_problem(std::size_t n, std::size_t dim, std::uint64_t seed, double noise,
                         std::size_t minibatch) {
  if (n < 1 || dim < 1) throw InvalidConfig("logistic_problem: n and dim must be >= 1");
  if (noise < 0.0 || noise > 1.0) throw InvalidConfig("logistic_problem: noise must be in [0,1]");

  auto data = std::make_shared<LogregData>();
  data->n = n;
  data->dim = dim;
  data->x.resize(n * dim);
  data->y.resize(n);
  Rng rng(mix_seed(seed, 0x1a6fULL));
  std::vector<double> truth(dim);
  for (auto& t : truth) t = rng.normal();
  for (std::size_t j = 0; j < n; ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      data->x[j * dim + i] = rng.normal();
      dot += data->x[j * dim + i] * truth[i];
    }
    data->y[j] = dot >= 0.0 ? 1.0 : -1.0;
    if (rng.uniform() < noise) data->y[j] = -data->y[j];
  }

  std::vector<double> L(dim, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < dim; ++i)
      L[i] = std::max(L[i], std::abs(data->x[j * dim + i]));

  auto opt = solve_logreg_optimum(*data);

  Problem p;
  p.name = minibatch == 0 ? "logreg" : "logreg-mb" + std::to_string(minibatch);
  p.dim = dim;
  p.evaluate = [data](std::span<const double> w) { return data->loss(w); };
  if (minibatch == 0) {
    p.subgradient = [data](std::span<const double> w, const QueryTag&) {
      GradientSample g;
      g.convention = GradConvention::objective;
      g.values = data->full_grad(w);
      return g;
    };
    p.stochastic = false;
  } else {
    const std::uint64_t oracle_seed = mix_seed(seed, 0xb47cULL);
    p.subgradient = [data, minibatch, oracle_seed](std::span<const double> w,
                                                   const QueryTag& tag) {
      Rng draw(mix_seed(oracle_seed, tag.seed, tag.step));
      GradientSample g;
      g.convention = GradConvention::objective;
      g.values.assign(data->dim, 0.0);
      const double weight = 1.0 / static_cast<double>(minibatch);
      for (std::size_t k = 0; k < minibatch; ++k) {
        const auto j = static_cast<std::size_t>(
            draw.uniform_int(0, static_cast<std::int64_t>(data->n) - 1));
        data->add_sample_grad(w, j, weight, g.values);
      }
      return g;
    };
    p.stochastic = true;
  }
  p.optimum_value = data->loss(opt);
  p.optimum = std::move(opt);
  p.lipschitz = std::move(L);
  p.tau = 1.0;
  p.convex = true;
  p.initial.assign(dim, 0.0);
  return p;
}

Problem wqc_problem() {
  Problem p;
  p.name = "wqc";
  p.dim = 1;
  p.evaluate = [](std::span<const double> w) {
    const double x = w[0];
    return x * x / (1.0 + x * x);
  };
  p.subgradient = [](std::span<const double> w, const QueryTag&) {
    const double x = w[0];
    const double den = 1.0 + x * x;
    GradientSample g;
    g.convention = GradConvention::objective;
    g.values = {2.0 * x / (den * den)};
    return g;
  };
  p.optimum = std::vector<double>{0.0};
  p.optimum_value = 0.0;
  // |F'| peaks at x = 1/sqrt(3), globally, with value 3 sqrt(3) / 8.
  p.lipschitz = std::vector<double>{3.0 * std::sqrt(3.0) / 8.0};
  p.tau = 1.0;  // on the box [-1, 1]
  p.convex = false;
  p.initial = {-0.9};
  return p;
}

Problem noisy_wrapper(Problem base, double sigma, std::uint64_t seed) {
  if (!base.lipschitz)
    throw InvalidConfig("noisy_wrapper: base problem has no gradient range metadata");
  if (!(sigma >= 0.0)) throw InvalidConfig("noisy_wrapper: sigma must be nonnegative");

  Problem p = base;
  p.name = base.name + "-noisy:" + std::to_string(sigma);
  p.stochastic = sigma > 0.0 || base.stochastic;
  auto inner = std::make_shared<Problem>(std::move(base));
  const std::uint64_t wrapper_seed = mix_seed(seed, 0x401eULL);
  p.subgradient = [inner, sigma, wrapper_seed](std::span<const double> w, const QueryTag& tag) {
    GradientSample g = inner->subgradient(w, tag);
    Rng noise(mix_seed(wrapper_seed, tag.seed, tag.step));
    const auto& L = *inner->lipschitz;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      const double headroom = std::max(L[i] - std::abs(g.values[i]), 0.0);
      const double m = std::min(sigma, headroom);
      g.values[i] += noise.uniform(-m, m);
    }
    return g;
  };
  return p;
}

Problem make_problem(std::string_view name, std::uint64_t seed) {
  std::string base(name);
  std::optional<double> noisy_sigma;
  if (const auto pos = base.rfind("-noisy:"); pos != std::string::npos) {
    const std::string sigma_str = base.substr(pos + 7);
    double sigma = 0.0;
    const auto res = std::from_chars(sigma_str.data(), sigma_str.data() + sigma_str.size(), sigma);
    if (res.ec != std::errc() || res.ptr != sigma_str.data() + sigma_str.size())
      throw InvalidConfig("make_problem: bad noise suffix in '" + base + "'");
    noisy_sigma = sigma;
    base = base.substr(0, pos);
  }

  Problem p;
  if (base == "abs10") {
    p = abs_shift_problem(10.0);
  } else if (base == "quad") {
    const std::size_t d = 5;
    p = quadratic_problem(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0),
                          Box{std::vector<double>(d, -10.0), std::vector<double>(d, 10.0)},
                          std::vector<double>(d, 5.0));
  } else if (base == "logreg") {
    p = logistic_problem(200, 10, seed, 0.1);
  } else if (base == "wqc") {
    p = wqc_problem();
  } else if (base == "mlp-blobs") {
    p = mlp_blobs_problem(MlpBlobsSpec{}, seed);
  } else {
    throw InvalidConfig("unknown problem: '" + std::string(name) + "'");
  }
  if (noisy_sigma) p = noisy_wrapper(std::move(p), *noisy_sigma, seed);
  return p;
}

std::vector<std::string> problem_names() {
  return {"abs10", "quad", "logreg", "wqc", "mlp-blobs"};
}

}  // namespace cocob
