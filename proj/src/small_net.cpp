#include "cocob/small_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

#include "cocob/error.hpp"
#include "cocob/rng.hpp"

namespace cocob {

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    n += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  return n;
}

std::vector<double> DenseNet::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.insert(flat.end(), weights[l].begin(), weights[l].end());
    flat.insert(flat.end(), biases[l].begin(), biases[l].end());
  }
  return flat;
}

void DenseNet::unflatten(std::span<const double> flat) {
  if (flat.size() != parameter_count())
    throw InvalidConfig("unflatten: got " + std::to_string(flat.size()) + " parameters, expected " +
                        std::to_string(parameter_count()));
  std::size_t o = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(o), weights[l].size(),
                weights[l].begin());
    o += weights[l].size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(o), biases[l].size(),
                biases[l].begin());
    o += biases[l].size();
  }
  ++revision;
}

DenseNet net_init(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw InvalidConfig("net_init: need at least input and output sizes");
  for (std::size_t s : layer_sizes)
    if (s == 0) throw InvalidConfig("net_init: zero-width layer");
  DenseNet net;
  net.layer_sizes = std::move(layer_sizes);
  Rng rng(mix_seed(seed, 0x9e7ULL));
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    const std::size_t n_in = net.layer_sizes[l];
    const std::size_t n_out = net.layer_sizes[l + 1];
    std::vector<double> w(n_in * n_out);
    for (auto& v : w) v = rng.truncated_normal(0.1, 2.0);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(n_out, 0.1);
  }
  return net;
}

double forward_loss(const DenseNet& net, const BatchView& batch, ForwardCache* cache) {
  if (batch.dim != net.layer_sizes.front())
    throw InvalidConfig("forward_loss: feature dimension " + std::to_string(batch.dim) +
                        " does not match input layer " + std::to_string(net.layer_sizes.front()));
  const std::size_t n = batch.size();
  if (n == 0 || batch.labels.size() != n)
    throw InvalidConfig("forward_loss: empty batch or label count mismatch");
  const std::size_t classes = net.layer_sizes.back();
  for (int y : batch.labels)
    if (y < 0 || static_cast<std::size_t>(y) >= classes)
      throw InvalidConfig("forward_loss: label " + std::to_string(y) + " out of range");

  const std::size_t n_layers = net.weights.size();
  std::vector<double> act(batch.features.begin(), batch.features.end());
  if (cache) {
    cache->revision = net.revision;
    cache->batch = n;
    cache->activations.clear();
    cache->pre_acts.clear();
    cache->activations.push_back(act);
    cache->labels.assign(batch.labels.begin(), batch.labels.end());
  }

  std::size_t width_in = batch.dim;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t width_out = net.layer_sizes[l + 1];
    std::vector<double> z(n * width_out);
    const auto& W = net.weights[l];
    const auto& b = net.biases[l];
    for (std::size_t j = 0; j < n; ++j) {
      const double* in = act.data() + j * width_in;
      double* out = z.data() + j * width_out;
      for (std::size_t r = 0; r < width_out; ++r) {
        double acc = b[r];
        const double* wrow = W.data() + r * width_in;
        for (std::size_t c = 0; c < width_in; ++c) acc += wrow[c] * in[c];
        out[r] = acc;
      }
    }
    if (l + 1 < n_layers) {
      if (cache) cache->pre_acts.push_back(z);
      for (auto& v : z) v = v > 0.0 ? v : 0.0;
      act = std::move(z);
      if (cache) cache->activations.push_back(act);
      width_in = width_out;
    } else {
      act = std::move(z);  // logits
      width_in = width_out;
    }
  }

  // Softmax rows + mean cross-entropy.
  double loss = 0.0;
  std::vector<double> probs(n * classes);
  for (std::size_t j = 0; j < n; ++j) {
    const double* z = act.data() + j * classes;
    double zmax = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < classes; ++k) zmax = std::max(zmax, z[k]);
    double denom = 0.0;
    for (std::size_t k = 0; k < classes; ++k) denom += std::exp(z[k] - zmax);
    const double log_denom = std::log(denom);
    for (std::size_t k = 0; k < classes; ++k)
      probs[j * classes + k] = std::exp(z[k] - zmax) / denom;
    const auto y = static_cast<std::size_t>(batch.labels[j]);
    loss += -(act[j * classes + y] - zmax - log_denom);
  }
  loss /= static_cast<double>(n);
  if (cache) cache->probs = std::move(probs);
  return loss;
}

std::vector<double> backward(const DenseNet& net, const ForwardCache& cache) {
  if (cache.revision != net.revision)
    throw InvalidConfig("backward: stale cache (net parameters changed since forward)");
  const std::size_t n = cache.batch;
  const std::size_t n_layers = net.weights.size();
  const std::size_t classes = net.layer_sizes.back();

  // dL/dlogits = (p - onehot(y)) / n
  std::vector<double> delta(cache.probs);
  for (std::size_t j = 0; j < n; ++j)
    delta[j * classes + static_cast<std::size_t>(cache.labels[j])] -= 1.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& v : delta) v *= inv_n;

  std::vector<std::vector<double>> grad_w(n_layers);
  std::vector<std::vector<double>> grad_b(n_layers);
  std::size_t width_out = classes;
  for (std::size_t li = n_layers; li-- > 0;) {
    const std::size_t width_in = net.layer_sizes[li];
    const auto& a_in = cache.activations[li];
    grad_w[li].assign(width_in * width_out, 0.0);
    grad_b[li].assign(width_out, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double* d = delta.data() + j * width_out;
      const double* a = a_in.data() + j * width_in;
      for (std::size_t r = 0; r < width_out; ++r) {
        grad_b[li][r] += d[r];
        double* grow = grad_w[li].data() + r * width_in;
        for (std::size_t c = 0; c < width_in; ++c) grow[c] += d[r] * a[c];
      }
    }
    if (li > 0) {
      // delta_prev = W^T delta, masked by ReLU'(z) with ReLU'(0) = 0.
      const auto& W = net.weights[li];
      const auto& z = cache.pre_acts[li - 1];
      std::vector<double> prev(n * width_in, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const double* d = delta.data() + j * width_out;
        double* pd = prev.data() + j * width_in;
        for (std::size_t r = 0; r < width_out; ++r) {
          const double* wrow = W.data() + r * width_in;
          for (std::size_t c = 0; c < width_in; ++c) pd[c] += wrow[c] * d[r];
        }
        const double* zz = z.data() + j * width_in;
        for (std::size_t c = 0; c < width_in; ++c)
          if (!(zz[c] > 0.0)) pd[c] = 0.0;
      }
      delta = std::move(prev);
      width_out = width_in;
    }
  }

  std::vector<double> flat;
  flat.reserve(net.parameter_count());
  for (std::size_t l = 0; l < n_layers; ++l) {
    flat.insert(flat.end(), grad_w[l].begin(), grad_w[l].end());
    flat.insert(flat.end(), grad_b[l].begin(), grad_b[l].end());
  }
  return flat;
}

SyntheticDataset blobs_dataset(std::size_t classes, std::size_t per_class, std::size_t dim,
                               double separation, std::uint64_t seed) {
  if (classes == 0 || per_class == 0 || dim == 0)
    throw InvalidConfig("blobs_dataset: counts must be positive");
  if (!(separation > 0.0)) throw InvalidConfig("blobs_dataset: separation must be positive");

  Rng rng(mix_seed(seed, 0xb10b5ULL));
  std::vector<double> centers(classes * dim);
  for (auto& v : centers) v = rng.normal();
  if (classes > 1) {
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < classes; ++a)
      for (std::size_t b = a + 1; b < classes; ++b) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          const double d = centers[a * dim + i] - centers[b * dim + i];
          d2 += d * d;
        }
        min_dist = std::min(min_dist, std::sqrt(d2));
      }
    const double scale = separation / min_dist;
    for (auto& v : centers) v *= scale;
  }

  SyntheticDataset ds;
  ds.dim = dim;
  ds.classes = classes;
  ds.seed = seed;
  ds.features.resize(classes * per_class * dim);
  ds.labels.resize(classes * per_class);
  std::size_t row = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t k = 0; k < per_class; ++k, ++row) {
      ds.labels[row] = static_cast<int>(c);
      for (std::size_t i = 0; i < dim; ++i)
        ds.features[row * dim + i] = centers[c * dim + i] + rng.normal();
    }
  }
  return ds;
}

Problem mlp_blobs_problem(const MlpBlobsSpec& spec, std::uint64_t seed) {
  if (spec.batch == 0) throw InvalidConfig("mlp_blobs_problem: batch must be positive");
  auto data = std::make_shared<SyntheticDataset>(
      blobs_dataset(spec.classes, spec.per_class, spec.dim, spec.separation, seed));

  std::vector<std::size_t> sizes;
  sizes.push_back(spec.dim);
  sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
  sizes.push_back(spec.classes);
  auto proto = std::make_shared<DenseNet>(net_init(sizes, seed));

  const std::size_t n = data->size();
  const std::size_t batch = std::min(spec.batch, n);
  const std::size_t qpe = (n + batch - 1) / batch;
  const std::uint64_t shuffle_seed = mix_seed(seed, 0x5bffULL);

  Problem p;
  p.name = "mlp-blobs";
  p.dim = proto->parameter_count();
  p.evaluate = [proto, data](std::span<const double> w) {
    DenseNet net = *proto;
    net.unflatten(w);
    return forward_loss(net, data->view());
  };
  p.subgradient = [proto, data, batch, qpe, shuffle_seed](std::span<const double> w,
                                                          const QueryTag& tag) {
    const std::size_t n_all = data->size();
    const std::uint64_t epoch = tag.step / qpe;
    const std::size_t position = tag.step % qpe;
    std::vector<std::size_t> perm(n_all);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng shuffle_rng(mix_seed(shuffle_seed, tag.seed, epoch));
    shuffle_rng.shuffle(perm);

    const std::size_t begin = position * batch;
    const std::size_t end = std::min(begin + batch, n_all);
    const std::size_t bsz = end - begin;
    std::vector<double> feats(bsz * data->dim);
    std::vector<int> labels(bsz);
    for (std::size_t k = 0; k < bsz; ++k) {
      const std::size_t j = perm[begin + k];
      labels[k] = data->labels[j];
      std::copy_n(data->features.begin() + static_cast<std::ptrdiff_t>(j * data->dim), data->dim,
                  feats.begin() + static_cast<std::ptrdiff_t>(k * data->dim));
    }
    DenseNet net = *proto;
    net.unflatten(w);
    ForwardCache cache;
    forward_loss(net, BatchView{feats, labels, data->dim}, &cache);
    GradientSample g;
    g.convention = GradConvention::objective;
    g.values = backward(net, cache);
    return g;
  };
  p.stochastic = true;
  p.convex = false;
  p.initial = proto->flatten();
  p.queries_per_epoch = qpe;
  return p;
}

}  // namespace cocob
