#pragma once

// Minimal dense feedforward net with manual backprop: affine layers, ReLU
// hidden activations, softmax cross-entropy loss. Parameters flatten to a
// single vector (per layer: weights row-major, then biases), which is the
// coordinate ordering every optimizer sees.

#include <cstdint>
#include <span>
#include <vector>

#include "cocob/problems.hpp"

namespace cocob {

struct DenseNet {
  std::vector<std::size_t> layer_sizes;          // input, hidden..., classes
  std::vector<std::vector<double>> weights;      // [layer][out * in], row-major
  std::vector<std::vector<double>> biases;       // [layer][out]
  std::uint64_t revision = 0;                    // bumped on parameter writes

  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);
};

// Weights from a truncated normal (std 0.1, redrawn beyond 2 std), biases
// constant 0.1, deterministic per seed.
DenseNet net_init(std::vector<std::size_t> layer_sizes, std::uint64_t seed);

struct BatchView {
  std::span<const double> features;  // row-major n x dim
  std::span<const int> labels;
  std::size_t dim = 0;
  std::size_t size() const { return dim == 0 ? 0 : features.size() / dim; }
};

// Activations recorded by forward_loss for the matching backward pass.
struct ForwardCache {
  std::uint64_t revision = 0;                     // net revision at forward time
  std::size_t batch = 0;
  std::vector<std::vector<double>> activations;   // [layer][n * width], input first
  std::vector<std::vector<double>> pre_acts;      // hidden pre-activations
  std::vector<double> probs;                      // n * classes softmax rows
  std::vector<int> labels;
};

// Mean cross-entropy -ln p[label] over the batch. Pass a cache to enable
// backward. Throws InvalidConfig on shape mismatch or out-of-range labels.
double forward_loss(const DenseNet& net, const BatchView& batch, ForwardCache* cache = nullptr);

// Exact gradient of the mean cross-entropy w.r.t. the flattened parameters.
// ReLU subgradient at exactly 0 is taken as 0. Rejects caches recorded
// against a different parameter revision.
std::vector<double> backward(const DenseNet& net, const ForwardCache& cache);

struct SyntheticDataset {
  std::vector<double> features;  // row-major n x dim
  std::vector<int> labels;
  std::size_t dim = 0;
  std::size_t classes = 0;
  std::uint64_t seed = 0;
  std::size_t size() const { return labels.size(); }
  BatchView view() const { return {features, labels, dim}; }
};

// Gaussian clusters with unit variance around random centers rescaled so
// the minimum pairwise center distance equals `separation`.
SyntheticDataset blobs_dataset(std::size_t classes, std::size_t per_class, std::size_t dim,
                               double separation, std::uint64_t seed);

struct MlpBlobsSpec {
  std::size_t classes = 3;
  std::size_t per_class = 400;
  std::size_t dim = 5;
  double separation = 2.0;
  std::vector<std::size_t> hidden = {50, 50};
  std::size_t batch = 32;
};

// The training objective as a Problem: evaluate() is the full-dataset
// cross-entropy, the subgradient oracle walks seeded shuffled epochs in
// minibatches (queries_per_epoch = ceil(n / batch)).
Problem mlp_blobs_problem(const MlpBlobsSpec& spec, std::uint64_t seed);

}  // namespace cocob
