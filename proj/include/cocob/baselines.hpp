#pragma once

// The five comparison optimizers behind one step interface, with the fixed
// 17-point learning-rate grid used for tuning them. Hyperparameters other
// than the learning rate are pinned to the usual framework defaults and
// echoed into run metadata by the harness.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cocob/gradient.hpp"

namespace cocob {

enum class BaselineKind { sgd, adagrad, rmsprop, adadelta, adam };

struct BaselineConfig {
  BaselineKind kind = BaselineKind::sgd;
  double learning_rate = 0.01;
  double epsilon = 1e-8;
  double rmsprop_decay = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adadelta_rho = 0.95;
};

// Accumulator state; which slots are used depends on the kind:
//   sgd: none; adagrad: acc1 = sum g^2; rmsprop: acc1 = EMA g^2;
//   adam: acc1 = m, acc2 = v, t = step count;
//   adadelta: acc1 = EMA g^2, acc2 = EMA delta^2.
struct BaselineState {
  std::vector<double> acc1;
  std::vector<double> acc2;
  std::int64_t t = 0;
};

// Validates the config (positive learning rate and epsilon, decays in (0,1)).
BaselineState baseline_init(const BaselineConfig& config, std::size_t dim);

// Applies one standard update for config.kind in place. The gradient is
// taken in the objective convention (descent direction is -g).
void baseline_step(const BaselineConfig& config, BaselineState& state,
                   std::vector<double>& w, const GradientSample& g);

// The 17-value tuning grid, strictly increasing from 1e-5 to 0.1.
std::vector<double> paper_lr_grid();

BaselineKind baseline_kind_from_name(std::string_view name);
std::string_view baseline_name(BaselineKind kind);

}  // namespace cocob
