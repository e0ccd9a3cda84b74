#include "cocob/baselines.hpp"

#include <cmath>
#include <string>

#include "cocob/error.hpp"

namespace cocob {

namespace {

void validate(const BaselineConfig& c) {
  if (!(c.learning_rate > 0.0)) throw InvalidConfig("baseline: learning rate must be positive");
  if (!(c.epsilon > 0.0)) throw InvalidConfig("baseline: epsilon must be positive");
  const auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_unit(c.rmsprop_decay) || !in_unit(c.adam_beta1) || !in_unit(c.adam_beta2) ||
      !in_unit(c.adadelta_rho))
    throw InvalidConfig("baseline: decay parameters must lie in (0, 1)");
}

}  // namespace

BaselineState baseline_init(const BaselineConfig& config, std::size_t dim) {
  validate(config);
  if (dim == 0) throw InvalidConfig("baseline_init: zero dimension");
  BaselineState s;
  switch (config.kind) {
    case BaselineKind::sgd:
      break;
    case BaselineKind::adagrad:
    case BaselineKind::rmsprop:
      s.acc1.assign(dim, 0.0);
      break;
    case BaselineKind::adam:
    case BaselineKind::adadelta:
      s.acc1.assign(dim, 0.0);
      s.acc2.assign(dim, 0.0);
      break;
  }
  return s;
}

void baseline_step(const BaselineConfig& config, BaselineState& state,
                   std::vector<double>& w, const GradientSample& g) {
  if (g.size() != w.size())
    throw InvalidConfig("baseline_step: gradient dimension " + std::to_string(g.size()) +
                        " does not match parameter dimension " + std::to_string(w.size()));
  check_finite(g);
  const double lr = config.learning_rate;
  const double eps = config.epsilon;
  switch (config.kind) {
    case BaselineKind::sgd:
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g.objective_grad(i);
      break;
    case BaselineKind::adagrad:
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = g.objective_grad(i);
        state.acc1[i] += gi * gi;
        w[i] -= lr * gi / (std::sqrt(state.acc1[i]) + eps);
      }
      break;
    case BaselineKind::rmsprop: {
      const double rho = config.rmsprop_decay;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = g.objective_grad(i);
        state.acc1[i] = rho * state.acc1[i] + (1.0 - rho) * gi * gi;
        w[i] -= lr * gi / (std::sqrt(state.acc1[i]) + eps);
      }
      break;
    }
    case BaselineKind::adam: {
      const double b1 = config.adam_beta1;
      const double b2 = config.adam_beta2;
      state.t += 1;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = g.objective_grad(i);
        state.acc1[i] = b1 * state.acc1[i] + (1.0 - b1) * gi;
        state.acc2[i] = b2 * state.acc2[i] + (1.0 - b2) * gi * gi;
        const double m_hat = state.acc1[i] / c1;
        const double v_hat = state.acc2[i] / c2;
        w[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
      }
      break;
    }
    case BaselineKind::adadelta: {
      const double rho = config.adadelta_rho;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = g.objective_grad(i);
        state.acc1[i] = rho * state.acc1[i] + (1.0 - rho) * gi * gi;
        const double delta =
            -std::sqrt((state.acc2[i] + eps) / (state.acc1[i] + eps)) * gi;
        state.acc2[i] = rho * state.acc2[i] + (1.0 - rho) * delta * delta;
        w[i] += lr * delta;
      }
      break;
    }
  }
}

std::vector<double> paper_lr_grid() {
  return {0.00001, 0.000025, 0.00005, 0.000075, 0.0001, 0.00025, 0.0005, 0.00075,
          0.001,   0.0025,   0.005,   0.0075,   0.01,   0.02,    0.05,   0.075, 0.1};
}

BaselineKind baseline_kind_from_name(std::string_view name) {
  if (name == "sgd") return BaselineKind::sgd;
  if (name == "adagrad") return BaselineKind::adagrad;
  if (name == "rmsprop") return BaselineKind::rmsprop;
  if (name == "adadelta") return BaselineKind::adadelta;
  if (name == "adam") return BaselineKind::adam;
  throw InvalidConfig("unknown baseline optimizer: " + std::string(name));
}

std::string_view baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::sgd: return "sgd";
    case BaselineKind::adagrad: return "adagrad";
    case BaselineKind::rmsprop: return "rmsprop";
    case BaselineKind::adadelta: return "adadelta";
    case BaselineKind::adam: return "adam";
  }
  return "?";
}

}  // namespace cocob
