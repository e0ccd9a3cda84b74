#include "cocob/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "cocob/baselines.hpp"
#include "cocob/cocob_backprop.hpp"
#include "cocob/error.hpp"
#include "cocob/rng.hpp"

namespace cocob {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr const char* kToolVersion = "0.1.0";

double elapsed_ms(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration<double, std::milli>(to - from).count();
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

class CocobOptimizer final : public Optimizer {
 public:
  CocobOptimizer(std::span<const double> w1, std::span<const double> L, bool permissive)
      : states_(cocob_init(w1, L)), w_(w1.begin(), w1.end()), permissive_(permissive) {}

  void step(const GradientSample& g) override {
    if (permissive_)
      cocob_step_clamped(states_, g);
    else
      cocob_step(states_, g);
    for (std::size_t i = 0; i < states_.size(); ++i) w_[i] = states_[i].w;
  }
  const std::vector<double>& iterate() const override { return w_; }
  std::string name() const override { return "cocob"; }
  const std::vector<CoordinateBetState>* bet_states() const override { return &states_; }

 private:
  std::vector<CoordinateBetState> states_;
  std::vector<double> w_;
  bool permissive_;
};

class KtOptimizer final : public Optimizer {
 public:
  KtOptimizer(std::span<const double> w1, std::span<const double> L)
      : states_(cocob_init(w1, L)), w_(w1.begin(), w1.end()) {}

  void step(const GradientSample& g) override {
    kt_step(states_, g, ++round_);
    for (std::size_t i = 0; i < states_.size(); ++i) w_[i] = states_[i].w;
  }
  const std::vector<double>& iterate() const override { return w_; }
  std::string name() const override { return "kt"; }

 private:
  std::vector<CoordinateBetState> states_;
  std::vector<double> w_;
  std::int64_t round_ = 0;
};

class CocobBackpropOptimizer final : public Optimizer {
 public:
  CocobBackpropOptimizer(std::span<const double> w1, double alpha)
      : states_(backprop_init(w1, alpha)), w_(w1.begin(), w1.end()) {}

  void step(const GradientSample& g) override {
    backprop_step(states_, g);
    for (std::size_t i = 0; i < states_.size(); ++i) w_[i] = states_[i].w;
  }
  const std::vector<double>& iterate() const override { return w_; }
  std::string name() const override { return "cocob-backprop"; }

 private:
  std::vector<BackpropBetState> states_;
  std::vector<double> w_;
};

class BaselineOptimizer final : public Optimizer {
 public:
  BaselineOptimizer(const BaselineConfig& config, std::span<const double> w1)
      : config_(config), state_(baseline_init(config, w1.size())), w_(w1.begin(), w1.end()) {}

  void step(const GradientSample& g) override { baseline_step(config_, state_, w_, g); }
  const std::vector<double>& iterate() const override { return w_; }
  std::string name() const override {
    return std::string(baseline_name(config_.kind)) + "_lr" + format_double(config_.learning_rate);
  }

 private:
  BaselineConfig config_;
  BaselineState state_;
  std::vector<double> w_;
};

bool is_baseline(std::string_view name) {
  return name == "sgd" || name == "adagrad" || name == "rmsprop" || name == "adadelta" ||
         name == "adam";
}

}  // namespace

std::unique_ptr<Optimizer> make_optimizer(const RunConfig& config, const Problem& problem) {
  const std::string& name = config.optimizer;
  const std::vector<double>& w1 = problem.initial;
  if (name == "cocob" || name == "kt") {
    // Known-range betting; problems without range metadata get L = 1.
    const std::vector<double> L =
        problem.lipschitz ? *problem.lipschitz : std::vector<double>(problem.dim, 1.0);
    if (name == "cocob") return std::make_unique<CocobOptimizer>(w1, L, config.permissive);
    return std::make_unique<KtOptimizer>(w1, L);
  }
  if (name == "cocob-backprop") return std::make_unique<CocobBackpropOptimizer>(w1, config.alpha);
  if (is_baseline(name)) {
    if (!config.learning_rate)
      throw InvalidConfig("optimizer '" + name + "' requires a learning rate");
    BaselineConfig bc;
    bc.kind = baseline_kind_from_name(name);
    bc.learning_rate = *config.learning_rate;
    return std::make_unique<BaselineOptimizer>(bc, w1);
  }
  throw InvalidConfig("unknown optimizer: '" + name + "'");
}

std::vector<std::string> optimizer_names() {
  return {"cocob", "cocob-backprop", "kt", "sgd", "adagrad", "rmsprop", "adadelta", "adam"};
}

std::string select_mode_name(SelectMode mode) {
  switch (mode) {
    case SelectMode::automatic: return "auto";
    case SelectMode::last: return "last";
    case SelectMode::average: return "avg";
    case SelectMode::random_index: return "rand";
  }
  return "?";
}

SelectMode select_mode_from_name(std::string_view name) {
  if (name == "auto") return SelectMode::automatic;
  if (name == "last") return SelectMode::last;
  if (name == "avg" || name == "average") return SelectMode::average;
  if (name == "rand" || name == "random") return SelectMode::random_index;
  throw InvalidConfig("unknown iterate selection mode: '" + std::string(name) + "'");
}

namespace {

SelectMode resolve_selection(const RunConfig& config, const Problem& problem) {
  if (config.select != SelectMode::automatic) return config.select;
  const bool betting = config.optimizer == "cocob" || config.optimizer == "kt";
  if (!betting) return SelectMode::last;  // prior algorithms report the last iterate
  if (problem.convex) return SelectMode::average;
  if (problem.tau) return SelectMode::random_index;  // guarantee holds in expectation over I
  return SelectMode::last;
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

RunRecord run(const RunConfig& config) {
  return run(config, make_problem(config.problem, config.seed));
}

RunRecord run(const RunConfig& config, const Problem& problem) {
  if (config.iters < 1) throw InvalidConfig("run: iteration budget must be >= 1");
  if (config.stride < 1) throw InvalidConfig("run: stride must be >= 1");
  for (std::size_t c : config.watch)
    if (c >= problem.dim)
      throw InvalidConfig("run: watched coordinate " + std::to_string(c) + " out of range");

  auto opt = make_optimizer(config, problem);

  RunRecord record;
  record.config = config;
  record.optimizer_label = opt->name();
  record.problem_name = problem.name;
  record.selection = resolve_selection(config, problem);

  std::int64_t random_index = 0;
  if (record.selection == SelectMode::random_index) {
    Rng pick(mix_seed(config.seed, 0x1d8aULL));
    random_index = pick.uniform_int(1, config.iters);
  }

  const double initial_loss = problem.evaluate(problem.initial);
  if (!std::isfinite(initial_loss))
    throw InvalidConfig("run: objective is not finite at the starting point");
  RunRow row0;
  row0.step = 0;
  row0.loss = initial_loss;
  row0.eff_lr.assign(config.watch.size(), 0.0);
  record.rows.push_back(std::move(row0));

  std::vector<double> iterate_sum(problem.dim, 0.0);
  std::vector<double> random_iterate;
  std::vector<double> eff_sqsum(config.watch.size(), 0.0);
  std::vector<double> eff_now(config.watch.size(), 0.0);
  std::int64_t queried = 0;

  auto last_mark = Clock::now();
  std::int64_t t = 1;
  for (; t <= config.iters; ++t) {
    const std::vector<double>& w = opt->iterate();
    if (!all_finite(w)) {
      record.diverged = true;
      break;
    }
    GradientSample g = problem.subgradient(w, QueryTag{config.seed, static_cast<std::uint64_t>(t - 1)});
    bool grad_ok = true;
    for (double v : g.values)
      if (!std::isfinite(v)) grad_ok = false;
    if (!grad_ok) {
      record.diverged = true;  // ranked worst, not fatal
      break;
    }

    for (std::size_t i = 0; i < problem.dim; ++i) iterate_sum[i] += w[i];
    ++queried;
    if (t == random_index) random_iterate.assign(w.begin(), w.end());

    double norm_sq = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = g.objective_grad(i);
      norm_sq += v * v;
    }
    for (std::size_t k = 0; k < config.watch.size(); ++k) {
      const double v = g.objective_grad(config.watch[k]);
      eff_sqsum[k] += v * v;
      eff_now[k] = w[config.watch[k]] * std::sqrt(eff_sqsum[k]);
    }

    try {
      opt->step(g);
    } catch (const GradientRangeViolation& e) {
      throw GradientRangeViolation(e.coordinate, e.magnitude, e.bound, t);
    }

    if (t % config.stride == 0 || t == config.iters) {
      const double loss = problem.evaluate(opt->iterate());
      if (!std::isfinite(loss)) {
        record.diverged = true;
        break;
      }
      RunRow row;
      row.step = t;
      row.loss = loss;
      row.grad_norm = std::sqrt(norm_sq);
      if (config.measure_wall) {
        const auto now = Clock::now();
        row.wall_ms = elapsed_ms(last_mark, now);
        record.wall_ms_total += row.wall_ms;
        last_mark = now;
      }
      row.eff_lr = eff_now;
      record.rows.push_back(std::move(row));
    }
  }

  record.final_cost =
      record.diverged ? std::numeric_limits<double>::infinity() : record.rows.back().loss;

  switch (record.selection) {
    case SelectMode::average: {
      record.selected_iterate.resize(problem.dim);
      const double inv = queried > 0 ? 1.0 / static_cast<double>(queried) : 0.0;
      for (std::size_t i = 0; i < problem.dim; ++i)
        record.selected_iterate[i] = queried > 0 ? iterate_sum[i] * inv : problem.initial[i];
      break;
    }
    case SelectMode::random_index:
      record.selected_iterate = random_iterate.empty() ? opt->iterate() : random_iterate;
      break;
    default:
      record.selected_iterate = opt->iterate();
      break;
  }

  // Certificate for the known-range betting run (the permissive variant
  // clamps, which voids the guarantee, so it gets none).
  if (config.optimizer == "cocob" && !config.permissive && !record.diverged &&
      opt->bet_states() && problem.optimum && problem.lipschitz && problem.tau) {
    const auto& states = *opt->bet_states();
    std::vector<double> G(states.size()), w1(states.size()), L(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      G[i] = states[i].G;
      w1[i] = states[i].w1;
      L[i] = states[i].L;
    }
    BoundCertificate cert;
    cert.tau = *problem.tau;
    cert.T = config.iters;
    cert.rhs = theorem1_bound(*problem.optimum, w1, L, G, cert.tau, cert.T);
    const double f_star =
        problem.optimum_value ? *problem.optimum_value : problem.evaluate(*problem.optimum);
    cert.observed_gap = problem.evaluate(record.selected_iterate) - f_star;
    record.certificate = cert;
    if (problem.convex && !problem.stochastic && record.selection == SelectMode::average &&
        cert.observed_gap > cert.rhs)
      throw CertificateViolation(cert.observed_gap, cert.rhs);
  }

  return record;
}

GridResult grid_search(const RunConfig& base, const Problem& problem,
                       std::span<const double> grid) {
  if (grid.empty()) throw InvalidConfig("grid_search: empty grid");
  if (!is_baseline(base.optimizer))
    throw InvalidConfig("grid_search: optimizer '" + base.optimizer +
                        "' does not take a learning rate");
  GridResult result;
  result.records.reserve(grid.size());
  bool have_best = false;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    RunConfig cfg = base;
    cfg.learning_rate = grid[k];
    result.records.push_back(run(cfg, problem));
    const double cost = result.records.back().final_cost;
    const double best_cost = have_best ? result.records[result.best_index].final_cost
                                       : std::numeric_limits<double>::infinity();
    // ties break toward the smaller rate, whatever the grid order
    if (!have_best || cost < best_cost ||
        (cost == best_cost && grid[k] < result.best_rate)) {
      have_best = true;
      result.best_index = k;
      result.best_rate = grid[k];
    }
  }
  return result;
}

GridResult grid_search(const RunConfig& base, std::span<const double> grid) {
  return grid_search(base, make_problem(base.problem, base.seed), grid);
}

namespace {

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.')
      c = '-';
  return s;
}

json config_json(const RunConfig& c) {
  json j;
  j["problem"] = c.problem;
  j["optimizer"] = c.optimizer;
  j["iters"] = c.iters;
  j["seed"] = c.seed;
  j["stride"] = c.stride;
  if (c.learning_rate) j["learning_rate"] = *c.learning_rate;
  j["alpha"] = c.alpha;
  j["select"] = select_mode_name(c.select);
  j["watch"] = c.watch;
  j["permissive"] = c.permissive;
  j["measure_wall"] = c.measure_wall;
  return j;
}

json record_json(const RunRecord& r, bool include_rows) {
  json j;
  j["config"] = config_json(r.config);
  j["problem"] = r.problem_name;
  j["optimizer"] = r.optimizer_label;
  j["selection"] = select_mode_name(r.selection);
  j["diverged"] = r.diverged;
  if (std::isfinite(r.final_cost))
    j["final_cost"] = r.final_cost;
  else
    j["final_cost"] = nullptr;
  j["recorded_rows"] = r.rows.size();
  j["selected_iterate"] = r.selected_iterate;
  if (r.certificate) {
    json c;
    c["rhs"] = r.certificate->rhs;
    c["observed_gap"] = r.certificate->observed_gap;
    c["tau"] = r.certificate->tau;
    c["T"] = r.certificate->T;
    j["certificate"] = c;
  }
  if (r.config.measure_wall) j["wall_ms_total"] = r.wall_ms_total;
  if (include_rows) {
    json cols = json::array({"step", "loss", "grad_norm", "wall_ms"});
    for (std::size_t c : r.config.watch) cols.push_back("eff_lr_" + std::to_string(c));
    j["columns"] = cols;
    json rows = json::array();
    for (const auto& row : r.rows) {
      json rr = json::array({row.step, row.loss, row.grad_norm, row.wall_ms});
      for (double v : row.eff_lr) rr.push_back(v);
      rows.push_back(std::move(rr));
    }
    j["rows"] = std::move(rows);
  }
  json env;
  env["tool"] = "cocob-bench";
  env["version"] = kToolVersion;
#if defined(__VERSION__)
  env["compiler"] = __VERSION__;
#endif
  env["cxx_standard"] = static_cast<long>(__cplusplus);
  j["environment"] = env;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidConfig("cannot write to " + path.string());
  out << text;
  if (!out) throw InvalidConfig("write failed for " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> emit(const RunRecord& record, EmitFormat format,
                                        const std::filesystem::path& out_dir) {
  if (record.rows.empty()) throw InvalidConfig("emit: record has no rows");
  std::filesystem::create_directories(out_dir);
  const std::string stem = sanitize(record.problem_name) + "_" + sanitize(record.optimizer_label);
  std::vector<std::filesystem::path> written;

  if (format == EmitFormat::csv) {
    std::string csv = "step,loss,grad_norm,wall_ms";
    for (std::size_t c : record.config.watch) csv += ",eff_lr_" + std::to_string(c);
    csv += "\n";
    for (const auto& row : record.rows) {
      csv += std::to_string(row.step);
      csv += ",";
      csv += format_double(row.loss);
      csv += ",";
      csv += format_double(row.grad_norm);
      csv += ",";
      csv += format_double(row.wall_ms);
      for (double v : row.eff_lr) {
        csv += ",";
        csv += format_double(v);
      }
      csv += "\n";
    }
    const auto csv_path = out_dir / (stem + ".csv");
    write_text(csv_path, csv);
    written.push_back(csv_path);

    const auto json_path = out_dir / (stem + ".json");
    write_text(json_path, record_json(record, false).dump(2) + "\n");
    written.push_back(json_path);
  } else {
    const auto json_path = out_dir / (stem + ".json");
    write_text(json_path, record_json(record, true).dump(2) + "\n");
    written.push_back(json_path);
  }
  return written;
}

std::vector<std::filesystem::path> emit(std::span<const RunRecord> records, EmitFormat format,
                                        const std::filesystem::path& out_dir) {
  if (records.empty()) throw InvalidConfig("emit: no records");
  std::vector<std::filesystem::path> written;
  for (const auto& r : records) {
    auto paths = emit(r, format, out_dir);
    written.insert(written.end(), paths.begin(), paths.end());
  }
  return written;
}

CompareResult compare(const std::string& problem_name, std::int64_t budget, std::uint64_t seed,
                      const std::filesystem::path& out_dir) {
  const Problem problem = make_problem(problem_name, seed);

  RunConfig base;
  base.problem = problem_name;
  base.iters = budget;
  base.seed = seed;
  base.stride = problem.queries_per_epoch > 0
                    ? static_cast<std::int64_t>(problem.queries_per_epoch)
                    : std::max<std::int64_t>(1, budget / 1000);
  base.measure_wall = false;  // keeps the emitted files byte-reproducible

  CompareResult result;
  const auto grid = paper_lr_grid();

  for (const char* name : {"cocob", "cocob-backprop"}) {
    RunConfig cfg = base;
    cfg.optimizer = name;
    const auto start = Clock::now();
    RunRecord rec = run(cfg, problem);
    const double wall = elapsed_ms(start, Clock::now());
    result.rows.push_back({name, rec.final_cost, std::nullopt, wall});
    result.records.push_back(std::move(rec));
  }
  for (const char* name : {"sgd", "adagrad", "rmsprop", "adadelta", "adam"}) {
    RunConfig cfg = base;
    cfg.optimizer = name;
    const auto start = Clock::now();
    GridResult gr = grid_search(cfg, problem, grid);
    const double wall = elapsed_ms(start, Clock::now());
    RunRecord best = std::move(gr.records[gr.best_index]);
    result.rows.push_back({name, best.final_cost, gr.best_rate, wall});
    result.records.push_back(std::move(best));
  }

  if (!out_dir.empty()) {
    emit(result.records, EmitFormat::csv, out_dir);
    std::string summary = "optimizer,final_cost,best_lr\n";
    for (const auto& row : result.rows) {
      summary += row.optimizer;
      summary += ",";
      summary += std::isfinite(row.final_cost) ? format_double(row.final_cost) : "inf";
      summary += ",";
      if (row.best_rate) summary += format_double(*row.best_rate);
      summary += "\n";
    }
    write_text(out_dir / "summary.csv", summary);
  }
  return result;
}

}  // namespace cocob
