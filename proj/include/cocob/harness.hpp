#pragma once

// Benchmark harness: seeded single runs, learning-rate grid searches,
// untuned-vs-tuned comparison tables, and CSV/JSON emission. Runs are
// deterministic per (config, seed); wall time is the only measured
// quantity and is kept out of anything the determinism guarantee covers.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cocob/coin_betting.hpp"
#include "cocob/problems.hpp"

namespace cocob {

// Step interface every optimizer is adapted to. step() consumes the
// gradient at the current iterate and advances it.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(const GradientSample& g) = 0;
  virtual const std::vector<double>& iterate() const = 0;
  virtual std::string name() const = 0;
  // Non-empty for the known-range betting optimizer; used for certificates.
  virtual const std::vector<CoordinateBetState>* bet_states() const { return nullptr; }
};

enum class SelectMode { automatic, last, average, random_index };

struct RunConfig {
  std::string problem = "abs10";
  std::string optimizer = "cocob";
  std::int64_t iters = 100;
  std::uint64_t seed = 0;
  std::int64_t stride = 1;
  std::optional<double> learning_rate;  // baselines only
  double alpha = 100.0;                 // cocob-backprop cap
  SelectMode select = SelectMode::automatic;
  std::vector<std::size_t> watch;       // coordinates to record eff. learning rate for
  bool measure_wall = true;             // compare() turns this off for reproducible files
  bool permissive = false;              // clamp out-of-range gradients instead of failing
};

struct RunRow {
  std::int64_t step = 0;       // number of updates applied so far
  double loss = 0.0;           // objective after `step` updates
  double grad_norm = 0.0;      // |gradient| consumed by update `step` (0 in row 0)
  double wall_ms = 0.0;        // elapsed since the previous recorded row
  std::vector<double> eff_lr;  // one entry per watched coordinate
};

struct RunRecord {
  RunConfig config;
  std::string optimizer_label;  // registry name plus tuning suffix, e.g. "adam_lr0.001"
  std::string problem_name;
  std::vector<RunRow> rows;
  SelectMode selection = SelectMode::last;  // resolved mode
  std::vector<double> selected_iterate;
  std::optional<BoundCertificate> certificate;
  bool diverged = false;
  double final_cost = 0.0;  // last recorded loss; +inf when diverged
  double wall_ms_total = 0.0;
};

// Executes the optimizer loop on a registry problem (seeded with
// config.seed) or an explicit instance. Records a row every `stride`
// updates plus the initial state and the final step. Betting runs on
// problems with optimum + range metadata get a bound certificate attached;
// on deterministic convex problems with average selection a violated
// certificate throws CertificateViolation.
RunRecord run(const RunConfig& config);
RunRecord run(const RunConfig& config, const Problem& problem);

struct GridResult {
  double best_rate = 0.0;
  std::size_t best_index = 0;
  std::vector<RunRecord> records;  // one per grid point, in grid order
};

// Runs every rate with the same seed and budget. Best = minimum final
// training cost, ties broken toward the smaller rate; diverged runs rank
// worst instead of failing the search.
GridResult grid_search(const RunConfig& base, const Problem& problem,
                       std::span<const double> grid);
GridResult grid_search(const RunConfig& base, std::span<const double> grid);

enum class EmitFormat { csv, json };

// csv: "<problem>_<label>.csv" with columns
//        step,loss,grad_norm,wall_ms[,eff_lr_<coord>...]
//      plus a "<problem>_<label>.json" sidecar (config echo, environment
//      stamp, certificate). json: everything, rows included, in one file.
// Numbers are written in shortest round-trip decimal form. Returns the
// paths written.
std::vector<std::filesystem::path> emit(const RunRecord& record, EmitFormat format,
                                        const std::filesystem::path& out_dir);
std::vector<std::filesystem::path> emit(std::span<const RunRecord> records, EmitFormat format,
                                        const std::filesystem::path& out_dir);

struct CompareRow {
  std::string optimizer;
  double final_cost = 0.0;
  std::optional<double> best_rate;  // empty for the betting optimizers
  double wall_ms = 0.0;
};

struct CompareResult {
  std::vector<CompareRow> rows;     // cocob, cocob-backprop, then the five baselines
  std::vector<RunRecord> records;   // the run behind each row
};

// The protocol table: COCOB and COCOB-Backprop untuned, each baseline
// tuned over the 17-point grid, identical seed and budget everywhere.
// When out_dir is nonempty the per-run files and a summary.csv are
// written; those files are byte-reproducible (no wall time in them).
CompareResult compare(const std::string& problem, std::int64_t budget, std::uint64_t seed,
                      const std::filesystem::path& out_dir = {});

// Optimizer registry ("cocob", "cocob-backprop", "kt", "sgd", "adagrad",
// "rmsprop", "adadelta", "adam").
std::unique_ptr<Optimizer> make_optimizer(const RunConfig& config, const Problem& problem);
std::vector<std::string> optimizer_names();

std::string select_mode_name(SelectMode mode);
SelectMode select_mode_from_name(std::string_view name);

}  // namespace cocob
