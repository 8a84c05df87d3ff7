#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hygma/learn/trainer.hpp"

namespace hygma::harness {

struct RunConfig {
  learn::TrainConfig train;
  std::filesystem::path out_dir = "runs/default";
  std::size_t eval_episodes = 100;
  std::uint64_t eval_seed = 0;
  std::vector<std::size_t> complexity_n{5, 10, 20, 40};
  std::size_t complexity_k_max = 5;

  void validate() const;
};

/// Dotted key -> raw value, e.g. {"seed", "7"} or {"learn.mode", "value"}.
using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Flat-section text: `[section]` headers, `key = value` lines, `#` or `;` comments.
/// Keys before any header belong to the root section (seed, out_dir, ablation).
/// Unknown keys, malformed values and constraint violations throw
/// std::invalid_argument naming the key path.
RunConfig parse_config_text(const std::string& text, const Overrides& overrides = {});
RunConfig parse_config(const std::filesystem::path& path, const Overrides& overrides = {});

/// Every recognised key path, for documentation and tests.
std::vector<std::string> config_keys();

std::string variant_name(learn::Variant v);
learn::Variant parse_variant(const std::string& s);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

// --- checkpoints: "HYGM", u32 version, u32 count, then per tensor
// u32 name_len, name bytes, u32 rank, rank x u64 dims, numel x f64, all little-endian.

struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

void write_tensor_table(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensor_table(const std::filesystem::path& path);

/// Online parameters plus the grouping in effect. Written to a temporary file and
/// renamed, so an interrupted write leaves the previous checkpoint intact.
void save_checkpoint(const std::filesystem::path& path, const learn::Learner& learner,
                     const spectral::Grouping& grouping);
/// Overwrites learner parameters; throws std::invalid_argument on any name or shape mismatch.
spectral::Grouping load_checkpoint(const std::filesystem::path& path, learn::Learner& learner);

// --- subcommands

struct TrainOutcome {
  int exit_code = 0;
  std::vector<learn::EpisodeMetrics> metrics;
  std::string error;
};

/// Writes metrics.csv, groups_timeline.csv, cooccurrence.csv and checkpoint.bin into out_dir.
TrainOutcome run_train(const RunConfig& cfg);

/// Writes eval.csv into out_dir.
learn::EvalSummary run_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint);

struct AblationRow {
  std::string variant;
  std::uint64_t seed = 0;
  std::size_t episodes = 0;
  double final_window_steps = 0.0;
  double final_window_reward = 0.0;
  int exit_code = 0;
};

/// Trains hgcn, gcn and single-group into out_dir/<variant>/ with the shared seed and
/// writes out_dir/ablation.csv.
std::vector<AblationRow> run_ablation_suite(const RunConfig& cfg);

struct ComplexityRow {
  std::size_t n = 0;
  std::size_t k = 0;
  std::uint64_t message_count = 0;
  std::uint64_t fully_connected = 0;
  double ratio = 0.0;
};

/// Balanced groupings for every n in the sweep and k in [1, min(k_max, n)]; writes complexity.csv.
std::vector<ComplexityRow> complexity_report(const RunConfig& cfg);

/// Group sizes as equal as possible; the first n % k groups get the extra member.
spectral::Grouping balanced_grouping(std::size_t n, std::size_t k);

/// Reads HYGMA_LOG (error|info|debug; default info) and routes logging to stderr.
void init_logging();

}  // namespace hygma::harness
