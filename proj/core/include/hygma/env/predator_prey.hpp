#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hygma/tensor/tensor.hpp"

namespace hygma::env {

enum class PreyPolicy { Stationary, RandomMove };

enum Action : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4 };
inline constexpr std::size_t kNumActions = 5;

struct PPConfig {
  std::size_t grid = 10;
  std::size_t n_predators = 5;
  std::size_t vision = 1;
  std::size_t max_steps = 40;
  PreyPolicy prey_policy = PreyPolicy::Stationary;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when a bound is violated.
  void validate() const;
  std::size_t obs_dim() const { return (2 * vision + 1) * (2 * vision + 1) * 3 + 2; }
  std::size_t state_dim() const { return 2 * (n_predators + 1) + 1; }
};

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
};

struct PPState {
  std::vector<Cell> predators;
  Cell prey;
  std::size_t step = 0;
  std::vector<bool> captured;
  bool done = false;

  bool all_captured() const;
};

using Observations = std::vector<std::vector<double>>;

struct StepOutcome {
  PPState state;
  Observations observations;
  double reward = 0.0;
  bool done = false;
  bool success = false;
};

struct ResetOutcome {
  PPState state;
  Observations observations;
};

/// Uniform placement of predators and prey on distinct cells.
ResetOutcome reset(const PPConfig& cfg, Rng& rng);

/// Simultaneous predator moves (captured predators hold position), then the prey moves,
/// then capture. Team reward is -0.05 per predator not yet captured.
StepOutcome step(const PPConfig& cfg, const PPState& state, std::span<const int> actions, Rng& prey_rng);

/// Per-predator local patch (channels: self, other-predator count, prey; out-of-grid
/// cells are -1 in every channel) followed by own normalized (row, col).
Observations observe(const PPConfig& cfg, const PPState& state);

/// Normalized predator positions, prey position, then step / max_steps.
std::vector<double> global_state(const PPConfig& cfg, const PPState& state);

/// Mean episode length under uniform-random predator actions.
double random_baseline(const PPConfig& cfg, std::size_t episodes, Rng& rng);

}  // namespace hygma::env
