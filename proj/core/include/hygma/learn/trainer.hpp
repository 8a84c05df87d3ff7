#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "hygma/learn/learner.hpp"

namespace hygma::learn {

struct EpisodeMetrics {
  std::size_t episode = 0;
  std::size_t steps = 0;
  double reward = 0.0;
  bool success = false;
  double eta = 0.0;
  std::uint64_t grouping_version = 0;
  std::size_t k = 1;
  double silhouette = 0.0;
  std::uint64_t message_count = 0;
  double loss_task = 0.0;
  double loss_group = 0.0;
  double loss_att = 0.0;
  double loss_group_literal = 0.0;
  std::size_t updates = 0;
};

/// A grouping adopted at environment step global_step (takes effect from the next episode).
struct GroupingEvent {
  std::uint64_t global_step = 0;
  std::size_t episode = 0;
  spectral::Grouping grouping;
};

struct TrainHooks {
  std::function<void(const EpisodeMetrics&)> on_episode;
  std::function<void(const GroupingEvent&)> on_grouping;
  /// Periodic snapshot; also invoked once after the final episode.
  std::function<void(const Learner&, const spectral::Grouping&, std::size_t episode)> on_checkpoint;
};

using Cooccurrence = std::vector<std::vector<std::uint64_t>>;

struct TrainResult {
  std::vector<EpisodeMetrics> metrics;
  Cooccurrence cooccurrence;
  spectral::Grouping grouping;
  std::unique_ptr<Learner> learner;
};

/// Linear epsilon schedule over environment steps.
double epsilon_at(const LearnConfig& cfg, std::uint64_t global_step);

/// Mean silhouette of a grouping (size-weighted group cohesion); 0 for a single group.
double grouping_silhouette(const spectral::Grouping& g);

/// Rollout, periodic regrouping, storage and batched optimization. The grouping in
/// effect is frozen for each episode; an adopted regrouping applies from the next one.
TrainResult train_run(const TrainConfig& cfg, const TrainHooks& hooks = {});

struct EvalSummary {
  std::size_t episodes = 0;
  double mean_steps = 0.0;
  double std_steps = 0.0;
  double success_rate = 0.0;
  double mean_reward = 0.0;
};

/// Greedy rollouts (argmax Q or argmax probability) under a frozen grouping.
EvalSummary evaluate(const Learner& learner, const spectral::Grouping& grouping, std::size_t episodes,
                     std::uint64_t seed);

/// Mean steps over the last ceil(10%) of a metrics stream.
double final_window_mean_steps(const std::vector<EpisodeMetrics>& metrics);

}  // namespace hygma::learn
