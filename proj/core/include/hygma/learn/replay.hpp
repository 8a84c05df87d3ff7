#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

#include "hygma/spectral/spectral.hpp"
#include "hygma/tensor/tensor.hpp"

namespace hygma::learn {

/// Plain copies of everything needed to replay one environment step; nothing here
/// references a tape.
struct Transition {
  std::vector<std::vector<double>> obs;
  std::vector<int> actions;
  std::vector<std::vector<double>> hidden;  // encoder state before this step
  double reward = 0.0;
  std::vector<std::vector<double>> next_obs;
  bool done = false;
  std::uint64_t grouping_version = 0;
  std::vector<double> state;
  std::vector<double> next_state;
};

struct Episode {
  spectral::Grouping grouping;  // frozen for the whole episode
  std::vector<Transition> steps;
  double total_reward = 0.0;
  bool success = false;

  std::size_t length() const { return steps.size(); }
};

/// Episode-granular ring buffer.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(Episode episode);
  std::size_t size() const { return episodes_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Episode& at(std::size_t i) const { return episodes_.at(i); }

  /// Uniform sampling with replacement; fully determined by rng.
  std::vector<const Episode*> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Episode> episodes_;
};

}  // namespace hygma::learn
