#include "hygma/learn/replay.hpp"

#include <stdexcept>

namespace hygma::learn {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("learn.buffer_capacity must be >= 1");
}

void ReplayBuffer::add(Episode episode) {
  if (episode.steps.empty()) throw std::invalid_argument("ReplayBuffer: empty episode");
  if (episodes_.size() == capacity_) episodes_.pop_front();
  episodes_.push_back(std::move(episode));
}

std::vector<const Episode*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (episodes_.empty()) throw std::logic_error("ReplayBuffer: sample from empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, episodes_.size() - 1);
  std::vector<const Episode*> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) out.push_back(&episodes_[pick(rng)]);
  return out;
}

}  // namespace hygma::learn
