#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "hygma/env/predator_prey.hpp"
#include "hygma/hypergraph/hypergraph.hpp"
#include "hygma/learn/losses.hpp"
#include "hygma/learn/networks.hpp"
#include "hygma/learn/replay.hpp"
#include "hygma/spectral/spectral.hpp"
#include "hygma/tensor/optim.hpp"

namespace hygma::learn {

/// hgcn: dynamic grouping + hypergraph convolution; gcn: dynamic grouping + clique GCN;
/// single-group: one fixed all-agent hyperedge, clustering disabled.
enum class Variant { Hgcn, Gcn, SingleGroup };

struct ModelConfig {
  std::size_t hidden_dim = 96;
  std::size_t hgcn_out = 64;
  std::size_t hgcn_layers = 1;
  std::size_t heads = 1;
  std::size_t mixer_embed = 32;
  std::size_t critic_hidden = 64;

  void validate() const;
};

enum class OptimizerKind { Auto, Adam, RmsProp };

struct LearnConfig {
  Mode mode = Mode::Policy;
  LossWeights weights;
  OptimizerKind optimizer = OptimizerKind::Auto;  // Adam for policy, RMSProp for value
  double lr = 0.001;
  double grad_clip = 10.0;
  std::size_t episodes = 2000;
  std::size_t batch_steps = 500;    // policy mode: environment steps per update
  std::size_t batch_episodes = 32;  // value mode: sampled episodes per update
  std::size_t buffer_capacity = 1000;
  std::size_t target_sync = 200;    // optimization steps between target copies
  bool double_q = true;
  double eps_start = 1.0;
  double eps_finish = 0.05;
  std::size_t eps_anneal_steps = 10000;
  double entropy_coef = 0.0;
  std::size_t checkpoint_every = 0;  // episodes; 0 = only at the end

  void validate() const;
};

struct TrainConfig {
  env::PPConfig env;
  spectral::SpectralConfig spectral;
  ModelConfig model;
  LearnConfig learn;
  Variant variant = Variant::Hgcn;
  std::uint64_t seed = 0;

  void validate() const;
};

struct UpdateStats {
  double total = 0.0;
  double task = 0.0;
  double group = 0.0;
  double att = 0.0;
  double group_literal = 0.0;
  double grad_norm = 0.0;
};

/// Thrown when a loss evaluates to a non-finite value.
struct TrainingAborted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything a forward step yields for one stack of agents.
struct AgentStep {
  Tensor embeddings;
  Tensor h;
  std::vector<Tensor> alphas;
};

class Learner {
 public:
  virtual ~Learner() = default;

  virtual Mode mode() const = 0;
  /// Q-values (value mode) or action probabilities (policy mode) for the rows of obs.
  /// hidden is replaced by the next recurrent state. Reads only agent-local inputs.
  virtual Tensor scores(const Tensor& obs, Tensor& hidden, const GroupContext& ctx) const = 0;
  virtual UpdateStats update(std::span<const Episode* const> batch) = 0;
  /// Online parameters; the checkpointed set.
  virtual NamedParams parameters() const = 0;
  /// Called after parameters were overwritten externally.
  virtual void on_parameters_loaded() {}

  std::vector<int> act(const Tensor& obs, Tensor& hidden, const GroupContext& ctx, double epsilon, bool greedy,
                       Rng& rng) const;
  std::size_t hidden_dim() const { return encoder_.hidden_dim(); }
  std::size_t updates() const { return updates_; }
  const TrainConfig& config() const { return cfg_; }

 protected:
  Learner(const TrainConfig& cfg, Rng& rng);
  AgentStep forward_step(const Tensor& obs, const Tensor& hidden, const GroupContext& ctx) const;
  static AgentStep forward_step(const Tensor& obs, const Tensor& hidden, const GroupContext& ctx,
                                const AgentEncoder& enc, const hypergraph::HgcnNetwork& net, Aggregator agg);
  void make_optimizer(OptimizerKind fallback);
  double apply_gradients(const Tensor& loss);

  TrainConfig cfg_;
  AgentEncoder encoder_;
  hypergraph::HgcnNetwork hgcn_;
  Aggregator agg_;
  std::unique_ptr<Optimizer> optimizer_;
  std::size_t updates_ = 0;
};

class ValueLearner final : public Learner {
 public:
  ValueLearner(const TrainConfig& cfg, Rng& rng);
  Mode mode() const override { return Mode::Value; }
  Tensor scores(const Tensor& obs, Tensor& hidden, const GroupContext& ctx) const override;
  UpdateStats update(std::span<const Episode* const> batch) override;
  NamedParams parameters() const override;
  NamedParams target_parameters() const;
  void on_parameters_loaded() override { sync_target(); }
  void sync_target();

  const Linear& q_head() const { return q_head_; }
  const MixingNetwork& mixer() const { return mixer_; }

 private:
  Linear q_head_;
  MixingNetwork mixer_;
  AgentEncoder t_encoder_;
  hypergraph::HgcnNetwork t_hgcn_;
  Linear t_q_head_;
  MixingNetwork t_mixer_;
};

class PolicyLearner final : public Learner {
 public:
  PolicyLearner(const TrainConfig& cfg, Rng& rng);
  Mode mode() const override { return Mode::Policy; }
  Tensor scores(const Tensor& obs, Tensor& hidden, const GroupContext& ctx) const override;
  UpdateStats update(std::span<const Episode* const> batch) override;
  NamedParams parameters() const override;

  const Linear& actor_head() const { return actor_; }
  const Critic& critic() const { return critic_; }

 private:
  Linear actor_;
  Critic critic_;
};

std::unique_ptr<Learner> make_learner(const TrainConfig& cfg, Rng& rng);

/// Independent, reproducible RNG stream derived from a seed.
Rng derive_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace hygma::learn
