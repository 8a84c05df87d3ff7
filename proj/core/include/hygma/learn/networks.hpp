#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hygma/hypergraph/hypergraph.hpp"
#include "hygma/spectral/spectral.hpp"
#include "hygma/tensor/nn.hpp"
#include "hygma/tensor/tensor.hpp"

namespace hygma::learn {

/// relu(obs_proj(o)) feeds a GRU cell; the GRU state doubles as the agent embedding.
struct AgentEncoder {
  Linear obs_proj;
  GruParams gru;

  static AgentEncoder create(std::size_t obs_dim, std::size_t hidden_dim, Rng& rng);
  std::size_t hidden_dim() const { return gru.hidden_dim(); }
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct Encoded {
  Tensor embeddings;
  Tensor hidden;
};

/// Rows are agents. hidden is [rows, hidden_dim]; zeros at episode start.
Encoded encode(const Tensor& obs, const Tensor& hidden, const AgentEncoder& enc);

enum class Aggregator { Hgcn, Gcn };

/// Group structure for one or more stacked episodes. Row r belongs to batch block
/// block[r]; labels are global group ids across the stack.
class GroupContext {
 public:
  static GroupContext single(const spectral::Grouping& grouping);
  static GroupContext stacked(std::span<const spectral::Grouping* const> groupings);

  const hypergraph::Hypergraph& hypergraph() const { return hg_; }
  const std::vector<std::size_t>& labels() const { return labels_; }
  const std::vector<std::size_t>& block() const { return block_; }
  std::size_t blocks() const { return n_blocks_; }
  std::size_t rows() const { return labels_.size(); }

 private:
  GroupContext(hypergraph::Hypergraph hg, std::vector<std::size_t> labels, std::vector<std::size_t> block,
               std::size_t n_blocks)
      : hg_(std::move(hg)), labels_(std::move(labels)), block_(std::move(block)), n_blocks_(n_blocks) {}

  hypergraph::Hypergraph hg_;
  std::vector<std::size_t> labels_;
  std::vector<std::size_t> block_;
  std::size_t n_blocks_ = 1;
};

struct GroupFeatures {
  Tensor h;                     // [rows, d_out]
  std::vector<Tensor> alphas;  // one per layer; empty for the GCN aggregator
};

GroupFeatures group_features(const Tensor& embeddings, const GroupContext& ctx, const hypergraph::HgcnNetwork& net,
                             Aggregator agg);

/// row i = q_head([embedding_i ‖ h_i]).
Tensor q_values(const Tensor& embeddings, const Tensor& h, const Linear& q_head);

/// Row-softmax of actor_head([embedding_i ‖ h_i]).
Tensor policy_logits(const Tensor& embeddings, const Tensor& h, const Linear& actor_head);
Tensor policy_probs(const Tensor& embeddings, const Tensor& h, const Linear& actor_head);

/// QMIX-style monotonic mixer with hypernetwork-generated |weights|.
struct MixingNetwork {
  Linear hyper_w1;      // state -> n * embed
  Linear hyper_b1;      // state -> embed
  Linear hyper_w2;      // state -> embed
  Linear hyper_b2_in;   // state -> embed, relu
  Linear hyper_b2_out;  // embed -> 1
  std::size_t n_agents = 0;
  std::size_t embed_dim = 0;
  Tensor repeat;  // [n, n * embed] constant
  Tensor reduce;  // [n * embed, embed] constant

  static MixingNetwork create(std::size_t n_agents, std::size_t state_dim, std::size_t embed_dim, Rng& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
};

/// q_chosen [B, n], states [B, S] -> Q_tot [B, 1]:
/// ELU(q |W1(s)| + b1(s)) |W2(s)| + b2(s).
Tensor mix(const Tensor& q_chosen, const Tensor& states, const MixingNetwork& mixer);

/// V([s ‖ mean_i h_i]) through a relu hidden layer.
struct Critic {
  Linear hidden;
  Linear out;

  static Critic create(std::size_t state_dim, std::size_t h_dim, std::size_t hidden_dim, Rng& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
};

/// states [B, S]; h [B * n, d] with agents of block b in rows b*n .. b*n+n-1. Returns [B, 1].
Tensor critic_value(const Tensor& states, const Tensor& h, const Critic& critic);

}  // namespace hygma::learn
