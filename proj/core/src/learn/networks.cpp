#include "hygma/learn/networks.hpp"

#include <stdexcept>

#include "hygma/tensor/ops.hpp"

namespace hygma::learn {

AgentEncoder AgentEncoder::create(std::size_t obs_dim, std::size_t hidden_dim, Rng& rng) {
  AgentEncoder e;
  e.obs_proj = Linear::create(obs_dim, hidden_dim, rng);
  e.gru = GruParams::create(hidden_dim, hidden_dim, rng);
  return e;
}

void AgentEncoder::collect(const std::string& prefix, NamedParams& out) const {
  obs_proj.collect(prefix + ".obs_proj", out);
  gru.collect(prefix + ".gru", out);
}

Encoded encode(const Tensor& obs, const Tensor& hidden, const AgentEncoder& enc) {
  const Tensor next = gru_cell(ops::relu(enc.obs_proj(obs)), hidden, enc.gru);
  return {next, next};
}

GroupContext GroupContext::single(const spectral::Grouping& grouping) {
  return GroupContext(hypergraph::build_hypergraph(grouping), grouping.labels,
                      std::vector<std::size_t>(grouping.n(), 0), 1);
}

GroupContext GroupContext::stacked(std::span<const spectral::Grouping* const> groupings) {
  std::vector<hypergraph::Hypergraph> parts;
  std::vector<std::size_t> labels, block;
  std::size_t group_offset = 0;
  for (std::size_t b = 0; b < groupings.size(); ++b) {
    const auto& g = *groupings[b];
    parts.push_back(hypergraph::build_hypergraph(g));
    for (auto l : g.labels) {
      labels.push_back(group_offset + l);
      block.push_back(b);
    }
    group_offset += g.k;
  }
  return GroupContext(hypergraph::Hypergraph::disjoint_union(parts), std::move(labels), std::move(block),
                      groupings.size());
}

GroupFeatures group_features(const Tensor& embeddings, const GroupContext& ctx, const hypergraph::HgcnNetwork& net,
                             Aggregator agg) {
  GroupFeatures f;
  if (agg == Aggregator::Gcn) {
    f.h = hypergraph::gcn_forward(embeddings, ctx.labels(), net);
  } else {
    f.h = hypergraph::forward(embeddings, ctx.hypergraph(), net, &f.alphas);
  }
  return f;
}

Tensor q_values(const Tensor& embeddings, const Tensor& h, const Linear& q_head) {
  return q_head(ops::concat({embeddings, h}, 1));
}

Tensor policy_logits(const Tensor& embeddings, const Tensor& h, const Linear& actor_head) {
  return actor_head(ops::concat({embeddings, h}, 1));
}

Tensor policy_probs(const Tensor& embeddings, const Tensor& h, const Linear& actor_head) {
  return ops::softmax(policy_logits(embeddings, h, actor_head), 1);
}

MixingNetwork MixingNetwork::create(std::size_t n_agents, std::size_t state_dim, std::size_t embed_dim, Rng& rng) {
  MixingNetwork m;
  m.n_agents = n_agents;
  m.embed_dim = embed_dim;
  m.hyper_w1 = Linear::create(state_dim, n_agents * embed_dim, rng);
  m.hyper_b1 = Linear::create(state_dim, embed_dim, rng);
  m.hyper_w2 = Linear::create(state_dim, embed_dim, rng);
  m.hyper_b2_in = Linear::create(state_dim, embed_dim, rng);
  m.hyper_b2_out = Linear::create(embed_dim, 1, rng);
  std::vector<double> rep(n_agents * n_agents * embed_dim, 0.0), red(n_agents * embed_dim * embed_dim, 0.0);
  for (std::size_t i = 0; i < n_agents; ++i) {
    for (std::size_t e = 0; e < embed_dim; ++e) {
      rep[i * n_agents * embed_dim + i * embed_dim + e] = 1.0;
      red[(i * embed_dim + e) * embed_dim + e] = 1.0;
    }
  }
  m.repeat = Tensor({n_agents, n_agents * embed_dim}, std::move(rep));
  m.reduce = Tensor({n_agents * embed_dim, embed_dim}, std::move(red));
  return m;
}

void MixingNetwork::collect(const std::string& prefix, NamedParams& out) const {
  hyper_w1.collect(prefix + ".hyper_w1", out);
  hyper_b1.collect(prefix + ".hyper_b1", out);
  hyper_w2.collect(prefix + ".hyper_w2", out);
  hyper_b2_in.collect(prefix + ".hyper_b2_in", out);
  hyper_b2_out.collect(prefix + ".hyper_b2_out", out);
}

Tensor mix(const Tensor& q_chosen, const Tensor& states, const MixingNetwork& mixer) {
  if (q_chosen.rank() != 2 || q_chosen.dim(1) != mixer.n_agents || states.rank() != 2 ||
      states.dim(0) != q_chosen.dim(0)) {
    throw std::invalid_argument("mix: shape mismatch " + shape_str(q_chosen.shape()) + " vs " +
                                shape_str(states.shape()));
  }
  const Tensor w1 = ops::abs(mixer.hyper_w1(states));  // [B, n*E]
  // hidden[b, e] = sum_i q[b, i] * |W1[b, i*E + e]|
  const Tensor spread = ops::mul(ops::matmul(q_chosen, mixer.repeat), w1);
  const Tensor hidden = ops::elu(ops::add(ops::matmul(spread, mixer.reduce), mixer.hyper_b1(states)));
  const Tensor w2 = ops::abs(mixer.hyper_w2(states));  // [B, E]
  const Tensor b2 = mixer.hyper_b2_out(ops::relu(mixer.hyper_b2_in(states)));
  const std::size_t b = states.dim(0);
  return ops::add(ops::reshape(ops::sum(ops::mul(hidden, w2), 1), {b, 1}), b2);
}

Critic Critic::create(std::size_t state_dim, std::size_t h_dim, std::size_t hidden_dim, Rng& rng) {
  return {Linear::create(state_dim + h_dim, hidden_dim, rng), Linear::create(hidden_dim, 1, rng)};
}

void Critic::collect(const std::string& prefix, NamedParams& out) const {
  hidden.collect(prefix + ".hidden", out);
  this->out.collect(prefix + ".out", out);
}

Tensor critic_value(const Tensor& states, const Tensor& h, const Critic& critic) {
  const std::size_t b = states.dim(0);
  if (b == 0 || h.dim(0) % b != 0) {
    throw std::invalid_argument("critic_value: shape mismatch " + shape_str(states.shape()) + " vs " +
                                shape_str(h.shape()));
  }
  const std::size_t n = h.dim(0) / b;
  std::vector<double> avg(b * b * n, 0.0);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < n; ++j) avg[i * b * n + i * n + j] = 1.0 / static_cast<double>(n);
  const Tensor h_mean = ops::matmul(Tensor({b, b * n}, std::move(avg)), h);
  return critic.out(ops::relu(critic.hidden(ops::concat({states, h_mean}, 1))));
}

}  // namespace hygma::learn
