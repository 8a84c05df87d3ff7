#include "hygma/hypergraph/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hygma/tensor/ops.hpp"

namespace hygma::hypergraph {

namespace {
constexpr double kMaskedLogit = -1e30;
constexpr double kMinEdgeWeight = 0.1;
}  // namespace

Hypergraph::Hypergraph(std::size_t n, std::vector<std::vector<std::size_t>> members, std::vector<double> edge_weights)
    : n_(n), members_(std::move(members)), edge_weights_(std::move(edge_weights)) {
  const std::size_t m = members_.size();
  if (edge_weights_.size() != m) throw std::invalid_argument("Hypergraph: one weight per hyperedge required");
  incidence_.assign(n * m, 0.0);
  node_degrees_.assign(n, 0.0);
  edge_degrees_.assign(m, 0.0);
  for (std::size_t e = 0; e < m; ++e) {
    if (members_[e].empty()) throw std::invalid_argument("Hypergraph: empty hyperedge " + std::to_string(e));
    if (!(edge_weights_[e] > 0.0)) throw std::invalid_argument("Hypergraph: non-positive edge weight");
    for (auto i : members_[e]) {
      if (i >= n) throw std::invalid_argument("Hypergraph: member index out of range");
      if (incidence_[i * m + e] != 0.0) throw std::invalid_argument("Hypergraph: duplicate member");
      incidence_[i * m + e] = 1.0;
      node_degrees_[i] += edge_weights_[e];
      edge_degrees_[e] += 1.0;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (node_degrees_[i] == 0.0) throw std::invalid_argument("Hypergraph: node " + std::to_string(i) + " uncovered");
  }

  std::vector<double> mean(m * n, 0.0), gather(m * n, 0.0), scale(n), mask(n * m, kMaskedLogit);
  for (std::size_t e = 0; e < m; ++e) {
    for (auto i : members_[e]) {
      mean[e * n + i] = 1.0 / edge_degrees_[e];
      gather[e * n + i] = edge_weights_[e] / edge_degrees_[e];
      mask[i * m + e] = 0.0;
    }
  }
  for (std::size_t i = 0; i < n; ++i) scale[i] = 1.0 / std::sqrt(node_degrees_[i]);
  incidence_t_ = Tensor({n, m}, incidence_);
  edge_mean_t_ = Tensor({m, n}, std::move(mean));
  edge_gather_t_ = Tensor({m, n}, std::move(gather));
  node_scale_t_ = Tensor({n, 1}, std::move(scale));
  mask_t_ = Tensor({n, m}, std::move(mask));
}

Hypergraph Hypergraph::disjoint_union(std::span<const Hypergraph> parts) {
  std::size_t offset = 0;
  std::vector<std::vector<std::size_t>> members;
  std::vector<double> weights;
  for (const auto& p : parts) {
    for (std::size_t e = 0; e < p.m(); ++e) {
      std::vector<std::size_t> shifted = p.members()[e];
      for (auto& i : shifted) i += offset;
      members.push_back(std::move(shifted));
      weights.push_back(p.edge_weights()[e]);
    }
    offset += p.n();
  }
  return Hypergraph(offset, std::move(members), std::move(weights));
}

Hypergraph build_hypergraph(const spectral::Grouping& grouping) {
  std::vector<std::vector<std::size_t>> members(grouping.k);
  for (std::size_t i = 0; i < grouping.labels.size(); ++i) members.at(grouping.labels[i]).push_back(i);
  std::vector<double> weights(grouping.k);
  for (std::size_t g = 0; g < grouping.k; ++g) {
    const double c = g < grouping.cohesion.size() ? grouping.cohesion[g] : 0.0;
    weights[g] = std::max(c, kMinEdgeWeight);
  }
  return Hypergraph(grouping.labels.size(), std::move(members), std::move(weights));
}

HgcnLayerParams HgcnLayerParams::create(std::size_t d_in, std::size_t d_out, std::size_t d_att, std::size_t n_heads,
                                        Rng& rng) {
  HgcnLayerParams p;
  p.proj = init_param({d_in, d_out}, d_in, rng);
  for (std::size_t h = 0; h < std::max<std::size_t>(n_heads, 1); ++h) {
    AttentionHead head;
    head.att_proj = init_param({d_out, d_att}, d_out, rng);
    head.att_vec = init_param({2 * d_att, 1}, 2 * d_att, rng);
    p.heads.push_back(std::move(head));
  }
  return p;
}

void HgcnLayerParams::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".proj", proj);
  for (std::size_t h = 0; h < heads.size(); ++h) {
    const std::string hp = prefix + ".head" + std::to_string(h);
    out.emplace_back(hp + ".att_proj", heads[h].att_proj);
    out.emplace_back(hp + ".att_vec", heads[h].att_vec);
  }
}

HgcnNetwork HgcnNetwork::create(std::size_t d_in, std::size_t d_out, std::size_t n_layers, std::size_t n_heads,
                                Rng& rng) {
  HgcnNetwork net;
  std::size_t width = d_in;
  for (std::size_t l = 0; l < std::max<std::size_t>(n_layers, 1); ++l) {
    net.layers.push_back(HgcnLayerParams::create(width, d_out, d_out, n_heads, rng));
    width = d_out;
  }
  return net;
}

void HgcnNetwork::collect(const std::string& prefix, NamedParams& out) const {
  for (std::size_t l = 0; l < layers.size(); ++l) layers[l].collect(prefix + ".layer" + std::to_string(l), out);
}

Tensor apply_activation(const Tensor& x, Activation act) {
  return act == Activation::Elu ? ops::elu(x) : x;
}

Tensor edge_features(const Tensor& node_feats, const Hypergraph& hg) {
  return ops::matmul(hg.edge_mean(), node_feats);
}

namespace {

Tensor attention_from_projected(const Tensor& projected, const Hypergraph& hg, const HgcnLayerParams& params) {
  const Tensor edges = edge_features(projected, hg);
  Tensor total;
  for (std::size_t h = 0; h < params.heads.size(); ++h) {
    const auto& head = params.heads[h];
    const std::size_t d_att = head.att_proj.dim(1);
    const Tensor a_node = ops::slice(head.att_vec, 0, 0, d_att);
    const Tensor a_edge = ops::slice(head.att_vec, 0, d_att, 2 * d_att);
    const Tensor node_term = ops::matmul(ops::matmul(projected, head.att_proj), a_node);       // n x 1
    const Tensor edge_term = ops::matmul(ops::matmul(edges, head.att_proj), a_edge);          // m x 1
    const Tensor logits = ops::leaky_relu(ops::add(node_term, ops::transpose(edge_term)), params.leaky_slope);
    const Tensor alpha = ops::softmax(ops::add(logits, hg.attention_mask()), 1);
    total = h == 0 ? alpha : ops::add(total, alpha);
  }
  if (params.heads.size() > 1) total = ops::scale(total, 1.0 / static_cast<double>(params.heads.size()));
  return total;
}

}  // namespace

Tensor attention_coeffs(const Tensor& node_feats, const Hypergraph& hg, const HgcnLayerParams& params) {
  return attention_from_projected(ops::matmul(node_feats, params.proj), hg, params);
}

Tensor hgcn_layer(const Tensor& node_feats, const Hypergraph& hg, const HgcnLayerParams& params, Activation act,
                  Tensor* alpha_out) {
  if (node_feats.rank() != 2 || node_feats.dim(0) != hg.n() || node_feats.dim(1) != params.in_dim()) {
    throw std::invalid_argument("hgcn_layer: shape mismatch " + shape_str(node_feats.shape()) + " vs " +
                                shape_str({hg.n(), params.in_dim()}));
  }
  const Tensor projected = ops::matmul(node_feats, params.proj);
  const Tensor alpha = attention_from_projected(projected, hg, params);
  if (alpha_out) *alpha_out = alpha;
  // Per-edge messages W_e B_e^{-1} H_e^T D^{-1/2} X P, then attention-weighted return.
  const Tensor per_edge = ops::matmul(hg.edge_gather(), ops::mul(projected, hg.node_scale()));
  const Tensor agg = ops::mul(ops::matmul(alpha, per_edge), hg.node_scale());
  return apply_activation(agg, act);
}

Tensor forward(const Tensor& node_feats, const Hypergraph& hg, const HgcnNetwork& net, std::vector<Tensor>* alphas) {
  Tensor x = node_feats;
  for (const auto& layer : net.layers) {
    Tensor alpha;
    x = hgcn_layer(x, hg, layer, net.activation, &alpha);
    if (alphas) alphas->push_back(alpha);
  }
  return x;
}

std::uint64_t message_count(const Hypergraph& hg) {
  std::uint64_t total = 0;
  for (const auto& e : hg.members()) total += static_cast<std::uint64_t>(e.size()) * (e.size() - 1);
  return total;
}

namespace {

Tensor clique_adjacency(const std::vector<std::size_t>& labels) {
  const std::size_t n = labels.size();
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (labels[i] == labels[j]) deg[i] += 1.0;  // includes the self-loop
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (labels[i] == labels[j]) a[i * n + j] = 1.0 / std::sqrt(deg[i] * deg[j]);
  return Tensor({n, n}, std::move(a));
}

}  // namespace

Tensor gcn_layer_variant(const Tensor& node_feats, const std::vector<std::size_t>& labels,
                         const HgcnLayerParams& params, Activation act) {
  if (node_feats.rank() != 2 || node_feats.dim(0) != labels.size()) {
    throw std::invalid_argument("gcn_layer_variant: shape mismatch " + shape_str(node_feats.shape()) + " vs " +
                                std::to_string(labels.size()) + " labels");
  }
  return apply_activation(ops::matmul(clique_adjacency(labels), ops::matmul(node_feats, params.proj)), act);
}

Tensor gcn_layer_variant(const Tensor& node_feats, const spectral::Grouping& grouping, const HgcnLayerParams& params,
                         Activation act) {
  return gcn_layer_variant(node_feats, grouping.labels, params, act);
}

Tensor gcn_forward(const Tensor& node_feats, const std::vector<std::size_t>& labels, const HgcnNetwork& net) {
  const Tensor adj = clique_adjacency(labels);
  Tensor x = node_feats;
  for (const auto& layer : net.layers) x = apply_activation(ops::matmul(adj, ops::matmul(x, layer.proj)), net.activation);
  return x;
}

}  // namespace hygma::hypergraph
