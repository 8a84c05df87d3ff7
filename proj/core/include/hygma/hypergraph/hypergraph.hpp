#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hygma/spectral/spectral.hpp"
#include "hygma/tensor/nn.hpp"
#include "hygma/tensor/tensor.hpp"

namespace hygma::hypergraph {

/// Weighted hypergraph over agents. Immutable after construction; the dense
/// propagation constants are materialized up front so instances can be shared.
class Hypergraph {
 public:
  /// members[e] lists the nodes of hyperedge e. Every edge must be non-empty, every
  /// node covered, and every weight strictly positive.
  Hypergraph(std::size_t n, std::vector<std::vector<std::size_t>> members, std::vector<double> edge_weights);

  static Hypergraph disjoint_union(std::span<const Hypergraph> parts);

  std::size_t n() const { return n_; }
  std::size_t m() const { return members_.size(); }
  const std::vector<std::vector<std::size_t>>& members() const { return members_; }
  const std::vector<double>& edge_weights() const { return edge_weights_; }
  const std::vector<double>& node_degrees() const { return node_degrees_; }
  const std::vector<double>& edge_degrees() const { return edge_degrees_; }
  bool contains(std::size_t node, std::size_t edge) const { return incidence_[node * m() + edge] != 0.0; }

  /// n x m 0/1 matrix H.
  const Tensor& incidence() const { return incidence_t_; }
  /// m x n matrix B^{-1} H^T: row e averages the members of edge e.
  const Tensor& edge_mean() const { return edge_mean_t_; }
  /// m x n matrix W B^{-1} H^T.
  const Tensor& edge_gather() const { return edge_gather_t_; }
  /// n x 1 column of D^{-1/2}.
  const Tensor& node_scale() const { return node_scale_t_; }
  /// n x m additive logit mask: 0 on member edges, -1e30 elsewhere.
  const Tensor& attention_mask() const { return mask_t_; }

 private:
  std::size_t n_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<double> edge_weights_;
  std::vector<double> node_degrees_;
  std::vector<double> edge_degrees_;
  std::vector<double> incidence_;
  Tensor incidence_t_, edge_mean_t_, edge_gather_t_, node_scale_t_, mask_t_;
};

/// One hyperedge per group; weight max(cohesion, 0.1).
Hypergraph build_hypergraph(const spectral::Grouping& grouping);

enum class Activation { Identity, Elu };

struct AttentionHead {
  Tensor att_proj;  // [d_out, d_att], W_s
  Tensor att_vec;   // [2 * d_att, 1], a
};

struct HgcnLayerParams {
  Tensor proj;  // [d_in, d_out], P
  std::vector<AttentionHead> heads;
  double leaky_slope = 0.2;

  static HgcnLayerParams create(std::size_t d_in, std::size_t d_out, std::size_t d_att, std::size_t n_heads,
                                Rng& rng);
  std::size_t in_dim() const { return proj.dim(0); }
  std::size_t out_dim() const { return proj.dim(1); }
  void collect(const std::string& prefix, NamedParams& out) const;
};

struct HgcnNetwork {
  std::vector<HgcnLayerParams> layers;
  Activation activation = Activation::Elu;

  /// Layer widths d_in -> hidden... -> d_out over n_layers layers.
  static HgcnNetwork create(std::size_t d_in, std::size_t d_out, std::size_t n_layers, std::size_t n_heads,
                            Rng& rng);
  std::size_t out_dim() const { return layers.back().out_dim(); }
  void collect(const std::string& prefix, NamedParams& out) const;
};

Tensor apply_activation(const Tensor& x, Activation act);

/// Member-mean hyperedge features, m x d.
Tensor edge_features(const Tensor& node_feats, const Hypergraph& hg);

/// Row-softmaxed attention over each node's member edges, n x m; exactly 0 off-membership.
/// Multiple heads are averaged.
Tensor attention_coeffs(const Tensor& node_feats, const Hypergraph& hg, const HgcnLayerParams& params);

/// sigma( sum_{e ∋ i} alpha_ie (D^{-1/2} H_e w_e B_e^{-1} H_e^T D^{-1/2} X P)_i ).
/// When alpha_out is non-null the attention matrix used is stored there.
Tensor hgcn_layer(const Tensor& node_feats, const Hypergraph& hg, const HgcnLayerParams& params,
                  Activation act = Activation::Elu, Tensor* alpha_out = nullptr);

/// Sequential layers with ELU; attention matrices are appended to alphas when given.
Tensor forward(const Tensor& node_feats, const Hypergraph& hg, const HgcnNetwork& net,
               std::vector<Tensor>* alphas = nullptr);

/// Sum over hyperedges of |g| (|g| - 1).
std::uint64_t message_count(const Hypergraph& hg);

/// Symmetric-normalized clique GCN, sigma(Â X P), with Â built from group cliques plus self-loops.
Tensor gcn_layer_variant(const Tensor& node_feats, const std::vector<std::size_t>& labels,
                         const HgcnLayerParams& params, Activation act = Activation::Elu);
Tensor gcn_layer_variant(const Tensor& node_feats, const spectral::Grouping& grouping, const HgcnLayerParams& params,
                         Activation act = Activation::Elu);

/// Stacked clique-GCN layers sharing HgcnNetwork parameters (attention weights unused).
Tensor gcn_forward(const Tensor& node_feats, const std::vector<std::size_t>& labels, const HgcnNetwork& net);

}  // namespace hygma::hypergraph
