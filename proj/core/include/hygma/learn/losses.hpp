#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hygma/hypergraph/hypergraph.hpp"
#include "hygma/tensor/tensor.hpp"

namespace hygma::learn {

struct LossWeights {
  double lambda1 = 0.1;
  double lambda2 = 0.01;
  double beta = 0.5;
  double gamma = 0.99;
  double alpha_critic = 0.5;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct GroupLoss {
  Tensor loss;     // pair-count-normalized cross term
  double literal;  // same objective with the cross term divided by |C_l| only
};

/// Sum over groups of [mean intra-group pairwise distance
///   - beta * min over other groups of mean cross-group distance].
/// labels[r] is the group of row r.
GroupLoss group_loss(const Tensor& h, const std::vector<std::size_t>& labels, double beta);

/// Stacked variant: block[r] names the batch element owning row r, groups only compete
/// within their own block, and each block's sum is scaled by block_weight[b] (0 skips it).
GroupLoss group_loss(const Tensor& h, const std::vector<std::size_t>& labels, const std::vector<std::size_t>& block,
                     std::span<const double> block_weight, double beta);

/// -sum_i sum_{e ∋ i} alpha_ie log alpha_ie, with 0 log 0 = 0.
Tensor att_entropy_loss(const Tensor& alpha, const hypergraph::Hypergraph& hg);
/// Row-weighted variant; row_weight has one entry per node.
Tensor att_entropy_loss(const Tensor& alpha, const hypergraph::Hypergraph& hg, std::span<const double> row_weight);

/// task + lambda1 * group + lambda2 * att.
Tensor total_loss(const Tensor& task, const Tensor& group, const Tensor& att, const LossWeights& w);

enum class Mode { Value, Policy };

/// Value mode: per row argmax (lowest index on ties) with probability 1 - epsilon, else
/// uniform. Policy mode: categorical draw from the row distribution.
std::vector<int> select_actions(const Tensor& q_or_probs, Mode mode, double epsilon, Rng& rng);

/// Row argmax with ties to the lowest index.
std::vector<int> greedy_actions(const Tensor& scores);

}  // namespace hygma::learn
