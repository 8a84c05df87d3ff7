#include "hygma/learn/losses.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hygma/tensor/ops.hpp"

namespace hygma::learn {

namespace {
// Keeps sqrt differentiable at coincident points without visibly shifting distances.
constexpr double kDistEps = 1e-18;
constexpr double kLogFloor = 1e-300;

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string("learn.") + name + " must be finite");
}
}  // namespace

void LossWeights::validate() const {
  require_finite(lambda1, "lambda1");
  require_finite(lambda2, "lambda2");
  require_finite(beta, "beta");
  require_finite(alpha_critic, "alpha_critic");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("learn.gamma must be in [0,1)");
}

GroupLoss group_loss(const Tensor& h, const std::vector<std::size_t>& labels, double beta) {
  const std::vector<std::size_t> block(labels.size(), 0);
  const double one = 1.0;
  return group_loss(h, labels, block, std::span<const double>(&one, 1), beta);
}

GroupLoss group_loss(const Tensor& h, const std::vector<std::size_t>& labels, const std::vector<std::size_t>& block,
                     std::span<const double> block_weight, double beta) {
  const std::size_t r = h.dim(0);
  if (h.rank() != 2 || labels.size() != r || block.size() != r) {
    throw std::invalid_argument("group_loss: shape mismatch " + shape_str(h.shape()) + " vs " +
                                std::to_string(labels.size()) + " labels");
  }
  std::size_t k = 0;
  for (auto l : labels) k = std::max(k, l + 1);
  std::vector<double> size(k, 0.0);
  std::vector<std::size_t> group_block(k, 0);
  std::vector<double> indicator(r * k, 0.0), off_diag(r * r, 1.0);
  for (std::size_t i = 0; i < r; ++i) {
    indicator[i * k + labels[i]] = 1.0;
    size[labels[i]] += 1.0;
    group_block[labels[i]] = block[i];
    off_diag[i * r + i] = 0.0;
  }
  const Tensor g({r, k}, std::move(indicator));

  // Pairwise distances from the Gram matrix, diagonal masked out.
  const Tensor sq = ops::reshape(ops::sum(ops::square(h), 1), {r, 1});
  const Tensor d2 = ops::relu(ops::add(ops::add(sq, ops::transpose(sq)), ops::scale(ops::matmul(h, ops::transpose(h)), -2.0)));
  const Tensor dist = ops::mul(ops::sqrt(ops::add_scalar(d2, kDistEps)), Tensor({r, r}, std::move(off_diag)));
  const Tensor pair_sums = ops::matmul(ops::transpose(g), ops::matmul(dist, g));  // [k, k], ordered pairs
  const auto c = pair_sums.data();

  std::vector<double> coef(k * k, 0.0);
  double literal = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    if (size[a] == 0.0) continue;
    const double w = block_weight[group_block[a]];
    if (w == 0.0) continue;
    if (size[a] > 1.0) coef[a * k + a] += w / (size[a] * (size[a] - 1.0));
    literal += w * c[a * k + a] / size[a];
    double best = std::numeric_limits<double>::infinity(), best_literal = best;
    std::size_t best_l = k;
    for (std::size_t l = 0; l < k; ++l) {
      if (l == a || size[l] == 0.0 || group_block[l] != group_block[a]) continue;
      const double m = c[a * k + l] / (size[a] * size[l]);
      if (m < best) {
        best = m;
        best_l = l;
      }
      best_literal = std::min(best_literal, c[a * k + l] / size[l]);
    }
    if (best_l < k) {
      coef[a * k + best_l] -= w * beta / (size[a] * size[best_l]);
      literal -= w * beta * best_literal;
    }
  }
  Tensor loss = ops::sum(ops::mul(pair_sums, Tensor({k, k}, std::move(coef))));
  return {loss, literal};
}

Tensor att_entropy_loss(const Tensor& alpha, const hypergraph::Hypergraph& hg) {
  const std::vector<double> ones(hg.n(), 1.0);
  return att_entropy_loss(alpha, hg, ones);
}

Tensor att_entropy_loss(const Tensor& alpha, const hypergraph::Hypergraph& hg, std::span<const double> row_weight) {
  const std::size_t n = hg.n(), m = hg.m();
  if (alpha.rank() != 2 || alpha.dim(0) != n || alpha.dim(1) != m || row_weight.size() != n) {
    throw std::invalid_argument("att_entropy_loss: shape mismatch " + shape_str(alpha.shape()) + " vs " +
                                shape_str({n, m}));
  }
  // Non-member entries are exactly zero; shifting them to log(1) keeps 0 log 0 = 0.
  std::vector<double> shift(n * m), weight(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t e = 0; e < m; ++e) {
      shift[i * m + e] = (hg.contains(i, e) ? 0.0 : 1.0) + kLogFloor;
      weight[i * m + e] = -row_weight[i];
    }
  }
  const Tensor logs = ops::log(ops::add(alpha, Tensor({n, m}, std::move(shift))));
  return ops::sum(ops::mul(ops::mul(alpha, logs), Tensor({n, m}, std::move(weight))));
}

Tensor total_loss(const Tensor& task, const Tensor& group, const Tensor& att, const LossWeights& w) {
  return ops::add(ops::add(task, ops::scale(group, w.lambda1)), ops::scale(att, w.lambda2));
}

std::vector<int> greedy_actions(const Tensor& scores) {
  const std::size_t rows = scores.dim(0), cols = scores.dim(1);
  std::vector<int> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < cols; ++c)
      if (scores.at(r, c) > scores.at(r, best)) best = c;
    out[r] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> select_actions(const Tensor& q_or_probs, Mode mode, double epsilon, Rng& rng) {
  const std::size_t rows = q_or_probs.dim(0), cols = q_or_probs.dim(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> out(rows);
  if (mode == Mode::Value) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("select_actions: epsilon must be in [0,1]");
    const auto greedy = greedy_actions(q_or_probs);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(cols) - 1);
    for (std::size_t r = 0; r < rows; ++r) out[r] = unit(rng) < epsilon ? pick(rng) : greedy[r];
    return out;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const double u = unit(rng);
    double acc = 0.0;
    std::size_t a = cols - 1;
    for (std::size_t c = 0; c < cols; ++c) {
      acc += q_or_probs.at(r, c);
      if (u < acc) {
        a = c;
        break;
      }
    }
    out[r] = static_cast<int>(a);
  }
  return out;
}

}  // namespace hygma::learn
