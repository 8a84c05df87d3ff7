#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

namespace hygma::spectral {

/// Rolling per-agent buffer of the last window_len normalized state vectors.
///
/// Features are standardized with running per-feature statistics accumulated over
/// every vector pushed so far: (x - mean) / (std + 1e-8).
class StateHistoryWindow {
 public:
  StateHistoryWindow(std::size_t n_agents, std::size_t window_len, std::size_t feat_dim);

  /// Appends one step for every agent. states.size() must equal n_agents.
  void push(std::span<const std::vector<double>> states);

  std::size_t n_agents() const { return buffers_.size(); }
  std::size_t window_len() const { return window_len_; }
  std::size_t feat_dim() const { return feat_dim_; }
  std::size_t stored(std::size_t agent) const { return buffers_.at(agent).size(); }
  bool empty() const;
  const std::deque<std::vector<double>>& history(std::size_t agent) const { return buffers_.at(agent); }

  /// Per-agent trajectories flattened oldest-first, zero-padded to window_len * feat_dim.
  std::vector<std::vector<double>> trajectories() const;

 private:
  std::size_t window_len_;
  std::size_t feat_dim_;
  std::vector<std::deque<std::vector<double>>> buffers_;
  std::uint64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

struct SimilarityGraph {
  std::size_t n = 0;
  Eigen::MatrixXd weights;  // symmetric, nonnegative, zero diagonal
  std::size_t knn = 0;
};

struct Grouping {
  std::vector<std::size_t> labels;
  std::size_t k = 1;
  std::vector<double> cohesion;
  std::uint64_t version = 0;
  double eta_last = 0.0;

  /// Everyone in one group, version 0: the placeholder before any clustering has run.
  static Grouping all_in_one(std::size_t n);
  std::size_t n() const { return labels.size(); }
  std::vector<std::size_t> group_sizes() const;
};

struct SpectralConfig {
  std::size_t k_min = 2;
  std::size_t k_max = 4;
  std::size_t knn = 2;
  double delta = 0.8;
  std::size_t interval = 100;
  std::size_t kmeans_restarts = 10;
  std::size_t kmeans_iters = 100;
  std::uint64_t seed = 0;
  std::size_t window_len = 8;
};

struct EigenDecomposition {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column i pairs with values[i]
};

struct KMeansResult {
  std::vector<std::size_t> labels;
  double wcss = 0.0;
};

/// Binary mutual-or-one-sided kNN graph over Euclidean distances between trajectories.
/// Ties in distance resolve toward the lower agent index.
SimilarityGraph build_knn_similarity(const std::vector<std::vector<double>>& trajectories, std::size_t knn);
SimilarityGraph build_knn_similarity(const StateHistoryWindow& window, std::size_t knn);

/// I - D^{-1/2} W D^{-1/2}; isolated nodes receive a 1e-8 self-loop first.
Eigen::MatrixXd normalized_laplacian(const SimilarityGraph& g);

/// Cyclic Jacobi eigensolver for symmetric matrices.
EigenDecomposition eigh(const Eigen::MatrixXd& m);

/// The k smallest-eigenvalue eigenvectors as columns, rows L2-normalized.
Eigen::MatrixXd spectral_embed(const Eigen::MatrixXd& laplacian, std::size_t k);

/// k-means++ seeded Lloyd iterations, best of restarts by within-cluster sum of squares.
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::size_t restarts,
                    std::size_t iters, std::uint64_t seed);

/// Per-point silhouette values; singleton-group members and zero-distance points get 0.
std::vector<double> silhouette_samples(const Eigen::MatrixXd& points, const std::vector<std::size_t>& labels);
double silhouette(const Eigen::MatrixXd& points, const std::vector<std::size_t>& labels);

/// Selects k by maximal mean silhouette over [max(2, k_min), k_max]; ties go to smaller k.
/// Silhouettes are measured on the flattened trajectories.
Grouping cluster(const StateHistoryWindow& window, const SpectralConfig& cfg);
Grouping cluster(const std::vector<std::vector<double>>& trajectories, const SpectralConfig& cfg);

double ncut(const SimilarityGraph& g, const std::vector<std::size_t>& labels);

/// Fraction of agents whose group changes under the optimal (max-overlap) label matching.
double eta(const Grouping& prev, const Grouping& next);
double eta(const std::vector<std::size_t>& prev, const std::vector<std::size_t>& next);

/// Adopts candidate (version + 1) iff eta(prev, candidate) > delta. A version-0
/// placeholder is always replaced by the first candidate.
Grouping apply_update_rule(const Grouping& prev, Grouping candidate, double delta);
Grouping maybe_update(const Grouping& prev, const StateHistoryWindow& window, const SpectralConfig& cfg);

/// Sum over groups of squared Euclidean distances over unordered intra-group pairs.
double potential(const Grouping& grouping, const std::vector<std::vector<double>>& states);

/// Relabels groups in order of first appearance.
std::vector<std::size_t> canonical_labels(const std::vector<std::size_t>& labels);

}  // namespace hygma::spectral
