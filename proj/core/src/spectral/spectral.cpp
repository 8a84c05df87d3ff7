#include "hygma/spectral/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>

namespace hygma::spectral {

namespace {
using Rng = std::mt19937_64;

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = n ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != d) {
      throw std::invalid_argument("trajectories must share one length");
    }
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

std::size_t label_count(const std::vector<std::size_t>& labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// StateHistoryWindow

StateHistoryWindow::StateHistoryWindow(std::size_t n_agents, std::size_t window_len, std::size_t feat_dim)
    : window_len_(window_len), feat_dim_(feat_dim), buffers_(n_agents), mean_(feat_dim, 0.0), m2_(feat_dim, 0.0) {
  if (window_len == 0 || feat_dim == 0) throw std::invalid_argument("StateHistoryWindow: zero window or feature size");
}

void StateHistoryWindow::push(std::span<const std::vector<double>> states) {
  if (states.size() != buffers_.size()) {
    throw std::invalid_argument("StateHistoryWindow::push: expected " + std::to_string(buffers_.size()) +
                                " agents, got " + std::to_string(states.size()));
  }
  for (const auto& s : states) {
    if (s.size() != feat_dim_) throw std::invalid_argument("StateHistoryWindow::push: feature size mismatch");
    ++count_;
    for (std::size_t f = 0; f < feat_dim_; ++f) {
      const double delta = s[f] - mean_[f];
      mean_[f] += delta / static_cast<double>(count_);
      m2_[f] += delta * (s[f] - mean_[f]);
    }
  }
  for (std::size_t a = 0; a < states.size(); ++a) {
    std::vector<double> v(feat_dim_);
    for (std::size_t f = 0; f < feat_dim_; ++f) {
      const double sd = std::sqrt(m2_[f] / static_cast<double>(count_));
      v[f] = (states[a][f] - mean_[f]) / (sd + 1e-8);
    }
    auto& buf = buffers_[a];
    buf.push_back(std::move(v));
    if (buf.size() > window_len_) buf.pop_front();
  }
}

bool StateHistoryWindow::empty() const {
  return std::any_of(buffers_.begin(), buffers_.end(), [](const auto& b) { return b.empty(); });
}

std::vector<std::vector<double>> StateHistoryWindow::trajectories() const {
  std::vector<std::vector<double>> out(buffers_.size(), std::vector<double>(window_len_ * feat_dim_, 0.0));
  for (std::size_t a = 0; a < buffers_.size(); ++a) {
    std::size_t off = 0;
    for (const auto& v : buffers_[a]) {
      std::copy(v.begin(), v.end(), out[a].begin() + static_cast<std::ptrdiff_t>(off));
      off += feat_dim_;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grouping

Grouping Grouping::all_in_one(std::size_t n) {
  Grouping g;
  g.labels.assign(n, 0);
  g.k = 1;
  g.cohesion = {0.0};
  return g;
}

std::vector<std::size_t> Grouping::group_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : labels) ++sizes.at(l);
  return sizes;
}

std::vector<std::size_t> canonical_labels(const std::vector<std::size_t>& labels) {
  std::vector<std::size_t> remap(label_count(labels), std::numeric_limits<std::size_t>::max());
  std::size_t next = 0;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& r = remap[labels[i]];
    if (r == std::numeric_limits<std::size_t>::max()) r = next++;
    out[i] = r;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graph construction

SimilarityGraph build_knn_similarity(const std::vector<std::vector<double>>& trajectories, std::size_t knn) {
  const std::size_t n = trajectories.size();
  if (n == 0) throw std::invalid_argument("build_knn_similarity: empty window");
  if (knn >= n) {
    throw std::invalid_argument("build_knn_similarity: knn " + std::to_string(knn) + " must be below agent count " +
                                std::to_string(n));
  }
  SimilarityGraph g{n, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)), knn};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back(sq_dist(trajectories[i], trajectories[j]), j);
    }
    std::sort(cand.begin(), cand.end());
    for (std::size_t r = 0; r < knn; ++r) {
      const auto j = static_cast<Eigen::Index>(cand[r].second);
      const auto ii = static_cast<Eigen::Index>(i);
      g.weights(ii, j) = 1.0;
      g.weights(j, ii) = 1.0;
    }
  }
  return g;
}

SimilarityGraph build_knn_similarity(const StateHistoryWindow& window, std::size_t knn) {
  if (window.empty()) throw std::invalid_argument("build_knn_similarity: empty window");
  return build_knn_similarity(window.trajectories(), knn);
}

Eigen::MatrixXd normalized_laplacian(const SimilarityGraph& g) {
  Eigen::MatrixXd w = g.weights;
  const Eigen::Index n = w.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w.row(i).sum() <= 0.0) w(i, i) = 1e-8;
  }
  const Eigen::VectorXd inv_sqrt = w.rowwise().sum().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd l = -(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
  l.diagonal().array() += 1.0;
  // Restore exact symmetry lost to rounding.
  return 0.5 * (l + l.transpose());
}

// ---------------------------------------------------------------------------
// Eigensolver

EigenDecomposition eigh(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigh: matrix is not square");
  const Eigen::Index n = m.rows();
  if (n > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("eigh: matrix is not symmetric");
  }
  Eigen::MatrixXd a = m;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  constexpr int kMaxSweeps = 100;
  constexpr double kTol = 1e-10;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off = std::max(off, std::fabs(a(p, q)));
    if (off < kTol) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::fabs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  EigenDecomposition out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    out.values(i) = a(src, src);
    out.vectors.col(i) = v.col(src);
  }
  return out;
}

namespace {

Eigen::MatrixXd embed_from(const EigenDecomposition& eig, std::size_t k) {
  Eigen::MatrixXd u = eig.vectors.leftCols(static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double norm = u.row(i).norm();
    if (norm < 1e-12) {
      u.row(i).setZero();
    } else {
      u.row(i) /= norm;
    }
  }
  return u;
}

}  // namespace

Eigen::MatrixXd spectral_embed(const Eigen::MatrixXd& laplacian, std::size_t k) {
  if (k > static_cast<std::size_t>(laplacian.rows())) {
    throw std::invalid_argument("spectral_embed: k exceeds node count");
  }
  return embed_from(eigh(laplacian), k);
}

// ---------------------------------------------------------------------------
// k-means

namespace {

struct Lloyd {
  const Eigen::MatrixXd& x;
  std::size_t k;

  std::size_t nearest(const Eigen::MatrixXd& centers, Eigen::Index i) const {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const double d = (x.row(i) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm();
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    return best;
  }

  Eigen::MatrixXd seed_plus_plus(Rng& rng) const {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), x.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.row(0) = x.row(pick(rng));
    std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < k; ++c) {
      double total = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        auto& d = d2[static_cast<std::size_t>(i)];
        d = std::min(d, (x.row(i) - centers.row(static_cast<Eigen::Index>(c - 1))).squaredNorm());
        total += d;
      }
      Eigen::Index chosen = 0;
      if (total <= 0.0) {
        chosen = pick(rng);
      } else {
        std::uniform_real_distribution<double> u(0.0, total);
        double r = u(rng);
        chosen = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
          r -= d2[static_cast<std::size_t>(i)];
          if (r < 0.0) {
            chosen = i;
            break;
          }
        }
      }
      centers.row(static_cast<Eigen::Index>(c)) = x.row(chosen);
    }
    return centers;
  }

  Eigen::MatrixXd centroids(const std::vector<std::size_t>& labels, const Eigen::MatrixXd& fallback) const {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), x.cols());
    std::vector<std::size_t> counts(k, 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      c.row(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)])) += x.row(i);
      ++counts[labels[static_cast<std::size_t>(i)]];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j]) {
        c.row(static_cast<Eigen::Index>(j)) /= static_cast<double>(counts[j]);
      } else {
        c.row(static_cast<Eigen::Index>(j)) = fallback.row(static_cast<Eigen::Index>(j));
      }
    }
    return c;
  }

  // Gives every empty cluster the point farthest from its centroid in the largest cluster.
  void repair(std::vector<std::size_t>& labels, Eigen::MatrixXd& centers) const {
    for (;;) {
      std::vector<std::size_t> counts(k, 0);
      for (auto l : labels) ++counts[l];
      const auto empty = std::find(counts.begin(), counts.end(), 0);
      if (empty == counts.end()) return;
      const auto largest = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      Eigen::Index far = -1;
      double fd = -1.0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (labels[static_cast<std::size_t>(i)] != largest) continue;
        const double d = (x.row(i) - centers.row(static_cast<Eigen::Index>(largest))).squaredNorm();
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
      const auto target = static_cast<std::size_t>(empty - counts.begin());
      labels[static_cast<std::size_t>(far)] = target;
      centers = centroids(labels, centers);
    }
  }

  double wcss(const std::vector<std::size_t>& labels, const Eigen::MatrixXd& centers) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      s += (x.row(i) - centers.row(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]))).squaredNorm();
    return s;
  }
};

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::size_t restarts, std::size_t iters,
                    std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0 || k > n) throw std::invalid_argument("kmeans: k must be in [1, n]");
  Rng rng(seed);
  const Lloyd lloyd{points, k};
  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
    Eigen::MatrixXd centers = lloyd.seed_plus_plus(rng);
    std::vector<std::size_t> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) labels[i] = lloyd.nearest(centers, static_cast<Eigen::Index>(i));
    lloyd.repair(labels, centers);
    for (std::size_t it = 0; it < iters; ++it) {
      centers = lloyd.centroids(labels, centers);
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = lloyd.nearest(centers, static_cast<Eigen::Index>(i));
        if (c != labels[i]) {
          labels[i] = c;
          changed = true;
        }
      }
      lloyd.repair(labels, centers);
      if (!changed) break;
    }
    centers = lloyd.centroids(labels, centers);
    const double w = lloyd.wcss(labels, centers);
    if (w < best.wcss) {
      best.wcss = w;
      best.labels = labels;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Silhouette

std::vector<double> silhouette_samples(const Eigen::MatrixXd& points, const std::vector<std::size_t>& labels) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (labels.size() != n) throw std::invalid_argument("silhouette: label count mismatch");
  const std::size_t k = label_count(labels);
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : labels) ++sizes[l];
  if (std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }) < 2) {
    throw std::invalid_argument("silhouette: at least two groups required");
  }
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[labels[i]] <= 1) continue;
    std::vector<double> sums(k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[labels[j]] += (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm();
    }
    const double a = sums[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < k; ++g) {
      if (g != labels[i] && sizes[g] > 0) b = std::min(b, sums[g] / static_cast<double>(sizes[g]));
    }
    const double denom = std::max(a, b);
    s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return s;
}

double silhouette(const Eigen::MatrixXd& points, const std::vector<std::size_t>& labels) {
  const auto s = silhouette_samples(points, labels);
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

// ---------------------------------------------------------------------------
// Group selection and dynamics

Grouping cluster(const std::vector<std::vector<double>>& trajectories, const SpectralConfig& cfg) {
  const std::size_t n = trajectories.size();
  const std::size_t k_lo = std::max<std::size_t>(2, cfg.k_min);
  const std::size_t k_hi = std::min(cfg.k_max, n);
  if (n < 2 || k_lo > k_hi) {
    Grouping g = Grouping::all_in_one(n);
    return g;
  }
  const auto graph = build_knn_similarity(trajectories, std::min(cfg.knn, n - 1));
  const auto eig = eigh(normalized_laplacian(graph));
  const Eigen::MatrixXd points = to_matrix(trajectories);

  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_labels;
  std::vector<double> best_samples;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    const auto km = kmeans(embed_from(eig, k), k, cfg.kmeans_restarts, cfg.kmeans_iters, cfg.seed);
    auto samples = silhouette_samples(points, km.labels);
    const double score = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
    if (score > best_score) {
      best_score = score;
      best_labels = km.labels;
      best_samples = std::move(samples);
    }
  }
  Grouping g;
  g.labels = canonical_labels(best_labels);
  g.k = label_count(g.labels);
  g.cohesion.assign(g.k, 0.0);
  const auto sizes = g.group_sizes();
  for (std::size_t i = 0; i < n; ++i) g.cohesion[g.labels[i]] += best_samples[i];
  for (std::size_t c = 0; c < g.k; ++c) g.cohesion[c] /= static_cast<double>(sizes[c]);
  return g;
}

Grouping cluster(const StateHistoryWindow& window, const SpectralConfig& cfg) {
  if (window.n_agents() >= 2 && window.empty()) throw std::invalid_argument("cluster: empty window");
  return cluster(window.trajectories(), cfg);
}

double ncut(const SimilarityGraph& g, const std::vector<std::size_t>& labels) {
  if (labels.size() != g.n) {
    throw std::invalid_argument("ncut: expected " + std::to_string(g.n) + " labels, got " +
                                std::to_string(labels.size()));
  }
  const std::size_t k = label_count(labels);
  std::vector<double> cut(k, 0.0), vol(k, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = 0; j < g.n; ++j) {
      const double w = g.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      vol[labels[i]] += w;
      if (labels[i] != labels[j]) cut[labels[i]] += w;
    }
  }
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (vol[c] > 0.0) total += cut[c] / vol[c];
  }
  return total;
}

double eta(const std::vector<std::size_t>& prev, const std::vector<std::size_t>& next) {
  if (prev.size() != next.size()) throw std::invalid_argument("eta: groupings cover different agent counts");
  const std::size_t n = prev.size();
  if (n == 0) return 0.0;
  const std::size_t kp = label_count(prev), kn = label_count(next);
  // Rows are the smaller label set so every row can be assigned.
  const bool flip = kp > kn;
  const std::size_t rows = flip ? kn : kp, cols = flip ? kp : kn;
  std::vector<double> overlap(rows * cols, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = flip ? next[i] : prev[i], c = flip ? prev[i] : next[i];
    overlap[r * cols + c] += 1.0;
  }
  // Hungarian method (potentials form) on cost = -overlap; 1-based with a sentinel column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> owner(cols + 1, 0), way(cols + 1, 0);
  for (std::size_t r = 1; r <= rows; ++r) {
    owner[0] = r;
    std::size_t c0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<bool> used(cols + 1, false);
    do {
      used[c0] = true;
      const std::size_t r0 = owner[c0];
      double delta = inf;
      std::size_t c1 = 0;
      for (std::size_t c = 1; c <= cols; ++c) {
        if (used[c]) continue;
        const double cur = -overlap[(r0 - 1) * cols + (c - 1)] - u[r0] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = c0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          c1 = c;
        }
      }
      for (std::size_t c = 0; c <= cols; ++c) {
        if (used[c]) {
          u[owner[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      c0 = c1;
    } while (owner[c0] != 0);
    do {
      const std::size_t c1 = way[c0];
      owner[c0] = owner[c1];
      c0 = c1;
    } while (c0 != 0);
  }
  double kept = 0.0;
  for (std::size_t c = 1; c <= cols; ++c)
    if (owner[c] != 0) kept += overlap[(owner[c] - 1) * cols + (c - 1)];
  return (static_cast<double>(n) - kept) / static_cast<double>(n);
}

double eta(const Grouping& prev, const Grouping& next) { return eta(prev.labels, next.labels); }

Grouping apply_update_rule(const Grouping& prev, Grouping candidate, double delta) {
  const double e = eta(prev, candidate);
  if (prev.version == 0 || e > delta) {
    candidate.version = prev.version + 1;
    candidate.eta_last = e;
    return candidate;
  }
  Grouping kept = prev;
  kept.eta_last = e;
  return kept;
}

Grouping maybe_update(const Grouping& prev, const StateHistoryWindow& window, const SpectralConfig& cfg) {
  return apply_update_rule(prev, cluster(window, cfg), cfg.delta);
}

double potential(const Grouping& grouping, const std::vector<std::vector<double>>& states) {
  if (states.size() != grouping.n()) throw std::invalid_argument("potential: state count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j)
      if (grouping.labels[i] == grouping.labels[j]) total += sq_dist(states[i], states[j]);
  return total;
}

}  // namespace hygma::spectral
