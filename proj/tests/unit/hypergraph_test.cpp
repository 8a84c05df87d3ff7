#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hygma/hypergraph/hypergraph.hpp"
#include "hygma/tensor/ops.hpp"

using namespace hygma;
using namespace hygma::hypergraph;

namespace {

spectral::Grouping grouping(std::vector<std::size_t> labels, std::vector<double> cohesion) {
  spectral::Grouping g;
  g.k = cohesion.size();
  g.labels = std::move(labels);
  g.cohesion = std::move(cohesion);
  g.version = 1;
  return g;
}

HgcnLayerParams identity_layer(std::size_t d) {
  Rng rng(0);
  auto p = HgcnLayerParams::create(d, d, 2, 1, rng);
  auto w = p.proj.mutable_data();
  std::fill(w.begin(), w.end(), 0.0);
  for (std::size_t i = 0; i < d; ++i) w[i * d + i] = 1.0;
  return p;
}

}  // namespace

TEST(Hypergraph, IncidenceAndWeights) {
  const auto hg = build_hypergraph(grouping({0, 0, 1}, {0.8, 0.5}));
  ASSERT_EQ(hg.m(), 2u);
  const std::vector<double> want{1, 0, 1, 0, 0, 1};
  const auto h = hg.incidence().data();
  EXPECT_TRUE(std::equal(h.begin(), h.end(), want.begin()));
  EXPECT_EQ(hg.edge_weights(), (std::vector<double>{0.8, 0.5}));
}

TEST(Hypergraph, AllInOne) {
  const auto hg = build_hypergraph(grouping({0, 0, 0, 0}, {0.7}));
  EXPECT_EQ(hg.m(), 1u);
  EXPECT_EQ(hg.edge_degrees(), (std::vector<double>{4.0}));
  for (double d : hg.node_degrees()) EXPECT_DOUBLE_EQ(d, 0.7);
}

TEST(Hypergraph, WeightClamp) {
  const auto hg = build_hypergraph(grouping({0, 1}, {-0.2, 0.4}));
  EXPECT_DOUBLE_EQ(hg.edge_weights()[0], 0.1);
  EXPECT_DOUBLE_EQ(hg.edge_weights()[1], 0.4);
}

TEST(Hypergraph, RejectsEmptyEdgeAndUncoveredNode) {
  EXPECT_THROW(Hypergraph(2, {{0}, {}}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(Hypergraph(3, {{0, 1}}, {1.0}), std::invalid_argument);
  EXPECT_THROW(Hypergraph(2, {{0, 1}}, {0.0}), std::invalid_argument);
}

TEST(EdgeFeatures, Mean) {
  const auto hg = build_hypergraph(grouping({0, 0, 1}, {1, 1}));
  const auto e = edge_features(Tensor({3, 1}, {1, 3, 5}), hg);
  EXPECT_DOUBLE_EQ(e[0], 2.0);
  EXPECT_DOUBLE_EQ(e[1], 5.0);
}

TEST(Attention, SingleMembershipIsOne) {
  Rng rng(4);
  const auto hg = build_hypergraph(grouping({0, 1, 0, 2}, {1, 1, 1}));
  const auto p = HgcnLayerParams::create(3, 3, 4, 2, rng);
  const auto a = attention_coeffs(Tensor::uniform({4, 3}, -1, 1, rng), hg, p);
  for (std::size_t i = 0; i < 4; ++i) {
    double row = 0.0;
    for (std::size_t e = 0; e < 3; ++e) {
      row += a.at(i, e);
      EXPECT_EQ(a.at(i, e), hg.contains(i, e) ? 1.0 : 0.0);
    }
    EXPECT_NEAR(row, 1.0, 1e-12);
  }
}

TEST(Attention, SymmetricOverlapSplitsEvenly) {
  Rng rng(5);
  // node 0 belongs to both edges; identical member features give identical edge features
  const Hypergraph hg(3, {{0, 1}, {0, 2}}, {1.0, 1.0});
  const auto p = HgcnLayerParams::create(2, 2, 3, 1, rng);
  const auto a = attention_coeffs(Tensor::matrix({{1, 2}, {3, 4}, {3, 4}}), hg, p);
  EXPECT_NEAR(a.at(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(a.at(0, 1), 0.5, 1e-12);
}

TEST(HgcnLayer, SingleEdgeMeanPropagation) {
  const std::size_t n = 4;
  const auto hg = build_hypergraph(grouping({0, 0, 0, 0}, {1.0}));
  const auto p = identity_layer(2);
  const auto x = Tensor::matrix({{1, 2}, {3, -1}, {0, 5}, {4, 2}});
  const auto y = hgcn_layer(x, hg, p, Activation::Identity);
  // D = I, B = n: every row is (1/n) * column-sum
  for (std::size_t c = 0; c < 2; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += x.at(r, c);
    for (std::size_t r = 0; r < n; ++r) EXPECT_NEAR(y.at(r, c), s / n, 1e-12);
  }
}

TEST(HgcnLayer, DisjointEdgesDoNotLeak) {
  Rng rng(6);
  const auto hg = build_hypergraph(grouping({0, 0, 1, 1, 1}, {0.6, 0.9}));
  const auto p = HgcnLayerParams::create(3, 4, 3, 2, rng);
  const auto x = Tensor::uniform({5, 3}, -1, 1, rng);
  auto x2 = x.clone();
  x2.mutable_data()[0] += 7.0;
  x2.mutable_data()[4] -= 3.0;
  const auto y1 = hgcn_layer(x, hg, p);
  const auto y2 = hgcn_layer(x2, hg, p);
  for (std::size_t r = 2; r < 5; ++r)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(y1.at(r, c), y2.at(r, c));
}

TEST(HgcnLayer, PermutationEquivariant) {
  Rng rng(7);
  const std::vector<std::size_t> labels{0, 1, 0, 2, 1, 2};
  const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  std::vector<std::size_t> plabels(6);
  for (std::size_t i = 0; i < 6; ++i) plabels[i] = labels[perm[i]];
  const std::vector<double> coh{0.3, 0.7, 0.5};
  const auto p = HgcnLayerParams::create(3, 4, 3, 2, rng);
  const auto x = Tensor::uniform({6, 3}, -1, 1, rng);
  const auto y = hgcn_layer(x, build_hypergraph(grouping(labels, coh)), p);
  const auto yp = hgcn_layer(ops::gather(x, perm), build_hypergraph(grouping(plabels, coh)), p);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(yp.at(i, c), y.at(perm[i], c), 1e-10);
}

TEST(HgcnLayer, ZeroInputZeroOutput) {
  Rng rng(8);
  const auto hg = build_hypergraph(grouping({0, 1, 1}, {0.5, 0.5}));
  Rng rng2(9);
  const auto net = HgcnNetwork::create(3, 4, 2, 1, rng2);
  const auto y = forward(Tensor::zeros({3, 3}), hg, net);
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(MessageCount, BalancedPairs) {
  EXPECT_EQ(message_count(build_hypergraph(grouping({0, 0, 1, 1, 2, 2}, {1, 1, 1}))), 6u);
  EXPECT_EQ(message_count(build_hypergraph(grouping({0, 0, 0, 0, 0, 0}, {1}))), 30u);
  EXPECT_EQ(message_count(build_hypergraph(grouping({0, 1, 2}, {1, 1, 1}))), 0u);
}

TEST(Gcn, SingletonsAreIdentityAdjacency) {
  const auto p = identity_layer(2);
  const auto x = Tensor::matrix({{1, -2}, {3, 4}});
  const auto y = gcn_layer_variant(x, std::vector<std::size_t>{0, 1}, p, Activation::Identity);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(y[i], x[i], 1e-15);
}

TEST(Gcn, PairAverages) {
  const auto p = identity_layer(2);
  const auto x = Tensor::matrix({{1, -2}, {3, 4}});
  const auto y = gcn_layer_variant(x, std::vector<std::size_t>{0, 0}, p, Activation::Identity);
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_NEAR(y.at(r, 0), 2.0, 1e-15);
    EXPECT_NEAR(y.at(r, 1), 1.0, 1e-15);
  }
}
