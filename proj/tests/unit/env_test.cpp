#include <gtest/gtest.h>

#include <algorithm>

#include "hygma/env/predator_prey.hpp"

using namespace hygma;
using namespace hygma::env;

namespace {

PPState manual_state(const PPConfig& cfg, std::vector<Cell> predators, Cell prey) {
  PPState s;
  s.predators = std::move(predators);
  s.prey = prey;
  s.captured.assign(cfg.n_predators, false);
  return s;
}

}  // namespace

TEST(PredatorPrey, ResetIsDeterministic) {
  PPConfig cfg;
  Rng a(42), b(42);
  const auto ra = reset(cfg, a);
  const auto rb = reset(cfg, b);
  EXPECT_EQ(ra.state.predators, rb.state.predators);
  EXPECT_EQ(ra.state.prey, rb.state.prey);
  EXPECT_EQ(ra.observations, rb.observations);
}

TEST(PredatorPrey, ResetPlacesOnDistinctCells) {
  PPConfig cfg;
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto r = reset(cfg, rng);
    std::vector<Cell> cells = r.state.predators;
    cells.push_back(r.state.prey);
    for (std::size_t i = 0; i < cells.size(); ++i)
      for (std::size_t j = i + 1; j < cells.size(); ++j) EXPECT_FALSE(cells[i] == cells[j]);
  }
}

TEST(PredatorPrey, PenaltyPerFreePredator) {
  PPConfig cfg;
  Rng rng(3);
  const auto r = reset(cfg, rng);
  const std::vector<int> stay(cfg.n_predators, kStay);
  const auto out = step(cfg, r.state, stay, rng);
  EXPECT_DOUBLE_EQ(out.reward, -0.25);
  EXPECT_FALSE(out.done);
}

TEST(PredatorPrey, AllCapturedEndsWithZeroReward) {
  PPConfig cfg;
  cfg.n_predators = 2;
  const auto s = manual_state(cfg, {{4, 3}, {4, 5}}, {4, 4});
  Rng rng(0);
  const auto out = step(cfg, s, std::vector<int>{kRight, kLeft}, rng);
  EXPECT_EQ(out.reward, 0.0);
  EXPECT_TRUE(out.done);
  EXPECT_TRUE(out.success);
  EXPECT_THROW(step(cfg, out.state, std::vector<int>{kStay, kStay}, rng), std::logic_error);
}

TEST(PredatorPrey, WallBlocksMove) {
  PPConfig cfg;
  cfg.n_predators = 1;
  const auto s = manual_state(cfg, {{0, 2}}, {9, 9});
  Rng rng(0);
  const auto out = step(cfg, s, std::vector<int>{kUp}, rng);
  EXPECT_EQ(out.state.predators[0], (Cell{0, 2}));
}

TEST(PredatorPrey, CaptureIsSticky) {
  PPConfig cfg;
  cfg.n_predators = 2;
  auto s = manual_state(cfg, {{4, 3}, {0, 0}}, {4, 4});
  Rng rng(0);
  auto out = step(cfg, s, std::vector<int>{kRight, kStay}, rng);
  ASSERT_TRUE(out.state.captured[0]);
  EXPECT_DOUBLE_EQ(out.reward, -0.05);
  out = step(cfg, out.state, std::vector<int>{kUp, kStay}, rng);
  EXPECT_TRUE(out.state.captured[0]);
  EXPECT_EQ(out.state.predators[0], (Cell{4, 4}));
}

TEST(PredatorPrey, RejectsBadActions) {
  PPConfig cfg;
  Rng rng(0);
  const auto r = reset(cfg, rng);
  EXPECT_THROW(step(cfg, r.state, std::vector<int>{0, 0}, rng), std::invalid_argument);
  EXPECT_THROW(step(cfg, r.state, std::vector<int>{0, 0, 0, 0, 5}, rng), std::invalid_argument);
}

TEST(PredatorPrey, TimeLimit) {
  PPConfig cfg;
  cfg.max_steps = 3;
  cfg.n_predators = 1;
  auto s = manual_state(cfg, {{0, 0}}, {9, 9});
  Rng rng(0);
  for (int t = 0; t < 3; ++t) {
    ASSERT_FALSE(s.done);
    s = step(cfg, s, std::vector<int>{kStay}, rng).state;
  }
  EXPECT_TRUE(s.done);
}

TEST(PredatorPrey, ObservationLayout) {
  PPConfig cfg;
  cfg.n_predators = 2;
  const auto s = manual_state(cfg, {{0, 0}, {1, 1}}, {0, 1});
  const auto obs = observe(cfg, s);
  ASSERT_EQ(obs.size(), 2u);
  EXPECT_EQ(obs[0].size(), cfg.obs_dim());
  EXPECT_EQ(cfg.obs_dim(), 29u);
  // patch cell (dr=-1, dc=-1) of predator 0 is outside the grid
  EXPECT_EQ(obs[0][0], -1.0);
  EXPECT_EQ(obs[0][1], -1.0);
  EXPECT_EQ(obs[0][2], -1.0);
  // centre cell: self present
  EXPECT_EQ(obs[0][4 * 3 + 0], 1.0);
  // cell (0, +1) holds the prey; cell (+1, +1) holds the other predator
  EXPECT_EQ(obs[0][5 * 3 + 2], 1.0);
  EXPECT_EQ(obs[0][8 * 3 + 1], 1.0);
}

TEST(PredatorPrey, ObservationIgnoresFarCells) {
  PPConfig cfg;
  cfg.n_predators = 1;
  const auto a = observe(cfg, manual_state(cfg, {{0, 0}}, {9, 9}));
  const auto b = observe(cfg, manual_state(cfg, {{0, 0}}, {5, 7}));
  EXPECT_EQ(a, b);
}

TEST(PredatorPrey, GlobalStateLayout) {
  PPConfig cfg;
  Rng rng(2);
  const auto r = reset(cfg, rng);
  const auto g = global_state(cfg, r.state);
  EXPECT_EQ(g.size(), 2 * (cfg.n_predators + 1) + 1);
  EXPECT_EQ(g, global_state(cfg, r.state));

  auto swapped = r.state;
  std::swap(swapped.predators[0], swapped.predators[1]);
  const auto gs = global_state(cfg, swapped);
  EXPECT_EQ(gs[0], g[2]);
  EXPECT_EQ(gs[1], g[3]);
}

TEST(PredatorPrey, RewardBounds) {
  PPConfig cfg;
  Rng rng(5);
  std::uniform_int_distribution<int> act(0, 4);
  for (int ep = 0; ep < 20; ++ep) {
    auto s = reset(cfg, rng).state;
    std::vector<bool> prev(cfg.n_predators, false);
    while (!s.done) {
      std::vector<int> a(cfg.n_predators);
      for (auto& x : a) x = act(rng);
      const auto out = step(cfg, s, a, rng);
      EXPECT_GE(out.reward, -0.05 * cfg.n_predators);
      EXPECT_LE(out.reward, 0.0);
      for (std::size_t i = 0; i < prev.size(); ++i) {
        if (prev[i]) EXPECT_TRUE(out.state.captured[i]);
      }
      prev = out.state.captured;
      s = out.state;
    }
  }
}

TEST(PredatorPrey, RandomBaseline) {
  PPConfig cfg;
  Rng a(7), b(7);
  const double m = random_baseline(cfg, 1000, a);
  EXPECT_GT(m, 38.0);
  EXPECT_LE(m, 40.0);
  EXPECT_EQ(m, random_baseline(cfg, 1000, b));

  PPConfig small;
  small.grid = 3;
  small.n_predators = 1;
  Rng c(7);
  EXPECT_LT(random_baseline(small, 1000, c), 20.0);
}

TEST(PredatorPrey, ValidateRejectsBadConfig) {
  PPConfig cfg;
  cfg.grid = 1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = PPConfig{};
  cfg.n_predators = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
