#include <gtest/gtest.h>

#include <cmath>

#include "hygma/learn/trainer.hpp"
#include "hygma/tensor/ops.hpp"

using namespace hygma;
using namespace hygma::learn;

namespace {

void zero(Tensor t) {
  for (auto& v : t.mutable_data()) v = 0.0;
}

void zero(const Linear& l) {
  zero(l.weight);
  zero(l.bias);
}

void zero_prefix(const NamedParams& params, const std::string& prefix) {
  for (const auto& [name, t] : params)
    if (name.rfind(prefix, 0) == 0) zero(t);
}

spectral::Grouping pairs_grouping() {
  spectral::Grouping g;
  g.labels = {0, 0, 1, 1};
  g.k = 2;
  g.cohesion = {0.5, 0.5};
  g.version = 1;
  return g;
}

TrainConfig small_config(Mode mode, std::size_t n) {
  TrainConfig cfg;
  cfg.env.grid = 5;
  cfg.env.n_predators = n;
  cfg.env.max_steps = 10;
  cfg.model.hidden_dim = 8;
  cfg.model.hgcn_out = 6;
  cfg.model.mixer_embed = 4;
  cfg.model.critic_hidden = 5;
  cfg.learn.mode = mode;
  return cfg;
}

Episode constant_episode(const TrainConfig& cfg, std::size_t steps, double reward) {
  Episode ep;
  ep.grouping = spectral::Grouping::all_in_one(cfg.env.n_predators);
  const std::size_t n = cfg.env.n_predators;
  for (std::size_t t = 0; t < steps; ++t) {
    Transition tr;
    tr.obs.assign(n, std::vector<double>(cfg.env.obs_dim(), 0.1 * static_cast<double>(t)));
    tr.next_obs = tr.obs;
    tr.actions.assign(n, 0);
    tr.hidden.assign(n, std::vector<double>(cfg.model.hidden_dim, 0.0));
    tr.reward = reward;
    tr.done = t + 1 == steps;
    tr.state.assign(cfg.env.state_dim(), 0.5);
    tr.next_state = tr.state;
    ep.steps.push_back(tr);
    ep.total_reward += reward;
  }
  return ep;
}

}  // namespace

TEST(Encoder, ZeroWeightsZeroEmbeddings) {
  Rng rng(1);
  const auto enc = AgentEncoder::create(6, 4, rng);
  NamedParams p;
  enc.collect("e", p);
  zero_prefix(p, "e");
  const auto out = encode(Tensor::uniform({3, 6}, -1, 1, rng), Tensor::zeros({3, 4}), enc);
  for (double v : out.embeddings.data()) EXPECT_EQ(v, 0.0);
}

TEST(Encoder, HiddenStateMatters) {
  Rng rng(2);
  const auto enc = AgentEncoder::create(6, 4, rng);
  const auto obs = Tensor::uniform({2, 6}, -1, 1, rng);
  const auto a = encode(obs, Tensor::zeros({2, 4}), enc);
  const auto b = encode(obs, Tensor::full({2, 4}, 0.5), enc);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.embeddings.numel(); ++i) diff += std::abs(a.embeddings[i] - b.embeddings[i]);
  EXPECT_GT(diff, 1e-6);
}

TEST(Heads, ZeroHeadGivesZeroQ) {
  Rng rng(3);
  auto head = Linear::create(7, 5, rng);
  zero(head);
  const auto q = q_values(Tensor::uniform({3, 4}, -1, 1, rng), Tensor::uniform({3, 3}, -1, 1, rng), head);
  for (double v : q.data()) EXPECT_EQ(v, 0.0);
}

TEST(Heads, GroupFeaturesInfluenceQ) {
  Rng rng(4);
  const auto head = Linear::create(7, 5, rng);
  const auto e = Tensor::uniform({3, 4}, -1, 1, rng);
  const auto q0 = q_values(e, Tensor::zeros({3, 3}), head);
  const auto q1 = q_values(e, Tensor::uniform({3, 3}, -1, 1, rng), head);
  double diff = 0.0;
  for (std::size_t i = 0; i < q0.numel(); ++i) diff += std::abs(q0[i] - q1[i]);
  EXPECT_GT(diff, 1e-6);
}

TEST(Heads, ZeroLogitsUniform) {
  Rng rng(5);
  auto head = Linear::create(7, 5, rng);
  zero(head);
  const auto p = policy_probs(Tensor::uniform({2, 4}, -1, 1, rng), Tensor::uniform({2, 3}, -1, 1, rng), head);
  for (double v : p.data()) EXPECT_NEAR(v, 0.2, 1e-15);
}

TEST(Mixer, ZeroHypernetsGiveZero) {
  Rng rng(6);
  const auto mixer = MixingNetwork::create(3, 5, 4, rng);
  NamedParams p;
  mixer.collect("m", p);
  zero_prefix(p, "m");
  const auto q = mix(Tensor::uniform({4, 3}, -5, 5, rng), Tensor::uniform({4, 5}, -1, 1, rng), mixer);
  for (double v : q.data()) EXPECT_EQ(v, 0.0);
}

TEST(Mixer, MonotoneInEachAgent) {
  Rng rng(7);
  const auto mixer = MixingNetwork::create(3, 5, 4, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const auto q = Tensor::uniform({1, 3}, -2, 2, rng);
    const auto s = Tensor::uniform({1, 5}, -1, 1, rng);
    const double base = mix(q, s, mixer).item();
    for (std::size_t i = 0; i < 3; ++i) {
      auto q2 = q.clone();
      q2.mutable_data()[i] += 1.0;
      EXPECT_GE(mix(q2, s, mixer).item(), base);
    }
  }
}

TEST(Critic, ZeroNetworkGivesZero) {
  Rng rng(8);
  const auto critic = Critic::create(5, 3, 4, rng);
  NamedParams p;
  critic.collect("c", p);
  zero_prefix(p, "c");
  const auto v = critic_value(Tensor::uniform({2, 5}, -1, 1, rng), Tensor::uniform({4, 3}, -1, 1, rng), critic);
  ASSERT_EQ(v.shape(), (Shape{2, 1}));
  for (double x : v.data()) EXPECT_EQ(x, 0.0);
}

TEST(GroupLoss, IdenticalEmbeddings) {
  const auto h = Tensor::full({4, 3}, 1.5);
  EXPECT_NEAR(group_loss(h, {0, 0, 1, 1}, 0.5).loss.item(), 0.0, 1e-8);
}

TEST(GroupLoss, TwoSeparatedClusters) {
  const auto h = Tensor::matrix({{0, 0}, {0, 0}, {3, 4}, {3, 4}});
  const auto gl = group_loss(h, {0, 0, 1, 1}, 0.5);
  EXPECT_NEAR(gl.loss.item(), -5.0, 1e-8);
}

TEST(GroupLoss, SingleGroupIsMeanIntraDistance) {
  const auto h = Tensor::matrix({{0}, {3}, {4}});
  EXPECT_NEAR(group_loss(h, {0, 0, 0}, 0.5).loss.item(), (3.0 + 4.0 + 1.0) / 3.0, 1e-8);
}

TEST(AttEntropy, OneHotRowsAreZero) {
  const auto hg = hypergraph::build_hypergraph(pairs_grouping());
  Tensor alpha({4, 2}, {1, 0, 1, 0, 0, 1, 0, 1});
  EXPECT_EQ(att_entropy_loss(alpha, hg).item(), 0.0);
}

TEST(AttEntropy, UniformOverTwoEdges) {
  const hypergraph::Hypergraph hg(3, {{0, 1, 2}, {0, 1, 2}}, {1.0, 1.0});
  const auto alpha = Tensor::full({3, 2}, 0.5);
  EXPECT_NEAR(att_entropy_loss(alpha, hg).item(), 3.0 * std::log(2.0), 1e-12);
}

TEST(AttEntropy, NonNegative) {
  Rng rng(9);
  const hypergraph::Hypergraph hg(4, {{0, 1, 2}, {1, 2, 3}, {0, 3}}, {1.0, 0.5, 0.2});
  auto p = hypergraph::HgcnLayerParams::create(3, 3, 2, 2, rng);
  const auto a = hypergraph::attention_coeffs(Tensor::uniform({4, 3}, -1, 1, rng), hg, p);
  EXPECT_GE(att_entropy_loss(a, hg).item(), 0.0);
}

TEST(TotalLoss, Weighted) {
  LossWeights w;
  EXPECT_NEAR(total_loss(Tensor::scalar(1), Tensor::scalar(2), Tensor::scalar(3), w).item(), 1.23, 1e-15);
  w.lambda1 = w.lambda2 = 0.0;
  EXPECT_EQ(total_loss(Tensor::scalar(1), Tensor::scalar(2), Tensor::scalar(3), w).item(), 1.0);
  EXPECT_EQ(total_loss(Tensor::scalar(0), Tensor::scalar(0), Tensor::scalar(0), LossWeights{}).item(), 0.0);
}

TEST(SelectActions, GreedyAndTies) {
  Rng rng(1);
  EXPECT_EQ(select_actions(Tensor::row({1, 3, 2}), Mode::Value, 0.0, rng), std::vector<int>{1});
  EXPECT_EQ(select_actions(Tensor::row({5, 5, 0}), Mode::Value, 0.0, rng), std::vector<int>{0});
}

TEST(SelectActions, FullExplorationIsUniform) {
  Rng rng(2);
  const std::size_t draws = 10000, a = 5;
  std::vector<double> counts(a, 0.0);
  const auto q = Tensor::row({0, 10, 0, 0, 0});
  for (std::size_t i = 0; i < draws; ++i) counts[static_cast<std::size_t>(select_actions(q, Mode::Value, 1.0, rng)[0])] += 1;
  const double mean = static_cast<double>(draws) / a;
  const double sigma = std::sqrt(static_cast<double>(draws) * (1.0 / a) * (1.0 - 1.0 / a));
  for (double c : counts) EXPECT_LT(std::abs(c - mean), 3 * sigma);
}

TEST(SelectActions, PolicySamplesDistribution) {
  Rng rng(3);
  const auto p = Tensor::row({0.0, 0.0, 1.0, 0.0, 0.0});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(select_actions(p, Mode::Policy, 0.0, rng)[0], 2);
}

TEST(Replay, SamplingIsReproducible) {
  const auto cfg = small_config(Mode::Value, 2);
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) buf.add(constant_episode(cfg, static_cast<std::size_t>(i + 1), -0.1));
  EXPECT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf.at(0).length(), 3u);  // oldest two evicted
  Rng a(4), b(4);
  const auto sa = buf.sample(8, a);
  const auto sb = buf.sample(8, b);
  EXPECT_EQ(sa, sb);
}

TEST(ValueLearner, ZeroNetworksGiveSquaredRewardLoss) {
  const auto cfg = small_config(Mode::Value, 2);
  Rng rng(5);
  ValueLearner learner(cfg, rng);
  zero(learner.q_head());
  for (const Linear* l : {&learner.mixer().hyper_w1, &learner.mixer().hyper_b1, &learner.mixer().hyper_w2,
                          &learner.mixer().hyper_b2_in, &learner.mixer().hyper_b2_out})
    zero(*l);
  learner.sync_target();
  const Episode ep = constant_episode(cfg, 4, -0.25);
  const Episode* batch[] = {&ep};
  const auto stats = learner.update(batch);
  EXPECT_NEAR(stats.task, 0.0625, 1e-12);
}

TEST(ValueLearner, TargetSyncLeavesOnlineUntouched) {
  const auto cfg = small_config(Mode::Value, 2);
  Rng rng(6);
  ValueLearner learner(cfg, rng);
  const Episode ep = constant_episode(cfg, 3, -0.1);
  const Episode* batch[] = {&ep};
  learner.update(batch);

  std::vector<std::vector<double>> before;
  for (const auto& [_, t] : learner.parameters()) before.emplace_back(t.data().begin(), t.data().end());
  learner.sync_target();
  std::size_t i = 0;
  const auto online = learner.parameters();
  const auto target = learner.target_parameters();
  for (const auto& [name, t] : online) {
    EXPECT_TRUE(std::equal(t.data().begin(), t.data().end(), before[i].begin())) << name;
    EXPECT_FALSE(t.same_storage(target[i].second)) << name;
    EXPECT_TRUE(std::equal(t.data().begin(), t.data().end(), target[i].second.data().begin())) << name;
    ++i;
  }
}

TEST(PolicyLearner, OneStepActorCritic) {
  auto cfg = small_config(Mode::Policy, 1);
  cfg.learn.weights.gamma = 0.0;
  Rng rng(7);
  PolicyLearner learner(cfg, rng);
  // pi(a=0) = 4 / (4 + 4 * 1) = 0.5 with logits [log 4, 0, 0, 0, 0]
  zero(learner.actor_head());
  Tensor bias = learner.actor_head().bias;
  bias.mutable_data()[0] = std::log(4.0);
  zero(learner.critic().out);
  Episode ep = constant_episode(cfg, 1, 1.0);
  const Episode* batch[] = {&ep};
  const auto stats = learner.update(batch);
  EXPECT_NEAR(stats.task, -std::log(0.5) * 1.0 + cfg.learn.weights.alpha_critic * 1.0, 1e-12);
}

TEST(PolicyLearner, ZeroAdvantageZeroActorTerm) {
  auto cfg = small_config(Mode::Policy, 1);
  cfg.learn.weights.gamma = 0.0;
  Rng rng(8);
  PolicyLearner learner(cfg, rng);
  zero(learner.critic().out);
  Episode ep = constant_episode(cfg, 1, 0.0);  // r = 0 and V = 0: A = 0, critic term 0
  const Episode* batch[] = {&ep};
  EXPECT_EQ(learner.update(batch).task, 0.0);
}

TEST(Trainer, EpsilonSchedule) {
  LearnConfig lc;
  EXPECT_DOUBLE_EQ(epsilon_at(lc, 0), 1.0);
  EXPECT_DOUBLE_EQ(epsilon_at(lc, 5000), 0.525);
  EXPECT_DOUBLE_EQ(epsilon_at(lc, 20000), 0.05);
}

TEST(Trainer, DeterministicMetrics) {
  auto cfg = small_config(Mode::Policy, 3);
  cfg.learn.episodes = 12;
  cfg.learn.batch_steps = 20;
  cfg.spectral.interval = 5;
  cfg.seed = 11;
  const auto a = train_run(cfg);
  const auto b = train_run(cfg);
  ASSERT_EQ(a.metrics.size(), 12u);
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    EXPECT_EQ(a.metrics[i].steps, b.metrics[i].steps);
    EXPECT_EQ(a.metrics[i].reward, b.metrics[i].reward);
    EXPECT_EQ(a.metrics[i].loss_task, b.metrics[i].loss_task);
    EXPECT_EQ(a.metrics[i].loss_group, b.metrics[i].loss_group);
  }
}

TEST(Trainer, SingleGroupNeverRegroups) {
  auto cfg = small_config(Mode::Policy, 3);
  cfg.learn.episodes = 6;
  cfg.spectral.interval = 3;
  cfg.variant = Variant::SingleGroup;
  std::size_t events = 0;
  TrainHooks hooks;
  hooks.on_grouping = [&](const GroupingEvent& e) {
    ++events;
    EXPECT_EQ(e.grouping.k, 1u);
  };
  const auto r = train_run(cfg, hooks);
  EXPECT_EQ(events, 1u);
  for (const auto& m : r.metrics) EXPECT_EQ(m.k, 1u);
}

TEST(Trainer, CooccurrenceSymmetric) {
  auto cfg = small_config(Mode::Value, 4);
  cfg.learn.episodes = 8;
  cfg.learn.batch_episodes = 4;
  cfg.spectral.interval = 4;
  const auto r = train_run(cfg);
  std::uint64_t total = 0;
  for (const auto& m : r.metrics) total += m.steps;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(r.cooccurrence[i][i], total);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(r.cooccurrence[i][j], r.cooccurrence[j][i]);
  }
}

TEST(Trainer, RejectsInvalidConfig) {
  auto cfg = small_config(Mode::Value, 2);
  cfg.spectral.delta = 1.5;
  EXPECT_THROW(train_run(cfg), std::invalid_argument);
}

TEST(Trainer, FinalWindow) {
  std::vector<EpisodeMetrics> m(20);
  for (std::size_t i = 0; i < 20; ++i) m[i].steps = i;
  EXPECT_DOUBLE_EQ(final_window_mean_steps(m), 18.5);
}
