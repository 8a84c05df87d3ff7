#include "hygma/learn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "hygma/hypergraph/hypergraph.hpp"

namespace hygma::learn {

namespace {

enum Stream : std::uint64_t { kInit = 1, kEnv = 2, kAct = 3, kSample = 4, kCluster = 5, kEval = 6 };

Tensor to_tensor(const env::Observations& obs) { return Tensor::matrix(obs); }

std::vector<std::vector<double>> rows_of(const Tensor& t) {
  std::vector<std::vector<double>> out(t.dim(0));
  const auto d = t.data();
  for (std::size_t r = 0; r < t.dim(0); ++r) out[r].assign(d.begin() + static_cast<std::ptrdiff_t>(r * t.dim(1)),
                                                           d.begin() + static_cast<std::ptrdiff_t>((r + 1) * t.dim(1)));
  return out;
}

}  // namespace

double epsilon_at(const LearnConfig& cfg, std::uint64_t global_step) {
  if (cfg.eps_anneal_steps == 0 || global_step >= cfg.eps_anneal_steps) return cfg.eps_finish;
  const double f = static_cast<double>(global_step) / static_cast<double>(cfg.eps_anneal_steps);
  return cfg.eps_start + f * (cfg.eps_finish - cfg.eps_start);
}

double grouping_silhouette(const spectral::Grouping& g) {
  if (g.k < 2 || g.cohesion.size() != g.k || g.n() == 0) return 0.0;
  const auto sizes = g.group_sizes();
  double s = 0.0;
  for (std::size_t c = 0; c < g.k; ++c) s += g.cohesion[c] * static_cast<double>(sizes[c]);
  return s / static_cast<double>(g.n());
}

TrainResult train_run(const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  const auto& lc = cfg.learn;
  const std::size_t n = cfg.env.n_predators;
  Rng init_rng = derive_rng(cfg.seed, kInit);
  Rng env_rng = derive_rng(cfg.seed, kEnv);
  Rng act_rng = derive_rng(cfg.seed, kAct);
  Rng sample_rng = derive_rng(cfg.seed, kSample);
  spectral::SpectralConfig scfg = cfg.spectral;
  scfg.seed = derive_rng(cfg.seed, kCluster)();

  TrainResult result;
  result.learner = make_learner(cfg, init_rng);
  Learner& learner = *result.learner;
  result.cooccurrence.assign(n, std::vector<std::uint64_t>(n, 0));

  spectral::Grouping grouping = spectral::Grouping::all_in_one(n);
  std::optional<spectral::Grouping> pending;
  double last_eta = 0.0;
  if (hooks.on_grouping) hooks.on_grouping({0, 0, grouping});
  GroupContext ctx = GroupContext::single(grouping);
  spectral::StateHistoryWindow window(n, scfg.window_len, cfg.env.obs_dim());
  const bool regroup = cfg.variant != Variant::SingleGroup;

  std::optional<ReplayBuffer> buffer;
  if (lc.mode == Mode::Value) buffer.emplace(lc.buffer_capacity);
  std::vector<Episode> rollout;
  std::size_t rollout_steps = 0;
  UpdateStats stats;
  std::uint64_t global_step = 0;

  for (std::size_t ep = 0; ep < lc.episodes; ++ep) {
    if (pending) {
      grouping = std::move(*pending);
      pending.reset();
      ctx = GroupContext::single(grouping);
    }
    Episode record;
    record.grouping = grouping;
    auto [state, obs] = env::reset(cfg.env, env_rng);
    Tensor hidden = Tensor::zeros({n, learner.hidden_dim()});
    while (!state.done) {
      window.push(obs);
      ++global_step;
      if (regroup && global_step % scfg.interval == 0) {
        const spectral::Grouping& base = pending ? *pending : grouping;
        auto next = spectral::maybe_update(base, window, scfg);
        last_eta = next.eta_last;
        if (next.version != base.version) {
          if (hooks.on_grouping) hooks.on_grouping({global_step, ep, next});
          pending = std::move(next);
        }
      }
      Transition tr;
      tr.obs = obs;
      tr.hidden = rows_of(hidden);
      tr.state = env::global_state(cfg.env, state);
      tr.grouping_version = grouping.version;
      const double eps = lc.mode == Mode::Value ? epsilon_at(lc, global_step) : 0.0;
      tr.actions = learner.act(to_tensor(obs), hidden, ctx, eps, false, act_rng);
      auto out = env::step(cfg.env, state, tr.actions, env_rng);
      tr.reward = out.reward;
      tr.done = out.done;
      tr.next_obs = out.observations;
      tr.next_state = env::global_state(cfg.env, out.state);
      record.total_reward += out.reward;
      record.success = out.success;
      record.steps.push_back(std::move(tr));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (grouping.labels[i] == grouping.labels[j]) ++result.cooccurrence[i][j];
      state = std::move(out.state);
      obs = std::move(out.observations);
    }

    EpisodeMetrics m;
    m.episode = ep;
    m.steps = record.length();
    m.reward = record.total_reward;
    m.success = record.success;
    m.eta = last_eta;
    m.grouping_version = grouping.version;
    m.k = grouping.k;
    m.silhouette = grouping_silhouette(grouping);
    m.message_count = hypergraph::message_count(ctx.hypergraph());

    if (buffer) {
      buffer->add(std::move(record));
      if (buffer->size() >= lc.batch_episodes) {
        const auto batch = buffer->sample(lc.batch_episodes, sample_rng);
        stats = learner.update(batch);
      }
    } else {
      rollout_steps += record.length();
      rollout.push_back(std::move(record));
      if (rollout_steps >= lc.batch_steps) {
        std::vector<const Episode*> batch;
        for (const auto& e : rollout) batch.push_back(&e);
        stats = learner.update(batch);
        rollout.clear();
        rollout_steps = 0;
      }
    }
    m.loss_task = stats.task;
    m.loss_group = stats.group;
    m.loss_att = stats.att;
    m.loss_group_literal = stats.group_literal;
    m.updates = learner.updates();
    if (hooks.on_episode) hooks.on_episode(m);
    result.metrics.push_back(m);
    if (hooks.on_checkpoint && lc.checkpoint_every > 0 && (ep + 1) % lc.checkpoint_every == 0 &&
        ep + 1 < lc.episodes) {
      hooks.on_checkpoint(learner, grouping, ep);
    }
  }
  if (pending) grouping = std::move(*pending);
  if (hooks.on_checkpoint) hooks.on_checkpoint(learner, grouping, lc.episodes - 1);
  result.grouping = std::move(grouping);
  return result;
}

EvalSummary evaluate(const Learner& learner, const spectral::Grouping& grouping, std::size_t episodes,
                     std::uint64_t seed) {
  const auto& cfg = learner.config();
  Rng env_rng = derive_rng(seed, kEval);
  Rng unused = derive_rng(seed, kAct);
  const GroupContext ctx = GroupContext::single(grouping);
  EvalSummary s;
  s.episodes = episodes;
  std::vector<double> steps;
  double successes = 0.0, reward = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    auto [state, obs] = env::reset(cfg.env, env_rng);
    Tensor hidden = Tensor::zeros({cfg.env.n_predators, learner.hidden_dim()});
    bool success = false;
    while (!state.done) {
      const auto actions = learner.act(to_tensor(obs), hidden, ctx, 0.0, true, unused);
      auto out = env::step(cfg.env, state, actions, env_rng);
      reward += out.reward;
      success = out.success;
      state = std::move(out.state);
      obs = std::move(out.observations);
    }
    steps.push_back(static_cast<double>(state.step));
    successes += success ? 1.0 : 0.0;
  }
  if (episodes == 0) return s;
  const double en = static_cast<double>(episodes);
  double mean = 0.0;
  for (double v : steps) mean += v;
  mean /= en;
  double var = 0.0;
  for (double v : steps) var += (v - mean) * (v - mean);
  s.mean_steps = mean;
  s.std_steps = std::sqrt(var / en);
  s.success_rate = successes / en;
  s.mean_reward = reward / en;
  return s;
}

double final_window_mean_steps(const std::vector<EpisodeMetrics>& metrics) {
  if (metrics.empty()) return 0.0;
  const std::size_t w = std::max<std::size_t>(1, (metrics.size() + 9) / 10);
  double s = 0.0;
  for (std::size_t i = metrics.size() - w; i < metrics.size(); ++i) s += static_cast<double>(metrics[i].steps);
  return s / static_cast<double>(w);
}

}  // namespace hygma::learn
