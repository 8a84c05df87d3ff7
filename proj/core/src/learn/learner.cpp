#include "hygma/learn/learner.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hygma/tensor/ops.hpp"

namespace hygma::learn {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

/// Time-major view over a batch of episodes of possibly different lengths; rows of
/// per-agent tensors are ordered (episode, agent).
class BatchLayout {
 public:
  BatchLayout(std::span<const Episode* const> batch, std::size_t n_agents, std::size_t obs_dim,
              std::size_t state_dim)
      : batch_(batch), n_(n_agents), obs_dim_(obs_dim), state_dim_(state_dim) {
    require(!batch.empty(), "update: empty batch");
    for (const auto* e : batch) {
      require(!e->steps.empty(), "update: empty episode in batch");
      t_max_ = std::max(t_max_, e->length());
      valid_ += e->length();
    }
  }

  std::size_t episodes() const { return batch_.size(); }
  std::size_t rows() const { return batch_.size() * n_; }
  std::size_t horizon() const { return t_max_; }
  std::size_t valid_steps() const { return valid_; }
  bool valid(std::size_t t, std::size_t b) const { return t < batch_[b]->length(); }
  const Transition& at(std::size_t t, std::size_t b) const { return batch_[b]->steps[t]; }

  Tensor obs(std::size_t t) const {
    std::vector<double> d(rows() * obs_dim_, 0.0);
    for (std::size_t b = 0; b < episodes(); ++b) {
      if (!valid(t, b)) continue;
      const auto& o = at(t, b).obs;
      for (std::size_t i = 0; i < n_; ++i) std::copy(o[i].begin(), o[i].end(), d.begin() + static_cast<std::ptrdiff_t>((b * n_ + i) * obs_dim_));
    }
    return Tensor({rows(), obs_dim_}, std::move(d));
  }

  Tensor states(std::size_t t) const {
    std::vector<double> d(episodes() * state_dim_, 0.0);
    for (std::size_t b = 0; b < episodes(); ++b) {
      if (!valid(t, b)) continue;
      const auto& s = at(t, b).state;
      std::copy(s.begin(), s.end(), d.begin() + static_cast<std::ptrdiff_t>(b * state_dim_));
    }
    return Tensor({episodes(), state_dim_}, std::move(d));
  }

  Tensor onehot(std::size_t t) const {
    std::vector<double> d(rows() * env::kNumActions, 0.0);
    for (std::size_t b = 0; b < episodes(); ++b) {
      if (!valid(t, b)) continue;
      const auto& a = at(t, b).actions;
      for (std::size_t i = 0; i < n_; ++i) d[(b * n_ + i) * env::kNumActions + static_cast<std::size_t>(a[i])] = 1.0;
    }
    return Tensor({rows(), env::kNumActions}, std::move(d));
  }

  std::vector<double> block_weights(std::size_t t) const {
    std::vector<double> w(episodes());
    for (std::size_t b = 0; b < episodes(); ++b) w[b] = valid(t, b) ? 1.0 : 0.0;
    return w;
  }

  std::vector<double> row_weights(std::size_t t) const {
    std::vector<double> w(rows());
    for (std::size_t r = 0; r < rows(); ++r) w[r] = valid(t, r / n_) ? 1.0 : 0.0;
    return w;
  }

  GroupContext context() const {
    std::vector<const spectral::Grouping*> gs;
    for (const auto* e : batch_) gs.push_back(&e->grouping);
    return GroupContext::stacked(gs);
  }

 private:
  std::span<const Episode* const> batch_;
  std::size_t n_, obs_dim_, state_dim_;
  std::size_t t_max_ = 0;
  std::size_t valid_ = 0;
};

/// Group-consistency and attention-entropy terms accumulated over time steps.
struct Regularizers {
  Tensor group = Tensor::scalar(0.0);
  Tensor att = Tensor::scalar(0.0);
  double literal = 0.0;

  void add(const AgentStep& st, const GroupContext& ctx, const BatchLayout& layout, std::size_t t, double beta) {
    const auto bw = layout.block_weights(t);
    auto gl = group_loss(st.h, ctx.labels(), ctx.block(), bw, beta);
    group = ops::add(group, gl.loss);
    literal += gl.literal;
    if (!st.alphas.empty()) {
      const auto rw = layout.row_weights(t);
      for (const auto& a : st.alphas) att = ops::add(att, att_entropy_loss(a, ctx.hypergraph(), rw));
    }
  }
};

void set_trainable(NamedParams params, bool on) {
  for (auto& entry : params) entry.second.set_requires_grad(on);
}

void check_finite(double v, const char* what, std::size_t update) {
  if (!std::isfinite(v)) {
    throw TrainingAborted(std::string("non-finite ") + what + " loss at update " + std::to_string(update));
  }
}

}  // namespace

Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x68796761u};
  return Rng(seq);
}

void ModelConfig::validate() const {
  require(hidden_dim >= 1, "model.hidden_dim must be >= 1");
  require(hgcn_out >= 1, "model.hgcn_out must be >= 1");
  require(hgcn_layers >= 1, "model.hgcn_layers must be >= 1");
  require(heads >= 1, "model.heads must be >= 1");
  require(mixer_embed >= 1, "model.mixer_embed must be >= 1");
  require(critic_hidden >= 1, "model.critic_hidden must be >= 1");
}

void LearnConfig::validate() const {
  weights.validate();
  require(std::isfinite(lr) && lr > 0.0, "learn.lr must be > 0");
  require(std::isfinite(grad_clip) && grad_clip > 0.0, "learn.grad_clip must be > 0");
  require(episodes >= 1, "learn.episodes must be >= 1");
  require(batch_steps >= 1, "learn.batch_steps must be >= 1");
  require(batch_episodes >= 1, "learn.batch_episodes must be >= 1");
  require(buffer_capacity >= 1, "learn.buffer_capacity must be >= 1");
  require(target_sync >= 1, "learn.target_sync must be >= 1");
  require(eps_start >= 0.0 && eps_start <= 1.0, "learn.eps_start must be in [0,1]");
  require(eps_finish >= 0.0 && eps_finish <= 1.0, "learn.eps_finish must be in [0,1]");
  require(std::isfinite(entropy_coef) && entropy_coef >= 0.0, "learn.entropy_coef must be >= 0");
}

void TrainConfig::validate() const {
  env.validate();
  model.validate();
  learn.validate();
  require(spectral.delta >= 0.0 && spectral.delta <= 1.0, "spectral.delta must be in [0,1]");
  require(spectral.k_min >= 1, "spectral.k_min must be >= 1");
  require(spectral.k_max >= spectral.k_min, "spectral.k_max must be >= spectral.k_min");
  require(spectral.knn >= 1, "spectral.knn must be >= 1");
  require(spectral.interval >= 1, "spectral.interval must be >= 1");
  require(spectral.window_len >= 1, "spectral.window_len must be >= 1");
  require(spectral.kmeans_restarts >= 1, "spectral.kmeans_restarts must be >= 1");
  require(spectral.kmeans_iters >= 1, "spectral.kmeans_iters must be >= 1");
}

Learner::Learner(const TrainConfig& cfg, Rng& rng)
    : cfg_(cfg),
      encoder_(AgentEncoder::create(cfg.env.obs_dim(), cfg.model.hidden_dim, rng)),
      hgcn_(hypergraph::HgcnNetwork::create(cfg.model.hidden_dim, cfg.model.hgcn_out, cfg.model.hgcn_layers,
                                            cfg.model.heads, rng)),
      agg_(cfg.variant == Variant::Gcn ? Aggregator::Gcn : Aggregator::Hgcn) {}

AgentStep Learner::forward_step(const Tensor& obs, const Tensor& hidden, const GroupContext& ctx,
                                const AgentEncoder& enc, const hypergraph::HgcnNetwork& net, Aggregator agg) {
  const auto e = encode(obs, hidden, enc);
  auto g = group_features(e.embeddings, ctx, net, agg);
  return {e.embeddings, g.h, std::move(g.alphas)};
}

AgentStep Learner::forward_step(const Tensor& obs, const Tensor& hidden, const GroupContext& ctx) const {
  return forward_step(obs, hidden, ctx, encoder_, hgcn_, agg_);
}

std::vector<int> Learner::act(const Tensor& obs, Tensor& hidden, const GroupContext& ctx, double epsilon,
                              bool greedy, Rng& rng) const {
  NoGradScope no_grad;
  const Tensor s = scores(obs, hidden, ctx);
  if (greedy) return greedy_actions(s);
  return select_actions(s, mode(), epsilon, rng);
}

void Learner::make_optimizer(OptimizerKind fallback) {
  const auto kind = cfg_.learn.optimizer == OptimizerKind::Auto ? fallback : cfg_.learn.optimizer;
  auto params = param_tensors(parameters());
  if (kind == OptimizerKind::Adam) {
    optimizer_ = std::make_unique<Adam>(std::move(params), cfg_.learn.lr);
  } else {
    optimizer_ = std::make_unique<RmsProp>(std::move(params), cfg_.learn.lr);
  }
}

double Learner::apply_gradients(const Tensor& loss) {
  optimizer_->zero_grad();
  backward(loss);
  const double norm = clip_grad_norm(optimizer_->params(), cfg_.learn.grad_clip);
  optimizer_->step();
  optimizer_->zero_grad();
  ++updates_;
  return norm;
}

// ---------------------------------------------------------------- value mode

ValueLearner::ValueLearner(const TrainConfig& cfg, Rng& rng)
    : Learner(cfg, rng),
      q_head_(Linear::create(cfg.model.hidden_dim + cfg.model.hgcn_out, env::kNumActions, rng)),
      mixer_(MixingNetwork::create(cfg.env.n_predators, cfg.env.state_dim(), cfg.model.mixer_embed, rng)) {
  t_encoder_ = encoder_;
  t_hgcn_ = hgcn_;
  t_q_head_ = q_head_;
  t_mixer_ = mixer_;
  // Deep copies so the target owns separate storage.
  t_encoder_.obs_proj = {encoder_.obs_proj.weight.clone(), encoder_.obs_proj.bias.clone()};
  t_encoder_.gru = {encoder_.gru.w_input.clone(), encoder_.gru.w_hidden.clone(), encoder_.gru.b_input.clone(),
                    encoder_.gru.b_hidden.clone()};
  for (auto& layer : t_hgcn_.layers) {
    layer.proj = layer.proj.clone();
    for (auto& h : layer.heads) {
      h.att_proj = h.att_proj.clone();
      h.att_vec = h.att_vec.clone();
    }
  }
  t_q_head_ = {q_head_.weight.clone(), q_head_.bias.clone()};
  for (Linear* l : {&t_mixer_.hyper_w1, &t_mixer_.hyper_b1, &t_mixer_.hyper_w2, &t_mixer_.hyper_b2_in,
                    &t_mixer_.hyper_b2_out}) {
    *l = {l->weight.clone(), l->bias.clone()};
  }
  set_trainable(target_parameters(), false);
  make_optimizer(OptimizerKind::RmsProp);
}

NamedParams ValueLearner::parameters() const {
  NamedParams p;
  encoder_.collect("encoder", p);
  hgcn_.collect("hgcn", p);
  q_head_.collect("q_head", p);
  mixer_.collect("mixer", p);
  return p;
}

NamedParams ValueLearner::target_parameters() const {
  NamedParams p;
  t_encoder_.collect("encoder", p);
  t_hgcn_.collect("hgcn", p);
  t_q_head_.collect("q_head", p);
  t_mixer_.collect("mixer", p);
  return p;
}

void ValueLearner::sync_target() {
  auto target = target_parameters();
  copy_params(parameters(), target);
}

Tensor ValueLearner::scores(const Tensor& obs, Tensor& hidden, const GroupContext& ctx) const {
  auto st = forward_step(obs, hidden, ctx);
  hidden = st.embeddings;
  return q_values(st.embeddings, st.h, q_head_);
}

UpdateStats ValueLearner::update(std::span<const Episode* const> batch) {
  const auto& lc = cfg_.learn;
  const std::size_t n = cfg_.env.n_predators;
  const BatchLayout layout(batch, n, cfg_.env.obs_dim(), cfg_.env.state_dim());
  const std::size_t b_count = layout.episodes(), t_max = layout.horizon(), rows = layout.rows();
  const GroupContext ctx = layout.context();

  GradTape tape;
  TapeScope scope(tape);
  Tensor hidden = Tensor::zeros({rows, hidden_dim()});
  Tensor t_hidden = hidden;
  std::vector<Tensor> chosen, states;
  std::vector<std::vector<int>> online_greedy(t_max);
  std::vector<Tensor> target_q(t_max);
  Regularizers reg;
  for (std::size_t t = 0; t < t_max; ++t) {
    const Tensor obs = layout.obs(t);
    const auto st = forward_step(obs, hidden, ctx);
    hidden = st.embeddings;
    const Tensor q = q_values(st.embeddings, st.h, q_head_);
    chosen.push_back(ops::reshape(ops::sum(ops::mul(q, layout.onehot(t)), 1), {b_count, n}));
    states.push_back(layout.states(t));
    online_greedy[t] = greedy_actions(q);
    reg.add(st, ctx, layout, t, lc.weights.beta);
    {
      NoGradScope no_grad;
      const auto tst = forward_step(obs, t_hidden, ctx, t_encoder_, t_hgcn_, agg_);
      t_hidden = tst.embeddings;
      target_q[t] = q_values(tst.embeddings, tst.h, t_q_head_);
    }
  }
  const Tensor all_states = ops::concat(states, 0);

  // Bootstrapped targets from the target mixer at the successor step.
  std::vector<double> y(t_max * b_count, 0.0), mask(t_max * b_count, 0.0);
  {
    NoGradScope no_grad;
    std::vector<double> tq(t_max * b_count * n);
    for (std::size_t t = 0; t < t_max; ++t) {
      const auto target_greedy = greedy_actions(target_q[t]);
      for (std::size_t r = 0; r < rows; ++r) {
        const int a = lc.double_q ? online_greedy[t][r] : target_greedy[r];
        tq[t * rows + r] = target_q[t].at(r, static_cast<std::size_t>(a));
      }
    }
    const Tensor q_tot_target = mix(Tensor({t_max * b_count, n}, std::move(tq)), all_states, t_mixer_);
    for (std::size_t t = 0; t < t_max; ++t) {
      for (std::size_t b = 0; b < b_count; ++b) {
        if (!layout.valid(t, b)) continue;
        const auto& tr = layout.at(t, b);
        double target = tr.reward;
        if (!tr.done) target += lc.weights.gamma * q_tot_target[(t + 1) * b_count + b];
        y[t * b_count + b] = target;
        mask[t * b_count + b] = 1.0;
      }
    }
  }
  const double count = static_cast<double>(layout.valid_steps());
  const Tensor q_tot = mix(ops::concat(chosen, 0), all_states, mixer_);
  const Tensor err = ops::sub(q_tot, Tensor({t_max * b_count, 1}, std::move(y)));
  const Tensor td = ops::scale(ops::sum(ops::mul(ops::square(err), Tensor({t_max * b_count, 1}, std::move(mask)))),
                               1.0 / count);
  const Tensor group = ops::scale(reg.group, 1.0 / count);
  const Tensor att = ops::scale(reg.att, 1.0 / count);
  const Tensor total = total_loss(td, group, att, lc.weights);

  UpdateStats s;
  s.task = td.item();
  s.group = group.item();
  s.att = att.item();
  s.group_literal = reg.literal / count;
  s.total = total.item();
  check_finite(s.total, "total", updates_);
  s.grad_norm = apply_gradients(total);
  if (updates_ % lc.target_sync == 0) sync_target();
  return s;
}

// ---------------------------------------------------------------- policy mode

PolicyLearner::PolicyLearner(const TrainConfig& cfg, Rng& rng)
    : Learner(cfg, rng),
      actor_(Linear::create(cfg.model.hidden_dim + cfg.model.hgcn_out, env::kNumActions, rng)),
      critic_(Critic::create(cfg.env.state_dim(), cfg.model.hgcn_out, cfg.model.critic_hidden, rng)) {
  make_optimizer(OptimizerKind::Adam);
}

NamedParams PolicyLearner::parameters() const {
  NamedParams p;
  encoder_.collect("encoder", p);
  hgcn_.collect("hgcn", p);
  actor_.collect("actor", p);
  critic_.collect("critic", p);
  return p;
}

Tensor PolicyLearner::scores(const Tensor& obs, Tensor& hidden, const GroupContext& ctx) const {
  auto st = forward_step(obs, hidden, ctx);
  hidden = st.embeddings;
  return policy_probs(st.embeddings, st.h, actor_);
}

UpdateStats PolicyLearner::update(std::span<const Episode* const> batch) {
  const auto& lc = cfg_.learn;
  const std::size_t n = cfg_.env.n_predators;
  const BatchLayout layout(batch, n, cfg_.env.obs_dim(), cfg_.env.state_dim());
  const std::size_t b_count = layout.episodes(), t_max = layout.horizon(), rows = layout.rows();
  const GroupContext ctx = layout.context();

  GradTape tape;
  TapeScope scope(tape);
  Tensor hidden = Tensor::zeros({rows, hidden_dim()});
  std::vector<Tensor> chosen_logp, values;
  Tensor entropy = Tensor::scalar(0.0);
  Regularizers reg;
  for (std::size_t t = 0; t < t_max; ++t) {
    const auto st = forward_step(layout.obs(t), hidden, ctx);
    hidden = st.embeddings;
    const Tensor logp = ops::log_softmax(policy_logits(st.embeddings, st.h, actor_), 1);
    chosen_logp.push_back(ops::reshape(ops::sum(ops::mul(logp, layout.onehot(t)), 1), {b_count, n}));
    values.push_back(critic_value(layout.states(t), st.h, critic_));
    reg.add(st, ctx, layout, t, lc.weights.beta);
    if (lc.entropy_coef > 0.0) {
      const auto rw = layout.row_weights(t);
      const Tensor plogp = ops::sum(ops::mul(ops::exp(logp), logp), 1);
      entropy = ops::sub(entropy, ops::sum(ops::mul(plogp, Tensor({rows}, std::vector<double>(rw)))));
    }
  }
  const Tensor v = ops::concat(values, 0);  // [T*B, 1]
  const auto vd = v.data();

  // One-step TD targets and advantages, both treated as constants.
  const double count = static_cast<double>(layout.valid_steps());
  std::vector<double> y(t_max * b_count, 0.0), mask(t_max * b_count, 0.0), actor_coef(t_max * b_count * n, 0.0);
  for (std::size_t t = 0; t < t_max; ++t) {
    for (std::size_t b = 0; b < b_count; ++b) {
      if (!layout.valid(t, b)) continue;
      const auto& tr = layout.at(t, b);
      const std::size_t k = t * b_count + b;
      double target = tr.reward;
      if (!tr.done) target += lc.weights.gamma * vd[(t + 1) * b_count + b];
      y[k] = target;
      mask[k] = 1.0;
      const double adv = target - vd[k];
      for (std::size_t i = 0; i < n; ++i) actor_coef[k * n + i] = -adv / (count * static_cast<double>(n));
    }
  }
  const Tensor actor = ops::sum(ops::mul(ops::concat(chosen_logp, 0), Tensor({t_max * b_count, n}, std::move(actor_coef))));
  const Tensor err = ops::sub(v, Tensor({t_max * b_count, 1}, std::move(y)));
  const Tensor critic = ops::scale(ops::sum(ops::mul(ops::square(err), Tensor({t_max * b_count, 1}, std::move(mask)))),
                                   1.0 / count);
  Tensor task = ops::add(actor, ops::scale(critic, lc.weights.alpha_critic));
  if (lc.entropy_coef > 0.0) {
    task = ops::sub(task, ops::scale(entropy, lc.entropy_coef / (count * static_cast<double>(n))));
  }
  const Tensor group = ops::scale(reg.group, 1.0 / count);
  const Tensor att = ops::scale(reg.att, 1.0 / count);
  const Tensor total = total_loss(task, group, att, lc.weights);

  UpdateStats s;
  s.task = task.item();
  s.group = group.item();
  s.att = att.item();
  s.group_literal = reg.literal / count;
  s.total = total.item();
  check_finite(s.total, "total", updates_);
  s.grad_norm = apply_gradients(total);
  return s;
}

std::unique_ptr<Learner> make_learner(const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  if (cfg.learn.mode == Mode::Value) return std::make_unique<ValueLearner>(cfg, rng);
  return std::make_unique<PolicyLearner>(cfg, rng);
}

}  // namespace hygma::learn
