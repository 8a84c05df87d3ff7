#include "hygma/env/predator_prey.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hygma::env {

namespace {

constexpr double kStepPenalty = -0.05;
constexpr double kOutOfGrid = -1.0;

Cell moved(Cell c, int action, int grid) {
  Cell n = c;
  switch (action) {
    case kUp: --n.row; break;
    case kDown: ++n.row; break;
    case kLeft: --n.col; break;
    case kRight: ++n.col; break;
    default: break;
  }
  if (n.row < 0 || n.col < 0 || n.row >= grid || n.col >= grid) return c;
  return n;
}

double norm_coord(int v, std::size_t grid) { return static_cast<double>(v) / static_cast<double>(grid - 1); }

}  // namespace

void PPConfig::validate() const {
  if (grid < 3) throw std::invalid_argument("env.grid must be >= 3");
  if (n_predators < 1) throw std::invalid_argument("env.n_predators must be >= 1");
  if (max_steps < 1) throw std::invalid_argument("env.max_steps must be >= 1");
  if (n_predators + 1 > grid * grid) throw std::invalid_argument("env.n_predators does not fit on the grid");
}

bool PPState::all_captured() const { return std::all_of(captured.begin(), captured.end(), [](bool c) { return c; }); }

ResetOutcome reset(const PPConfig& cfg, Rng& rng) {
  const int g = static_cast<int>(cfg.grid);
  std::uniform_int_distribution<int> pick(0, g * g - 1);
  std::vector<int> taken;
  while (taken.size() < cfg.n_predators + 1) {
    const int c = pick(rng);
    if (std::find(taken.begin(), taken.end(), c) == taken.end()) taken.push_back(c);
  }
  PPState s;
  for (std::size_t i = 0; i < cfg.n_predators; ++i) s.predators.push_back({taken[i] / g, taken[i] % g});
  s.prey = {taken.back() / g, taken.back() % g};
  s.captured.assign(cfg.n_predators, false);
  auto obs = observe(cfg, s);
  return {std::move(s), std::move(obs)};
}

StepOutcome step(const PPConfig& cfg, const PPState& state, std::span<const int> actions, Rng& prey_rng) {
  if (state.done) throw std::logic_error("step: episode already finished");
  if (actions.size() != cfg.n_predators) {
    throw std::invalid_argument("step: expected " + std::to_string(cfg.n_predators) + " actions, got " +
                                std::to_string(actions.size()));
  }
  for (int a : actions) {
    if (a < 0 || a >= static_cast<int>(kNumActions)) {
      throw std::invalid_argument("step: action " + std::to_string(a) + " out of range");
    }
  }
  const int g = static_cast<int>(cfg.grid);
  StepOutcome out;
  PPState& s = out.state;
  s = state;
  for (std::size_t i = 0; i < s.predators.size(); ++i) {
    if (!s.captured[i]) s.predators[i] = moved(s.predators[i], actions[i], g);
  }
  if (cfg.prey_policy == PreyPolicy::RandomMove) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(kNumActions) - 1);
    s.prey = moved(s.prey, pick(prey_rng), g);
  }
  std::size_t free_predators = 0;
  for (std::size_t i = 0; i < s.predators.size(); ++i) {
    if (s.predators[i] == s.prey) s.captured[i] = true;
    if (!s.captured[i]) ++free_predators;
  }
  ++s.step;
  out.reward = kStepPenalty * static_cast<double>(free_predators);
  out.success = free_predators == 0;
  s.done = out.success || s.step >= cfg.max_steps;
  out.done = s.done;
  out.observations = observe(cfg, s);
  return out;
}

Observations observe(const PPConfig& cfg, const PPState& state) {
  const int v = static_cast<int>(cfg.vision);
  const int side = 2 * v + 1;
  const int g = static_cast<int>(cfg.grid);
  Observations obs(state.predators.size(), std::vector<double>(cfg.obs_dim(), 0.0));
  for (std::size_t i = 0; i < state.predators.size(); ++i) {
    auto& o = obs[i];
    const Cell me = state.predators[i];
    for (int dr = -v; dr <= v; ++dr) {
      for (int dc = -v; dc <= v; ++dc) {
        const Cell c{me.row + dr, me.col + dc};
        const std::size_t base = static_cast<std::size_t>(((dr + v) * side + (dc + v)) * 3);
        if (c.row < 0 || c.col < 0 || c.row >= g || c.col >= g) {
          o[base] = o[base + 1] = o[base + 2] = kOutOfGrid;
          continue;
        }
        if (dr == 0 && dc == 0) o[base] = 1.0;
        for (std::size_t j = 0; j < state.predators.size(); ++j) {
          if (j != i && state.predators[j] == c) o[base + 1] += 1.0;
        }
        if (state.prey == c) o[base + 2] = 1.0;
      }
    }
    o[cfg.obs_dim() - 2] = norm_coord(me.row, cfg.grid);
    o[cfg.obs_dim() - 1] = norm_coord(me.col, cfg.grid);
  }
  return obs;
}

std::vector<double> global_state(const PPConfig& cfg, const PPState& state) {
  std::vector<double> s;
  s.reserve(cfg.state_dim());
  for (const auto& p : state.predators) {
    s.push_back(norm_coord(p.row, cfg.grid));
    s.push_back(norm_coord(p.col, cfg.grid));
  }
  s.push_back(norm_coord(state.prey.row, cfg.grid));
  s.push_back(norm_coord(state.prey.col, cfg.grid));
  s.push_back(static_cast<double>(state.step) / static_cast<double>(cfg.max_steps));
  return s;
}

double random_baseline(const PPConfig& cfg, std::size_t episodes, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(kNumActions) - 1);
  std::vector<int> actions(cfg.n_predators);
  double total = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    auto r = reset(cfg, rng);
    PPState s = std::move(r.state);
    while (!s.done) {
      for (auto& a : actions) a = pick(rng);
      s = step(cfg, s, actions, rng).state;
    }
    total += static_cast<double>(s.step);
  }
  return episodes ? total / static_cast<double>(episodes) : 0.0;
}

}  // namespace hygma::env
