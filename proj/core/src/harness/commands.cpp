#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <array>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "hygma/harness/harness.hpp"
#include "hygma/hypergraph/hypergraph.hpp"

namespace hygma::harness {

namespace {

std::ofstream open_csv(const std::filesystem::path& path, const std::string& header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << header << '\n';
  return out;
}

std::string join_labels(const std::vector<std::size_t>& labels) {
  std::string s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(labels[i]);
  }
  return s;
}

void write_metrics_row(std::ofstream& out, const learn::EpisodeMetrics& m) {
  out << m.episode << ',' << m.steps << ',' << format_double(m.reward) << ',' << format_double(m.eta) << ','
      << m.grouping_version << ',' << m.k << ',' << format_double(m.silhouette) << ',' << m.message_count << ','
      << format_double(m.loss_task) << ',' << format_double(m.loss_group) << ',' << format_double(m.loss_att) << ','
      << format_double(m.loss_group_literal) << ',' << (m.success ? 1 : 0) << ',' << m.updates << '\n';
  out.flush();
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

void init_logging() {
  auto logger = spdlog::get("hygma");
  if (!logger) logger = spdlog::stderr_color_mt("hygma");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%l] %v");
  const char* env = std::getenv("HYGMA_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") spdlog::set_level(spdlog::level::err);
  else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::set_level(spdlog::level::info);
}

TrainOutcome run_train(const RunConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  TrainOutcome outcome;
  auto metrics = open_csv(cfg.out_dir / "metrics.csv",
                          "episode,steps,reward,eta,grouping_version,k,silhouette,message_count,loss_task,loss_group,"
                          "loss_att,loss_group_literal,success,updates");
  auto timeline = open_csv(cfg.out_dir / "groups_timeline.csv", "step,episode,version,k,labels");
  const auto checkpoint = cfg.out_dir / "checkpoint.bin";

  learn::TrainHooks hooks;
  hooks.on_episode = [&](const learn::EpisodeMetrics& m) {
    write_metrics_row(metrics, m);
    if ((m.episode + 1) % 100 == 0) {
      spdlog::info("episode {} steps {} reward {:.3f} k {} v{} task {:.4f} group {:.4f} att {:.4f}", m.episode + 1,
                   m.steps, m.reward, m.k, m.grouping_version, m.loss_task, m.loss_group, m.loss_att);
    }
    spdlog::debug("episode {} steps {} reward {}", m.episode, m.steps, m.reward);
  };
  hooks.on_grouping = [&](const learn::GroupingEvent& e) {
    timeline << e.global_step << ',' << e.episode << ',' << e.grouping.version << ',' << e.grouping.k << ','
             << join_labels(e.grouping.labels) << '\n';
    timeline.flush();
    spdlog::debug("grouping v{} k={} at step {}", e.grouping.version, e.grouping.k, e.global_step);
  };
  hooks.on_checkpoint = [&](const learn::Learner& l, const spectral::Grouping& g, std::size_t) {
    save_checkpoint(checkpoint, l, g);
  };

  spdlog::info("train: mode={} variant={} episodes={} seed={} out={}",
               cfg.train.learn.mode == learn::Mode::Value ? "value" : "policy", variant_name(cfg.train.variant),
               cfg.train.learn.episodes, cfg.train.seed, cfg.out_dir.string());
  try {
    auto result = learn::train_run(cfg.train, hooks);
    auto cooc = open_csv(cfg.out_dir / "cooccurrence.csv", [&] {
      std::string h = "agent";
      for (std::size_t j = 0; j < result.cooccurrence.size(); ++j) h += ",a" + std::to_string(j);
      return h;
    }());
    for (std::size_t i = 0; i < result.cooccurrence.size(); ++i) {
      cooc << 'a' << i;
      for (auto c : result.cooccurrence[i]) cooc << ',' << c;
      cooc << '\n';
    }
    outcome.metrics = std::move(result.metrics);
    spdlog::info("train: done, final-window mean steps {:.3f}", learn::final_window_mean_steps(outcome.metrics));
  } catch (const learn::TrainingAborted& e) {
    spdlog::error("train: aborted: {}", e.what());
    outcome.exit_code = 2;
    outcome.error = e.what();
  }
  return outcome;
}

learn::EvalSummary run_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint) {
  cfg.validate();
  Rng init = learn::derive_rng(cfg.train.seed, 1);
  auto learner = learn::make_learner(cfg.train, init);
  const auto grouping = load_checkpoint(checkpoint, *learner);
  const auto s = learn::evaluate(*learner, grouping, cfg.eval_episodes, cfg.eval_seed);
  std::filesystem::create_directories(cfg.out_dir);
  auto out = open_csv(cfg.out_dir / "eval.csv", "episodes,mean_steps,std_steps,success_rate,mean_reward,eval_seed");
  out << s.episodes << ',' << format_double(s.mean_steps) << ',' << format_double(s.std_steps) << ','
      << format_double(s.success_rate) << ',' << format_double(s.mean_reward) << ',' << cfg.eval_seed << '\n';
  spdlog::info("eval: {} episodes, steps {:.3f} ± {:.3f}, success {:.3f}", s.episodes, s.mean_steps, s.std_steps,
               s.success_rate);
  return s;
}

std::vector<AblationRow> run_ablation_suite(const RunConfig& cfg) {
  cfg.validate();
  std::vector<AblationRow> rows;
  for (auto v : {learn::Variant::Hgcn, learn::Variant::Gcn, learn::Variant::SingleGroup}) {
    RunConfig c = cfg;
    c.train.variant = v;
    c.out_dir = cfg.out_dir / variant_name(v);
    const auto outcome = run_train(c);
    AblationRow r;
    r.variant = variant_name(v);
    r.seed = cfg.train.seed;
    r.episodes = outcome.metrics.size();
    r.final_window_steps = learn::final_window_mean_steps(outcome.metrics);
    if (!outcome.metrics.empty()) {
      const std::size_t w = std::max<std::size_t>(1, (outcome.metrics.size() + 9) / 10);
      double s = 0.0;
      for (std::size_t i = outcome.metrics.size() - w; i < outcome.metrics.size(); ++i) s += outcome.metrics[i].reward;
      r.final_window_reward = s / static_cast<double>(w);
    }
    r.exit_code = outcome.exit_code;
    rows.push_back(r);
  }
  std::filesystem::create_directories(cfg.out_dir);
  auto out = open_csv(cfg.out_dir / "ablation.csv", "variant,seed,episodes,final_window_mean_steps,final_window_mean_reward,exit_code");
  for (const auto& r : rows) {
    out << r.variant << ',' << r.seed << ',' << r.episodes << ',' << format_double(r.final_window_steps) << ','
        << format_double(r.final_window_reward) << ',' << r.exit_code << '\n';
  }
  return rows;
}

spectral::Grouping balanced_grouping(std::size_t n, std::size_t k) {
  if (k == 0 || k > n) throw std::invalid_argument("balanced_grouping: need 1 <= k <= n");
  spectral::Grouping g;
  g.k = k;
  g.cohesion.assign(k, 1.0);
  const std::size_t base = n / k, extra = n % k;
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t i = 0; i < base + (c < extra ? 1 : 0); ++i) g.labels.push_back(c);
  g.version = 1;
  return g;
}

std::vector<ComplexityRow> complexity_report(const RunConfig& cfg) {
  cfg.validate();
  std::vector<ComplexityRow> rows;
  for (auto n : cfg.complexity_n) {
    for (std::size_t k = 1; k <= std::min(cfg.complexity_k_max, n); ++k) {
      ComplexityRow r;
      r.n = n;
      r.k = k;
      r.message_count = hypergraph::message_count(hypergraph::build_hypergraph(balanced_grouping(n, k)));
      r.fully_connected = static_cast<std::uint64_t>(n) * (n - 1);
      r.ratio = static_cast<double>(r.message_count) / static_cast<double>(r.fully_connected);
      rows.push_back(r);
    }
  }
  std::filesystem::create_directories(cfg.out_dir);
  auto out = open_csv(cfg.out_dir / "complexity.csv", "n,k,message_count,fully_connected,ratio");
  for (const auto& r : rows) {
    out << r.n << ',' << r.k << ',' << r.message_count << ',' << r.fully_connected << ',' << format_double(r.ratio)
        << '\n';
  }
  return rows;
}

}  // namespace hygma::harness
