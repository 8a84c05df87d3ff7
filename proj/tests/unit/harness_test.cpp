#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hygma/harness/harness.hpp"

using namespace hygma;
using namespace hygma::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream f(p);
  std::size_t n = 0;
  for (std::string line; std::getline(f, line);) ++n;
  return n;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hygma_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig tiny(const fs::path& out) {
  auto cfg = parse_config_text(
      "seed = 3\n"
      "[env]\ngrid = 5\nn_predators = 3\nmax_steps = 8\n"
      "[spectral]\ninterval = 5\n"
      "[model]\nhidden_dim = 8\nhgcn_out = 6\nmixer_embed = 4\ncritic_hidden = 4\n"
      "[learn]\nepisodes = 6\nbatch_steps = 16\n"
      "[eval]\nepisodes = 5\n");
  cfg.out_dir = out;
  return cfg;
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  const auto cfg = parse_config_text("");
  EXPECT_EQ(cfg.train.model.hidden_dim, 96u);
  EXPECT_EQ(cfg.train.model.hgcn_out, 64u);
  EXPECT_EQ(cfg.train.model.hgcn_layers, 1u);
  EXPECT_EQ(cfg.train.spectral.k_min, 2u);
  EXPECT_EQ(cfg.train.spectral.k_max, 4u);
  EXPECT_EQ(cfg.train.spectral.interval, 100u);
  EXPECT_DOUBLE_EQ(cfg.train.spectral.delta, 0.8);
  EXPECT_DOUBLE_EQ(cfg.train.learn.weights.lambda1, 0.1);
  EXPECT_DOUBLE_EQ(cfg.train.learn.weights.lambda2, 0.01);
  EXPECT_DOUBLE_EQ(cfg.train.learn.lr, 0.001);
  EXPECT_EQ(cfg.train.env.grid, 10u);
  EXPECT_EQ(cfg.train.env.n_predators, 5u);
}

TEST(Config, DeltaOutOfRange) {
  try {
    parse_config_text("[spectral]\ndelta = 1.5\n");
    FAIL() << "expected a throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("spectral.delta must be in [0,1]"), std::string::npos);
  }
}

TEST(Config, UnknownKeyNamesPath) {
  try {
    parse_config_text("[learn]\nlearning_rate = 0.1\n");
    FAIL() << "expected a throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("learn.learning_rate"), std::string::npos);
  }
}

TEST(Config, TypeMismatchRejected) {
  EXPECT_THROW(parse_config_text("[env]\ngrid = ten\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_text("[env]\ngrid = -3\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_text("[learn]\nmode = sarsa\n"), std::invalid_argument);
}

TEST(Config, OverridesWin) {
  const auto cfg = parse_config_text("seed = 3\n", {{"seed", "7"}});
  EXPECT_EQ(cfg.train.seed, 7u);
  EXPECT_EQ(cfg.eval_seed, 7u);
}

TEST(Config, CommentsAndSections) {
  const auto cfg = parse_config_text("# header\n[learn]\nmode = value ; inline\nlambda1 = 0\n[env]\nprey_policy = random\n");
  EXPECT_EQ(cfg.train.learn.mode, learn::Mode::Value);
  EXPECT_EQ(cfg.train.learn.weights.lambda1, 0.0);
  EXPECT_EQ(cfg.train.env.prey_policy, env::PreyPolicy::RandomMove);
}

TEST(Complexity, BalancedArithmetic) {
  auto cfg = parse_config_text("[complexity]\nn_values = 10\nk_max = 5\n");
  cfg.out_dir = scratch("complexity");
  const auto rows = complexity_report(cfg);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].message_count, 90u);
  EXPECT_DOUBLE_EQ(rows[0].ratio, 1.0);
  EXPECT_EQ(rows[4].message_count, 10u);
  EXPECT_EQ(rows[4].fully_connected, 90u);
  EXPECT_DOUBLE_EQ(rows[4].ratio, 1.0 / 9.0);
  for (const auto& r : rows) EXPECT_LE(r.ratio, 1.0);
  EXPECT_EQ(line_count(cfg.out_dir / "complexity.csv"), 6u);
}

TEST(Checkpoint, TensorTableRoundTrip) {
  const auto dir = scratch("table");
  const std::vector<NamedTensor> t{{"a", {2, 2}, {1, 2, 3, 4}}, {"b.c", {3}, {0.5, -0.25, 1e-300}}};
  write_tensor_table(dir / "x.bin", t);
  const auto back = read_tensor_table(dir / "x.bin");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].name, t[i].name);
    EXPECT_EQ(back[i].shape, t[i].shape);
    EXPECT_EQ(back[i].values, t[i].values);
  }
  EXPECT_FALSE(fs::exists(dir / "x.bin.tmp"));
}

TEST(Checkpoint, LearnerRoundTripAndShapeRejection) {
  const auto dir = scratch("ckpt");
  auto cfg = tiny(dir);
  Rng r1 = learn::derive_rng(1, 1), r2 = learn::derive_rng(2, 1);
  auto a = learn::make_learner(cfg.train, r1);
  auto b = learn::make_learner(cfg.train, r2);
  spectral::Grouping g;
  g.labels = {0, 1, 0};
  g.k = 2;
  g.cohesion = {0.25, 0.0};
  g.version = 4;
  g.eta_last = 0.5;
  save_checkpoint(dir / "c.bin", *a, g);
  const auto loaded = load_checkpoint(dir / "c.bin", *b);
  EXPECT_EQ(loaded.labels, g.labels);
  EXPECT_EQ(loaded.cohesion, g.cohesion);
  EXPECT_EQ(loaded.version, 4u);
  const auto pa = a->parameters(), pb = b->parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_TRUE(std::equal(pa[i].second.data().begin(), pa[i].second.data().end(), pb[i].second.data().begin()));
  }

  auto other = cfg.train;
  other.model.hidden_dim = 9;
  Rng r3 = learn::derive_rng(3, 1);
  auto c = learn::make_learner(other, r3);
  EXPECT_THROW(load_checkpoint(dir / "c.bin", *c), std::invalid_argument);
}

TEST(Checkpoint, RejectsGarbage) {
  const auto dir = scratch("garbage");
  std::ofstream(dir / "bad.bin") << "nope";
  EXPECT_THROW(read_tensor_table(dir / "bad.bin"), std::invalid_argument);
}

TEST(Commands, TrainWritesArtifactsDeterministically) {
  const auto d1 = scratch("train1"), d2 = scratch("train2");
  auto c1 = tiny(d1), c2 = tiny(d2);
  ASSERT_EQ(run_train(c1).exit_code, 0);
  ASSERT_EQ(run_train(c2).exit_code, 0);
  EXPECT_EQ(line_count(d1 / "metrics.csv"), 7u);
  for (const auto* f : {"metrics.csv", "groups_timeline.csv", "cooccurrence.csv"}) {
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
  }
  EXPECT_EQ(slurp(d1 / "checkpoint.bin"), slurp(d2 / "checkpoint.bin"));

  const auto e1 = scratch("eval1"), e2 = scratch("eval2");
  c1.out_dir = e1;
  c2.out_dir = e2;
  const auto s = run_eval(c1, d1 / "checkpoint.bin");
  run_eval(c2, d1 / "checkpoint.bin");
  EXPECT_GE(s.success_rate, 0.0);
  EXPECT_LE(s.success_rate, 1.0);
  EXPECT_EQ(slurp(e1 / "eval.csv"), slurp(e2 / "eval.csv"));
}

TEST(Commands, SingleGroupTimeline) {
  const auto dir = scratch("single");
  auto cfg = tiny(dir);
  cfg.train.variant = learn::Variant::SingleGroup;
  ASSERT_EQ(run_train(cfg).exit_code, 0);
  EXPECT_EQ(line_count(dir / "groups_timeline.csv"), 2u);
  std::ifstream f(dir / "groups_timeline.csv");
  std::string header, row;
  std::getline(f, header);
  std::getline(f, row);
  EXPECT_EQ(row, "0,0,0,1,0 0 0");
}

TEST(Commands, AblationRows) {
  const auto dir = scratch("ablate");
  auto cfg = tiny(dir);
  const auto rows = run_ablation_suite(cfg);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].variant, "hgcn");
  EXPECT_EQ(rows[1].variant, "gcn");
  EXPECT_EQ(rows[2].variant, "single-group");
  for (const auto& r : rows) EXPECT_EQ(r.seed, 3u);
  EXPECT_EQ(line_count(dir / "ablation.csv"), 4u);
}

TEST(Commands, UntrainedEvalNearRandom) {
  const auto dir = scratch("untrained");
  auto cfg = parse_config_text("seed = 5\n[learn]\nepisodes = 1\n[eval]\nepisodes = 200\n");
  cfg.out_dir = dir;
  Rng init = learn::derive_rng(5, 1);
  auto learner = learn::make_learner(cfg.train, init);
  save_checkpoint(dir / "untrained.bin", *learner, spectral::Grouping::all_in_one(5));
  const auto s = run_eval(cfg, dir / "untrained.bin");
  Rng rng(5);
  const double random = env::random_baseline(cfg.train.env, 1000, rng);
  EXPECT_LT(std::abs(s.mean_steps - random) / random, 0.10);
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-0.25), "-0.25");
  EXPECT_EQ(format_double(40), "40");
}
