#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "hygma/harness/harness.hpp"

namespace hygma::harness {

namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw std::invalid_argument(key + ": " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) bad(key, "expected a number, got '" + v + "'");
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  if (!v.empty() && v.front() == '-') bad(key, "must be non-negative, got '" + v + "'");
  return parse_number<std::size_t>(key, v);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad(key, "expected a boolean, got '" + v + "'");
}

std::map<std::string, Setter> make_setters() {
  std::map<std::string, Setter> s;
  auto count = [&](const std::string& key, std::size_t& (*f)(RunConfig&)) {
    s[key] = [key, f](RunConfig& c, const std::string& v) { f(c) = parse_count(key, v); };
  };
  auto real = [&](const std::string& key, double& (*f)(RunConfig&)) {
    s[key] = [key, f](RunConfig& c, const std::string& v) { f(c) = parse_number<double>(key, v); };
  };

  s["seed"] = [](RunConfig& c, const std::string& v) { c.train.seed = parse_number<std::uint64_t>("seed", v); };
  s["out_dir"] = [](RunConfig& c, const std::string& v) {
    if (v.empty()) bad("out_dir", "must not be empty");
    c.out_dir = v;
  };
  s["ablation"] = [](RunConfig& c, const std::string& v) {
    try {
      c.train.variant = parse_variant(v);
    } catch (const std::invalid_argument&) {
      bad("ablation", "expected hgcn|gcn|single-group, got '" + v + "'");
    }
  };

  count("env.grid", [](RunConfig& c) -> std::size_t& { return c.train.env.grid; });
  count("env.n_predators", [](RunConfig& c) -> std::size_t& { return c.train.env.n_predators; });
  count("env.vision", [](RunConfig& c) -> std::size_t& { return c.train.env.vision; });
  count("env.max_steps", [](RunConfig& c) -> std::size_t& { return c.train.env.max_steps; });
  s["env.prey_policy"] = [](RunConfig& c, const std::string& v) {
    if (v == "stationary") c.train.env.prey_policy = env::PreyPolicy::Stationary;
    else if (v == "random") c.train.env.prey_policy = env::PreyPolicy::RandomMove;
    else bad("env.prey_policy", "expected stationary|random, got '" + v + "'");
  };

  count("spectral.k_min", [](RunConfig& c) -> std::size_t& { return c.train.spectral.k_min; });
  count("spectral.k_max", [](RunConfig& c) -> std::size_t& { return c.train.spectral.k_max; });
  count("spectral.knn", [](RunConfig& c) -> std::size_t& { return c.train.spectral.knn; });
  real("spectral.delta", [](RunConfig& c) -> double& { return c.train.spectral.delta; });
  count("spectral.interval", [](RunConfig& c) -> std::size_t& { return c.train.spectral.interval; });
  count("spectral.kmeans_restarts", [](RunConfig& c) -> std::size_t& { return c.train.spectral.kmeans_restarts; });
  count("spectral.kmeans_iters", [](RunConfig& c) -> std::size_t& { return c.train.spectral.kmeans_iters; });
  count("spectral.window_len", [](RunConfig& c) -> std::size_t& { return c.train.spectral.window_len; });

  count("model.hidden_dim", [](RunConfig& c) -> std::size_t& { return c.train.model.hidden_dim; });
  count("model.hgcn_out", [](RunConfig& c) -> std::size_t& { return c.train.model.hgcn_out; });
  count("model.hgcn_layers", [](RunConfig& c) -> std::size_t& { return c.train.model.hgcn_layers; });
  count("model.heads", [](RunConfig& c) -> std::size_t& { return c.train.model.heads; });
  count("model.mixer_embed", [](RunConfig& c) -> std::size_t& { return c.train.model.mixer_embed; });
  count("model.critic_hidden", [](RunConfig& c) -> std::size_t& { return c.train.model.critic_hidden; });

  s["learn.mode"] = [](RunConfig& c, const std::string& v) {
    if (v == "value") c.train.learn.mode = learn::Mode::Value;
    else if (v == "policy") c.train.learn.mode = learn::Mode::Policy;
    else bad("learn.mode", "expected value|policy, got '" + v + "'");
  };
  s["learn.optimizer"] = [](RunConfig& c, const std::string& v) {
    if (v == "auto") c.train.learn.optimizer = learn::OptimizerKind::Auto;
    else if (v == "adam") c.train.learn.optimizer = learn::OptimizerKind::Adam;
    else if (v == "rmsprop") c.train.learn.optimizer = learn::OptimizerKind::RmsProp;
    else bad("learn.optimizer", "expected auto|adam|rmsprop, got '" + v + "'");
  };
  real("learn.lr", [](RunConfig& c) -> double& { return c.train.learn.lr; });
  real("learn.grad_clip", [](RunConfig& c) -> double& { return c.train.learn.grad_clip; });
  count("learn.episodes", [](RunConfig& c) -> std::size_t& { return c.train.learn.episodes; });
  count("learn.batch_steps", [](RunConfig& c) -> std::size_t& { return c.train.learn.batch_steps; });
  count("learn.batch_episodes", [](RunConfig& c) -> std::size_t& { return c.train.learn.batch_episodes; });
  count("learn.buffer_capacity", [](RunConfig& c) -> std::size_t& { return c.train.learn.buffer_capacity; });
  count("learn.target_sync", [](RunConfig& c) -> std::size_t& { return c.train.learn.target_sync; });
  s["learn.double_q"] = [](RunConfig& c, const std::string& v) { c.train.learn.double_q = parse_bool("learn.double_q", v); };
  real("learn.eps_start", [](RunConfig& c) -> double& { return c.train.learn.eps_start; });
  real("learn.eps_finish", [](RunConfig& c) -> double& { return c.train.learn.eps_finish; });
  count("learn.eps_anneal_steps", [](RunConfig& c) -> std::size_t& { return c.train.learn.eps_anneal_steps; });
  real("learn.entropy_coef", [](RunConfig& c) -> double& { return c.train.learn.entropy_coef; });
  count("learn.checkpoint_every", [](RunConfig& c) -> std::size_t& { return c.train.learn.checkpoint_every; });
  real("learn.lambda1", [](RunConfig& c) -> double& { return c.train.learn.weights.lambda1; });
  real("learn.lambda2", [](RunConfig& c) -> double& { return c.train.learn.weights.lambda2; });
  real("learn.beta", [](RunConfig& c) -> double& { return c.train.learn.weights.beta; });
  real("learn.gamma", [](RunConfig& c) -> double& { return c.train.learn.weights.gamma; });
  real("learn.alpha_critic", [](RunConfig& c) -> double& { return c.train.learn.weights.alpha_critic; });

  count("eval.episodes", [](RunConfig& c) -> std::size_t& { return c.eval_episodes; });
  s["eval.seed"] = [](RunConfig& c, const std::string& v) { c.eval_seed = parse_number<std::uint64_t>("eval.seed", v); };

  s["complexity.n_values"] = [](RunConfig& c, const std::string& v) {
    c.complexity_n.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) c.complexity_n.push_back(parse_count("complexity.n_values", trim(item)));
  };
  count("complexity.k_max", [](RunConfig& c) -> std::size_t& { return c.complexity_k_max; });
  return s;
}

const std::map<std::string, Setter>& setters() {
  static const auto s = make_setters();
  return s;
}

void apply(RunConfig& c, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) bad(key, "unknown key");
  it->second(c, value);
}

}  // namespace

void RunConfig::validate() const {
  train.validate();
  if (complexity_n.empty()) bad("complexity.n_values", "must list at least one agent count");
  for (auto n : complexity_n)
    if (n < 2) bad("complexity.n_values", "every agent count must be >= 2");
  if (complexity_k_max < 1) bad("complexity.k_max", "must be >= 1");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

std::string variant_name(learn::Variant v) {
  switch (v) {
    case learn::Variant::Hgcn: return "hgcn";
    case learn::Variant::Gcn: return "gcn";
    case learn::Variant::SingleGroup: return "single-group";
  }
  return "hgcn";
}

learn::Variant parse_variant(const std::string& s) {
  if (s == "hgcn") return learn::Variant::Hgcn;
  if (s == "gcn") return learn::Variant::Gcn;
  if (s == "single-group") return learn::Variant::SingleGroup;
  throw std::invalid_argument("unknown variant '" + s + "'");
}

RunConfig parse_config_text(const std::string& text, const Overrides& overrides) {
  RunConfig cfg;
  bool eval_seed_set = false;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad("line " + std::to_string(lineno), "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad("line " + std::to_string(lineno), "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string path = section.empty() ? key : section + "." + key;
    apply(cfg, path, trim(line.substr(eq + 1)));
    eval_seed_set = eval_seed_set || path == "eval.seed";
  }
  for (const auto& [k, v] : overrides) {
    apply(cfg, k, v);
    eval_seed_set = eval_seed_set || k == "eval.seed";
  }
  if (!eval_seed_set) cfg.eval_seed = cfg.train.seed;
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

}  // namespace hygma::harness
