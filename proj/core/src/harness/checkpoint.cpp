#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "hygma/harness/harness.hpp"

namespace hygma::harness {

namespace {

constexpr char kMagic[4] = {'H', 'Y', 'G', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::invalid_argument("checkpoint: truncated " + what);
  return v;
}

}  // namespace

void write_tensor_table(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot write '" + tmp.string() + "'");
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kFormatVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
      out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
      for (auto d : t.shape) put<std::uint64_t>(out, d);
      if (shape_numel(t.shape) != t.values.size()) throw std::logic_error("checkpoint: payload/shape mismatch for " + t.name);
      out.write(reinterpret_cast<const char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::vector<NamedTensor> read_tensor_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("checkpoint: cannot open '" + path.string() + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw std::invalid_argument("checkpoint: bad magic");
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kFormatVersion) throw std::invalid_argument("checkpoint: unsupported version " + std::to_string(version));
  const auto count = get<std::uint32_t>(in, "tensor count");
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const auto len = get<std::uint32_t>(in, "name length");
    t.name.resize(len);
    if (!in.read(t.name.data(), len)) throw std::invalid_argument("checkpoint: truncated name");
    const auto rank = get<std::uint32_t>(in, "rank");
    for (std::uint32_t r = 0; r < rank; ++r) t.shape.push_back(static_cast<std::size_t>(get<std::uint64_t>(in, "dims")));
    t.values.resize(shape_numel(t.shape));
    if (!in.read(reinterpret_cast<char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * sizeof(double)))) {
      throw std::invalid_argument("checkpoint: truncated payload for " + t.name);
    }
    out.push_back(std::move(t));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const learn::Learner& learner,
                     const spectral::Grouping& grouping) {
  std::vector<NamedTensor> table;
  for (const auto& [name, t] : learner.parameters()) {
    table.push_back({name, t.shape(), std::vector<double>(t.data().begin(), t.data().end())});
  }
  std::vector<double> labels(grouping.labels.begin(), grouping.labels.end());
  table.push_back({"grouping.labels", {labels.size()}, labels});
  table.push_back({"grouping.cohesion", {grouping.cohesion.size()}, grouping.cohesion});
  table.push_back({"grouping.meta", {3},
                   {static_cast<double>(grouping.k), static_cast<double>(grouping.version), grouping.eta_last}});
  write_tensor_table(path, table);
}

spectral::Grouping load_checkpoint(const std::filesystem::path& path, learn::Learner& learner) {
  const auto table = read_tensor_table(path);
  auto find = [&](const std::string& name) -> const NamedTensor* {
    for (const auto& t : table)
      if (t.name == name) return &t;
    return nullptr;
  };
  auto params = learner.parameters();
  for (auto& [name, t] : params) {
    const auto* src = find(name);
    if (!src) throw std::invalid_argument("checkpoint: missing tensor '" + name + "'");
    if (src->shape != t.shape()) {
      throw std::invalid_argument("checkpoint: shape mismatch for '" + name + "': file " + shape_str(src->shape) +
                                  " vs model " + shape_str(t.shape()));
    }
  }
  for (auto& [name, t] : params) {
    const auto* src = find(name);
    auto dst = t.mutable_data();
    std::copy(src->values.begin(), src->values.end(), dst.begin());
  }
  learner.on_parameters_loaded();

  const std::size_t n = learner.config().env.n_predators;
  const auto* labels = find("grouping.labels");
  const auto* cohesion = find("grouping.cohesion");
  const auto* meta = find("grouping.meta");
  if (!labels || !cohesion || !meta || meta->values.size() != 3) return spectral::Grouping::all_in_one(n);
  if (labels->values.size() != n) throw std::invalid_argument("checkpoint: grouping covers a different agent count");
  spectral::Grouping g;
  for (double v : labels->values) g.labels.push_back(static_cast<std::size_t>(v));
  g.cohesion = cohesion->values;
  g.k = static_cast<std::size_t>(meta->values[0]);
  g.version = static_cast<std::uint64_t>(meta->values[1]);
  g.eta_last = meta->values[2];
  return g;
}

}  // namespace hygma::harness
