#include "hygma/tensor/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hygma/tensor/ops.hpp"

namespace hygma {

Tensor init_param(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  Tensor t = Tensor::uniform(std::move(shape), -bound, bound, rng);
  t.set_requires_grad(true);
  return t;
}

Linear Linear::create(std::size_t in, std::size_t out, Rng& rng, bool with_bias) {
  Linear l;
  l.weight = init_param({in, out}, in, rng);
  l.bias = with_bias ? init_param({1, out}, in, rng) : Tensor::zeros({0});
  return l;
}

Tensor Linear::operator()(const Tensor& x) const {
  Tensor y = ops::matmul(x, weight);
  return bias.numel() ? ops::add_bias(y, bias) : y;
}

void Linear::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".weight", weight);
  if (bias.numel()) out.emplace_back(prefix + ".bias", bias);
}

GruParams GruParams::create(std::size_t d_in, std::size_t d_h, Rng& rng) {
  return {init_param({d_in, 3 * d_h}, d_in, rng), init_param({d_h, 3 * d_h}, d_h, rng),
          init_param({1, 3 * d_h}, d_h, rng), init_param({1, 3 * d_h}, d_h, rng)};
}

void GruParams::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".w_input", w_input);
  out.emplace_back(prefix + ".w_hidden", w_hidden);
  out.emplace_back(prefix + ".b_input", b_input);
  out.emplace_back(prefix + ".b_hidden", b_hidden);
}

Tensor gru_cell(const Tensor& x, const Tensor& h_prev, const GruParams& p) {
  const std::size_t dh = p.hidden_dim();
  if (x.rank() != 2 || x.dim(1) != p.input_dim()) {
    throw std::invalid_argument("gru_cell: shape mismatch " + shape_str(x.shape()) + " vs " +
                                shape_str(p.w_input.shape()));
  }
  if (h_prev.rank() != 2 || h_prev.dim(1) != dh || h_prev.dim(0) != x.dim(0)) {
    throw std::invalid_argument("gru_cell: shape mismatch " + shape_str(h_prev.shape()) + " vs " +
                                shape_str(p.w_hidden.shape()));
  }
  const Tensor gx = ops::add_bias(ops::matmul(x, p.w_input), p.b_input);
  const Tensor gh = ops::add_bias(ops::matmul(h_prev, p.w_hidden), p.b_hidden);
  const Tensor r = ops::sigmoid(ops::add(ops::slice(gx, 1, 0, dh), ops::slice(gh, 1, 0, dh)));
  const Tensor z = ops::sigmoid(ops::add(ops::slice(gx, 1, dh, 2 * dh), ops::slice(gh, 1, dh, 2 * dh)));
  const Tensor n = ops::tanh(
      ops::add(ops::slice(gx, 1, 2 * dh, 3 * dh), ops::mul(r, ops::slice(gh, 1, 2 * dh, 3 * dh))));
  // (1 - z) * n + z * h  ==  n + z * (h - n)
  return ops::add(n, ops::mul(z, ops::sub(h_prev, n)));
}

void copy_params(const NamedParams& src, NamedParams& dst) {
  if (src.size() != dst.size()) throw std::invalid_argument("copy_params: parameter count mismatch");
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto& [sname, s] = src[i];
    auto& [dname, d] = dst[i];
    if (sname != dname || s.shape() != d.shape()) {
      throw std::invalid_argument("copy_params: mismatch at " + sname + " vs " + dname);
    }
    std::copy(s.data().begin(), s.data().end(), d.mutable_data().begin());
  }
}

std::vector<Tensor> param_tensors(const NamedParams& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& [name, t] : params) out.push_back(t);
  return out;
}

}  // namespace hygma
