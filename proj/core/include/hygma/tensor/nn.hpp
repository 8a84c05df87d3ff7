#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "hygma/tensor/tensor.hpp"

namespace hygma {

/// Named collection of learnable tensors; the unit of checkpointing and optimization.
using NamedParams = std::vector<std::pair<std::string, Tensor>>;

/// Leaf tensor initialized uniformly in ±sqrt(1/fan_in), requires_grad set.
Tensor init_param(Shape shape, std::size_t fan_in, Rng& rng);

struct Linear {
  Tensor weight;  // [in, out]
  Tensor bias;    // [1, out]; empty numel-0 tensor when disabled

  static Linear create(std::size_t in, std::size_t out, Rng& rng, bool with_bias = true);
  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, NamedParams& out) const;
  std::size_t in_dim() const { return weight.dim(0); }
  std::size_t out_dim() const { return weight.dim(1); }
};

/// Gate weights for a GRU cell. Columns are laid out as [reset | update | candidate].
struct GruParams {
  Tensor w_input;   // [d_in, 3*d_h]
  Tensor w_hidden;  // [d_h, 3*d_h]
  Tensor b_input;   // [1, 3*d_h]
  Tensor b_hidden;  // [1, 3*d_h]

  static GruParams create(std::size_t d_in, std::size_t d_h, Rng& rng);
  std::size_t input_dim() const { return w_input.dim(0); }
  std::size_t hidden_dim() const { return w_hidden.dim(0); }
  void collect(const std::string& prefix, NamedParams& out) const;
};

/// One GRU step:
///   r = sigmoid(x Wir + bir + h Whr + bhr)
///   z = sigmoid(x Wiz + biz + h Whz + bhz)
///   n = tanh(x Win + bin + r * (h Whn + bhn))
///   h' = (1 - z) * n + z * h
Tensor gru_cell(const Tensor& x, const Tensor& h_prev, const GruParams& params);

/// Copies parameter values (not gradients) from src to dst; names and shapes must match.
void copy_params(const NamedParams& src, NamedParams& dst);

std::vector<Tensor> param_tensors(const NamedParams& params);

}  // namespace hygma
