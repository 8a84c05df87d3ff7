#pragma once

#include <cstddef>
#include <vector>

#include "hygma/tensor/tensor.hpp"

// Differentiable operator inventory. Every op records onto the active tape when
// any input requires grad. Shape errors throw std::invalid_argument naming the op
// and both shapes; domain errors (log/sqrt of non-positive input) throw
// std::domain_error.
namespace hygma::ops {

// Contraction of two rank-2 tensors.
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise with numpy-style broadcasting.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// x + bias, with bias broadcast over leading dims ([1, d] or [d] against [n, d]).
Tensor add_bias(const Tensor& x, const Tensor& bias);

Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);
// Row gather along axis 0; indices may repeat.
Tensor gather(const Tensor& a, const std::vector<std::size_t>& rows);

// Reductions. The axis overloads drop the reduced axis.
Tensor sum(const Tensor& a);
Tensor sum(const Tensor& a, std::size_t axis);
Tensor mean(const Tensor& a);
Tensor mean(const Tensor& a, std::size_t axis);

Tensor abs(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = 0.2);
Tensor elu(const Tensor& a, double alpha = 1.0);
Tensor softmax(const Tensor& a, std::size_t axis);
// log(softmax) computed stably.
Tensor log_softmax(const Tensor& a, std::size_t axis);
Tensor square(const Tensor& a);
Tensor sqrt(const Tensor& a);

}  // namespace hygma::ops
