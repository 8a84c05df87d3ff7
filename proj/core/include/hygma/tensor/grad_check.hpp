#pragma once

#include <functional>
#include <vector>

#include "hygma/tensor/tensor.hpp"

namespace hygma {

/// Max over coordinates of |analytic - central difference| / max(1, |central difference|)
/// for a scalar function of one tensor. Throws std::runtime_error on non-finite values.
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps = 1e-5);

/// Same measure over a set of leaf parameters captured by f. Parameter values are
/// perturbed in place and restored.
double grad_check_params(const std::function<Tensor()>& f, std::vector<Tensor> params,
                         double eps = 1e-5);

}  // namespace hygma
