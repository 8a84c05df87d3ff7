#pragma once

#include <vector>

#include "hygma/tensor/tensor.hpp"

namespace hygma {

/// Rescales gradients so their joint L2 norm is at most max_norm. Returns the norm before clipping.
double clip_grad_norm(const std::vector<Tensor>& params, double max_norm);

class Optimizer {
 public:
  explicit Optimizer(std::vector<Tensor> params) : params_(std::move(params)) {}
  virtual ~Optimizer() = default;

  virtual void step() = 0;
  void zero_grad();
  const std::vector<Tensor>& params() const { return params_; }

 protected:
  std::vector<Tensor> params_;
};

class Adam final : public Optimizer {
 public:
  Adam(std::vector<Tensor> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void step() override;

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

class RmsProp final : public Optimizer {
 public:
  RmsProp(std::vector<Tensor> params, double lr, double alpha = 0.99, double eps = 1e-5);
  void step() override;

 private:
  double lr_, alpha_, eps_;
  std::vector<std::vector<double>> sq_;
};

}  // namespace hygma
