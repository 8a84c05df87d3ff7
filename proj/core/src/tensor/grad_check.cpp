#include "hygma/tensor/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hygma {

namespace {

double evaluate(const std::function<Tensor()>& f) {
  NoGradScope no_grad;
  const double v = f().item();
  if (!std::isfinite(v)) throw std::runtime_error("grad_check: non-finite function value");
  return v;
}

}  // namespace

double grad_check_params(const std::function<Tensor()>& f, std::vector<Tensor> params, double eps) {
  for (auto& p : params) {
    p.set_requires_grad(true);
    p.zero_grad();
  }
  {
    GradTape tape;
    TapeScope scope(tape);
    Tensor y = f();
    if (!std::isfinite(y.item())) throw std::runtime_error("grad_check: non-finite function value");
    backward(y);
  }
  double worst = 0.0;
  for (auto& p : params) {
    std::vector<double> analytic(p.numel(), 0.0);
    if (p.has_grad()) std::copy(p.grad().begin(), p.grad().end(), analytic.begin());
    auto values = p.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double orig = values[i];
      values[i] = orig + eps;
      const double up = evaluate(f);
      values[i] = orig - eps;
      const double down = evaluate(f);
      values[i] = orig;
      const double numeric = (up - down) / (2.0 * eps);
      if (!std::isfinite(analytic[i])) throw std::runtime_error("grad_check: non-finite gradient");
      worst = std::max(worst, std::fabs(analytic[i] - numeric) / std::max(1.0, std::fabs(numeric)));
    }
    p.zero_grad();
  }
  return worst;
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps) {
  Tensor leaf = x.detach();
  return grad_check_params([&] { return f(leaf); }, {leaf}, eps);
}

}  // namespace hygma
