#include "hygma/tensor/tensor.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hygma {

namespace {
thread_local GradTape* g_active_tape = nullptr;
}  // namespace

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void TensorImpl::accumulate_grad(std::span<const double> g) {
  if (!requires_grad) return;
  if (grad.empty()) {
    grad.assign(g.begin(), g.end());
    return;
  }
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
}

Tensor::Tensor() : impl_(std::make_shared<TensorImpl>()) {
  impl_->shape = {};
  impl_->data = {0.0};
}

Tensor::Tensor(Shape shape, std::vector<double> data) : impl_(std::make_shared<TensorImpl>()) {
  if (shape_numel(shape) != data.size()) {
    throw std::invalid_argument("Tensor: shape " + shape_str(shape) + " does not match " +
                                std::to_string(data.size()) + " values");
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }
Tensor Tensor::ones(Shape shape) { return full(std::move(shape), 1.0); }

Tensor Tensor::full(Shape shape, double value) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::eye(std::size_t n) {
  Tensor t = zeros({n, n});
  for (std::size_t i = 0; i < n; ++i) t.impl_->data[i * n + i] = 1.0;
  return t;
}

Tensor Tensor::uniform(Shape shape, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  const std::size_t n = shape_numel(shape);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return Tensor(std::move(shape), std::move(v));
}

Tensor Tensor::row(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::matrix(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows[0].size() : 0;
  std::vector<double> v;
  v.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("Tensor::matrix: ragged rows");
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(v));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= impl_->shape.size()) {
    throw std::out_of_range("Tensor::dim: axis " + std::to_string(axis) + " out of range for " +
                            shape_str(impl_->shape));
  }
  return impl_->shape[axis];
}

std::span<double> Tensor::mutable_data() {
  if (!impl_->is_leaf) throw std::logic_error("Tensor::mutable_data: tensor is not a leaf");
  return impl_->data;
}

double Tensor::item() const {
  if (numel() != 1) {
    throw std::invalid_argument("Tensor::item: tensor of shape " + shape_str(shape()) +
                                " is not a scalar");
  }
  return impl_->data[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return impl_->data[r * impl_->shape.at(1) + c];
}

Tensor& Tensor::set_requires_grad(bool on) {
  if (!impl_->is_leaf) throw std::logic_error("set_requires_grad: only leaves may be toggled");
  impl_->requires_grad = on;
  if (!on) impl_->grad.clear();
  return *this;
}

void Tensor::zero_grad() { impl_->grad.clear(); }

Tensor Tensor::detach() const { return Tensor(impl_->shape, impl_->data); }

Tensor Tensor::clone() const {
  Tensor t(impl_->shape, impl_->data);
  t.impl_->requires_grad = impl_->requires_grad && impl_->is_leaf;
  return t;
}

Tensor make_result(Shape shape, std::vector<double> data) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  return Tensor(std::move(impl));
}

bool GradTape::active() const { return g_active_tape == this; }

void GradTape::record(Node node) {
  node.out->tape = this;
  node.out->node_index = nodes_.size();
  nodes_.push_back(std::move(node));
}

TapeScope::TapeScope(GradTape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

NoGradScope::NoGradScope() : previous_(g_active_tape) { g_active_tape = nullptr; }
NoGradScope::~NoGradScope() { g_active_tape = previous_; }

GradTape* active_tape() { return g_active_tape; }

void backward(const Tensor& loss) {
  if (loss.numel() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                shape_str(loss.shape()));
  }
  const auto& impl = loss.impl();
  if (impl->is_leaf) {
    if (!impl->requires_grad) {
      throw std::invalid_argument("backward: loss does not require grad");
    }
    const double one = 1.0;
    impl->accumulate_grad({&one, 1});
    return;
  }
  GradTape* tape = g_active_tape;
  if (tape == nullptr || impl->tape != tape || impl->node_index >= tape->size() ||
      tape->node(impl->node_index).out != impl) {
    throw std::logic_error("backward: loss was not recorded on the active tape");
  }
  const std::size_t last = impl->node_index;
  for (std::size_t i = 0; i <= last; ++i) tape->node(i).out->grad.clear();
  impl->grad.assign(1, 1.0);
  for (std::size_t i = last + 1; i-- > 0;) {
    const auto& node = tape->node(i);
    if (node.out->grad.empty()) continue;
    node.backward(*node.out);
  }
}

}  // namespace hygma
