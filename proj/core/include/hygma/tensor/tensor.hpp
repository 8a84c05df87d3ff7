#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace hygma {

using Shape = std::vector<std::size_t>;
using Rng = std::mt19937_64;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class GradTape;

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  bool is_leaf = true;
  const GradTape* tape = nullptr;
  std::size_t node_index = 0;

  void accumulate_grad(std::span<const double> g);
};

/// Dense row-major float64 array. Copies share storage; use clone() for a deep copy.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape);
  static Tensor ones(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor eye(std::size_t n);
  static Tensor uniform(Shape shape, double lo, double hi, Rng& rng);
  /// Row vector [1, n].
  static Tensor row(std::vector<double> values);
  /// Matrix from nested rows; all rows must have the same length.
  static Tensor matrix(const std::vector<std::vector<double>>& rows);

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return impl_->data.size(); }
  std::size_t rows() const { return dim(0); }
  std::size_t cols() const { return dim(1); }

  std::span<const double> data() const { return impl_->data; }
  /// Writable view; only valid for leaves (tensors not produced by a recorded op).
  std::span<double> mutable_data();
  double item() const;
  double operator[](std::size_t i) const { return impl_->data[i]; }
  double at(std::size_t r, std::size_t c) const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on);
  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const double> grad() const { return impl_->grad; }
  void zero_grad();

  Tensor detach() const;
  Tensor clone() const;
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  friend Tensor make_result(Shape, std::vector<double>);

  std::shared_ptr<TensorImpl> impl_;
};

/// Records differentiable operations in execution order.
class GradTape {
 public:
  struct Node {
    std::shared_ptr<TensorImpl> out;
    std::vector<std::shared_ptr<TensorImpl>> inputs;
    std::function<void(const TensorImpl& out)> backward;
  };

  GradTape() = default;
  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  std::size_t size() const { return nodes_.size(); }
  bool active() const;
  void clear() { nodes_.clear(); }

  void record(Node node);
  const Node& node(std::size_t i) const { return nodes_[i]; }

 private:
  std::vector<Node> nodes_;
};

/// Makes a tape the recording target for the current thread while in scope.
class TapeScope {
 public:
  explicit TapeScope(GradTape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  GradTape* previous_;
};

/// Suspends recording for the current thread while in scope.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  GradTape* previous_;
};

GradTape* active_tape();

/// Populates gradients of every requires_grad tensor reachable from a scalar loss
/// recorded on the active tape. Leaf gradients accumulate across calls.
void backward(const Tensor& loss);

}  // namespace hygma
