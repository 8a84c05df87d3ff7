#include "hygma/tensor/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace hygma {

// Defined in tensor.cpp; constructs an unrecorded result tensor.
Tensor make_result(Shape shape, std::vector<double> data);

namespace ops {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;
using Impl = std::shared_ptr<TensorImpl>;
using BackwardFn = std::function<void(const TensorImpl&)>;

bool wants_grad(std::initializer_list<const Tensor*> inputs) {
  if (active_tape() == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t->requires_grad(); });
}

Tensor finish(Shape shape, std::vector<double> data, std::vector<Impl> inputs, bool record,
              BackwardFn fn) {
  Tensor out = make_result(std::move(shape), std::move(data));
  if (record) {
    const auto& impl = out.impl();
    impl->requires_grad = true;
    impl->is_leaf = false;
    active_tape()->record({impl, std::move(inputs), std::move(fn)});
  }
  return out;
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                              shape_str(b));
}

void check_axis(const char* op, const Tensor& a, std::size_t axis) {
  if (axis >= a.rank()) {
    throw std::invalid_argument(std::string(op) + ": axis " + std::to_string(axis) +
                                " out of range for shape " + shape_str(a.shape()));
  }
}

// Splits a shape around an axis into (outer, extent, inner) products.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
  AxisSplit r;
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  r.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

// Index maps from each output element to its source element in a and b.
struct BroadcastPlan {
  Shape out;
  bool same = false;
  std::vector<std::size_t> ia, ib;
};

BroadcastPlan plan_broadcast(const char* op, const Shape& a, const Shape& b) {
  BroadcastPlan p;
  if (a == b) {
    p.out = a;
    p.same = true;
    return p;
  }
  const std::size_t r = std::max(a.size(), b.size());
  Shape pa(r, 1), pb(r, 1);
  std::copy(a.begin(), a.end(), pa.begin() + static_cast<std::ptrdiff_t>(r - a.size()));
  std::copy(b.begin(), b.end(), pb.begin() + static_cast<std::ptrdiff_t>(r - b.size()));
  p.out.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    if (pa[i] == pb[i] || pb[i] == 1) {
      p.out[i] = pa[i];
    } else if (pa[i] == 1) {
      p.out[i] = pb[i];
    } else {
      shape_error(op, a, b);
    }
  }
  std::vector<std::size_t> sa(r, 0), sb(r, 0);
  std::size_t ka = 1, kb = 1;
  for (std::size_t i = r; i-- > 0;) {
    sa[i] = pa[i] == 1 ? 0 : ka;
    sb[i] = pb[i] == 1 ? 0 : kb;
    ka *= pa[i];
    kb *= pb[i];
  }
  const std::size_t n = shape_numel(p.out);
  p.ia.resize(n);
  p.ib.resize(n);
  std::vector<std::size_t> idx(r, 0);
  std::size_t oa = 0, ob = 0;
  for (std::size_t k = 0; k < n; ++k) {
    p.ia[k] = oa;
    p.ib[k] = ob;
    for (std::size_t d = r; d-- > 0;) {
      if (++idx[d] < p.out[d]) {
        oa += sa[d];
        ob += sb[d];
        break;
      }
      oa -= sa[d] * (p.out[d] - 1);
      ob -= sb[d] * (p.out[d] - 1);
      idx[d] = 0;
    }
  }
  return p;
}

// Shared driver for broadcasting binary ops. fwd(x, y) -> z; da(x, y, g) and db(x, y, g)
// return the local gradient contributions.
template <class Fwd, class Da, class Db>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, Fwd fwd, Da da, Db db) {
  auto plan = std::make_shared<BroadcastPlan>(plan_broadcast(op, a.shape(), b.shape()));
  const auto xa = a.data();
  const auto xb = b.data();
  const std::size_t n = shape_numel(plan->out);
  std::vector<double> out(n);
  if (plan->same) {
    for (std::size_t k = 0; k < n; ++k) out[k] = fwd(xa[k], xb[k]);
  } else {
    for (std::size_t k = 0; k < n; ++k) out[k] = fwd(xa[plan->ia[k]], xb[plan->ib[k]]);
  }
  const bool rec = wants_grad({&a, &b});
  Impl ai = a.impl(), bi = b.impl();
  Shape oshape = plan->out;
  return finish(std::move(oshape), std::move(out), {ai, bi}, rec,
                [ai, bi, plan, da, db](const TensorImpl& o) {
                  const auto& g = o.grad;
                  const std::size_t n = g.size();
                  auto ia = [&](std::size_t k) { return plan->same ? k : plan->ia[k]; };
                  auto ib = [&](std::size_t k) { return plan->same ? k : plan->ib[k]; };
                  if (ai->requires_grad) {
                    std::vector<double> ga(ai->data.size(), 0.0);
                    for (std::size_t k = 0; k < n; ++k)
                      ga[ia(k)] += da(ai->data[ia(k)], bi->data[ib(k)], g[k]);
                    ai->accumulate_grad(ga);
                  }
                  if (bi->requires_grad) {
                    std::vector<double> gb(bi->data.size(), 0.0);
                    for (std::size_t k = 0; k < n; ++k)
                      gb[ib(k)] += db(ai->data[ia(k)], bi->data[ib(k)], g[k]);
                    bi->accumulate_grad(gb);
                  }
                });
}

// Shared driver for elementwise unary ops. dfn(x, y) is dy/dx given input and output.
template <class Fwd, class Dfn>
Tensor unary(const Tensor& a, Fwd fwd, Dfn dfn) {
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = fwd(x[k]);
  const bool rec = wants_grad({&a});
  Impl ai = a.impl();
  return finish(a.shape(), std::move(out), {ai}, rec, [ai, dfn](const TensorImpl& o) {
    std::vector<double> ga(o.grad.size());
    for (std::size_t k = 0; k < ga.size(); ++k) ga[k] = o.grad[k] * dfn(ai->data[k], o.data[k]);
    ai->accumulate_grad(ga);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) shape_error("matmul", a.shape(), b.shape());
  const auto m = static_cast<Eigen::Index>(a.dim(0));
  const auto k = static_cast<Eigen::Index>(a.dim(1));
  const auto n = static_cast<Eigen::Index>(b.dim(1));
  std::vector<double> out(static_cast<std::size_t>(m * n));
  MutMap(out.data(), m, n).noalias() = ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), k, n);
  const bool rec = wants_grad({&a, &b});
  Impl ai = a.impl(), bi = b.impl();
  return finish({a.dim(0), b.dim(1)}, std::move(out), {ai, bi}, rec,
                [ai, bi, m, k, n](const TensorImpl& o) {
                  ConstMap g(o.grad.data(), m, n);
                  if (ai->requires_grad) {
                    std::vector<double> ga(static_cast<std::size_t>(m * k));
                    MutMap(ga.data(), m, k).noalias() = g * ConstMap(bi->data.data(), k, n).transpose();
                    ai->accumulate_grad(ga);
                  }
                  if (bi->requires_grad) {
                    std::vector<double> gb(static_cast<std::size_t>(k * n));
                    MutMap(gb.data(), k, n).noalias() = ConstMap(ai->data.data(), m, k).transpose() * g;
                    bi->accumulate_grad(gb);
                  }
                });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double, double g) { return g; }, [](double, double, double g) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double, double g) { return g; }, [](double, double, double g) { return -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double, double y, double g) { return g * y; }, [](double x, double, double g) { return g * x; });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  const std::size_t d = x.rank() ? x.dim(x.rank() - 1) : 1;
  if (bias.numel() != d) shape_error("add_bias", x.shape(), bias.shape());
  return add(x, bias.rank() == 1 ? bias : reshape(bias, {d}));
}

Tensor scale(const Tensor& a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  const Tensor& first = parts.front();
  check_axis("concat", first, axis);
  Shape out_shape = first.shape();
  out_shape[axis] = 0;
  bool rec = false;
  for (const auto& p : parts) {
    if (p.rank() != first.rank()) shape_error("concat", first.shape(), p.shape());
    for (std::size_t d = 0; d < p.rank(); ++d) {
      if (d != axis && p.dim(d) != first.dim(d)) shape_error("concat", first.shape(), p.shape());
    }
    out_shape[axis] += p.dim(axis);
    rec = rec || (active_tape() && p.requires_grad());
  }
  const auto split = split_at(out_shape, axis);
  const std::size_t row = split.extent * split.inner;
  std::vector<double> out(shape_numel(out_shape));
  std::vector<Impl> impls;
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.dim(axis) * split.inner;
    const auto x = p.data();
    for (std::size_t o = 0; o < split.outer; ++o)
      std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(o * w), w,
                  out.begin() + static_cast<std::ptrdiff_t>(o * row + off));
    impls.push_back(p.impl());
    offsets.push_back(off);
    off += w;
  }
  auto captured = impls;
  return finish(std::move(out_shape), std::move(out), std::move(impls), rec,
                [captured, offsets, split, row](const TensorImpl& o) {
                  for (std::size_t i = 0; i < captured.size(); ++i) {
                    const auto& p = captured[i];
                    if (!p->requires_grad) continue;
                    const std::size_t w = p->data.size() / split.outer;
                    std::vector<double> g(p->data.size());
                    for (std::size_t r = 0; r < split.outer; ++r)
                      std::copy_n(o.grad.begin() + static_cast<std::ptrdiff_t>(r * row + offsets[i]), w,
                                  g.begin() + static_cast<std::ptrdiff_t>(r * w));
                    p->accumulate_grad(g);
                  }
                });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end) {
  check_axis("slice", a, axis);
  if (begin > end || end > a.dim(axis)) {
    throw std::invalid_argument("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                                ") invalid for shape " + shape_str(a.shape()));
  }
  const auto split = split_at(a.shape(), axis);
  Shape out_shape = a.shape();
  out_shape[axis] = end - begin;
  const std::size_t w = (end - begin) * split.inner;
  const std::size_t row = split.extent * split.inner;
  const std::size_t off = begin * split.inner;
  std::vector<double> out(split.outer * w);
  const auto x = a.data();
  for (std::size_t o = 0; o < split.outer; ++o)
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(o * row + off), w,
                out.begin() + static_cast<std::ptrdiff_t>(o * w));
  const bool rec = wants_grad({&a});
  Impl ai = a.impl();
  return finish(std::move(out_shape), std::move(out), {ai}, rec,
                [ai, split, w, row, off](const TensorImpl& o) {
                  std::vector<double> g(ai->data.size(), 0.0);
                  for (std::size_t r = 0; r < split.outer; ++r)
                    std::copy_n(o.grad.begin() + static_cast<std::ptrdiff_t>(r * w), w,
                                g.begin() + static_cast<std::ptrdiff_t>(r * row + off));
                  ai->accumulate_grad(g);
                });
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw std::invalid_argument("transpose: expected rank 2, got " + shape_str(a.shape()));
  const std::size_t r = a.dim(0), c = a.dim(1);
  std::vector<double> out(r * c);
  const auto x = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = x[i * c + j];
  const bool rec = wants_grad({&a});
  Impl ai = a.impl();
  return finish({c, r}, std::move(out), {ai}, rec, [ai, r, c](const TensorImpl& o) {
    std::vector<double> g(r * c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] = o.grad[j * r + i];
    ai->accumulate_grad(g);
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) shape_error("reshape", a.shape(), shape);
  std::vector<double> out(a.data().begin(), a.data().end());
  const bool rec = wants_grad({&a});
  Impl ai = a.impl();
  return finish(std::move(shape), std::move(out), {ai}, rec,
                [ai](const TensorImpl& o) { ai->accumulate_grad(o.grad); });
}

Tensor gather(const Tensor& a, const std::vector<std::size_t>& rows) {
  if (a.rank() == 0) throw std::invalid_argument("gather: scalar input");
  const std::size_t n = a.dim(0);
  const std::size_t w = a.numel() / std::max<std::size_t>(n, 1);
  for (auto r : rows) {
    if (r >= n) {
      throw std::invalid_argument("gather: row " + std::to_string(r) + " out of range for shape " +
                                  shape_str(a.shape()));
    }
  }
  Shape out_shape = a.shape();
  out_shape[0] = rows.size();
  std::vector<double> out(rows.size() * w);
  const auto x = a.data();
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(rows[i] * w), w,
                out.begin() + static_cast<std::ptrdiff_t>(i * w));
  const bool rec = wants_grad({&a});
  Impl ai = a.impl();
  return finish(std::move(out_shape), std::move(out), {ai}, rec, [ai, rows, w](const TensorImpl& o) {
    std::vector<double> g(ai->data.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < w; ++j) g[rows[i] * w + j] += o.grad[i * w + j];
    ai->accumulate_grad(g);
  });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.data()) s += x;
  const bool rec = wants_grad({&a});
  Impl ai = a.impl();
  return finish({}, {s}, {ai}, rec, [ai](const TensorImpl& o) {
    ai->accumulate_grad(std::vector<double>(ai->data.size(), o.grad[0]));
  });
}

Tensor sum(const Tensor& a, std::size_t axis) {
  check_axis("sum", a, axis);
  const auto sp = split_at(a.shape(), axis);
  Shape out_shape = a.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  std::vector<double> out(sp.outer * sp.inner, 0.0);
  const auto x = a.data();
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t e = 0; e < sp.extent; ++e)
      for (std::size_t i = 0; i < sp.inner; ++i)
        out[o * sp.inner + i] += x[(o * sp.extent + e) * sp.inner + i];
  const bool rec = wants_grad({&a});
  Impl ai = a.impl();
  return finish(std::move(out_shape), std::move(out), {ai}, rec, [ai, sp](const TensorImpl& o) {
    std::vector<double> g(ai->data.size());
    for (std::size_t r = 0; r < sp.outer; ++r)
      for (std::size_t e = 0; e < sp.extent; ++e)
        for (std::size_t i = 0; i < sp.inner; ++i)
          g[(r * sp.extent + e) * sp.inner + i] = o.grad[r * sp.inner + i];
    ai->accumulate_grad(g);
  });
}

Tensor mean(const Tensor& a) {
  return scale(sum(a), 1.0 / static_cast<double>(std::max<std::size_t>(a.numel(), 1)));
}

Tensor mean(const Tensor& a, std::size_t axis) {
  check_axis("mean", a, axis);
  return scale(sum(a, axis), 1.0 / static_cast<double>(std::max<std::size_t>(a.dim(axis), 1)));
}

Tensor abs(const Tensor& a) {
  return unary(
      a, [](double x) { return std::fabs(x); },
      [](double x, double) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Tensor exp(const Tensor& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  for (double x : a.data()) {
    if (!(x > 0.0)) throw std::domain_error("log: non-positive input " + std::to_string(x));
  }
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; }, [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary(
      a, [slope](double x) { return x > 0 ? x : slope * x; },
      [slope](double x, double) { return x > 0 ? 1.0 : slope; });
}

Tensor elu(const Tensor& a, double alpha) {
  return unary(
      a, [alpha](double x) { return x > 0 ? x : alpha * std::expm1(x); },
      [alpha](double x, double y) { return x > 0 ? 1.0 : y + alpha; });
}

Tensor square(const Tensor& a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor sqrt(const Tensor& a) {
  for (double x : a.data()) {
    if (!(x > 0.0)) throw std::domain_error("sqrt: non-positive input " + std::to_string(x));
  }
  return unary(a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; });
}

Tensor softmax(const Tensor& a, std::size_t axis) {
  check_axis("softmax", a, axis);
  const auto sp = split_at(a.shape(), axis);
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t i = 0; i < sp.inner; ++i) {
      auto at = [&](std::size_t e) { return (o * sp.extent + e) * sp.inner + i; };
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < sp.extent; ++e) mx = std::max(mx, x[at(e)]);
      double z = 0.0;
      for (std::size_t e = 0; e < sp.extent; ++e) {
        out[at(e)] = std::exp(x[at(e)] - mx);
        z += out[at(e)];
      }
      for (std::size_t e = 0; e < sp.extent; ++e) out[at(e)] /= z;
    }
  }
  const bool rec = wants_grad({&a});
  Impl ai = a.impl();
  return finish(a.shape(), std::move(out), {ai}, rec, [ai, sp](const TensorImpl& o) {
    std::vector<double> g(o.data.size());
    for (std::size_t r = 0; r < sp.outer; ++r) {
      for (std::size_t i = 0; i < sp.inner; ++i) {
        auto at = [&](std::size_t e) { return (r * sp.extent + e) * sp.inner + i; };
        double dot = 0.0;
        for (std::size_t e = 0; e < sp.extent; ++e) dot += o.grad[at(e)] * o.data[at(e)];
        for (std::size_t e = 0; e < sp.extent; ++e) g[at(e)] = o.data[at(e)] * (o.grad[at(e)] - dot);
      }
    }
    ai->accumulate_grad(g);
  });
}

Tensor log_softmax(const Tensor& a, std::size_t axis) {
  check_axis("log_softmax", a, axis);
  const auto sp = split_at(a.shape(), axis);
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t i = 0; i < sp.inner; ++i) {
      auto at = [&](std::size_t e) { return (o * sp.extent + e) * sp.inner + i; };
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < sp.extent; ++e) mx = std::max(mx, x[at(e)]);
      double z = 0.0;
      for (std::size_t e = 0; e < sp.extent; ++e) z += std::exp(x[at(e)] - mx);
      const double lz = mx + std::log(z);
      for (std::size_t e = 0; e < sp.extent; ++e) out[at(e)] = x[at(e)] - lz;
    }
  }
  const bool rec = wants_grad({&a});
  Impl ai = a.impl();
  return finish(a.shape(), std::move(out), {ai}, rec, [ai, sp](const TensorImpl& o) {
    std::vector<double> g(o.data.size());
    for (std::size_t r = 0; r < sp.outer; ++r) {
      for (std::size_t i = 0; i < sp.inner; ++i) {
        auto at = [&](std::size_t e) { return (r * sp.extent + e) * sp.inner + i; };
        double gs = 0.0;
        for (std::size_t e = 0; e < sp.extent; ++e) gs += o.grad[at(e)];
        for (std::size_t e = 0; e < sp.extent; ++e) g[at(e)] = o.grad[at(e)] - std::exp(o.data[at(e)]) * gs;
      }
    }
    ai->accumulate_grad(g);
  });
}

}  // namespace ops
}  // namespace hygma
