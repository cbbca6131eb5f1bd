#include "softpool/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "softpool/errors.hpp"

namespace softpool::ad {

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()) + " differ");
  }
}

void require_rank(const Var& a, std::size_t rank, const char* op) {
  if (a.value().rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(a.shape()));
  }
}

void accumulate(Tensor* sink, std::span<const double> g) {
  if (!sink) return;
  auto d = sink->data();
  for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
}

// Layout of the reduction groups for softmax along an axis.
struct AxisGroups {
  std::size_t groups;
  std::size_t length;
  std::size_t stride;
};

AxisGroups axis_groups(const Tensor& t, std::size_t axis, const char* op) {
  if (t.rank() == 1 && axis == 0) return {1, t.size(), 1};
  if (t.rank() == 2 && axis == 1) return {t.dim(0), t.dim(1), 1};
  if (t.rank() == 2 && axis == 0) return {t.dim(1), t.dim(0), t.dim(1)};
  throw ShapeError(std::string(op) + ": unsupported axis " + std::to_string(axis) + " for shape " +
                   shape_string(t.shape()));
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw ShapeError("matmul: inner extents differ, " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()));
  }
  Tensor out({m, n});
  kernels::matmul(a.value().data(), b.value().data(), out.data(), m, k, n);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(
      std::move(out), {a, b},
      [ia, ib, m, k, n](Tape& t, std::size_t self) {
        const Tensor& g = t.out_grad(self);
        if (Tensor* da = t.grad_sink(ia)) {
          std::vector<double> bt(n * k), tmp(m * k);
          kernels::transpose(t.value(ib).data(), bt, k, n);
          kernels::matmul(g.data(), bt, tmp, m, n, k);
          accumulate(da, tmp);
        }
        if (Tensor* db = t.grad_sink(ib)) {
          std::vector<double> at(k * m), tmp(k * n);
          kernels::transpose(t.value(ia).data(), at, m, k);
          kernels::matmul(at, g.data(), tmp, k, m, n);
          accumulate(db, tmp);
        }
      },
      "matmul");
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(
      std::move(out), {a, b},
      [ia, ib](Tape& t, std::size_t self) {
        const auto g = t.out_grad(self).data();
        accumulate(t.grad_sink(ia), g);
        accumulate(t.grad_sink(ib), g);
      },
      "add");
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(
      std::move(out), {a, b},
      [ia, ib](Tape& t, std::size_t self) {
        const auto g = t.out_grad(self).data();
        accumulate(t.grad_sink(ia), g);
        if (Tensor* db = t.grad_sink(ib)) {
          auto d = db->data();
          for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
        }
      },
      "sub");
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(
      std::move(out), {a, b},
      [ia, ib](Tape& t, std::size_t self) {
        const auto g = t.out_grad(self).data();
        if (Tensor* da = t.grad_sink(ia)) {
          auto d = da->data();
          auto bv = t.value(ib).data();
          for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * bv[i];
        }
        if (Tensor* db = t.grad_sink(ib)) {
          auto d = db->data();
          auto av = t.value(ia).data();
          for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * av[i];
        }
      },
      "mul");
}

Var scale(const Var& a, double factor) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= factor;
  const std::size_t ia = a.id();
  return a.tape().record(
      std::move(out), {a},
      [ia, factor](Tape& t, std::size_t self) {
        if (Tensor* da = t.grad_sink(ia)) {
          auto d = da->data();
          const auto g = t.out_grad(self).data();
          for (std::size_t i = 0; i < g.size(); ++i) d[i] += factor * g[i];
        }
      },
      "scale");
}

Var add_scalar(const Var& a, double offset) {
  Tensor out = a.value();
  for (double& v : out.data()) v += offset;
  const std::size_t ia = a.id();
  return a.tape().record(
      std::move(out), {a},
      [ia](Tape& t, std::size_t self) { accumulate(t.grad_sink(ia), t.out_grad(self).data()); },
      "add_scalar");
}

Var add_bias(const Var& a, const Var& bias) {
  require_rank(a, 2, "add_bias");
  require_rank(bias, 1, "add_bias");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  if (bias.shape()[0] != n) {
    throw ShapeError("add_bias: bias " + shape_string(bias.shape()) + " does not match " +
                     shape_string(a.shape()));
  }
  Tensor out = a.value();
  const auto bv = bias.value().data();
  for (std::size_t i = 0; i < m; ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < n; ++j) r[j] += bv[j];
  }
  const std::size_t ia = a.id(), ib = bias.id();
  return a.tape().record(
      std::move(out), {a, bias},
      [ia, ib, m, n](Tape& t, std::size_t self) {
        const Tensor& g = t.out_grad(self);
        accumulate(t.grad_sink(ia), g.data());
        if (Tensor* db = t.grad_sink(ib)) {
          auto d = db->data();
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) d[j] += g(i, j);
          }
        }
      },
      "add_bias");
}

Var leaky_relu(const Var& a, double slope) {
  Tensor out = a.value();
  for (double& v : out.data()) v = v > 0.0 ? v : slope * v;
  const std::size_t ia = a.id();
  return a.tape().record(
      std::move(out), {a},
      [ia, slope](Tape& t, std::size_t self) {
        if (Tensor* da = t.grad_sink(ia)) {
          auto d = da->data();
          const auto g = t.out_grad(self).data();
          const auto x = t.value(ia).data();
          for (std::size_t i = 0; i < g.size(); ++i) d[i] += x[i] > 0.0 ? g[i] : slope * g[i];
        }
      },
      "leaky_relu");
}

Var softmax(const Var& a, std::size_t axis) {
  const AxisGroups ax = axis_groups(a.value(), axis, "softmax");
  Tensor out = a.value();
  auto o = out.data();
  for (std::size_t g = 0; g < ax.groups; ++g) {
    const std::size_t base = ax.stride == 1 ? g * ax.length : g;
    double mx = o[base];
    for (std::size_t i = 1; i < ax.length; ++i) mx = std::max(mx, o[base + i * ax.stride]);
    double total = 0.0;
    for (std::size_t i = 0; i < ax.length; ++i) {
      double& v = o[base + i * ax.stride];
      v = std::exp(v - mx);
      total += v;
    }
    for (std::size_t i = 0; i < ax.length; ++i) o[base + i * ax.stride] /= total;
  }
  const std::size_t ia = a.id();
  return a.tape().record(
      std::move(out), {a},
      [ia, ax](Tape& t, std::size_t self) {
        Tensor* da = t.grad_sink(ia);
        if (!da) return;
        const auto g = t.out_grad(self).data();
        const auto y = t.value(self).data();
        auto d = da->data();
        for (std::size_t grp = 0; grp < ax.groups; ++grp) {
          const std::size_t base = ax.stride == 1 ? grp * ax.length : grp;
          double dot = 0.0;
          for (std::size_t i = 0; i < ax.length; ++i) {
            const std::size_t at = base + i * ax.stride;
            dot += g[at] * y[at];
          }
          for (std::size_t i = 0; i < ax.length; ++i) {
            const std::size_t at = base + i * ax.stride;
            d[at] += y[at] * (g[at] - dot);
          }
        }
      },
      "softmax");
}

Var log(const Var& a, double floor) {
  Tensor out = a.value();
  for (double& v : out.data()) v = std::log(std::max(v, floor));
  const std::size_t ia = a.id();
  return a.tape().record(
      std::move(out), {a},
      [ia, floor](Tape& t, std::size_t self) {
        if (Tensor* da = t.grad_sink(ia)) {
          auto d = da->data();
          const auto g = t.out_grad(self).data();
          const auto x = t.value(ia).data();
          for (std::size_t i = 0; i < g.size(); ++i) {
            if (x[i] > floor) d[i] += g[i] / x[i];
          }
        }
      },
      "log");
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::size_t ia = a.id();
  return a.tape().record(
      Tensor::scalar(s), {a},
      [ia](Tape& t, std::size_t self) {
        if (Tensor* da = t.grad_sink(ia)) {
          const double g = t.out_grad(self)[0];
          for (double& v : da->data()) v += g;
        }
      },
      "sum");
}

Var sum(const Var& a, std::size_t axis) {
  require_rank(a, 2, "sum");
  if (axis > 1) throw ShapeError("sum: axis must be 0 or 1");
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  Tensor out(Shape{axis == 0 ? c : r}, 0.0);
  const Tensor& x = a.value();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[axis == 0 ? j : i] += x(i, j);
  }
  const std::size_t ia = a.id();
  return a.tape().record(
      std::move(out), {a},
      [ia, axis, r, c](Tape& t, std::size_t self) {
        if (Tensor* da = t.grad_sink(ia)) {
          const Tensor& g = t.out_grad(self);
          for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) (*da)(i, j) += g[axis == 0 ? j : i];
          }
        }
      },
      "sum_axis");
}

Var mean(const Var& a) {
  if (a.value().size() == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var mean(const Var& a, std::size_t axis) {
  require_rank(a, 2, "mean");
  const std::size_t count = a.shape().at(axis);
  if (count == 0) throw ShapeError("mean: empty axis");
  return scale(sum(a, axis), 1.0 / static_cast<double>(count));
}

Var gather_rows(const Var& a, std::span<const std::size_t> rows) {
  require_rank(a, 2, "gather_rows");
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  Tensor out({rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= r) throw ShapeError("gather_rows: row index out of range");
    const auto src = a.value().row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  const std::size_t ia = a.id();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return a.tape().record(
      std::move(out), {a},
      [ia, idx = std::move(idx), c](Tape& t, std::size_t self) {
        if (Tensor* da = t.grad_sink(ia)) {
          const Tensor& g = t.out_grad(self);
          for (std::size_t i = 0; i < idx.size(); ++i) {
            auto dst = da->row(idx[i]);
            const auto src = g.row(i);
            for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
          }
        }
      },
      "gather_rows");
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  if (axis > 1) throw ShapeError("concat: axis must be 0 or 1");
  for (const Var& p : parts) require_rank(p, 2, "concat");
  const std::size_t fixed = parts[0].shape()[1 - axis];
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.shape()[1 - axis] != fixed) throw ShapeError("concat: operands disagree off the concat axis");
    total += p.shape()[axis];
  }
  const std::size_t rows = axis == 0 ? total : fixed;
  const std::size_t cols = axis == 0 ? fixed : total;
  Tensor out({rows, cols});
  std::vector<std::size_t> ids, offsets;
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t i = 0; i < v.dim(0); ++i) {
      for (std::size_t j = 0; j < v.dim(1); ++j) {
        if (axis == 0) out(offset + i, j) = v(i, j);
        else out(i, offset + j) = v(i, j);
      }
    }
    ids.push_back(p.id());
    offsets.push_back(offset);
    offset += v.dim(axis);
  }
  return parts[0].tape().record(
      std::move(out), parts,
      [ids = std::move(ids), offsets = std::move(offsets), axis](Tape& t, std::size_t self) {
        const Tensor& g = t.out_grad(self);
        for (std::size_t p = 0; p < ids.size(); ++p) {
          Tensor* dp = t.grad_sink(ids[p]);
          if (!dp) continue;
          for (std::size_t i = 0; i < dp->dim(0); ++i) {
            for (std::size_t j = 0; j < dp->dim(1); ++j) {
              (*dp)(i, j) += axis == 0 ? g(offsets[p] + i, j) : g(i, offsets[p] + j);
            }
          }
        }
      },
      "concat");
}

Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  const std::size_t ia = a.id();
  return a.tape().record(
      std::move(out), {a},
      [ia](Tape& t, std::size_t self) { accumulate(t.grad_sink(ia), t.out_grad(self).data()); },
      "reshape");
}

Var linear_interpolate(const Var& a, std::span<const Blend> blends) {
  require_rank(a, 2, "linear_interpolate");
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  Tensor out({blends.size(), c});
  const Tensor& x = a.value();
  for (std::size_t i = 0; i < blends.size(); ++i) {
    const Blend& b = blends[i];
    if (b.from >= r || b.to >= r) throw ShapeError("linear_interpolate: row index out of range");
    for (std::size_t j = 0; j < c; ++j) out(i, j) = (1.0 - b.t) * x(b.from, j) + b.t * x(b.to, j);
  }
  const std::size_t ia = a.id();
  std::vector<Blend> plan(blends.begin(), blends.end());
  return a.tape().record(
      std::move(out), {a},
      [ia, plan = std::move(plan), c](Tape& t, std::size_t self) {
        Tensor* da = t.grad_sink(ia);
        if (!da) return;
        const Tensor& g = t.out_grad(self);
        for (std::size_t i = 0; i < plan.size(); ++i) {
          for (std::size_t j = 0; j < c; ++j) {
            (*da)(plan[i].from, j) += (1.0 - plan[i].t) * g(i, j);
            (*da)(plan[i].to, j) += plan[i].t * g(i, j);
          }
        }
      },
      "linear_interpolate");
}

Var row_norms(const Var& a) {
  require_rank(a, 2, "row_norms");
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  Tensor out(Shape{r});
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (double v : a.value().row(i)) s += v * v;
    out[i] = std::sqrt(s);
  }
  const std::size_t ia = a.id();
  return a.tape().record(
      std::move(out), {a},
      [ia, r, c](Tape& t, std::size_t self) {
        Tensor* da = t.grad_sink(ia);
        if (!da) return;
        const Tensor& g = t.out_grad(self);
        const Tensor& y = t.value(self);
        const Tensor& x = t.value(ia);
        for (std::size_t i = 0; i < r; ++i) {
          if (y[i] == 0.0) continue;
          const double f = g[i] / y[i];
          for (std::size_t j = 0; j < c; ++j) (*da)(i, j) += f * x(i, j);
        }
      },
      "row_norms");
}

Var normalize_rows(const Var& a) {
  require_rank(a, 2, "normalize_rows");
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  Tensor out = a.value();
  std::vector<double> sums(r);
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (double v : out.row(i)) s += v;
    if (s == 0.0) throw NumericError("normalize_rows: row " + std::to_string(i) + " sums to zero");
    sums[i] = s;
    for (double& v : out.row(i)) v /= s;
  }
  const std::size_t ia = a.id();
  return a.tape().record(
      std::move(out), {a},
      [ia, sums = std::move(sums), r, c](Tape& t, std::size_t self) {
        Tensor* da = t.grad_sink(ia);
        if (!da) return;
        const Tensor& g = t.out_grad(self);
        const Tensor& y = t.value(self);
        for (std::size_t i = 0; i < r; ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < c; ++j) dot += g(i, j) * y(i, j);
          for (std::size_t j = 0; j < c; ++j) (*da)(i, j) += (g(i, j) - dot) / sums[i];
        }
      },
      "normalize_rows");
}

namespace testing {

Var scale_gradient(const Var& a, double factor) {
  const std::size_t ia = a.id();
  return a.tape().record(
      a.value(), {a},
      [ia, factor](Tape& t, std::size_t self) {
        if (Tensor* da = t.grad_sink(ia)) {
          auto d = da->data();
          const auto g = t.out_grad(self).data();
          for (std::size_t i = 0; i < g.size(); ++i) d[i] += factor * g[i];
        }
      },
      "scale_gradient");
}

}  // namespace testing
}  // namespace softpool::ad
