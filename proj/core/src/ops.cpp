// Copyright 2026 The ctraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ctraj/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "ctraj/error.hpp"

namespace ctraj
{

using detail::Node;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

namespace
{

// Eigen chooses scalar or packet code per coefficient from the operand addresses, and the two
// sum in different orders. Products run on aligned copies so results depend on shapes only.
RowMat aligned_copy(const double * p, std::size_t rows, std::size_t cols)
{
  return ConstMatMap(p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void add_into(double * dst, const RowMat & m)
{
  const double * src = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) dst[i] += src[i];
}

void require_same_shape(const Tensor & a, const Tensor & b, const char * op)
{
  if (a.shape() != b.shape()) {
    throw ShapeError(
      std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

std::size_t last_dim(const Tensor & x, const char * op)
{
  if (x.rank() == 0) {
    throw ShapeError(std::string(op) + ": expected rank >= 1, got scalar");
  }
  return x.shape().back();
}

// Applies f elementwise; df(x, y) gives dy/dx from input and output values.
template <typename F, typename DF>
Tensor unary(const Tensor & x, F f, DF df)
{
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return detail::make_result(x.shape(), std::move(out), {x}, [df](Node & self) {
    Node & px = *self.parents[0];
    auto & g = px.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * df(px.data[i], self.data[i]);
  });
}

}  // namespace

Tensor add(const Tensor & a, const Tensor & b)
{
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  const auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] + db[i];
  return detail::make_result(a.shape(), std::move(out), {a, b}, [](Node & self) {
    for (auto & p : self.parents) {
      if (!p->requires_grad) continue;
      auto & g = p->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor & a, const Tensor & b)
{
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.numel());
  const auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] - db[i];
  return detail::make_result(a.shape(), std::move(out), {a, b}, [](Node & self) {
    for (std::size_t k = 0; k < 2; ++k) {
      Node & p = *self.parents[k];
      if (!p.requires_grad) continue;
      const double sign = k == 0 ? 1.0 : -1.0;
      auto & g = p.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign * self.grad[i];
    }
  });
}

Tensor mul(const Tensor & a, const Tensor & b)
{
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  const auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = da[i] * db[i];
  return detail::make_result(a.shape(), std::move(out), {a, b}, [](Node & self) {
    Node & pa = *self.parents[0];
    Node & pb = *self.parents[1];
    if (pa.requires_grad) {
      auto & g = pa.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb.data[i];
    }
    if (pb.requires_grad) {
      auto & g = pb.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa.data[i];
    }
  });
}

Tensor maximum(const Tensor & a, const Tensor & b)
{
  require_same_shape(a, b, "maximum");
  std::vector<double> out(a.numel());
  const auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(da[i], db[i]);
  return detail::make_result(a.shape(), std::move(out), {a, b}, [](Node & self) {
    Node & pa = *self.parents[0];
    Node & pb = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      // ties go to the first argument
      Node & winner = pa.data[i] >= pb.data[i] ? pa : pb;
      if (winner.requires_grad) winner.ensure_grad()[i] += self.grad[i];
    }
  });
}

Tensor scale(const Tensor & x, double factor)
{
  return unary(x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor & x, double value)
{
  return unary(x, [value](double v) { return v + value; }, [](double, double) { return 1.0; });
}

Tensor add_lastdim(const Tensor & x, const Tensor & b)
{
  const std::size_t d = last_dim(x, "add_lastdim");
  if (b.rank() != 1 || b.dim(0) != d) {
    throw ShapeError("add_lastdim: bias " + shape_str(b.shape()) + " vs input " + shape_str(x.shape()));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  const auto db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += db[i % d];
  return detail::make_result(x.shape(), std::move(out), {x, b}, [d](Node & self) {
    Node & px = *self.parents[0];
    Node & pb = *self.parents[1];
    if (px.requires_grad) {
      auto & g = px.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      auto & g = pb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % d] += self.grad[i];
    }
  });
}

Tensor mul_lastdim(const Tensor & x, const Tensor & gain)
{
  const std::size_t d = last_dim(x, "mul_lastdim");
  if (gain.rank() != 1 || gain.dim(0) != d) {
    throw ShapeError("mul_lastdim: gain " + shape_str(gain.shape()) + " vs input " + shape_str(x.shape()));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  const auto dg = gain.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= dg[i % d];
  return detail::make_result(x.shape(), std::move(out), {x, gain}, [d](Node & self) {
    Node & px = *self.parents[0];
    Node & pg = *self.parents[1];
    if (px.requires_grad) {
      auto & g = px.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pg.data[i % d];
    }
    if (pg.requires_grad) {
      auto & g = pg.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % d] += self.grad[i] * px.data[i];
    }
  });
}

Tensor exp(const Tensor & x)
{
  return unary(x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor & x)
{
  return unary(x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor gelu(const Tensor & x)
{
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  constexpr double inv_sqrt2pi = 0.3989422804014326779;
  return unary(
    x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); },
    [](double v, double) {
      return 0.5 * (1.0 + std::erf(v * inv_sqrt2)) + v * inv_sqrt2pi * std::exp(-0.5 * v * v);
    });
}

Tensor silu(const Tensor & x)
{
  return unary(
    x, [](double v) { return v / (1.0 + std::exp(-v)); },
    [](double v, double) {
      const double s = 1.0 / (1.0 + std::exp(-v));
      return s * (1.0 + v * (1.0 - s));
    });
}

Tensor softplus(const Tensor & x)
{
  return unary(
    x, [](double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); },
    [](double v, double) { return 1.0 / (1.0 + std::exp(-v)); });
}

Tensor clamp(const Tensor & x, double lo, double hi)
{
  return unary(
    x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
    [lo, hi](double v, double) { return (v > lo && v < hi) ? 1.0 : 0.0; });
}

Tensor sum(const Tensor & x)
{
  double s = 0.0;
  for (double v : x.data()) s += v;
  return detail::make_result({}, {s}, {x}, [](Node & self) {
    auto & g = self.parents[0]->ensure_grad();
    for (auto & gi : g) gi += self.grad[0];
  });
}

Tensor mean(const Tensor & x)
{
  if (x.numel() == 0) {
    throw ShapeError("mean of empty tensor");
  }
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor sum_lastdim(const Tensor & x)
{
  const std::size_t d = last_dim(x, "sum_lastdim");
  Shape shape(x.shape().begin(), x.shape().end() - 1);
  const std::size_t rows = x.numel() / std::max<std::size_t>(d, 1);
  std::vector<double> out(rows, 0.0);
  const auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < d; ++j) out[r] += in[r * d + j];
  }
  return detail::make_result(std::move(shape), std::move(out), {x}, [d](Node & self) {
    auto & g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i / d];
  });
}

Tensor linear(const Tensor & x, const Tensor & W, const Tensor & b)
{
  const std::size_t din = last_dim(x, "linear");
  if (W.rank() != 2 || W.dim(0) != din) {
    throw ShapeError("linear: input " + shape_str(x.shape()) + " incompatible with weight " + shape_str(W.shape()));
  }
  const std::size_t dout = W.dim(1);
  if (b.defined() && (b.rank() != 1 || b.dim(0) != dout)) {
    throw ShapeError("linear: bias " + shape_str(b.shape()) + " incompatible with weight " + shape_str(W.shape()));
  }
  const std::size_t rows = x.numel() / din;
  Shape shape = x.shape();
  shape.back() = dout;

  RowMat Y(rows, dout);
  Y.noalias() = aligned_copy(x.data().data(), rows, din) * aligned_copy(W.data().data(), din, dout);
  if (b.defined()) {
    Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b.data().data(), dout);
  }
  std::vector<double> out(Y.data(), Y.data() + Y.size());

  std::vector<Tensor> inputs{x, W};
  if (b.defined()) inputs.push_back(b);
  return detail::make_result(std::move(shape), std::move(out), std::move(inputs), [rows, din, dout](Node & self) {
    Node & px = *self.parents[0];
    Node & pw = *self.parents[1];
    const RowMat dY = aligned_copy(self.grad.data(), rows, dout);
    if (px.requires_grad) {
      const RowMat dX = dY * aligned_copy(pw.data.data(), din, dout).transpose();
      add_into(px.ensure_grad().data(), dX);
    }
    if (pw.requires_grad) {
      const RowMat dW = aligned_copy(px.data.data(), rows, din).transpose() * dY;
      add_into(pw.ensure_grad().data(), dW);
    }
    if (self.parents.size() > 2 && self.parents[2]->requires_grad) {
      // plain loop: Eigen's vectorized column sums reduce as a tree, its scalar tail sequentially
      auto & gb = self.parents[2]->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < dout; ++j) gb[j] += self.grad[r * dout + j];
      }
    }
  });
}

Tensor reshape(const Tensor & x, Shape shape)
{
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return detail::make_result(std::move(shape), std::move(out), {x}, [](Node & self) {
    auto & g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor permute(const Tensor & x, const std::vector<std::size_t> & perm)
{
  const std::size_t r = x.rank();
  if (perm.size() != r) {
    throw ShapeError("permute: " + std::to_string(perm.size()) + " axes for " + shape_str(x.shape()));
  }
  std::vector<bool> seen(r, false);
  for (auto p : perm) {
    if (p >= r || seen[p]) throw ShapeError("permute: invalid axis order for " + shape_str(x.shape()));
    seen[p] = true;
  }
  const Shape & in_shape = x.shape();
  Shape out_shape(r);
  std::vector<std::size_t> in_strides(r, 1);
  for (std::size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
  // out axis k walks input axis perm[k]
  std::vector<std::size_t> src_strides(r);
  for (std::size_t k = 0; k < r; ++k) {
    out_shape[k] = in_shape[perm[k]];
    src_strides[k] = in_strides[perm[k]];
  }
  const std::size_t n = x.numel();
  std::vector<std::size_t> src_index(n);
  std::vector<std::size_t> counter(r, 0);
  std::size_t src = 0;
  for (std::size_t i = 0; i < n; ++i) {
    src_index[i] = src;
    for (std::size_t k = r; k-- > 0;) {
      if (++counter[k] < out_shape[k]) {
        src += src_strides[k];
        break;
      }
      src -= src_strides[k] * (out_shape[k] - 1);
      counter[k] = 0;
    }
  }
  std::vector<double> out(n);
  const auto in = x.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = in[src_index[i]];
  return detail::make_result(std::move(out_shape), std::move(out), {x}, [src_index = std::move(src_index)](Node & self) {
    auto & g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < src_index.size(); ++i) g[src_index[i]] += self.grad[i];
  });
}

Tensor concat_lastdim(const std::vector<Tensor> & parts)
{
  if (parts.empty()) {
    throw ShapeError("concat_lastdim: no inputs");
  }
  const Shape lead(parts[0].shape().begin(), parts[0].shape().end() - 1);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto & p : parts) {
    const std::size_t d = last_dim(p, "concat_lastdim");
    if (Shape(p.shape().begin(), p.shape().end() - 1) != lead) {
      throw ShapeError(
        "concat_lastdim: leading dims differ, " + shape_str(parts[0].shape()) + " vs " + shape_str(p.shape()));
    }
    widths.push_back(d);
    total += d;
  }
  const std::size_t rows = shape_numel(lead);
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto in = parts[k].data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(in.begin() + r * widths[k], widths[k], out.begin() + r * total + offset);
    }
    offset += widths[k];
  }
  Shape shape = lead;
  shape.push_back(total);
  return detail::make_result(std::move(shape), std::move(out), parts, [widths, rows, total](Node & self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      Node & p = *self.parents[k];
      if (p.requires_grad) {
        auto & g = p.ensure_grad();
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < widths[k]; ++j) g[r * widths[k] + j] += self.grad[r * total + off + j];
        }
      }
      off += widths[k];
    }
  });
}

Tensor slice_lastdim(const Tensor & x, std::size_t begin, std::size_t length)
{
  const std::size_t d = last_dim(x, "slice_lastdim");
  if (begin + length > d) {
    throw ShapeError(
      "slice_lastdim: [" + std::to_string(begin) + ", " + std::to_string(begin + length) + ") out of " +
      shape_str(x.shape()));
  }
  const std::size_t rows = x.numel() / std::max<std::size_t>(d, 1);
  std::vector<double> out(rows * length);
  const auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(in.begin() + r * d + begin, length, out.begin() + r * length);
  }
  Shape shape = x.shape();
  shape.back() = length;
  return detail::make_result(std::move(shape), std::move(out), {x}, [rows, d, begin, length](Node & self) {
    auto & g = self.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < length; ++j) g[r * d + begin + j] += self.grad[r * length + j];
    }
  });
}

Tensor gather_rows(const Tensor & table, std::span<const std::size_t> indices)
{
  if (table.rank() != 2) {
    throw ShapeError("gather_rows: table must be rank 2, got " + shape_str(table.shape()));
  }
  const std::size_t rows = table.dim(0), width = table.dim(1);
  std::vector<double> out(indices.size() * width);
  const auto in = table.data();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows) {
      throw ShapeError("gather_rows: index " + std::to_string(indices[i]) + " out of " + shape_str(table.shape()));
    }
    std::copy_n(in.begin() + indices[i] * width, width, out.begin() + i * width);
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return detail::make_result(
    {indices.size(), width}, std::move(out), {table}, [idx = std::move(idx), width](Node & self) {
      auto & g = self.parents[0]->ensure_grad();
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) g[idx[i] * width + j] += self.grad[i * width + j];
      }
    });
}

Tensor softmax_lastdim(const Tensor & x)
{
  const std::size_t m = last_dim(x, "softmax_lastdim");
  if (m == 0) throw ShapeError("softmax_lastdim: empty last dimension");
  const std::size_t rows = x.numel() / m;
  std::vector<double> out(x.numel());
  const auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double * row = in.data() + r * m;
    const double mx = *std::max_element(row, row + m);
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) z += (out[r * m + j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < m; ++j) out[r * m + j] /= z;
  }
  return detail::make_result(x.shape(), std::move(out), {x}, [rows, m](Node & self) {
    auto & g = self.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const double * y = self.data.data() + r * m;
      const double * dy = self.grad.data() + r * m;
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += dy[j] * y[j];
      for (std::size_t j = 0; j < m; ++j) g[r * m + j] += y[j] * (dy[j] - dot);
    }
  });
}

Tensor logsumexp_lastdim(const Tensor & x)
{
  const std::size_t m = last_dim(x, "logsumexp_lastdim");
  if (m == 0) throw ShapeError("logsumexp_lastdim: empty last dimension");
  const std::size_t rows = x.numel() / m;
  std::vector<double> out(rows);
  const auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double * row = in.data() + r * m;
    const double mx = *std::max_element(row, row + m);
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) z += std::exp(row[j] - mx);
    out[r] = mx + std::log(z);
  }
  Shape shape(x.shape().begin(), x.shape().end() - 1);
  return detail::make_result(std::move(shape), std::move(out), {x}, [rows, m](Node & self) {
    Node & px = *self.parents[0];
    auto & g = px.ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < m; ++j) {
        g[r * m + j] += self.grad[r] * std::exp(px.data[r * m + j] - self.data[r]);
      }
    }
  });
}

Tensor layer_norm(const Tensor & x, const Tensor & gain, const Tensor & bias, double eps)
{
  const std::size_t d = last_dim(x, "layer_norm");
  if (gain.shape() != Shape{d} || bias.shape() != Shape{d}) {
    throw ShapeError(
      "layer_norm: gain " + shape_str(gain.shape()) + " / bias " + shape_str(bias.shape()) + " vs input " +
      shape_str(x.shape()));
  }
  const std::size_t rows = x.numel() / d;
  std::vector<double> out(x.numel());
  std::vector<double> xhat(x.numel());
  std::vector<double> inv_std(rows);
  const auto in = x.data();
  const auto g = gain.data();
  const auto b = bias.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double * row = in.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[r * d + j] = (row[j] - mu) * inv_std[r];
      out[r * d + j] = xhat[r * d + j] * g[j] + b[j];
    }
  }
  return detail::make_result(
    x.shape(), std::move(out), {x, gain, bias},
    [rows, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node & self) {
      Node & px = *self.parents[0];
      Node & pg = *self.parents[1];
      Node & pb = *self.parents[2];
      const double inv_d = 1.0 / static_cast<double>(d);
      std::vector<double> dxhat(d);
      for (std::size_t r = 0; r < rows; ++r) {
        const double * dy = self.grad.data() + r * d;
        const double * xh = xhat.data() + r * d;
        if (pg.requires_grad) {
          auto & gg = pg.ensure_grad();
          for (std::size_t j = 0; j < d; ++j) gg[j] += dy[j] * xh[j];
        }
        if (pb.requires_grad) {
          auto & gb = pb.ensure_grad();
          for (std::size_t j = 0; j < d; ++j) gb[j] += dy[j];
        }
        if (px.requires_grad) {
          double m1 = 0.0, m2 = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            dxhat[j] = dy[j] * pg.data[j];
            m1 += dxhat[j];
            m2 += dxhat[j] * xh[j];
          }
          m1 *= inv_d;
          m2 *= inv_d;
          auto & gx = px.ensure_grad();
          for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += inv_std[r] * (dxhat[j] - m1 - xh[j] * m2);
        }
      }
    });
}

Tensor rms_norm(const Tensor & x, const Tensor & gain, double eps)
{
  const std::size_t d = last_dim(x, "rms_norm");
  if (gain.shape() != Shape{d}) {
    throw ShapeError("rms_norm: gain " + shape_str(gain.shape()) + " vs input " + shape_str(x.shape()));
  }
  const std::size_t rows = x.numel() / d;
  std::vector<double> out(x.numel());
  std::vector<double> inv_rms(rows);
  const auto in = x.data();
  const auto g = gain.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double ss = 0.0;
    for (std::size_t j = 0; j < d; ++j) ss += in[r * d + j] * in[r * d + j];
    inv_rms[r] = 1.0 / std::sqrt(ss / static_cast<double>(d) + eps);
    for (std::size_t j = 0; j < d; ++j) out[r * d + j] = in[r * d + j] * inv_rms[r] * g[j];
  }
  return detail::make_result(
    x.shape(), std::move(out), {x, gain}, [rows, d, inv_rms = std::move(inv_rms)](Node & self) {
      Node & px = *self.parents[0];
      Node & pg = *self.parents[1];
      for (std::size_t r = 0; r < rows; ++r) {
        const double * dy = self.grad.data() + r * d;
        const double * xr = px.data.data() + r * d;
        if (pg.requires_grad) {
          auto & gg = pg.ensure_grad();
          for (std::size_t j = 0; j < d; ++j) gg[j] += dy[j] * xr[j] * inv_rms[r];
        }
        if (px.requires_grad) {
          double dot = 0.0;
          for (std::size_t j = 0; j < d; ++j) dot += dy[j] * pg.data[j] * xr[j];
          const double k = dot * inv_rms[r] * inv_rms[r] / static_cast<double>(d);
          auto & gx = px.ensure_grad();
          for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += inv_rms[r] * (dy[j] * pg.data[j] - xr[j] * k);
        }
      }
    });
}

Tensor max_pool_window(const Tensor & x, std::size_t window, double pad_value)
{
  if (x.rank() < 2) {
    throw ShapeError("max_pool_window: expected [..., T, d], got " + shape_str(x.shape()));
  }
  const std::size_t T = x.dim(-2), d = x.dim(-1);
  if (window == 0) window = std::max<std::size_t>(T, 1);
  const std::size_t batches = x.numel() / std::max<std::size_t>(T * d, 1);
  constexpr std::size_t kPad = static_cast<std::size_t>(-1);

  std::vector<double> out(x.numel());
  std::vector<std::size_t> argmax(x.numel());
  const auto in = x.data();
  std::deque<std::size_t> dq;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t base = b * T * d;
    for (std::size_t c = 0; c < d; ++c) {
      dq.clear();
      for (std::size_t t = 0; t < T; ++t) {
        const double v = in[base + t * d + c];
        // strict comparison keeps the earliest of equal values at the front
        while (!dq.empty() && in[base + dq.back() * d + c] < v) dq.pop_back();
        dq.push_back(t);
        while (dq.front() + window <= t) dq.pop_front();
        std::size_t best = dq.front();
        double best_v = in[base + best * d + c];
        if (t + 1 < window && pad_value >= best_v) {
          best = kPad;
          best_v = pad_value;
        }
        out[base + t * d + c] = best_v;
        argmax[base + t * d + c] = best == kPad ? kPad : base + best * d + c;
      }
    }
  }
  return detail::make_result(x.shape(), std::move(out), {x}, [argmax = std::move(argmax)](Node & self) {
    auto & g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < argmax.size(); ++i) {
      if (argmax[i] != kPad) g[argmax[i]] += self.grad[i];
    }
  });
}

}  // namespace ctraj
