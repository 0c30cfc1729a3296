// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>

#include <Eigen/Core>

#include "gkd/error.hpp"

namespace gkd::ad {
namespace {

void require_finite(const Tensor& t, const char* op) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + ": non-finite value");
  }
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw ContractError(std::string(op) + ": undefined tensor");
}

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (!Tape::current().enabled()) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

Shape leading_shape(const Shape& s) {
  if (s.size() <= 1) return {1};
  return Shape(s.begin(), s.end() - 1);
}

// Index map for broadcasting `b` against `a`.
std::size_t broadcast_extent(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return b.numel();
  if (b.numel() == 1) return 1;
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sb.size() <= sa.size() && std::equal(sb.rbegin(), sb.rend(), sa.rbegin())) return b.numel();
  throw ShapeError(std::string(op) + ": cannot broadcast " + shape_str(sb) + " onto " + shape_str(sa));
}

template <class Fwd, class Bwd>
Tensor unary(const Tensor& x, const char* op, Fwd fwd, Bwd dfdx) {
  require_defined(x, op);
  require_finite(x, op);
  const bool rg = tracking({&x});
  Tensor out = make_result(x.shape(), rg);
  auto xs = x.data();
  auto ys = out.mutable_data();
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = fwd(xs[i]);
  require_finite(out, op);
  if (rg) {
    Tape::current().record(out, [x, out, dfdx]() mutable {
      auto g = out.grad();
      auto xs = x.data();
      auto ys = out.data();
      auto dx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * dfdx(xs[i], ys[i]);
    });
  }
  return out;
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

// Inputs with mostly zero entries (bag-of-words features) take a loop that
// skips them; everything else goes through Eigen.
bool mostly_zero(const double* a, std::size_t count) {
  std::size_t nz = 0;
  for (std::size_t i = 0; i < count; ++i) nz += a[i] != 0.0;
  return nz * 4 < count;
}

// C[m,n] += A[m,k] B[k,n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n,
             bool sparse_a) {
  if (!sparse_a) {
    MutMap(c, m, n).noalias() += ConstMap(a, m, k) * ConstMap(b, k, n);
    return;
  }
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// dA[m,k] += G[m,n] B[k,n]^T
void gemm_nt(const double* g, const double* b, double* da, std::size_t m, std::size_t k, std::size_t n) {
  MutMap(da, m, k).noalias() += ConstMap(g, m, n) * ConstMap(b, k, n).transpose();
}

// dB[k,n] += A[m,k]^T G[m,n]
void gemm_tn(const double* a, const double* g, double* db, std::size_t m, std::size_t k, std::size_t n,
             bool sparse_a) {
  if (!sparse_a) {
    MutMap(db, k, n).noalias() += ConstMap(a, m, k).transpose() * ConstMap(g, m, n);
    return;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    const double* gi = g + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      double* dbp = db + p * n;
      for (std::size_t j = 0; j < n; ++j) dbp[j] += av * gi[j];
    }
  }
}

}  // namespace

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols) {
  auto build = [](std::size_t n, std::vector<Entry>& es, bool by_row, std::vector<std::size_t>& off,
                  std::vector<std::size_t>& idx, std::vector<double>& val) {
    std::stable_sort(es.begin(), es.end(), [by_row](const Entry& l, const Entry& r) {
      return by_row ? std::tie(l.row, l.col) < std::tie(r.row, r.col)
                    : std::tie(l.col, l.row) < std::tie(r.col, r.row);
    });
    off.assign(n + 1, 0);
    idx.clear();
    val.clear();
    for (const Entry& e : es) {
      ++off[(by_row ? e.row : e.col) + 1];
      idx.push_back(by_row ? e.col : e.row);
      val.push_back(e.value);
    }
    for (std::size_t i = 0; i < n; ++i) off[i + 1] += off[i];
  };
  for (const Entry& e : entries) {
    if (e.row >= rows || e.col >= cols) throw ShapeError("sparse entry outside matrix bounds");
  }
  build(rows, entries, true, offsets_, indices_, values_);
  build(cols, entries, false, t_offsets_, t_indices_, t_values_);
}

void SparseMatrix::multiply(std::span<const double> x, std::size_t d, std::span<double> out) const {
  for (std::size_t r = 0; r < rows_; ++r) {
    double* o = out.data() + r * d;
    for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p) {
      const double w = values_[p];
      const double* xs = x.data() + indices_[p] * d;
      for (std::size_t j = 0; j < d; ++j) o[j] += w * xs[j];
    }
  }
}

void SparseMatrix::multiply_transposed(std::span<const double> y, std::size_t d,
                                       std::span<double> out) const {
  for (std::size_t c = 0; c < cols_; ++c) {
    double* o = out.data() + c * d;
    for (std::size_t p = t_offsets_[c]; p < t_offsets_[c + 1]; ++p) {
      const double w = t_values_[p];
      const double* ys = y.data() + t_indices_[p] * d;
      for (std::size_t j = 0; j < d; ++j) o[j] += w * ys[j];
    }
  }
}

double SparseMatrix::value_at(std::size_t row, std::size_t col) const {
  for (std::size_t p = offsets_[row]; p < offsets_[row + 1]; ++p) {
    if (indices_[p] == col) return values_[p];
  }
  return 0.0;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.dim() != 2 || b.dim() != 2) {
    throw ShapeError("matmul: expected 2-D operands, got " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  }
  const std::size_t m = a.size(0), k = a.size(1), n = b.size(1);
  if (b.size(0) != k) {
    throw ShapeError("matmul: inner dimensions differ (" + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()) + ")");
  }
  require_finite(a, "matmul");
  require_finite(b, "matmul");
  const bool rg = tracking({&a, &b});
  Tensor out = make_result({m, n}, rg);
  const bool sparse_a = mostly_zero(a.data().data(), a.numel());
  gemm_nn(a.data().data(), b.data().data(), out.mutable_data().data(), m, k, n, sparse_a);
  require_finite(out, "matmul");
  if (rg) {
    Tape::current().record(out, [a, b, out, m, k, n, sparse_a]() mutable {
      const double* g = out.grad().data();
      if (a.requires_grad()) gemm_nt(g, b.data().data(), a.mutable_grad().data(), m, k, n);
      if (b.requires_grad()) gemm_tn(a.data().data(), g, b.mutable_grad().data(), m, k, n, sparse_a);
    });
  }
  return out;
}

namespace {

enum class BinaryKind { kAdd, kSub, kMul };

Tensor binary(const Tensor& a, const Tensor& b, BinaryKind kind, const char* op) {
  require_defined(a, op);
  require_defined(b, op);
  const std::size_t nb = broadcast_extent(a, b, op);
  require_finite(a, op);
  require_finite(b, op);
  const bool rg = tracking({&a, &b});
  Tensor out = make_result(a.shape(), rg);
  auto as = a.data();
  auto bs = b.data();
  auto ys = out.mutable_data();
  for (std::size_t i = 0; i < as.size(); ++i) {
    const double bv = bs[i % nb];
    switch (kind) {
      case BinaryKind::kAdd: ys[i] = as[i] + bv; break;
      case BinaryKind::kSub: ys[i] = as[i] - bv; break;
      case BinaryKind::kMul: ys[i] = as[i] * bv; break;
    }
  }
  require_finite(out, op);
  if (rg) {
    Tape::current().record(out, [a, b, out, nb, kind]() mutable {
      auto g = out.grad();
      auto as = a.data();
      auto bs = b.data();
      if (a.requires_grad()) {
        auto da = a.mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          da[i] += kind == BinaryKind::kMul ? g[i] * bs[i % nb] : g[i];
        }
      }
      if (b.requires_grad()) {
        auto db = b.mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          double v = g[i];
          if (kind == BinaryKind::kSub) v = -v;
          if (kind == BinaryKind::kMul) v *= as[i];
          db[i % nb] += v;
        }
      }
    });
  }
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::kAdd, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::kSub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::kMul, "mul"); }

Tensor scale(const Tensor& a, double factor) {
  if (!std::isfinite(factor)) throw NumericError("scale: non-finite factor");
  return unary(
      a, "scale", [factor](double x) { return x * factor; },
      [factor](double, double) { return factor; });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor gelu(const Tensor& x) {
  return unary(
      x, "gelu", [](double v) { return 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2)); },
      [](double v, double) {
        const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
        const double pdf = std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
        return cdf + v * pdf;
      });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, "tanh", [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& x) {
  return unary(
      x, "exp", [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  require_defined(x, "log");
  for (double v : x.data()) {
    if (!(v > 0.0)) throw NumericError("log: argument must be positive");
  }
  return unary(
      x, "log", [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor clamp_min(const Tensor& x, double lo) {
  return unary(
      x, "clamp_min", [lo](double v) { return v < lo ? lo : v; },
      [lo](double v, double) { return v < lo ? 0.0 : 1.0; });
}

Tensor identity(const Tensor& x) {
  return unary(
      x, "identity", [](double v) { return v; }, [](double, double) { return 1.0; });
}

namespace {

// Standardizes `count` groups of `len` values; element j of group g lives at
// base(g) + j * stride.
template <class Base>
Tensor standardize(const Tensor& x, double eps, std::size_t count, std::size_t len,
                   std::size_t stride, Base base, const char* op) {
  require_defined(x, op);
  require_finite(x, op);
  const bool rg = tracking({&x});
  Tensor out = make_result(x.shape(), rg);
  auto xs = x.data();
  auto ys = out.mutable_data();
  std::vector<double> inv(count);
  for (std::size_t g = 0; g < count; ++g) {
    const std::size_t b0 = base(g);
    double mu = 0.0;
    for (std::size_t j = 0; j < len; ++j) mu += xs[b0 + j * stride];
    mu /= static_cast<double>(len);
    double var = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
      const double d = xs[b0 + j * stride] - mu;
      var += d * d;
    }
    var /= static_cast<double>(len);
    inv[g] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < len; ++j) ys[b0 + j * stride] = (xs[b0 + j * stride] - mu) * inv[g];
  }
  if (rg) {
    Tape::current().record(out, [x, out, inv = std::move(inv), count, len, stride, base]() mutable {
      auto g = out.grad();
      auto ys = out.data();
      auto dx = x.mutable_grad();
      const double n = static_cast<double>(len);
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t b0 = base(k);
        double sg = 0.0, sgy = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
          const std::size_t p = b0 + j * stride;
          sg += g[p];
          sgy += g[p] * ys[p];
        }
        for (std::size_t j = 0; j < len; ++j) {
          const std::size_t p = b0 + j * stride;
          dx[p] += inv[k] / n * (n * g[p] - sg - ys[p] * sgy);
        }
      }
    });
  }
  return out;
}

}  // namespace

Tensor layer_norm(const Tensor& x, double eps) {
  require_defined(x, "layer_norm");
  const std::size_t len = x.cols();
  return standardize(x, eps, x.rows(), len, 1, [len](std::size_t g) { return g * len; },
                     "layer_norm");
}

Tensor batch_norm(const Tensor& x, double eps) {
  require_defined(x, "batch_norm");
  if (x.dim() != 2) throw ShapeError("batch_norm: expected a 2-D tensor, got " + shape_str(x.shape()));
  const std::size_t cols = x.cols();
  return standardize(x, eps, cols, x.rows(), cols, [](std::size_t g) { return g; }, "batch_norm");
}

Tensor softmax(const Tensor& x) {
  require_defined(x, "softmax");
  require_finite(x, "softmax");
  const bool rg = tracking({&x});
  Tensor out = make_result(x.shape(), rg);
  const std::size_t rows = x.rows(), cols = x.cols();
  auto xs = x.data();
  auto ys = out.mutable_data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xs.data() + r * cols;
    double* yr = ys.data() + r * cols;
    const double mx = *std::max_element(xr, xr + cols);
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      s += yr[j];
    }
    for (std::size_t j = 0; j < cols; ++j) yr[j] /= s;
  }
  if (rg) {
    Tape::current().record(out, [x, out, rows, cols]() mutable {
      auto g = out.grad();
      auto ys = out.data();
      auto dx = x.mutable_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (std::size_t j = 0; j < cols; ++j) dot += g[r * cols + j] * ys[r * cols + j];
        for (std::size_t j = 0; j < cols; ++j) {
          dx[r * cols + j] += ys[r * cols + j] * (g[r * cols + j] - dot);
        }
      }
    });
  }
  return out;
}

Tensor logsumexp(const Tensor& x) {
  require_defined(x, "logsumexp");
  require_finite(x, "logsumexp");
  const bool rg = tracking({&x});
  const std::size_t rows = x.rows(), cols = x.cols();
  Tensor out = make_result(leading_shape(x.shape()), rg);
  auto xs = x.data();
  auto ys = out.mutable_data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xs.data() + r * cols;
    const double mx = *std::max_element(xr, xr + cols);
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += std::exp(xr[j] - mx);
    ys[r] = mx + std::log(s);
  }
  if (rg) {
    Tape::current().record(out, [x, out, rows, cols]() mutable {
      auto g = out.grad();
      auto xs = x.data();
      auto ys = out.data();
      auto dx = x.mutable_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < cols; ++j) {
          dx[r * cols + j] += g[r] * std::exp(xs[r * cols + j] - ys[r]);
        }
      }
    });
  }
  return out;
}

namespace {

Tensor reduce_all(const Tensor& x, bool average, const char* op) {
  require_defined(x, op);
  require_finite(x, op);
  const bool rg = tracking({&x});
  Tensor out = make_result({1}, rg);
  double s = 0.0;
  for (double v : x.data()) s += v;
  const double factor = average ? 1.0 / static_cast<double>(x.numel()) : 1.0;
  out.mutable_data()[0] = s * factor;
  if (rg) {
    Tape::current().record(out, [x, out, factor]() mutable {
      const double g = out.grad()[0] * factor;
      for (double& d : x.mutable_grad()) d += g;
    });
  }
  return out;
}

}  // namespace

Tensor sum(const Tensor& x) { return reduce_all(x, false, "sum"); }
Tensor mean(const Tensor& x) { return reduce_all(x, true, "mean"); }

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat: no inputs");
  for (const Tensor& p : parts) {
    require_defined(p, "concat");
    require_finite(p, "concat");
  }
  const Shape lead = leading_shape(parts.front().shape());
  const std::size_t rows = parts.front().rows();
  std::size_t total = 0;
  bool rg = false;
  for (const Tensor& p : parts) {
    if (p.dim() != parts.front().dim() || p.rows() != rows ||
        (p.dim() > 1 && leading_shape(p.shape()) != lead)) {
      throw ShapeError("concat: leading axes differ (" + shape_str(parts.front().shape()) + " vs " +
                       shape_str(p.shape()) + ")");
    }
    total += p.cols();
    rg = rg || p.requires_grad();
  }
  rg = rg && Tape::current().enabled();
  Shape shape = parts.front().shape();
  shape.back() = total;
  Tensor out = make_result(shape, rg);
  auto ys = out.mutable_data();
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t c = p.cols();
    auto ps = p.data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(ps.data() + r * c, c, ys.data() + r * total + offset);
    }
    offset += c;
  }
  if (rg) {
    Tape::current().record(out, [parts, out, rows, total]() mutable {
      auto g = out.grad();
      std::size_t offset = 0;
      for (const Tensor& p : parts) {
        const std::size_t c = p.cols();
        if (p.requires_grad()) {
          auto dp = p.mutable_grad();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < c; ++j) dp[r * c + j] += g[r * total + offset + j];
          }
        }
        offset += c;
      }
    });
  }
  return out;
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps) {
  require_defined(a, "cosine_similarity");
  require_defined(b, "cosine_similarity");
  if (a.shape() != b.shape()) {
    throw ShapeError("cosine_similarity: shapes differ (" + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()) + ")");
  }
  require_finite(a, "cosine_similarity");
  require_finite(b, "cosine_similarity");
  const bool rg = tracking({&a, &b});
  const std::size_t rows = a.rows(), cols = a.cols();
  Tensor out = make_result(leading_shape(a.shape()), rg);
  std::vector<double> na(rows), nb(rows);
  auto as = a.data();
  auto bs = b.data();
  auto ys = out.mutable_data();
  for (std::size_t r = 0; r < rows; ++r) {
    double dot = 0.0, sa = 0.0, sb = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double x = as[r * cols + j], y = bs[r * cols + j];
      dot += x * y;
      sa += x * x;
      sb += y * y;
    }
    na[r] = std::sqrt(sa);
    nb[r] = std::sqrt(sb);
    ys[r] = dot / (std::max(na[r], eps) * std::max(nb[r], eps));
  }
  if (rg) {
    Tape::current().record(out, [a, b, out, na = std::move(na), nb = std::move(nb), rows, cols,
                            eps]() mutable {
      auto g = out.grad();
      auto as = a.data();
      auto bs = b.data();
      auto ys = out.data();
      for (std::size_t r = 0; r < rows; ++r) {
        const double ea = std::max(na[r], eps), eb = std::max(nb[r], eps);
        const double c = ys[r];
        if (a.requires_grad()) {
          auto da = a.mutable_grad();
          for (std::size_t j = 0; j < cols; ++j) {
            double d = bs[r * cols + j] / (ea * eb);
            if (na[r] > eps) d -= c * as[r * cols + j] / (na[r] * ea);
            da[r * cols + j] += g[r] * d;
          }
        }
        if (b.requires_grad()) {
          auto db = b.mutable_grad();
          for (std::size_t j = 0; j < cols; ++j) {
            double d = as[r * cols + j] / (ea * eb);
            if (nb[r] > eps) d -= c * bs[r * cols + j] / (nb[r] * eb);
            db[r * cols + j] += g[r] * d;
          }
        }
      }
    });
  }
  return out;
}

Tensor dot_rows(const Tensor& a, const Tensor& b) {
  require_defined(a, "dot_rows");
  require_defined(b, "dot_rows");
  if (a.shape() != b.shape()) {
    throw ShapeError("dot_rows: shapes differ (" + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()) + ")");
  }
  require_finite(a, "dot_rows");
  require_finite(b, "dot_rows");
  const bool rg = tracking({&a, &b});
  const std::size_t rows = a.rows(), cols = a.cols();
  Tensor out = make_result(leading_shape(a.shape()), rg);
  auto as = a.data();
  auto bs = b.data();
  auto ys = out.mutable_data();
  for (std::size_t r = 0; r < rows; ++r) {
    double dot = 0.0;
    for (std::size_t j = 0; j < cols; ++j) dot += as[r * cols + j] * bs[r * cols + j];
    ys[r] = dot;
  }
  if (rg) {
    Tape::current().record(out, [a, b, out, rows, cols]() mutable {
      auto g = out.grad();
      auto as = a.data();
      auto bs = b.data();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < cols; ++j) {
          if (a.requires_grad()) a.mutable_grad()[r * cols + j] += g[r] * bs[r * cols + j];
          if (b.requires_grad()) b.mutable_grad()[r * cols + j] += g[r] * as[r * cols + j];
        }
      }
    });
  }
  return out;
}

Tensor embedding_lookup(const Tensor& table, std::span<const std::size_t> indices) {
  require_defined(table, "embedding_lookup");
  if (indices.empty()) throw ContractError("embedding_lookup: empty index list");
  if (table.dim() > 2) throw ShapeError("embedding_lookup: table must be 1-D or 2-D");
  require_finite(table, "embedding_lookup");
  const std::size_t n = table.dim() == 2 ? table.size(0) : table.numel();
  const std::size_t d = table.dim() == 2 ? table.size(1) : 1;
  for (std::size_t i : indices) {
    if (i >= n) {
      throw ContractError("embedding_lookup: index " + std::to_string(i) + " out of range " +
                          std::to_string(n));
    }
  }
  const bool rg = tracking({&table});
  Shape shape = table.dim() == 2 ? Shape{indices.size(), d} : Shape{indices.size()};
  Tensor out = make_result(shape, rg);
  auto ts = table.data();
  auto ys = out.mutable_data();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    std::copy_n(ts.data() + indices[r] * d, d, ys.data() + r * d);
  }
  if (rg) {
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    Tape::current().record(out, [table, out, idx = std::move(idx), d]() mutable {
      auto g = out.grad();
      auto dt = table.mutable_grad();
      for (std::size_t r = 0; r < idx.size(); ++r) {
        for (std::size_t j = 0; j < d; ++j) dt[idx[r] * d + j] += g[r * d + j];
      }
    });
  }
  return out;
}

Tensor pick(const Tensor& x, std::span<const std::size_t> index) {
  require_defined(x, "pick");
  if (x.dim() != 2 || index.size() != x.size(0)) {
    throw ShapeError("pick: expected [m,n] with m indices, got " + shape_str(x.shape()) + " and " +
                     std::to_string(index.size()) + " indices");
  }
  require_finite(x, "pick");
  const std::size_t cols = x.cols();
  for (std::size_t c : index) {
    if (c >= cols) throw ContractError("pick: column index out of range");
  }
  const bool rg = tracking({&x});
  Tensor out = make_result({index.size()}, rg);
  auto xs = x.data();
  auto ys = out.mutable_data();
  for (std::size_t r = 0; r < index.size(); ++r) ys[r] = xs[r * cols + index[r]];
  if (rg) {
    std::vector<std::size_t> idx(index.begin(), index.end());
    Tape::current().record(out, [x, out, idx = std::move(idx), cols]() mutable {
      auto g = out.grad();
      auto dx = x.mutable_grad();
      for (std::size_t r = 0; r < idx.size(); ++r) dx[r * cols + idx[r]] += g[r];
    });
  }
  return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
  require_defined(x, "reshape");
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: " + shape_str(x.shape()) + " cannot become " + shape_str(shape));
  }
  return [&] {
    const bool rg = tracking({&x});
    Tensor out = make_result(std::move(shape), rg);
    std::copy(x.data().begin(), x.data().end(), out.mutable_data().begin());
    if (rg) {
      Tape::current().record(out, [x, out]() mutable {
        auto g = out.grad();
        auto dx = x.mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
      });
    }
    return out;
  }();
}

Tensor transpose(const Tensor& x) {
  require_defined(x, "transpose");
  if (x.dim() != 2) throw ShapeError("transpose: expected a 2-D tensor, got " + shape_str(x.shape()));
  const std::size_t m = x.size(0), n = x.size(1);
  const bool rg = tracking({&x});
  Tensor out = make_result({n, m}, rg);
  auto xs = x.data();
  auto ys = out.mutable_data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) ys[j * m + i] = xs[i * n + j];
  }
  if (rg) {
    Tape::current().record(out, [x, out, m, n]() mutable {
      auto g = out.grad();
      auto dx = x.mutable_grad();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) dx[i * n + j] += g[j * m + i];
      }
    });
  }
  return out;
}

Tensor spmm(const SparseMatrix& a, const Tensor& x) {
  require_defined(x, "spmm");
  if (x.dim() != 2 || x.size(0) != a.cols()) {
    throw ShapeError("spmm: operand " + shape_str(x.shape()) + " does not match a " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " matrix");
  }
  require_finite(x, "spmm");
  const std::size_t d = x.size(1);
  const bool rg = tracking({&x});
  Tensor out = make_result({a.rows(), d}, rg);
  a.multiply(x.data(), d, out.mutable_data());
  if (rg) {
    // `a` must outlive the tape; callers keep graph operators alive for the step.
    const SparseMatrix* ap = &a;
    Tape::current().record(out, [ap, x, out, d]() mutable {
      ap->multiply_transposed(out.grad(), d, x.mutable_grad());
    });
  }
  return out;
}

Tensor neighbor_max(const NeighborLists& neighbors, const Tensor& x) {
  require_defined(x, "neighbor_max");
  if (x.dim() != 2) throw ShapeError("neighbor_max: expected a 2-D tensor");
  require_finite(x, "neighbor_max");
  const std::size_t n = neighbors.size(), d = x.size(1);
  for (const auto& list : neighbors) {
    for (std::size_t j : list) {
      if (j >= x.size(0)) throw ContractError("neighbor_max: neighbor index out of range");
    }
  }
  const bool rg = tracking({&x});
  Tensor out = make_result({n, d}, rg);
  std::vector<std::size_t> argmax(n * d, std::numeric_limits<std::size_t>::max());
  auto xs = x.data();
  auto ys = out.mutable_data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : neighbors[i]) {
      for (std::size_t c = 0; c < d; ++c) {
        const double v = xs[j * d + c];
        std::size_t& am = argmax[i * d + c];
        if (am == std::numeric_limits<std::size_t>::max() || v > ys[i * d + c]) {
          ys[i * d + c] = v;
          am = j;
        }
      }
    }
  }
  if (rg) {
    Tape::current().record(out, [x, out, argmax = std::move(argmax), n, d]() mutable {
      auto g = out.grad();
      auto dx = x.mutable_grad();
      for (std::size_t i = 0; i < n * d; ++i) {
        if (argmax[i] != std::numeric_limits<std::size_t>::max()) dx[argmax[i] * d + i % d] += g[i];
      }
    });
  }
  return out;
}

Tensor dropout(const Tensor& x, double p, Rng& rng) {
  require_defined(x, "dropout");
  if (p < 0.0 || p >= 1.0) throw ContractError("dropout: probability must be in [0, 1)");
  if (p == 0.0) return x;
  std::vector<double> mask(x.numel());
  for (double& m : mask) m = rng.uniform() < p ? 0.0 : 1.0 / (1.0 - p);
  Tensor m = Tensor::from(x.shape(), std::move(mask));
  return mul(x, m);
}

}  // namespace gkd::ad
