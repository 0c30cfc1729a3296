// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_OPS_HPP_
#define GKD_OPS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "gkd/rng.hpp"
#include "gkd/tensor.hpp"

namespace gkd::ad {

// Constant sparse matrix in CSR form together with its transpose, used for
// neighborhood aggregation. Values are not differentiated.
class SparseMatrix {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Entry> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  // y = A x for x of shape [cols, d]; accumulates into out [rows, d].
  void multiply(std::span<const double> x, std::size_t d, std::span<double> out) const;
  // out [cols, d] += A^T y
  void multiply_transposed(std::span<const double> y, std::size_t d, std::span<double> out) const;

  double value_at(std::size_t row, std::size_t col) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> indices_;
  std::vector<double> values_;
  std::vector<std::size_t> t_offsets_;
  std::vector<std::size_t> t_indices_;
  std::vector<double> t_values_;
};

// Adjacency lists for max aggregation; neighbors[i] are the source rows of i.
using NeighborLists = std::vector<std::vector<std::size_t>>;

// 2-D matrix product.
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise binary ops. `b` may match `a`'s shape, be a single element, or
// match `a`'s trailing axes (row broadcast, e.g. a bias).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

Tensor relu(const Tensor& x);
Tensor gelu(const Tensor& x);  // exact erf form
Tensor tanh(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor clamp_min(const Tensor& x, double lo);
Tensor identity(const Tensor& x);

// Standardizes over the last axis; no learned affine.
Tensor layer_norm(const Tensor& x, double eps = 1e-5);
// Standardizes each column of a 2-D tensor over its rows.
Tensor batch_norm(const Tensor& x, double eps = 1e-5);
// Over the last axis, max-subtracted.
Tensor softmax(const Tensor& x);
// log(sum(exp(x))) over the last axis; drops that axis (1-D input -> [1]).
Tensor logsumexp(const Tensor& x);

Tensor sum(const Tensor& x);   // -> [1]
Tensor mean(const Tensor& x);  // -> [1]

// Concatenates along the last axis; leading axes must agree.
Tensor concat(const std::vector<Tensor>& parts);
// Reduces the last axis: cos(a, b) = a.b / (max(|a|, eps) max(|b|, eps)).
Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps = 1e-8);
// Row-wise dot product over the last axis.
Tensor dot_rows(const Tensor& a, const Tensor& b);
// Gathers rows of a 2-D table (or elements of a 1-D tensor).
Tensor embedding_lookup(const Tensor& table, std::span<const std::size_t> indices);
// out[i] = x[i, index[i]] for 2-D x.
Tensor pick(const Tensor& x, std::span<const std::size_t> index);

Tensor reshape(const Tensor& x, Shape shape);
Tensor transpose(const Tensor& x);

// out = A x, A constant.
Tensor spmm(const SparseMatrix& a, const Tensor& x);
// out[i] = elementwise max over x[j], j in neighbors[i]; zero when empty.
Tensor neighbor_max(const NeighborLists& neighbors, const Tensor& x);

// Inverted dropout; identity when p == 0.
Tensor dropout(const Tensor& x, double p, Rng& rng);

}  // namespace gkd::ad

#endif  // GKD_OPS_HPP_
