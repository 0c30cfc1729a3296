// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_TENSOR_HPP_
#define GKD_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gkd::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty unless requires_grad
  bool requires_grad = false;
};

// Shared handle to a dense row-major float64 buffer. Copies alias the same
// storage; use clone() for a deep copy. A scalar is any tensor with one element.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t dim() const { return impl_->shape.size(); }
  std::size_t size(std::size_t axis) const { return impl_->shape.at(axis); }
  std::size_t numel() const { return impl_->data.size(); }
  // Extent of the last axis and product of all leading axes.
  std::size_t cols() const;
  std::size_t rows() const;

  std::span<const double> data() const { return impl_->data; }
  std::span<double> mutable_data() const { return impl_->data; }
  std::span<const double> grad() const { return impl_->grad; }
  std::span<double> mutable_grad() const { return impl_->grad; }
  bool has_grad() const { return impl_->requires_grad; }

  bool requires_grad() const { return impl_->requires_grad; }
  // Turns a leaf into a trainable leaf (allocates a zeroed grad buffer).
  Tensor& set_requires_grad(bool flag);
  void zero_grad() const;

  double item() const;
  double operator[](std::size_t i) const { return impl_->data[i]; }
  double at(std::size_t r, std::size_t c) const { return impl_->data[r * cols() + c]; }

  Tensor clone() const;  // detached deep copy of the values
  std::vector<double> to_vector() const { return impl_->data; }

  TensorImpl* impl() const { return impl_.get(); }
  const std::shared_ptr<TensorImpl>& shared() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  friend Tensor make_result(Shape shape, bool requires_grad);

  std::shared_ptr<TensorImpl> impl_;
};

// Allocates an op output; grad buffer present when requires_grad.
Tensor make_result(Shape shape, bool requires_grad);

// Thread-local reverse-mode tape. Ops append a backward closure whenever any
// input requires grad and recording is enabled.
class Tape {
 public:
  static Tape& current();

  bool enabled() const { return enabled_; }
  // `output` is the tensor whose grad the closure reads.
  void record(const Tensor& output, std::function<void()> backward_fn);
  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

 private:
  friend class NoGradGuard;
  friend void backward(const Tensor& root);
  struct Entry {
    std::shared_ptr<TensorImpl> output;
    std::function<void()> backward_fn;
  };
  std::vector<Entry> entries_;
  bool enabled_ = true;
};

class NoGradGuard {
 public:
  NoGradGuard() : previous_(Tape::current().enabled_) { Tape::current().enabled_ = false; }
  ~NoGradGuard() { Tape::current().enabled_ = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Seeds d(root)/d(root) = 1, replays the tape in reverse, then clears it.
// Entries whose output received no gradient are skipped, so leftovers from
// forward passes that never reached backward() contribute nothing.
// Leaf gradients accumulate (+=) across calls until zeroed.
void backward(const Tensor& root);

}  // namespace gkd::ad

#endif  // GKD_TENSOR_HPP_
