// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gkd/error.hpp"

namespace gkd::ad {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one axis");
  for (std::size_t e : shape) {
    if (e == 0) throw ShapeError("tensor extents must be positive, got " + shape_str(shape));
  }
}

}  // namespace

Tensor make_result(Shape shape, bool requires_grad) {
  auto impl = std::make_shared<TensorImpl>();
  const std::size_t n = shape_numel(shape);
  impl->shape = std::move(shape);
  impl->data.assign(n, 0.0);
  impl->requires_grad = requires_grad;
  if (requires_grad) impl->grad.assign(n, 0.0);
  return Tensor(std::move(impl));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  check_shape(shape);
  return make_result(std::move(shape), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  check_shape(shape);
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor shape " + shape_str(shape) + " does not hold " +
                     std::to_string(values.size()) + " values");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("tensor values must be finite");
  }
  Tensor t = make_result(std::move(shape), requires_grad);
  t.impl_->data = std::move(values);
  return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

std::size_t Tensor::cols() const { return impl_->shape.back(); }

std::size_t Tensor::rows() const { return numel() / cols(); }

Tensor& Tensor::set_requires_grad(bool flag) {
  impl_->requires_grad = flag;
  if (flag) {
    impl_->grad.assign(numel(), 0.0);
  } else {
    impl_->grad.clear();
  }
  return *this;
}

void Tensor::zero_grad() const { std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0); }

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on a tensor of shape " + shape_str(shape()));
  return impl_->data[0];
}

Tensor Tensor::clone() const {
  Tensor t = make_result(impl_->shape, false);
  t.impl_->data = impl_->data;
  return t;
}

Tape& Tape::current() {
  thread_local Tape tape;
  return tape;
}

void Tape::record(const Tensor& output, std::function<void()> backward_fn) {
  entries_.push_back({output.shared(), std::move(backward_fn)});
}

void backward(const Tensor& root) {
  if (!root.defined() || root.numel() != 1) {
    throw ContractError("backward requires a scalar root, got " +
                        (root.defined() ? shape_str(root.shape()) : std::string("undefined")));
  }
  Tape& tape = Tape::current();
  if (!root.requires_grad()) {
    tape.clear();
    return;
  }
  root.impl()->grad[0] += 1.0;
  // Entries may not be re-recorded during replay.
  std::vector<Tape::Entry> entries;
  entries.swap(tape.entries_);
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    const auto& g = it->output->grad;
    if (std::any_of(g.begin(), g.end(), [](double v) { return v != 0.0; })) it->backward_fn();
  }
}

}  // namespace gkd::ad
