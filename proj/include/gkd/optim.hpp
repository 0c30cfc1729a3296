// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_OPTIM_HPP_
#define GKD_OPTIM_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gkd/rng.hpp"
#include "gkd/tensor.hpp"

namespace gkd::ad {

// A trainable tensor plus its AdamW state.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor tensor);

  std::string name;
  Tensor tensor;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step = 0;
};

// Affine weights drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Parameter make_weight(std::string name, std::size_t fan_in, std::size_t fan_out, Rng& rng);
Parameter make_zeros(std::string name, Shape shape);

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// One decoupled-weight-decay Adam update over every parameter, then zeroes
// their gradients.
void adamw_step(std::span<Parameter* const> params, const AdamWConfig& config);

void zero_grad(std::span<Parameter* const> params);

}  // namespace gkd::ad

#endif  // GKD_OPTIM_HPP_
