// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/optim.hpp"

#include <cmath>

#include "gkd/error.hpp"

namespace gkd::ad {

Parameter::Parameter(std::string param_name, Tensor t)
    : name(std::move(param_name)), tensor(std::move(t)) {
  if (!tensor.requires_grad()) tensor.set_requires_grad(true);
  first_moment.assign(tensor.numel(), 0.0);
  second_moment.assign(tensor.numel(), 0.0);
}

Parameter make_weight(std::string name, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> values(fan_in * fan_out);
  for (double& v : values) v = rng.uniform(-bound, bound);
  return Parameter(std::move(name), Tensor::from({fan_in, fan_out}, std::move(values), true));
}

Parameter make_zeros(std::string name, Shape shape) {
  return Parameter(std::move(name), Tensor::zeros(std::move(shape), true));
}

void adamw_step(std::span<Parameter* const> params, const AdamWConfig& config) {
  for (Parameter* p : params) {
    if (!p->tensor.defined() || !p->tensor.has_grad()) {
      throw ContractError("adamw_step: parameter '" + p->name + "' has no gradient");
    }
    if (p->first_moment.size() != p->tensor.numel() || p->second_moment.size() != p->tensor.numel()) {
      throw ContractError("adamw_step: optimizer state of '" + p->name + "' has the wrong shape");
    }
  }
  for (Parameter* p : params) {
    ++p->step;
    const double t = static_cast<double>(p->step);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    auto w = p->tensor.mutable_data();
    auto g = p->tensor.mutable_grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] -= config.lr * config.weight_decay * w[i];
      double& m = p->first_moment[i];
      double& v = p->second_moment[i];
      m = config.beta1 * m + (1.0 - config.beta1) * g[i];
      v = config.beta2 * v + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m / c1;
      const double v_hat = v / c2;
      w[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
      g[i] = 0.0;
    }
  }
}

void zero_grad(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->tensor.zero_grad();
}

}  // namespace gkd::ad
