// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

// Scalar-loop layer-wise contrastive loss, written straight from the formula
// with no vectorization and no log-sum-exp shift.

#ifndef GKD_TESTS_SUPPORT_INFONCE_ORACLE_HPP_
#define GKD_TESTS_SUPPORT_INFONCE_ORACLE_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "gkd/distill.hpp"

namespace gkd::testing {

using Rows = std::vector<std::vector<double>>;  // [B][d]

inline double oracle_sim(const std::vector<double>& a, const std::vector<double>& b, distill::Similarity kind) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  if (kind == distill::Similarity::kDot) return static_cast<double>(dot);
  return static_cast<double>(dot / (std::sqrt(na) * std::sqrt(nb)));
}

// One hop: anchors are batch positions, negatives[a] lists N batch positions.
inline double oracle_layer(const Rows& student, const Rows& teacher, const std::vector<std::size_t>& anchors,
                           const std::vector<std::vector<std::size_t>>& negatives, const distill::DistillConfig& cfg) {
  long double total = 0;
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    const std::size_t i = anchors[a];
    const long double pos = std::exp(static_cast<long double>(oracle_sim(student[i], teacher[i], cfg.similarity)) /
                                     cfg.temperature);
    long double denom = cfg.denominator == distill::Denominator::kWithPositive ? pos : 0.0L;
    for (std::size_t j : negatives[a]) {
      denom += std::exp(static_cast<long double>(oracle_sim(student[i], teacher[j], cfg.similarity)) / cfg.temperature);
    }
    total += -std::log(pos / denom);
  }
  return static_cast<double>(total / static_cast<long double>(anchors.size()));
}

// Sum over hops of gamma[l] * layer loss.
inline double oracle_distill(const std::vector<Rows>& student, const std::vector<Rows>& teacher,
                             const std::vector<std::size_t>& anchors,
                             const std::vector<std::vector<std::size_t>>& negatives, const std::vector<double>& gamma,
                             const distill::DistillConfig& cfg) {
  double total = 0.0;
  for (std::size_t l = 0; l < gamma.size(); ++l) {
    total += gamma[l] * oracle_layer(student[l], teacher[l], anchors, negatives, cfg);
  }
  return total;
}

}  // namespace gkd::testing

#endif  // GKD_TESTS_SUPPORT_INFONCE_ORACLE_HPP_
