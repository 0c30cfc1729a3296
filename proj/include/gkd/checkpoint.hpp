// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_CHECKPOINT_HPP_
#define GKD_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gkd/optim.hpp"

namespace gkd {

struct NamedTensor {
  std::string name;
  ad::Shape shape;
  std::vector<double> values;

  bool operator==(const NamedTensor&) const = default;
};

// "GKDC" | u32 version | u32 count | count x (u32 name_len | name bytes |
// u32 ndim | ndim x u64 | numel x f64), little-endian.
struct Checkpoint {
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& name) const;
  bool operator==(const Checkpoint&) const = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

Checkpoint snapshot(std::span<ad::Parameter* const> params);
// Copies values into `params` by name. Every parameter must be present with a
// matching shape; checkpoint entries without a parameter are ignored.
void restore(const Checkpoint& checkpoint, std::span<ad::Parameter* const> params);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gkd

#endif  // GKD_CHECKPOINT_HPP_
