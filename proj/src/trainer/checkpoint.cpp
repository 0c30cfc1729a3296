// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "../common/bytes.hpp"
#include "gkd/error.hpp"

namespace gkd {

using detail::get_le;
using detail::put_le;

const NamedTensor* Checkpoint::find(const std::string& name) const {
  for (const NamedTensor& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

Checkpoint snapshot(std::span<ad::Parameter* const> params) {
  Checkpoint out;
  out.tensors.reserve(params.size());
  for (const ad::Parameter* p : params) {
    out.tensors.push_back({p->name, p->tensor.shape(), p->tensor.to_vector()});
  }
  return out;
}

void restore(const Checkpoint& checkpoint, std::span<ad::Parameter* const> params) {
  for (ad::Parameter* p : params) {
    const NamedTensor* t = checkpoint.find(p->name);
    if (t == nullptr) throw LookupError("checkpoint lacks parameter '" + p->name + "'");
    if (t->shape != p->tensor.shape()) {
      throw ShapeError("checkpoint parameter '" + p->name + "' has shape " + ad::shape_str(t->shape) +
                       ", model expects " + ad::shape_str(p->tensor.shape()));
    }
    auto dst = p->tensor.mutable_data();
    std::copy(t->values.begin(), t->values.end(), dst.begin());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::string buf("GKDC", 4);
  put_le<std::uint32_t>(buf, kCheckpointVersion);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(checkpoint.tensors.size()));
  for (const NamedTensor& t : checkpoint.tensors) {
    if (ad::shape_numel(t.shape) != t.values.size()) {
      throw ContractError("checkpoint tensor '" + t.name + "' has inconsistent shape");
    }
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(t.name.size()));
    buf.append(t.name);
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) put_le<std::uint64_t>(buf, d);
    for (double v : t.values) put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(v));
  }
  detail::write_atomic(path, buf);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = detail::read_all(path, "checkpoint");
  std::size_t offset = 0;
  auto need = [&](std::size_t n, const char* what) {
    if (bytes.size() - offset < n) {
      throw FormatError(path.string() + ": truncated " + what + " at offset " + std::to_string(offset));
    }
  };
  need(12, "header");
  if (std::memcmp(bytes.data(), "GKDC", 4) != 0) throw FormatError(path.string() + ": bad magic at offset 0");
  const auto version = get_le<std::uint32_t>(bytes.data() + 4);
  if (version != kCheckpointVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = get_le<std::uint32_t>(bytes.data() + 8);
  offset = 12;
  Checkpoint out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    need(4, "name length");
    const auto name_len = get_le<std::uint32_t>(bytes.data() + offset);
    offset += 4;
    need(name_len, "name");
    t.name.assign(reinterpret_cast<const char*>(bytes.data() + offset), name_len);
    offset += name_len;
    need(4, "rank");
    const auto ndim = get_le<std::uint32_t>(bytes.data() + offset);
    offset += 4;
    need(8 * static_cast<std::size_t>(ndim), "shape");
    for (std::uint32_t d = 0; d < ndim; ++d) {
      t.shape.push_back(static_cast<std::size_t>(get_le<std::uint64_t>(bytes.data() + offset)));
      offset += 8;
    }
    const std::size_t numel = ad::shape_numel(t.shape);
    if (numel > (bytes.size() - offset) / 8) need(8 * numel, "values");
    t.values.resize(numel);
    for (std::size_t j = 0; j < numel; ++j) {
      t.values[j] = std::bit_cast<double>(get_le<std::uint64_t>(bytes.data() + offset));
      offset += 8;
    }
    out.tensors.push_back(std::move(t));
  }
  if (offset != bytes.size()) {
    throw FormatError(path.string() + ": trailing bytes at offset " + std::to_string(offset));
  }
  return out;
}

}  // namespace gkd
