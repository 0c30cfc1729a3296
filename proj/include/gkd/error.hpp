// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_ERROR_HPP_
#define GKD_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace gkd {

enum class ErrorKind {
  kValidation,
  kShape,
  kNumeric,
  kContract,
  kIo,
  kFormat,
  kLookup,
  kDivergence,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define GKD_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(Kind, what) {}     \
  };

GKD_DEFINE_ERROR(ValidationError, ErrorKind::kValidation)
GKD_DEFINE_ERROR(ShapeError, ErrorKind::kShape)
GKD_DEFINE_ERROR(NumericError, ErrorKind::kNumeric)
GKD_DEFINE_ERROR(ContractError, ErrorKind::kContract)
GKD_DEFINE_ERROR(IoError, ErrorKind::kIo)
GKD_DEFINE_ERROR(FormatError, ErrorKind::kFormat)
GKD_DEFINE_ERROR(LookupError, ErrorKind::kLookup)
GKD_DEFINE_ERROR(DivergenceError, ErrorKind::kDivergence)

#undef GKD_DEFINE_ERROR

}  // namespace gkd

#endif  // GKD_ERROR_HPP_
