#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace snnse {

// Every error carries a short machine-parsable kind; what() is
// "<kind>: <message>" so the CLI can print it on a single line.
class Error : public std::runtime_error {
 public:
  Error(std::string_view kind, const std::string& message)
      : std::runtime_error(std::string(kind) + ": " + message), kind_(kind) {}

  std::string_view kind() const noexcept { return kind_; }

 private:
  std::string_view kind_;
};

#define SNNSE_DEFINE_ERROR(Name, tag)                                  \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(tag, message) {} \
  }

SNNSE_DEFINE_ERROR(FormatError, "format");
SNNSE_DEFINE_ERROR(IoError, "io");
SNNSE_DEFINE_ERROR(DomainError, "domain");
SNNSE_DEFINE_ERROR(ShapeError, "shape");
SNNSE_DEFINE_ERROR(NumericError, "numeric");
SNNSE_DEFINE_ERROR(UnsupportedRateError, "unsupported-rate");
SNNSE_DEFINE_ERROR(IntegrityError, "integrity");
SNNSE_DEFINE_ERROR(CheckpointError, "checkpoint");
SNNSE_DEFINE_ERROR(DatasetError, "dataset");
SNNSE_DEFINE_ERROR(ConfigError, "config");
SNNSE_DEFINE_ERROR(InternalError, "internal");

#undef SNNSE_DEFINE_ERROR

}  // namespace snnse
