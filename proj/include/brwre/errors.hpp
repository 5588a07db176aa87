#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace brwre {

enum class ErrorKind {
  InvalidArgument,
  PopulationCapExceeded,
  NonGeometricGrowth,
  UnboundedProgenyInGeneralMode,
  ArgumentOrder,
  SupportBelowRetention,
  RejectionCapExceeded,
  ConfigError,
  MissingInput,
};

constexpr std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::PopulationCapExceeded: return "PopulationCapExceeded";
    case ErrorKind::NonGeometricGrowth: return "NonGeometricGrowth";
    case ErrorKind::UnboundedProgenyInGeneralMode: return "UnboundedProgenyInGeneralMode";
    case ErrorKind::ArgumentOrder: return "ArgumentOrder";
    case ErrorKind::SupportBelowRetention: return "SupportBelowRetention";
    case ErrorKind::RejectionCapExceeded: return "RejectionCapExceeded";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::MissingInput: return "MissingInput";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view kind_name() const noexcept { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::InvalidArgument, what);
}

inline void require(bool condition, const char* what) {
  if (!condition) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace brwre
