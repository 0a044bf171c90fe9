#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nqkv {

enum class ErrorKind {
  kDomain,         // argument outside the mathematical domain
  kData,           // non-finite or otherwise unusable input values
  kCorruption,     // stored indices / payload inconsistent
  kConfiguration,  // invalid config, unknown names, codebook mismatch
  kShape,          // matrix dimensions do not conform
  kState,          // operation not valid in the current object state
  kFormat,         // file parse failure
  kRange,          // arithmetic overflow
  kSampleSize,     // too few samples for a statistic
  kDegenerateData  // zero variance
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, ErrorKind kind, std::string_view what) {
  if (!cond) fail(kind, std::string(what));
}

}  // namespace nqkv
