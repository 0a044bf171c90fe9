#include "nqkv/error.hpp"

namespace nqkv {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kData: return "data error";
    case ErrorKind::kCorruption: return "corruption error";
    case ErrorKind::kConfiguration: return "configuration error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kState: return "state error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kRange: return "range error";
    case ErrorKind::kSampleSize: return "sample-size error";
    case ErrorKind::kDegenerateData: return "degenerate-data error";
  }
  return "error";
}

void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(to_string(kind)) + ": " + what);
}

}  // namespace nqkv
