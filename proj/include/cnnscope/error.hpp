#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cnnscope {

enum class ErrorKind {
  Shape,       // impossible or mismatched tensor shapes
  Bounds,      // index/channel/coordinate outside a valid range
  Model,       // missing or malformed weights
  Corrupt,     // weight blob length disagrees with the manifest
  Parse,       // manifest text cannot be parsed
  Validation,  // parsed data violates an invariant (non-finite weight, bad chain)
  Format,      // undecodable image bytes
  Dimension,   // image decodes but has the wrong size
  Query,       // introspection request against the wrong kind of layer
  Io,          // filesystem failure
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cnnscope
