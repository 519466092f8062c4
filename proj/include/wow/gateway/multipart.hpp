#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wow/common/result.hpp"
#include "wow/session/session.hpp"

namespace wow::gateway {

struct FormPart {
  std::string name;
  std::optional<std::string> filename;
  std::string content_type;  // empty when the part had no Content-Type header
  std::string data;
};

/// Extracts the boundary parameter of a multipart/form-data content type.
std::optional<std::string> multipart_boundary(std::string_view content_type);

/// Malformed when the body is not well-formed multipart/form-data.
Result<std::vector<FormPart>> parse_multipart(std::string_view body, std::string_view boundary);

struct InferredKind {
  ContentKind kind;
  std::string media_type;  // normalized, never application/octet-stream
};

/// Media type first, file-name extension as fallback. Nullopt means the
/// kind cannot be inferred and the upload must be refused.
std::optional<InferredKind> infer_kind(std::string_view media_type, std::string_view filename);

}  // namespace wow::gateway
