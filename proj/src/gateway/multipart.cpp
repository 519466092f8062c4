#include "wow/gateway/multipart.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace wow::gateway {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

/// Value of `key=...` in a header parameter list, quotes removed.
std::optional<std::string> header_param(std::string_view header, std::string_view key) {
  std::size_t pos = 0;
  while ((pos = header.find(';', pos)) != std::string_view::npos) {
    ++pos;
    auto rest = trim(header.substr(pos));
    const auto eq = rest.find('=');
    if (eq == std::string_view::npos) continue;
    if (lower(trim(rest.substr(0, eq))) != key) continue;
    auto value = rest.substr(eq + 1);
    if (!value.empty() && value.front() == '"') {
      const auto close = value.find('"', 1);
      if (close == std::string_view::npos) return std::nullopt;
      return std::string(value.substr(1, close - 1));
    }
    return std::string(trim(value.substr(0, value.find(';'))));
  }
  return std::nullopt;
}

std::string base_media_type(std::string_view content_type) {
  return lower(trim(content_type.substr(0, content_type.find(';'))));
}

}  // namespace

std::optional<std::string> multipart_boundary(std::string_view content_type) {
  if (base_media_type(content_type) != "multipart/form-data") return std::nullopt;
  auto b = header_param(content_type, "boundary");
  if (!b || b->empty() || b->size() > 200) return std::nullopt;
  return b;
}

Result<std::vector<FormPart>> parse_multipart(std::string_view body, std::string_view boundary) {
  const std::string delim = "--" + std::string(boundary);
  const std::string next_delim = "\r\n" + delim;

  std::size_t pos = body.find(delim);
  if (pos == std::string_view::npos) return make_error(Errc::kMalformed, "no boundary");
  pos += delim.size();

  std::vector<FormPart> parts;
  while (true) {
    if (body.substr(pos, 2) == "--") return parts;
    if (body.substr(pos, 2) != "\r\n") return make_error(Errc::kMalformed, "bad delimiter line");
    pos += 2;

    const auto headers_end = body.find("\r\n\r\n", pos);
    if (headers_end == std::string_view::npos) return make_error(Errc::kMalformed, "unterminated headers");
    FormPart part;
    bool has_disposition = false;
    auto headers = body.substr(pos, headers_end - pos);
    while (!headers.empty()) {
      const auto eol = headers.find("\r\n");
      const auto line = headers.substr(0, eol);
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) return make_error(Errc::kMalformed, "bad part header");
      const auto name = lower(trim(line.substr(0, colon)));
      const auto value = trim(line.substr(colon + 1));
      if (name == "content-disposition") {
        if (lower(trim(value.substr(0, value.find(';')))) != "form-data") {
          return make_error(Errc::kMalformed, "part is not form-data");
        }
        auto field = header_param(value, "name");
        if (!field) return make_error(Errc::kMalformed, "part without a name");
        part.name = *field;
        part.filename = header_param(value, "filename");
        has_disposition = true;
      } else if (name == "content-type") {
        part.content_type = std::string(value);
      }
      if (eol == std::string_view::npos) break;
      headers.remove_prefix(eol + 2);
    }
    if (!has_disposition) return make_error(Errc::kMalformed, "part without Content-Disposition");

    const auto data_begin = headers_end + 4;
    const auto data_end = body.find(next_delim, data_begin);
    if (data_end == std::string_view::npos) return make_error(Errc::kMalformed, "unterminated part");
    part.data = std::string(body.substr(data_begin, data_end - data_begin));
    parts.push_back(std::move(part));
    pos = data_end + next_delim.size();
  }
}

std::optional<InferredKind> infer_kind(std::string_view media_type, std::string_view filename) {
  const auto type = base_media_type(media_type);
  if (type == "application/pdf") return InferredKind{ContentKind::kPdf, type};
  if (type.rfind("image/", 0) == 0) return InferredKind{ContentKind::kImage, type};
  if (type.rfind("video/", 0) == 0) return InferredKind{ContentKind::kVideo, type};
  if (!type.empty() && type != "application/octet-stream") return std::nullopt;

  static const std::map<std::string, InferredKind> kByExtension = {
      {"pdf", {ContentKind::kPdf, "application/pdf"}},
      {"png", {ContentKind::kImage, "image/png"}},
      {"jpg", {ContentKind::kImage, "image/jpeg"}},
      {"jpeg", {ContentKind::kImage, "image/jpeg"}},
      {"gif", {ContentKind::kImage, "image/gif"}},
      {"webp", {ContentKind::kImage, "image/webp"}},
      {"svg", {ContentKind::kImage, "image/svg+xml"}},
      {"bmp", {ContentKind::kImage, "image/bmp"}},
      {"mp4", {ContentKind::kVideo, "video/mp4"}},
      {"m4v", {ContentKind::kVideo, "video/mp4"}},
      {"webm", {ContentKind::kVideo, "video/webm"}},
      {"ogv", {ContentKind::kVideo, "video/ogg"}},
      {"mov", {ContentKind::kVideo, "video/quicktime"}},
  };
  const auto dot = filename.rfind('.');
  if (dot == std::string_view::npos) return std::nullopt;
  auto it = kByExtension.find(lower(filename.substr(dot + 1)));
  if (it == kByExtension.end()) return std::nullopt;
  return it->second;
}

}  // namespace wow::gateway
