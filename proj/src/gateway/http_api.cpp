#include "wow/gateway/http_api.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wow/gateway/multipart.hpp"

namespace wow::gateway {

using nlohmann::json;

namespace {

HttpResponse json_ok(const json& body, int status = 200) {
  HttpResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> out;
  while (!path.empty()) {
    if (path.front() == '/') {
      path.remove_prefix(1);
      continue;
    }
    const auto slash = path.find('/');
    out.push_back(path.substr(0, slash));
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash);
  }
  return out;
}

json summary_json(const sync::SessionSummary& s) {
  return json{{"id", s.id.str()},
              {"name", s.name},
              {"lastActive", s.last_active_ms},
              {"participantCount", s.participant_count},
              {"version", s.version}};
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string media_type_for_path(const std::filesystem::path& p) {
  static const std::map<std::string, std::string> kTypes = {
      {".html", "text/html; charset=utf-8"}, {".js", "text/javascript"},
      {".mjs", "text/javascript"},           {".css", "text/css"},
      {".json", "application/json"},         {".svg", "image/svg+xml"},
      {".png", "image/png"},                 {".ico", "image/x-icon"},
      {".woff2", "font/woff2"},              {".map", "application/json"},
  };
  auto it = kTypes.find(p.extension().string());
  return it == kTypes.end() ? "application/octet-stream" : it->second;
}

}  // namespace

std::optional<std::string> HttpRequest::header(const std::string& lower_name) const {
  auto it = headers.find(lower_name);
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

std::string percent_decode(std::string_view text, bool plus_is_space) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '%' && i + 2 < text.size()) {
      const int hi = hex_value(text[i + 1]);
      const int lo = hex_value(text[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(plus_is_space && text[i] == '+' ? ' ' : text[i]);
  }
  return out;
}

Target parse_target(std::string_view target) {
  Target t;
  const auto q = target.find('?');
  t.path = percent_decode(target.substr(0, q));
  if (q == std::string_view::npos) return t;
  auto query = target.substr(q + 1);
  while (!query.empty()) {
    const auto amp = query.find('&');
    const auto pair = query.substr(0, amp);
    const auto eq = pair.find('=');
    if (!pair.empty()) {
      if (eq == std::string_view::npos) {
        t.query[percent_decode(pair, true)] = "";
      } else {
        t.query[percent_decode(pair.substr(0, eq), true)] = percent_decode(pair.substr(eq + 1), true);
      }
    }
    if (amp == std::string_view::npos) break;
    query.remove_prefix(amp + 1);
  }
  return t;
}

int http_status_for(Errc code) {
  switch (code) {
    case Errc::kAuthFailed:
      return 401;
    case Errc::kForbidden:
      return 403;
    case Errc::kNoSuchSession:
    case Errc::kNoSuchEntity:
      return 404;
    case Errc::kStorageUnavailable:
      return 503;
    case Errc::kRestoreFailed:
    case Errc::kCorrupt:
    case Errc::kInternalGeometryError:
      return 500;
    default:
      return 400;
  }
}

HttpResponse json_error(int status, Errc code, const std::string& detail) {
  return json_ok(json{{"error", errc_name(code)}, {"detail", detail}}, status);
}

HttpApi::HttpApi(const GatewayConfig& config, sync::SyncServer& sync,
                 persistence::BlobStore& blobs, TokenAuthenticator& auth)
    : config_(config), sync_(sync), blobs_(blobs), auth_(auth) {}

std::optional<sync::Identity> HttpApi::identify(const HttpRequest& request,
                                                const Target& target) const {
  std::string token;
  if (auto h = request.header("authorization"); h && h->rfind("Bearer ", 0) == 0) {
    token = h->substr(7);
  } else if (auto it = target.query.find("token"); it != target.query.end()) {
    token = it->second;
  }
  if (token.empty()) return std::nullopt;
  auto id = auth_.verify(token);
  if (!id) return std::nullopt;
  return std::move(id).value();
}

bool HttpApi::is_channel_path(std::string_view target) {
  const auto parsed = parse_target(target);
  const auto parts = split_path(parsed.path);
  return parts.size() == 4 && parts[0] == "api" && parts[1] == "sessions" && parts[3] == "channel";
}

std::variant<ChannelGrant, HttpResponse> HttpApi::authorize_channel(
    const HttpRequest& request) const {
  const auto target = parse_target(request.target);
  const auto parts = split_path(target.path);
  if (!is_channel_path(request.target)) {
    return json_error(404, Errc::kNoSuchEntity, "not a channel path");
  }
  auto identity = identify(request, target);
  if (!identity) return json_error(401, Errc::kAuthFailed, "missing or invalid token");
  SessionId id{std::string(parts[2])};
  if (!persistence::is_valid_session_id(id.str()) || !sync_.summary(id)) {
    return json_error(404, Errc::kNoSuchSession, id.str());
  }
  return ChannelGrant{id, *identity};
}

HttpResponse HttpApi::handle(const HttpRequest& request) const {
  const auto target = parse_target(request.target);
  const auto parts = split_path(target.path);
  const std::string& m = request.method;

  if (parts.empty() || parts[0] != "api") {
    if (m != "GET" && m != "HEAD") return json_error(405, Errc::kMalformed, "method not allowed");
    return static_asset(target.path);
  }

  if (parts.size() == 2 && parts[1] == "login") {
    if (m != "POST") return json_error(405, Errc::kMalformed, "method not allowed");
    return login(request);
  }

  if (!identify(request, target)) return json_error(401, Errc::kAuthFailed, "missing or invalid token");

  if (parts.size() == 2 && parts[1] == "sessions") {
    if (m == "POST") return create_session(request);
    if (m == "GET") return list_sessions();
    return json_error(405, Errc::kMalformed, "method not allowed");
  }
  if (parts.size() >= 3 && parts[1] == "sessions") {
    SessionId id{std::string(parts[2])};
    if (!persistence::is_valid_session_id(id.str())) {
      return json_error(404, Errc::kNoSuchSession, id.str());
    }
    if (parts.size() == 3 && m == "GET") return session_metadata(id);
    if (parts.size() == 4 && parts[3] == "files" && m == "POST") return upload(request, id);
    if (parts.size() == 4 && parts[3] == "export" && m == "GET") return export_session(id);
    if (parts.size() == 4 && parts[3] == "channel") {
      return json_error(426, Errc::kMalformed, "channel requires a WebSocket upgrade");
    }
  }
  if (parts.size() == 3 && parts[1] == "files" && m == "GET") return download(std::string(parts[2]));
  return json_error(404, Errc::kNoSuchEntity, "no route for " + m + " " + target.path);
}

HttpResponse HttpApi::login(const HttpRequest& request) const {
  const json body = json::parse(request.body, nullptr, false);
  if (!body.is_object() || !body.contains("name") || !body["name"].is_string() ||
      !body.contains("secret") || !body["secret"].is_string()) {
    return json_error(400, Errc::kMalformed, "expected {name, secret}");
  }
  auto token = auth_.login(body["name"].get<std::string>(), body["secret"].get<std::string>());
  if (!token) return json_error(401, Errc::kAuthFailed, token.error().detail);
  return json_ok(json{{"token", *token}});
}

HttpResponse HttpApi::create_session(const HttpRequest& request) const {
  const json body = json::parse(request.body, nullptr, false);
  if (!body.is_object() || !body.contains("name") || !body["name"].is_string()) {
    return json_error(400, Errc::kMalformed, "expected {name}");
  }
  int cols = kDefaultGridCols;
  int rows = kDefaultGridRows;
  if (body.contains("gridCols")) {
    if (!body["gridCols"].is_number_integer()) return json_error(400, Errc::kMalformed, "gridCols");
    cols = body["gridCols"].get<int>();
  }
  if (body.contains("gridRows")) {
    if (!body["gridRows"].is_number_integer()) return json_error(400, Errc::kMalformed, "gridRows");
    rows = body["gridRows"].get<int>();
  }
  auto session = sync_.create_session(body["name"].get<std::string>(), cols, rows);
  if (!session) {
    return json_error(http_status_for(session.error().code), session.error().code,
                      session.error().detail);
  }
  return json_ok(json{{"sessionId", session->id.str()}}, 201);
}

HttpResponse HttpApi::list_sessions() const {
  json out = json::array();
  for (const auto& s : sync_.list_sessions()) out.push_back(summary_json(s));
  return json_ok(out);
}

HttpResponse HttpApi::session_metadata(const SessionId& id) const {
  auto s = sync_.summary(id);
  if (!s) return json_error(404, Errc::kNoSuchSession, id.str());
  return json_ok(summary_json(*s));
}

HttpResponse HttpApi::upload(const HttpRequest& request, const SessionId& id) const {
  if (!sync_.summary(id)) return json_error(404, Errc::kNoSuchSession, id.str());
  if (request.body.size() > config_.upload_limit_bytes) {
    return json_error(413, Errc::kInvalidContent, "upload exceeds limit");
  }
  const auto boundary = multipart_boundary(request.header("content-type").value_or(""));
  if (!boundary) return json_error(400, Errc::kMalformed, "expected multipart/form-data");
  auto parts = parse_multipart(request.body, *boundary);
  if (!parts) return json_error(400, Errc::kMalformed, parts.error().detail);

  const FormPart* file = nullptr;
  std::string title;
  for (const auto& p : *parts) {
    if (p.name == "file" && !file) file = &p;
    if (p.name == "title") title = p.data;
  }
  if (!file) return json_error(400, Errc::kMalformed, "missing 'file' part");
  if (file->data.size() > config_.upload_limit_bytes) {
    return json_error(413, Errc::kInvalidContent, "file exceeds limit");
  }
  const std::string filename = file->filename.value_or("");
  auto kind = infer_kind(file->content_type, filename);
  if (!kind) {
    return json_error(415, Errc::kInvalidContent,
                      "cannot infer content kind from '" + file->content_type + "'");
  }
  if (title.empty()) title = filename.empty() ? "untitled" : filename;

  auto blob = blobs_.put(file->data, kind->media_type);
  if (!blob) {
    return json_error(http_status_for(blob.error().code), blob.error().code, blob.error().detail);
  }
  ContentDescriptor descriptor{kind->kind, FileSource{blob->hash}, title};
  return json_ok(json{{"contentDescriptor", descriptor},
                      {"blob", {{"hash", blob->hash},
                                {"mediaType", blob->media_type},
                                {"size", blob->size}}}},
                 201);
}

HttpResponse HttpApi::download(const std::string& hash) const {
  auto blob = blobs_.get(hash);
  if (!blob) return json_error(404, Errc::kNoSuchEntity, hash);
  HttpResponse r;
  r.content_type = blob->info.media_type;
  r.body = std::move(blob->bytes);
  r.headers.emplace_back("Cache-Control", "public, max-age=31536000, immutable");
  r.headers.emplace_back("ETag", "\"" + hash + "\"");
  return r;
}

HttpResponse HttpApi::export_session(const SessionId& id) const {
  auto s = sync_.session(id);
  if (!s) return json_error(404, Errc::kNoSuchSession, id.str());
  HttpResponse r;
  r.body = canonical(*s);
  r.headers.emplace_back("Content-Disposition",
                         "attachment; filename=\"" + id.str() + ".json\"");
  return r;
}

HttpResponse HttpApi::static_asset(const std::string& path) const {
  if (!config_.ui_root) return json_error(404, Errc::kNoSuchEntity, "no UI bundle installed");
  std::filesystem::path rel = path.empty() || path.back() == '/' ? path + "index.html" : path;
  rel = rel.relative_path().lexically_normal();
  if (rel.empty() || *rel.begin() == "..") return json_error(404, Errc::kNoSuchEntity, path);
  std::filesystem::path full = *config_.ui_root / rel;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(full, ec)) {
    // Client-side routes fall back to the bundle entry point.
    full = *config_.ui_root / "index.html";
    if (rel.has_extension() || !std::filesystem::is_regular_file(full, ec)) {
      return json_error(404, Errc::kNoSuchEntity, path);
    }
  }
  std::ifstream in(full, std::ios::binary);
  std::ostringstream bytes;
  bytes << in.rdbuf();
  HttpResponse r;
  r.content_type = media_type_for_path(full);
  r.body = bytes.str();
  return r;
}

}  // namespace wow::gateway
