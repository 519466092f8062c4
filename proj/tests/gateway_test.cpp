#include <gtest/gtest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "wow/gateway/config.hpp"
#include "wow/gateway/gateway_server.hpp"
#include "wow/gateway/http_api.hpp"
#include "wow/gateway/multipart.hpp"
#include "wow/persistence/sha256.hpp"
#include "wow/sim/ws_channel.hpp"
#include "wow/sync/loopback.hpp"
#include "wow/sync/sync_client.hpp"

namespace wow::gateway {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  fs::path p = fs::temp_directory_path() / ("wow-gw-" + tag + "-" + std::to_string(rng()));
  fs::create_directories(p);
  return p;
}

std::string random_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::string out(n, '\0');
  for (auto& c : out) c = static_cast<char>(rng() & 0xff);
  return out;
}

std::string minimal_pdf() {
  return "%PDF-1.4\n1 0 obj<</Type/Catalog/Pages 2 0 R>>endobj\n"
         "2 0 obj<</Type/Pages/Kids[3 0 R]/Count 1>>endobj\n"
         "3 0 obj<</Type/Page/Parent 2 0 R/MediaBox[0 0 612 792]>>endobj\n"
         "trailer<</Root 1 0 R>>\n%%EOF\n";
}

// ---------------------------------------------------------------- config

TEST(GatewayConfig, FileThenEnvironment) {
  const auto dir = fresh_dir("cfg");
  const auto file = dir / "wow.json";
  std::ofstream(file) << R"({"port": 9000, "storageRoot": "/srv/wow", "maxCursorRate": 30,
                            "users": [{"name": "alice", "secret": "a"}]})";
  std::map<std::string, std::string> env = {{"WOW_PORT", "9100"}, {"WOW_HEARTBEAT_MS", "250"},
                                            {"WOW_USERS", "bob:b,carol:c"}};
  auto lookup = [&](const char* name) -> std::optional<std::string> {
    auto it = env.find(name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  };
  auto c = load_config(file, lookup);
  ASSERT_TRUE(c) << c.error().to_string();
  EXPECT_EQ(c->port, 9100);
  EXPECT_EQ(c->storage_root, "/srv/wow");
  EXPECT_EQ(c->max_cursor_rate, 30);
  EXPECT_EQ(c->heartbeat_ms, 250);
  EXPECT_EQ(c->upload_limit_bytes, 200ull * 1024 * 1024);
  EXPECT_FALSE(c->ui_root.has_value());
  EXPECT_EQ(c->users, (std::map<std::string, std::string>{{"bob", "b"}, {"carol", "c"}}));

  env = {{"WOW_PORT", "http"}};
  EXPECT_EQ(load_config(std::nullopt, lookup).error().code, Errc::kMalformed);
  EXPECT_EQ(load_config(dir / "missing.json", lookup).error().code, Errc::kNoSuchEntity);
  EXPECT_FALSE(parse_user_list(":x"));
  fs::remove_all(dir);
}

// ---------------------------------------------------------------- multipart

TEST(Multipart, ParsesFieldsAndBinaryFile) {
  const std::string bytes = std::string("a\r\n--not-the-boundary\r\n\0b", 26);
  const std::string body = "--XyZ\r\n"
                           "Content-Disposition: form-data; name=\"title\"\r\n\r\n"
                           "Q3 report\r\n"
                           "--XyZ\r\n"
                           "Content-Disposition: form-data; name=\"file\"; filename=\"r.pdf\"\r\n"
                           "Content-Type: application/pdf\r\n\r\n" +
                           bytes + "\r\n--XyZ--\r\n";
  ASSERT_EQ(multipart_boundary("multipart/form-data; boundary=\"XyZ\""), "XyZ");
  EXPECT_FALSE(multipart_boundary("application/json"));
  auto parts = parse_multipart(body, "XyZ");
  ASSERT_TRUE(parts) << parts.error().to_string();
  ASSERT_EQ(parts->size(), 2u);
  EXPECT_EQ((*parts)[0].name, "title");
  EXPECT_EQ((*parts)[0].data, "Q3 report");
  EXPECT_EQ((*parts)[1].filename, "r.pdf");
  EXPECT_EQ((*parts)[1].content_type, "application/pdf");
  EXPECT_EQ((*parts)[1].data, bytes);

  EXPECT_FALSE(parse_multipart("--XyZ\r\nContent-Disposition: form-data; name=\"a\"\r\n\r\nno end", "XyZ"));
  EXPECT_FALSE(parse_multipart("garbage", "XyZ"));
}

TEST(Multipart, KindInference) {
  EXPECT_EQ(infer_kind("application/pdf", "x.bin")->kind, ContentKind::kPdf);
  EXPECT_EQ(infer_kind("image/png; q=1", "")->kind, ContentKind::kImage);
  EXPECT_EQ(infer_kind("video/mp4", "")->kind, ContentKind::kVideo);
  auto by_ext = infer_kind("application/octet-stream", "Slides.PDF");
  ASSERT_TRUE(by_ext);
  EXPECT_EQ(by_ext->kind, ContentKind::kPdf);
  EXPECT_EQ(by_ext->media_type, "application/pdf");
  EXPECT_EQ(infer_kind("", "clip.webm")->kind, ContentKind::kVideo);
  // A declared type that is not a known kind is refused even if the name looks right.
  EXPECT_FALSE(infer_kind("text/plain", "notes.pdf"));
  EXPECT_FALSE(infer_kind("application/octet-stream", "archive.zip"));
  EXPECT_FALSE(infer_kind("", "README"));
}

TEST(HttpTarget, DecodesPathAndQuery) {
  auto t = parse_target("/api/sessions/a%2Db/channel?token=x%2By&flag&name=a+b");
  EXPECT_EQ(t.path, "/api/sessions/a-b/channel");
  EXPECT_EQ(t.query["token"], "x+y");
  EXPECT_EQ(t.query["name"], "a b");
  EXPECT_TRUE(t.query.count("flag"));
  EXPECT_TRUE(HttpApi::is_channel_path("/api/sessions/s1/channel?token=1"));
  EXPECT_FALSE(HttpApi::is_channel_path("/api/sessions/s1"));
}

// ---------------------------------------------------------------- HttpApi (no network)

class ApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    config.users = {{"alice", "wonder"}, {"bob", "builder"}};
    config.upload_limit_bytes = 4096;
    storage = std::make_shared<persistence::MemoryStorage>();
    store = std::make_unique<persistence::SessionStore>(storage, clock);
    blobs = std::make_unique<persistence::BlobStore>(storage);
    auth = std::make_unique<TokenAuthenticator>(clock, config.users, 3600);
    sync = std::make_unique<sync::SyncServer>(
        *store, clock, [this](std::string_view t) { return auth->verify(t); });
    api = std::make_unique<HttpApi>(config, *sync, *blobs, *auth);
    token = json::parse(call("POST", "/api/login", R"({"name":"alice","secret":"wonder"})", "").body)
                .at("token");
  }

  HttpResponse call(const std::string& method, const std::string& target, std::string body,
                    std::optional<std::string> bearer, std::string content_type = "application/json") {
    HttpRequest r;
    r.method = method;
    r.target = target;
    r.body = std::move(body);
    r.headers["content-type"] = content_type;
    if (bearer && !bearer->empty()) r.headers["authorization"] = "Bearer " + *bearer;
    return api->handle(r);
  }
  HttpResponse get(const std::string& target) { return call("GET", target, "", token); }

  HttpResponse upload(const std::string& sid, const std::string& bytes, const std::string& type,
                      const std::string& filename) {
    std::string body = "--B0undary\r\nContent-Disposition: form-data; name=\"file\"; filename=\"" +
                       filename + "\"\r\n";
    if (!type.empty()) body += "Content-Type: " + type + "\r\n";
    body += "\r\n" + bytes + "\r\n--B0undary--\r\n";
    return call("POST", "/api/sessions/" + sid + "/files", body, token,
                "multipart/form-data; boundary=B0undary");
  }

  std::string new_session(const std::string& name = "Design review") {
    auto r = call("POST", "/api/sessions", json{{"name", name}}.dump(), token);
    EXPECT_EQ(r.status, 201) << r.body;
    return json::parse(r.body).at("sessionId");
  }

  GatewayConfig config;
  ManualClock clock{1'700'000'000'000'000};
  std::shared_ptr<persistence::MemoryStorage> storage;
  std::unique_ptr<persistence::SessionStore> store;
  std::unique_ptr<persistence::BlobStore> blobs;
  std::unique_ptr<TokenAuthenticator> auth;
  std::unique_ptr<sync::SyncServer> sync;
  std::unique_ptr<HttpApi> api;
  std::string token;
};

TEST_F(ApiTest, LoginFailsWithBadCredentials) {
  EXPECT_EQ(call("POST", "/api/login", R"({"name":"alice","secret":"nope"})", "").status, 401);
  EXPECT_EQ(call("POST", "/api/login", R"({"name":"mallory","secret":"x"})", "").status, 401);
  EXPECT_EQ(call("POST", "/api/login", R"(not json)", "").status, 400);
  EXPECT_FALSE(token.empty());
}

TEST_F(ApiTest, EveryEndpointNeedsAToken) {
  const std::string sid = new_session();
  const std::vector<std::pair<std::string, std::string>> routes = {
      {"GET", "/api/sessions"},
      {"POST", "/api/sessions"},
      {"GET", "/api/sessions/" + sid},
      {"POST", "/api/sessions/" + sid + "/files"},
      {"GET", "/api/sessions/" + sid + "/export"},
      {"GET", "/api/files/" + std::string(64, 'a')},
      {"GET", "/api/sessions/" + sid + "/channel"},
  };
  for (const auto& [method, path] : routes) {
    EXPECT_EQ(call(method, path, "{}", std::nullopt).status, 401) << method << " " << path;
    EXPECT_EQ(call(method, path, "{}", "forged-token").status, 401) << method << " " << path;
  }
  HttpRequest ws;
  ws.method = "GET";
  ws.target = "/api/sessions/" + sid + "/channel";
  EXPECT_EQ(std::get<HttpResponse>(api->authorize_channel(ws)).status, 401);
}

TEST_F(ApiTest, TokensExpire) {
  EXPECT_EQ(get("/api/sessions").status, 200);
  clock.advance_us(3601ll * 1'000'000);
  EXPECT_EQ(get("/api/sessions").status, 401);
}

TEST_F(ApiTest, SessionCrud) {
  const std::string a = new_session("Alpha");
  const std::string b = new_session("Beta");
  EXPECT_NE(a, b);

  auto list = json::parse(get("/api/sessions").body);
  ASSERT_EQ(list.size(), 2u);
  for (const auto& s : list) {
    EXPECT_TRUE(s.contains("id") && s.contains("name") && s.contains("lastActive") &&
                s.contains("participantCount"));
  }

  auto meta = get("/api/sessions/" + a);
  ASSERT_EQ(meta.status, 200);
  EXPECT_EQ(json::parse(meta.body)["name"], "Alpha");
  EXPECT_EQ(json::parse(meta.body)["participantCount"], 0);
  EXPECT_EQ(get("/api/sessions/nope").status, 404);
  EXPECT_EQ(get("/api/sessions/..%2F..").status, 404);
  EXPECT_EQ(call("POST", "/api/sessions", R"({"title":"x"})", token).status, 400);
  EXPECT_EQ(call("POST", "/api/sessions", R"({"name":"x","gridCols":0})", token).status, 400);
}

TEST_F(ApiTest, UploadPdfThenRegisterContent) {
  const std::string sid = new_session();
  auto r = upload(sid, minimal_pdf(), "application/pdf", "one-page.pdf");
  ASSERT_EQ(r.status, 201) << r.body;
  const json body = json::parse(r.body);
  const auto descriptor = body.at("contentDescriptor").get<ContentDescriptor>();
  EXPECT_EQ(descriptor.kind, ContentKind::kPdf);
  EXPECT_EQ(descriptor.title, "one-page.pdf");
  EXPECT_EQ(std::get<FileSource>(descriptor.source).blob, persistence::sha256_hex(minimal_pdf()));

  // The descriptor is directly usable in a RegisterContent command.
  auto out = std::make_shared<sync::QueueOutbox>();
  auto conn = *sync->open(SessionId(sid), out, sync::Identity{ParticipantId("alice"), "alice"});
  sync::SyncClient client(SessionId(sid), sync::HelloPayload{});
  sync->receive(conn, sync::encode(client.hello()));
  sync->receive(conn, sync::encode(client.command(RegisterContent{descriptor, std::nullopt}, "r1")));
  for (const auto& frame : out->drain()) ASSERT_TRUE(client.handle(frame));
  ASSERT_TRUE(client.outcomes().count("r1"));
  EXPECT_TRUE(client.outcomes().at("r1").accepted);
  EXPECT_EQ(client.replica()->contents.size(), 1u);
}

TEST_F(ApiTest, SameFileTwiceIsStoredOnce) {
  const std::string sid = new_session();
  auto first = json::parse(upload(sid, "\x89PNG....", "image/png", "a.png").body);
  auto second = json::parse(upload(sid, "\x89PNG....", "image/png", "b.png").body);
  EXPECT_EQ(first["blob"]["hash"], second["blob"]["hash"]);
  int blob_files = 0;
  for (const auto& key : storage->list("blobs/")) blob_files += key.ends_with(".meta") ? 0 : 1;
  EXPECT_EQ(blob_files, 1);
}

TEST_F(ApiTest, UploadErrors) {
  const std::string sid = new_session();
  EXPECT_EQ(upload(sid, std::string(5000, 'x'), "application/pdf", "big.pdf").status, 413);
  EXPECT_EQ(upload(sid, "hello", "text/plain", "a.txt").status, 415);
  EXPECT_EQ(upload(sid, "PK..", "application/octet-stream", "a.zip").status, 415);
  EXPECT_EQ(upload(sid, "%PDF", "", "fallback.pdf").status, 201);
  EXPECT_EQ(upload("nope", "%PDF", "application/pdf", "a.pdf").status, 404);
  EXPECT_EQ(call("POST", "/api/sessions/" + sid + "/files", "{}", token).status, 400);
}

TEST_F(ApiTest, DownloadCarriesMediaType) {
  const std::string sid = new_session();
  const std::string bytes = random_bytes(3000, 7);
  auto up = json::parse(upload(sid, bytes, "video/mp4", "clip.mp4").body);
  auto down = get("/api/files/" + up["blob"]["hash"].get<std::string>());
  ASSERT_EQ(down.status, 200);
  EXPECT_EQ(down.content_type, "video/mp4");
  EXPECT_EQ(down.body, bytes);
  EXPECT_EQ(get("/api/files/" + std::string(64, '0')).status, 404);
  EXPECT_EQ(get("/api/files/not-a-hash").status, 404);
}

TEST_F(ApiTest, ExportIsTheCanonicalDocument) {
  const std::string sid = new_session();
  auto r = get("/api/sessions/" + sid + "/export");
  ASSERT_EQ(r.status, 200);
  auto parsed = session_from_canonical(r.body);
  ASSERT_TRUE(parsed) << parsed.error().to_string();
  EXPECT_EQ(r.body, canonical(*sync->session(SessionId(sid))));
  EXPECT_EQ(get("/api/sessions/nope/export").status, 404);
}

TEST_F(ApiTest, NoUiBundleMeans404OnlyOutsideApi) {
  EXPECT_EQ(get("/").status, 404);
  EXPECT_EQ(get("/index.html").status, 404);
  EXPECT_EQ(get("/api/sessions").status, 200);
  EXPECT_EQ(get("/api/unknown").status, 404);
}

TEST_F(ApiTest, ServesUiBundleWithoutEscapingRoot) {
  const auto dir = fresh_dir("ui");
  fs::create_directories(dir / "assets");
  std::ofstream(dir / "index.html") << "<!doctype html><title>wow</title>";
  std::ofstream(dir / "assets" / "app.js") << "console.log(1)";
  std::ofstream(dir.parent_path() / "secret.txt") << "s3cret";
  config.ui_root = dir;

  auto index = get("/");
  EXPECT_EQ(index.status, 200);
  EXPECT_EQ(index.content_type, "text/html; charset=utf-8");
  EXPECT_EQ(get("/assets/app.js").content_type, "text/javascript");
  EXPECT_EQ(get("/sessions/s123").status, 200);  // client-side route
  EXPECT_EQ(get("/../secret.txt").status, 404);
  EXPECT_EQ(get("/%2e%2e/secret.txt").status, 404);
  EXPECT_EQ(get("/missing.js").status, 404);
  EXPECT_EQ(get("/api/sessions").status, 200);
  fs::remove_all(dir);
  fs::remove(dir.parent_path() / "secret.txt");
}

// ---------------------------------------------------------------- over the network

class NetTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root = fresh_dir("net");
    GatewayConfig c;
    c.port = 0;
    c.storage_root = root;
    c.users = {{"alice", "wonder"}, {"bob", "builder"}};
    c.upload_limit_bytes = 8 * 1024 * 1024;
    c.heartbeat_ms = 200;
    server = std::make_unique<GatewayServer>(c);
    auto started = server->start();
    ASSERT_TRUE(started) << started.error().to_string();
    http = std::make_unique<httplib::Client>("127.0.0.1", server->port());
    http->set_read_timeout(10, 0);
    alice = login("alice", "wonder");
    bob = login("bob", "builder");
  }

  void TearDown() override {
    server->stop();
    fs::remove_all(root);
  }

  std::string login(const std::string& name, const std::string& secret) {
    auto r = http->Post("/api/login", json{{"name", name}, {"secret", secret}}.dump(),
                        "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    return json::parse(r->body).at("token");
  }

  httplib::Headers bearer(const std::string& token) {
    return {{"Authorization", "Bearer " + token}};
  }

  std::string create(const std::string& name) {
    auto r = http->Post("/api/sessions", bearer(alice), json{{"name", name}}.dump(), "application/json");
    EXPECT_EQ(r->status, 201);
    return json::parse(r->body).at("sessionId");
  }

  Result<sim::WsChannel> channel(const std::string& sid, const std::string& token, int* status = nullptr) {
    return sim::WsChannel::connect("127.0.0.1", server->port(),
                                   "/api/sessions/" + sid + "/channel?token=" + token, status);
  }

  /// Feeds frames into `client` until `done` holds or the deadline passes.
  template <class Pred>
  bool pump_until(sim::WsChannel& ws, sync::SyncClient& client, Pred done,
                  std::chrono::milliseconds budget = std::chrono::seconds(5)) {
    const auto deadline = std::chrono::steady_clock::now() + budget;
    while (!done()) {
      if (std::chrono::steady_clock::now() > deadline) return false;
      auto frame = ws.receive(std::chrono::milliseconds(50));
      if (!frame) return false;
      if (!*frame) continue;
      auto replies = client.handle(**frame);
      if (!replies) return false;
      for (const auto& reply : *replies) {
        if (!ws.send(sync::encode(reply))) return false;
      }
    }
    return true;
  }

  fs::path root;
  std::unique_ptr<GatewayServer> server;
  std::unique_ptr<httplib::Client> http;
  std::string alice;
  std::string bob;
};

TEST_F(NetTest, HeadlessApiSurface) {
  EXPECT_EQ(http->Get("/")->status, 404);
  EXPECT_EQ(http->Get("/api/sessions")->status, 401);
  EXPECT_EQ(http->Post("/api/login", R"({"name":"alice","secret":"x"})", "application/json")->status, 401);

  const std::string sid = create("Headless");
  auto list = http->Get("/api/sessions", bearer(alice));
  ASSERT_EQ(list->status, 200);
  EXPECT_EQ(json::parse(list->body).size(), 1u);
  EXPECT_EQ(http->Get("/api/sessions/" + sid, bearer(bob))->status, 200);
  EXPECT_EQ(http->Get("/api/sessions/zzz", bearer(bob))->status, 404);
  auto exported = http->Get("/api/sessions/" + sid + "/export?token=" + bob);
  ASSERT_EQ(exported->status, 200);
  EXPECT_TRUE(session_from_canonical(exported->body));
}

TEST_F(NetTest, UploadDownloadIsByteIdentical) {
  const std::string sid = create("Files");
  const std::string bytes = random_bytes(3 * 1024 * 1024 + 17, 42);
  httplib::MultipartFormDataItems items = {
      {"file", bytes, "capture.png", "image/png"},
      {"title", "Whiteboard capture", "", ""},
  };
  auto up = http->Post("/api/sessions/" + sid + "/files", bearer(alice), items);
  ASSERT_TRUE(up);
  ASSERT_EQ(up->status, 201) << up->body;
  const json body = json::parse(up->body);
  EXPECT_EQ(body["contentDescriptor"]["kind"], "Image");
  EXPECT_EQ(body["contentDescriptor"]["title"], "Whiteboard capture");
  const std::string hash = body["blob"]["hash"];
  EXPECT_EQ(hash, persistence::sha256_hex(bytes));

  auto down = http->Get("/api/files/" + hash, bearer(bob));
  ASSERT_EQ(down->status, 200);
  EXPECT_EQ(down->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(down->body.size(), bytes.size());
  EXPECT_TRUE(down->body == bytes);
}

TEST_F(NetTest, OversizedUploadIs413) {
  const std::string sid = create("Big");
  httplib::MultipartFormDataItems items = {
      {"file", std::string(9 * 1024 * 1024, 'x'), "big.pdf", "application/pdf"}};
  auto r = http->Post("/api/sessions/" + sid + "/files", bearer(alice), items);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 413);
  httplib::MultipartFormDataItems unknown = {{"file", "plain", "a.txt", "text/plain"}};
  EXPECT_EQ(http->Post("/api/sessions/" + sid + "/files", bearer(alice), unknown)->status, 415);
}

TEST_F(NetTest, ChannelRefusesBadTokenAndUnknownSession) {
  const std::string sid = create("Guarded");
  int status = 0;
  EXPECT_FALSE(channel(sid, "forged", &status));
  EXPECT_EQ(status, 401);
  EXPECT_FALSE(channel("nope", alice, &status));
  EXPECT_EQ(status, 404);
}

TEST_F(NetTest, SyncChannelEndToEnd) {
  const std::string sid = create("Live");
  auto a_ws = channel(sid, alice);
  auto b_ws = channel(sid, bob);
  ASSERT_TRUE(a_ws) << a_ws.error().to_string();
  ASSERT_TRUE(b_ws) << b_ws.error().to_string();
  sync::SyncClient a(SessionId(sid), sync::HelloPayload{});
  sync::SyncClient b(SessionId(sid), sync::HelloPayload{});
  ASSERT_TRUE(a_ws->send(sync::encode(a.hello())));
  ASSERT_TRUE(b_ws->send(sync::encode(b.hello())));
  ASSERT_TRUE(pump_until(*a_ws, a, [&] { return a.welcomed() && a.replica(); }));
  ASSERT_TRUE(pump_until(*b_ws, b, [&] { return b.welcomed() && b.replica(); }));
  EXPECT_EQ(*a.participant(), ParticipantId("alice"));
  EXPECT_EQ(*b.participant(), ParticipantId("bob"));

  ASSERT_TRUE(a_ws->send(sync::encode(a.command(ApplyPreset{std::nullopt, 4}, "p1"))));
  ASSERT_TRUE(pump_until(*a_ws, a, [&] { return a.outcomes().count("p1") > 0; }));
  EXPECT_TRUE(a.outcomes().at("p1").accepted);
  const auto target = a.replica()->version;
  ASSERT_TRUE(pump_until(*b_ws, b, [&] { return b.replica()->version == target; }));
  EXPECT_EQ(canonical(*a.replica()), canonical(*b.replica()));
  EXPECT_EQ(canonical(*a.replica()), canonical(*server->sync().session(SessionId(sid))));

  // Rejections reach only the sender.
  ASSERT_TRUE(b_ws->send(sync::encode(b.command(ApplyPreset{std::nullopt, 0}, "bad"))));
  ASSERT_TRUE(pump_until(*b_ws, b, [&] { return b.outcomes().count("bad") > 0; }));
  EXPECT_FALSE(b.outcomes().at("bad").accepted);
  EXPECT_EQ(b.outcomes().at("bad").reject_code, "UnsupportedPresetCount");

  // Cursor relay.
  ASSERT_TRUE(a_ws->send(sync::encode(a.cursor(0.25, 0.75, sync::CursorAction::kClick))));
  ASSERT_TRUE(pump_until(*b_ws, b, [&] { return b.cursors().count(ParticipantId("alice")) > 0; }));
  EXPECT_DOUBLE_EQ(b.cursors().at(ParticipantId("alice")).x, 0.25);

  // Departure is journalled and presence drops to one.
  a_ws->close();
  ASSERT_TRUE(pump_until(*b_ws, b, [&] {
    return !b.replica()->participants.at(ParticipantId("alice")).connected;
  }));
  EXPECT_EQ(server->sync().summary(SessionId(sid))->participant_count, 1);
}

TEST_F(NetTest, SessionsSurviveRestart) {
  const std::string sid = create("Durable");
  {
    auto ws = channel(sid, alice);
    ASSERT_TRUE(ws);
    sync::SyncClient a(SessionId(sid), sync::HelloPayload{});
    ASSERT_TRUE(ws->send(sync::encode(a.hello())));
    ASSERT_TRUE(pump_until(*ws, a, [&] { return a.replica().has_value(); }));
    ASSERT_TRUE(ws->send(sync::encode(a.command(CreateWall{"Second"}, "w"))));
    ASSERT_TRUE(pump_until(*ws, a, [&] { return a.outcomes().count("w") > 0; }));
  }
  const std::string before = canonical(*server->sync().session(SessionId(sid)));
  server->stop();

  GatewayConfig c;
  c.port = 0;
  c.storage_root = root;
  c.users = {{"alice", "wonder"}};
  GatewayServer again(c);
  ASSERT_TRUE(again.start());
  auto restored = again.sync().session(SessionId(sid));
  ASSERT_TRUE(restored);
  EXPECT_EQ(restored->walls.size(), 2u);
  EXPECT_GE(restored->version, session_from_canonical(before)->version);
  again.stop();
}

}  // namespace
}  // namespace wow::gateway
