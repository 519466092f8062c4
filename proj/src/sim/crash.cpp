#include "wow/sim/crash.hpp"

#include <map>

#include "wow/sim/scenario.hpp"
#include "wow/sync/protocol.hpp"
#include "wow/sync/sync_client.hpp"

namespace wow::sim {

using nlohmann::json;

namespace {

struct Client {
  std::unique_ptr<sync::SyncClient> sync;
  std::unique_ptr<Link> link;
};

void pump(World& world, std::vector<Client>& clients, std::map<std::uint64_t, std::string>* history) {
  world.advance(1);
  for (auto& c : clients) {
    if (!c.link) continue;
    for (const auto& frame : c.link->take()) {
      auto replies = c.sync->handle(frame.text);
      if (!replies) continue;
      for (const auto& r : *replies) (void)c.link->send(sync::encode(r));
      if (history && &c == &clients.front() && c.sync->replica()) {
        (*history)[c.sync->replica()->version] = canonical(*c.sync->replica());
      }
    }
  }
}

Status connect_all(World& world, const SessionId& sid, std::vector<Client>& clients) {
  for (std::size_t i = 0; i < clients.size(); ++i) {
    auto link = world.connect(sid, static_cast<int>(i));
    if (!link) return link.error();
    clients[i].link = std::move(link).value();
    clients[i].sync->disconnected();
    if (auto st = clients[i].link->send(sync::encode(clients[i].sync->hello())); !st) return st;
  }
  for (int t = 0; t < 10'000; ++t) {
    bool ready = true;
    for (auto& c : clients) ready = ready && c.sync->welcomed() && c.sync->replica() && !c.sync->needs_resync();
    if (ready) return ok_status();
    pump(world, clients, nullptr);
  }
  return make_error(Errc::kConnectFailed, "clients never synced");
}

/// One command at a time from a rotating client until the server reaches `target`.
Status drive_to(World& world, const SessionId& sid, std::vector<Client>& clients, CommandGenerator& gen,
                std::uint64_t target, std::map<std::uint64_t, std::string>* history) {
  std::uint64_t n = 0;
  for (int guard = 0; guard < 100'000; ++guard) {
    auto s = world.server_state(sid);
    if (!s) return s.error();
    if (s->version >= target) return ok_status();
    Client& c = clients[n % clients.size()];
    const std::string id = "k" + std::to_string(++n);
    Step step = gen.next(*c.sync->replica(), *c.sync->participant());
    if (std::holds_alternative<Churn>(step)) step = gen.layout_command(*c.sync->replica());
    if (auto st = c.link->send(sync::encode(c.sync->command(std::get<Command>(step), id))); !st) return st;
    for (int t = 0; t < 10'000 && !c.sync->outcomes().count(id); ++t) pump(world, clients, history);
    // Let the broadcast reach every replica before the next command.
    for (int t = 0; t < 10'000 && !world.quiet(); ++t) pump(world, clients, history);
  }
  return make_error(Errc::kConnectFailed, "target version not reached");
}

}  // namespace

Result<CrashReplayReport> crash_replay(const CrashReplayOptions& options) {
  InProcessOptions wo;
  wo.seed = options.seed;
  wo.max_delay_ms = 5;
  wo.persistence = {options.snapshot_every_events, 60'000'000, true};
  InProcessWorld world(wo);
  CrashReplayReport report;

  auto sid = world.create_session("Crash drill", 12, 12);
  if (!sid) return sid.error();
  std::vector<Client> clients(static_cast<std::size_t>(options.clients));
  for (auto& c : clients) c.sync = std::make_unique<sync::SyncClient>(*sid, sync::HelloPayload{});
  if (auto st = connect_all(world, *sid, clients); !st) return st.error();

  CommandGenerator gen(options.seed);
  std::map<std::uint64_t, std::string> history;
  if (auto st = drive_to(world, *sid, clients, gen, options.kill_after, &history); !st) return st.error();
  auto live = world.server_state(*sid);
  if (!live) return live.error();
  report.killed_at = live->version;
  history[live->version] = canonical(*live);

  if (options.corrupt_tail) {
    const std::string key = persistence::journal_key(*sid);
    auto journal = world.storage()->read(key);
    if (!journal) return journal.error();
    std::string text = *journal;
    const auto last_start = text.rfind('\n', text.size() - 2) + 1;
    text[last_start + (text.size() - last_start) / 2] ^= 0x20;
    world.storage()->poke(key, text);
    report.expected_version = report.killed_at - 1;
  } else {
    report.expected_version = report.killed_at;
  }

  // Kill: no close frames, no final snapshot, in-flight frames lost.
  if (auto st = world.restart(); !st) return st.error();
  for (auto& c : clients) c.link.reset();

  auto restored = world.store().restore(*sid);
  if (!restored) return restored.error();
  report.restored_version = restored->session.version;
  report.replayed_events = restored->report.replayed_events;
  report.truncated_records = restored->report.truncated_records;
  const auto expected = history.find(report.expected_version);
  report.restored_equals_expected =
      expected != history.end() && canonical(restored->session) == expected->second;
  if (!report.restored_equals_expected) report.detail = "restored state differs from the live state";

  // The restarted server must carry on from there.
  for (auto& c : clients) c.sync = std::make_unique<sync::SyncClient>(*sid, sync::HelloPayload{});
  if (auto st = connect_all(world, *sid, clients); !st) {
    report.detail = "reconnect: " + st.error().to_string();
    return report;
  }
  if (auto st = drive_to(world, *sid, clients, gen, world.server_state(*sid)->version + 20, nullptr); !st) {
    report.detail = "resume: " + st.error().to_string();
    return report;
  }
  for (int t = 0; t < 1000 && !world.quiet(); ++t) pump(world, clients, nullptr);
  const std::string server = canonical(*world.server_state(*sid));
  report.resumed = true;
  for (auto& c : clients) report.resumed = report.resumed && canonical(*c.sync->replica()) == server;
  if (!report.resumed) report.detail = "replicas diverged after restart";
  for (auto& c : clients) c.link.reset();
  return report;
}

json CrashReplayReport::to_json() const {
  return {{"killedAt", killed_at},
          {"expectedVersion", expected_version},
          {"restoredVersion", restored_version},
          {"replayedEvents", replayed_events},
          {"truncatedRecords", truncated_records},
          {"restoredEqualsExpected", restored_equals_expected},
          {"resumed", resumed},
          {"detail", detail},
          {"verdict", passed() ? "PASS" : "FAIL"}};
}

}  // namespace wow::sim
