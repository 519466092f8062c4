#include "wow/sim/scenario.hpp"

#include <algorithm>
#include <set>

#include "wow/persistence/sha256.hpp"
#include "wow/session/reducer.hpp"
#include "wow/sim/audit.hpp"
#include "wow/sync/protocol.hpp"
#include "wow/sync/sync_client.hpp"

namespace wow::sim {

using nlohmann::json;
using Op = ScenarioStep::Op;

namespace {

// Upper bound on how long settling may take, in world milliseconds.
constexpr std::int64_t kSettleBudgetMs = 60'000;
constexpr std::int64_t kConnectBudgetMs = 10'000;

const std::map<std::string, Op>& op_names() {
  static const std::map<std::string, Op> names = {
      {"connect", Op::kConnect},         {"command", Op::kCommand},
      {"random", Op::kRandom},           {"cursorBurst", Op::kCursorBurst},
      {"retryBurst", Op::kRetryBurst},   {"disconnect", Op::kDisconnect},
      {"reconnect", Op::kReconnect},     {"sleep", Op::kSleep},
      {"quiesce", Op::kQuiesce},         {"restartServer", Op::kRestartServer},
      {"runUntilVersion", Op::kRunUntilVersion},
  };
  return names;
}

std::string op_name(Op op) {
  for (const auto& [name, value] : op_names()) {
    if (value == op) return name;
  }
  return "?";
}

struct Actor {
  int index = 0;
  std::unique_ptr<sync::SyncClient> client;
  std::unique_ptr<Link> link;
  std::unique_ptr<CommandGenerator> gen;
  int budget = 0;
  std::uint64_t next_request = 1;
  /// Encoded command frames without an outcome yet, resent after reconnects.
  std::map<std::string, std::string> unacked;
  std::int64_t ready_at_ms = 0;
  bool wants_connection = false;

  bool live() const { return link && link->open() && client->welcomed() && client->replica(); }
};

class Runner {
 public:
  Runner(const Scenario& scenario, World& world) : sc_(scenario), world_(world), rng_(scenario.seed) {
    report_.scenario = scenario.name;
    report_.mode = world.mode();
    report_.seed = scenario.seed;
    report_.clients = scenario.clients;
  }

  ~Runner() {
    // Links refer into the world; close them while it still exists.
    for (auto& a : actors_) a.link.reset();
  }

  Result<RunReport> run() {
    auto sid = world_.create_session("Simulated meeting " + std::to_string(sc_.seed), sc_.grid_cols,
                                     sc_.grid_rows);
    if (!sid) return sid.error();
    report_.session = *sid;
    sid_ = *sid;
    for (int i = 0; i < sc_.clients; ++i) {
      Actor a;
      a.index = i;
      sync::HelloPayload hello;
      hello.role = i == 0 ? ParticipantRole::kWallDisplay : ParticipantRole::kPersonalDevice;
      a.client = std::make_unique<sync::SyncClient>(sid_, hello);
      a.gen = std::make_unique<CommandGenerator>(sc_.seed * 1000 + static_cast<std::uint64_t>(i) + 1,
                                                 sc_.weights);
      actors_.push_back(std::move(a));
    }

    const auto script = sc_.script.empty() ? default_scenario(sc_.seed, sc_.clients, sc_.random_commands).script
                                           : sc_.script;
    for (const auto& step : script) {
      if (auto st = execute(step); !st) {
        if (st.error().code == Errc::kConnectFailed && report_.log.empty() && step.op == Op::kConnect) {
          return st.error();
        }
        report_.errors.push_back(op_name(step.op) + ": " + st.error().to_string());
      }
    }
    settle();
    finish();
    return report_;
  }

 private:
  Actor& actor(int i) { return actors_.at(static_cast<std::size_t>(i)); }

  Status execute(const ScenarioStep& step) {
    if (step.op != Op::kConnect && step.op != Op::kSleep && step.op != Op::kQuiesce &&
        step.op != Op::kRestartServer && step.op != Op::kRandom && step.op != Op::kRunUntilVersion &&
        (step.client < 0 || step.client >= sc_.clients)) {
      return make_error(Errc::kMalformed, "no client " + std::to_string(step.client));
    }
    switch (step.op) {
      case Op::kConnect:
        if (step.client < 0) {
          for (auto& a : actors_) {
            if (auto st = connect(a); !st) return st;
          }
          return ok_status();
        }
        return connect(actor(step.client));
      case Op::kCommand:
        return send_command(actor(step.client), *step.command);
      case Op::kRandom:
        return random_phase(step.client, step.count);
      case Op::kCursorBurst:
        return cursor_burst(actor(step.client), step.count, step.ms);
      case Op::kRetryBurst:
        return retry_burst(actor(step.client), step.count);
      case Op::kDisconnect:
        disconnect(actor(step.client));
        return ok_status();
      case Op::kReconnect:
        return connect(actor(step.client));
      case Op::kSleep:
        advance(step.ms);
        return ok_status();
      case Op::kQuiesce:
        settle();
        return ok_status();
      case Op::kRestartServer:
        return restart();
      case Op::kRunUntilVersion:
        return run_until_version(static_cast<std::uint64_t>(step.count));
    }
    return ok_status();
  }

  // ---------------------------------------------------------------- plumbing

  void advance(std::int64_t ms) {
    if (ms > 0) world_.advance(ms);
    pump();
  }

  void pump() {
    for (auto& a : actors_) {
      if (!a.link) continue;
      for (auto& frame : a.link->take()) handle(a, frame);
      if (!a.link->open() && a.wants_connection) {
        // Dropped by the server (restart, timeout): come back like a browser would.
        a.client->disconnected();
        a.link.reset();
      }
      if (a.link && a.client->needs_resync()) {
        disconnect(a);
        a.wants_connection = true;
      }
    }
    for (auto& a : actors_) {
      if (!a.link && a.wants_connection) (void)open_link(a);
    }
  }

  void handle(Actor& a, const Frame& frame) {
    const std::optional<Session> before = a.client->replica();
    auto env = sync::decode(frame.text);
    auto replies = a.client->handle(frame.text);
    if (!replies) {
      report_.errors.push_back("client " + std::to_string(a.index) + ": " + replies.error().to_string());
      return;
    }
    for (const auto& r : *replies) (void)a.link->send(sync::encode(r));
    if (!env) return;
    if (env->type == sync::MessageType::kCursor) {
      const std::string owner = env->payload.value("ownerId", std::string{});
      cursor_arrivals_[{a.index, owner}].push_back(frame.sent_ms);
    }
    if (env->request_id) a.unacked.erase(*env->request_id);
    // Only the first client audits; every replica applies the same events.
    if (a.index == 0 && env->type == sync::MessageType::kEvent && before && a.client->replica() &&
        a.client->replica()->version == before->version + 1) {
      if (auto event = sync::event_from_envelope(*env)) {
        for (auto& p : audit_transition(*before, event->command, *a.client->replica())) {
          if (report_.audit_violations.size() < 20) {
            report_.audit_violations.push_back("seq " + std::to_string(event->seq) + ": " + p);
          }
        }
      }
    }
  }

  Status open_link(Actor& a) {
    auto link = world_.connect(sid_, a.index);
    if (!link) return link.error();
    a.link = std::move(link).value();
    if (auto st = a.link->send(sync::encode(a.client->hello())); !st) return st;
    for (const auto& [id, text] : a.unacked) {
      (void)a.link->send(text);
      ++report_.retried_commands;
    }
    return ok_status();
  }

  Status connect(Actor& a) {
    a.wants_connection = true;
    if (a.link && a.link->open()) return ok_status();
    a.client->disconnected();
    if (auto st = open_link(a); !st) return st;
    return wait_live(a);
  }

  Status wait_live(Actor& a) {
    for (std::int64_t waited = 0; waited < kConnectBudgetMs; ++waited) {
      if (a.live()) return ok_status();
      if (a.client->fatal()) return make_error(Errc::kAuthFailed, *a.client->fatal());
      advance(1);
    }
    return make_error(Errc::kConnectFailed, "client " + std::to_string(a.index) + " never got a snapshot");
  }

  void disconnect(Actor& a) {
    a.wants_connection = false;
    if (a.link) a.link->close();
    a.link.reset();
    a.client->disconnected();
  }

  Status send_command(Actor& a, const Command& command) {
    if (!a.live()) return make_error(Errc::kConnectFailed, "client " + std::to_string(a.index) + " is offline");
    const std::string id = "c" + std::to_string(a.index + 1) + "-" + std::to_string(a.next_request++);
    const std::string text = sync::encode(a.client->command(command, id));
    a.unacked[id] = text;
    sent_requests_.insert(id);
    return a.link->send(text);
  }

  Status restart() {
    if (auto st = world_.restart(); !st) return st;
    for (auto& a : actors_) {
      if (!a.link) continue;
      a.link.reset();
      a.client->disconnected();
    }
    for (auto& a : actors_) {
      if (a.wants_connection) {
        if (auto st = connect(a); !st) return st;
      }
    }
    return ok_status();
  }

  // ---------------------------------------------------------------- phases

  Status random_phase(int client, int count) {
    for (auto& a : actors_) {
      if (client < 0 || a.index == client) a.budget += count;
    }
    std::int64_t idle = 0;
    while (true) {
      std::vector<Actor*> ready;
      bool remaining = false;
      for (auto& a : actors_) {
        if (a.budget <= 0) continue;
        remaining = true;
        if (a.live() && static_cast<int>(a.client->pending().size()) < sc_.max_in_flight &&
            a.ready_at_ms <= world_.now_ms()) {
          ready.push_back(&a);
        }
      }
      if (!remaining) return ok_status();
      if (ready.empty()) {
        if (++idle > kSettleBudgetMs) return make_error(Errc::kConnectFailed, "clients stalled");
        advance(1);
        continue;
      }
      idle = 0;
      Actor& a = *ready[rng_.below(ready.size())];
      --a.budget;
      const Step step = a.gen->next(*a.client->replica(), *a.client->participant());
      if (std::holds_alternative<Churn>(step)) {
        disconnect(a);
        advance(rng_.between(0, 30));
        if (auto st = connect(a); !st) return st;
      } else if (auto st = send_command(a, std::get<Command>(step)); !st) {
        return st;
      }
      a.ready_at_ms = world_.now_ms() + rng_.between(0, sc_.max_think_ms);
      advance(rng_.between(0, 2));
    }
  }

  Status run_until_version(std::uint64_t version) {
    for (std::int64_t guard = 0; guard < 100'000; ++guard) {
      auto s = world_.server_state(sid_);
      if (!s) return s.error();
      if (s->version >= version) return ok_status();
      Actor* a = nullptr;
      for (auto& x : actors_) {
        if (x.live() && x.client->pending().empty()) {
          a = &x;
          break;
        }
      }
      if (!a) {
        advance(1);
        continue;
      }
      Step step = a->gen->next(*a->client->replica(), *a->client->participant());
      if (std::holds_alternative<Churn>(step)) step = a->gen->layout_command(*a->client->replica());
      if (auto st = send_command(*a, std::get<Command>(step)); !st) return st;
      // One command at a time, so the version stops exactly on target.
      while (!a->client->pending().empty()) advance(1);
    }
    return make_error(Errc::kConnectFailed, "version target not reached");
  }

  Status cursor_burst(Actor& a, int count, std::int64_t ms) {
    if (!a.live()) return make_error(Errc::kConnectFailed, "cursor owner offline");
    Actor* observer = nullptr;
    for (auto& o : actors_) {
      if (&o != &a && o.live()) observer = &o;
    }
    if (!observer) return make_error(Errc::kConnectFailed, "no observer for the cursor burst");
    settle();
    auto before = world_.server_state(sid_);
    if (!before) return before.error();
    const std::string owner = a.client->participant()->str();
    const auto key = std::make_pair(observer->index, owner);
    const std::size_t seen_before = cursor_arrivals_[key].size();

    double x = 0;
    double y = 0;
    std::int64_t elapsed = 0;
    for (int i = 0; i < count; ++i) {
      x = static_cast<double>((i * 7919) % 1000) / 1000.0;
      y = static_cast<double>(i + 1) / static_cast<double>(count + 1);
      (void)a.link->send(sync::encode(a.client->cursor(x, y, sync::CursorAction::kMove)));
      ++report_.cursor.sent;
      const std::int64_t target = ms * (i + 1) / std::max(count, 1);
      if (target > elapsed) {
        advance(target - elapsed);
        elapsed = target;
      }
    }
    advance(200);
    settle();

    const auto& arrivals = cursor_arrivals_[key];
    std::vector<std::int64_t> times(arrivals.begin() + static_cast<long>(seen_before), arrivals.end());
    report_.cursor.delivered += times.size();
    for (std::size_t i = 0, j = 0; i < times.size(); ++i) {
      while (times[i] - times[j] >= 1000) ++j;
      report_.cursor.max_per_second = std::max(report_.cursor.max_per_second, static_cast<int>(i - j + 1));
    }
    const auto& seen = observer->client->cursors();
    auto it = seen.find(ParticipantId(owner));
    if (it == seen.end() || it->second.x != x || it->second.y != y) report_.cursor.final_position_ok = false;
    auto after = world_.server_state(sid_);
    if (!after || canonical(*after) != canonical(*before)) report_.cursor.state_unchanged = false;
    return ok_status();
  }

  Status retry_burst(Actor& a, int count) {
    if (!a.live()) return make_error(Errc::kConnectFailed, "client offline");
    if (a.client->replica()->contents.empty()) {
      if (auto st = send_command(a, RegisterContent{synthetic_descriptor(rng_, 0, *a.client->participant()),
                                                    std::nullopt});
          !st) {
        return st;
      }
      settle();
    }
    const ContentId target = a.client->replica()->contents.begin()->first;
    for (int i = 0; i < count; ++i) {
      if (!a.live()) {
        if (auto st = connect(a); !st) return st;
      }
      if (auto st = send_command(a, AddNote{target, "retry " + std::to_string(i)}); !st) return st;
      // Immediate duplicate, as a client retrying on a slow ack would.
      (void)a.link->send(a.unacked.rbegin()->second);
      ++report_.retried_commands;
      advance(rng_.between(0, 3));
      if (i % 97 == 96) {
        // Drop the connection with commands in flight; connect() resends them.
        disconnect(a);
        if (auto st = connect(a); !st) return st;
      }
    }
    return ok_status();
  }

  void settle() {
    for (std::int64_t t = 0; t < kSettleBudgetMs; ++t) {
      auto s = world_.server_state(sid_);
      bool done = s.ok() && world_.quiet();
      for (auto& a : actors_) {
        if (!a.wants_connection) continue;
        if (!a.live() || !a.client->pending().empty() || (s && a.client->replica()->version != s->version)) {
          done = false;
        }
      }
      if (done) return;
      advance(1);
    }
    report_.errors.push_back("did not settle");
  }

  // ---------------------------------------------------------------- verdict

  void finish() {
    auto server = world_.server_state(sid_);
    if (!server) {
      report_.errors.push_back("server state: " + server.error().to_string());
      return;
    }
    report_.server_version = server->version;
    report_.final_canonical = canonical(*server);
    const json server_json = json::parse(report_.final_canonical);

    report_.converged = true;
    for (auto& a : actors_) {
      if (!a.wants_connection || !a.client->replica()) continue;
      const std::string mine = canonical(*a.client->replica());
      if (mine == report_.final_canonical) continue;
      report_.converged = false;
      report_.divergent_client = user_name(a.index);
      report_.first_difference = first_difference(json::parse(mine), server_json).value_or("/");
      break;
    }
    for (auto& p : audit_session(*server)) report_.audit_violations.push_back("final: " + p);

    for (auto& a : actors_) {
      for (const auto& [id, outcome] : a.client->outcomes()) {
        if (!outcome.accepted) {
          ++report_.rejected;
          ++report_.rejects_by_reason[outcome.reject_code];
        }
      }
    }

    auto log = fetch_event_log(world_, sid_, server->version);
    if (!log) {
      report_.oracle_detail = "event log unavailable: " + log.error().to_string();
      return;
    }
    report_.log = std::move(log).value();
    report_.log_complete = true;
    report_.log_digest = persistence::sha256_hex(event_log_text(report_.log));

    std::map<std::string, int> per_request;
    for (const auto& e : report_.log) {
      if (e.request_id.starts_with("server-")) {
        ++report_.server_events;
      } else {
        ++per_request[e.request_id];
      }
    }
    for (const auto& [id, n] : per_request) {
      if (n > 1) ++report_.duplicate_events;
    }
    report_.accepted_commands = per_request.size();

    auto genesis = new_session(sid_, "Simulated meeting " + std::to_string(sc_.seed),
                               sc_.grid_cols, sc_.grid_rows);
    if (!genesis) {
      report_.oracle_detail = genesis.error().to_string();
      return;
    }
    report_.genesis_canonical = canonical(*genesis);
    if (auto problem = oracle_replay(*genesis, report_.log, *server)) {
      report_.oracle_detail = *problem;
    } else {
      report_.oracle_ok = true;
    }
  }

  const Scenario& sc_;
  World& world_;
  Rng rng_;
  SessionId sid_;
  std::vector<Actor> actors_;
  std::set<std::string> sent_requests_;
  std::map<std::pair<int, std::string>, std::vector<std::int64_t>> cursor_arrivals_;
  RunReport report_;
};

Result<Command> command_field(const json& j) {
  if (!j.contains("command")) return make_error(Errc::kMalformed, "command step without 'command'");
  return command_from_json(j["command"]);
}

}  // namespace

Scenario default_scenario(std::uint64_t seed, int clients, int commands_per_client) {
  Scenario s;
  s.name = "random";
  s.seed = seed;
  s.clients = clients;
  s.random_commands = commands_per_client;
  s.script = {
      {Op::kConnect, -1, std::nullopt, 0, 0},
      {Op::kRandom, -1, std::nullopt, commands_per_client, 0},
      {Op::kQuiesce, 0, std::nullopt, 0, 0},
  };
  return s;
}

Result<Scenario> scenario_from_json(const json& j) {
  if (!j.is_object()) return make_error(Errc::kMalformed, "scenario must be a JSON object");
  Scenario s;
  try {
    s.name = j.value("name", s.name);
    s.seed = j.value("seed", s.seed);
    s.clients = j.value("clients", s.clients);
    s.random_commands = j.value("randomCommands", s.random_commands);
    s.max_in_flight = j.value("maxInFlight", s.max_in_flight);
    s.max_think_ms = j.value("maxThinkMs", s.max_think_ms);
    s.max_delay_ms = j.value("maxDelayMs", s.max_delay_ms);
    s.duplicate_commands = j.value("duplicateCommands", s.duplicate_commands);
    if (j.contains("grid")) {
      s.grid_cols = j["grid"].at(0).get<int>();
      s.grid_rows = j["grid"].at(1).get<int>();
    }
    if (j.contains("weights")) {
      const auto& w = j["weights"];
      s.weights = {w.value("layout", 50), w.value("content", 20), w.value("notes", 15),
                   w.value("walls", 10), w.value("churn", 5)};
    }
    for (const auto& u : j.value("users", json::array())) {
      s.users.emplace_back(u.at("name").get<std::string>(), u.at("secret").get<std::string>());
    }
    for (const auto& st : j.value("script", json::array())) {
      ScenarioStep step;
      const auto name = st.at("op").get<std::string>();
      auto it = op_names().find(name);
      if (it == op_names().end()) return make_error(Errc::kMalformed, "unknown op '" + name + "'");
      step.op = it->second;
      step.client = st.value("client", step.op == Op::kConnect || step.op == Op::kRandom ? -1 : 0);
      step.count = st.value("count", 0);
      step.ms = st.value("ms", std::int64_t{0});
      if (step.op == Op::kCommand) {
        auto c = command_field(st);
        if (!c) return c.error();
        step.command = std::move(c).value();
      }
      if (step.op == Op::kCursorBurst && step.ms == 0) step.ms = 1000;
      s.script.push_back(std::move(step));
    }
  } catch (const json::exception& e) {
    return make_error(Errc::kMalformed, e.what());
  }
  if (s.clients < 1 || s.clients > 64) return make_error(Errc::kMalformed, "clients must be 1..64");
  return s;
}

Result<std::vector<Event>> fetch_event_log(World& world, const SessionId& session,
                                           std::uint64_t through_version) {
  auto link = world.connect(session, -1);
  if (!link) return link.error();
  sync::HelloPayload hello;
  hello.last_acked_seq = 0;
  if (auto st = (*link)->send(sync::encode(sync::make_hello(session, hello))); !st) return st.error();

  std::vector<Event> log;
  for (std::int64_t waited = 0; waited < kSettleBudgetMs && log.size() < through_version; ++waited) {
    world.advance(1);
    for (const auto& frame : (*link)->take()) {
      auto env = sync::decode(frame.text);
      if (!env) continue;
      if (env->type == sync::MessageType::kSnapshot) {
        return make_error(Errc::kJournalGap, "server answered with a snapshot; the journal was compacted");
      }
      if (env->type == sync::MessageType::kReject && !env->request_id) {
        return make_error(Errc::kAuthFailed, env->payload.dump());
      }
      if (env->type != sync::MessageType::kEvent) continue;
      auto e = sync::event_from_envelope(*env);
      if (!e) return e.error();
      if (e->seq == log.size() + 1 && e->seq <= through_version) log.push_back(std::move(e).value());
    }
    if (!(*link)->open()) break;
  }
  (*link)->close();
  if (log.size() != through_version) {
    return make_error(Errc::kJournalGap, "got " + std::to_string(log.size()) + " of " +
                                             std::to_string(through_version) + " events");
  }
  return log;
}

std::optional<std::string> oracle_replay(const Session& genesis, const std::vector<Event>& log,
                                         const Session& expected) {
  Session s = genesis;
  for (const auto& e : log) {
    auto applied = apply_command(s, e.command, CommandMeta{e.actor, e.server_time, e.request_id});
    if (!applied) {
      return "seq " + std::to_string(e.seq) + " rejected by the oracle: " + applied.error().to_string();
    }
    if (event_to_json(applied->event) != event_to_json(e)) {
      return "seq " + std::to_string(e.seq) + " differs from the oracle's event";
    }
    s = std::move(applied->session);
  }
  if (s != expected) {
    return "final state differs at " +
           first_difference(json::parse(canonical(s)), json::parse(canonical(expected))).value_or("/");
  }
  return std::nullopt;
}

bool RunReport::passed() const {
  return errors.empty() && converged && log_complete && oracle_ok && version_matches() &&
         duplicate_events == 0 && audit_violations.empty() && cursor.final_position_ok &&
         cursor.state_unchanged && cursor.max_per_second <= 60;
}

json RunReport::to_json() const {
  json rejects = json::object();
  for (const auto& [code, n] : rejects_by_reason) rejects[code] = n;
  json j = {
      {"scenario", scenario},
      {"mode", mode},
      {"seed", seed},
      {"clients", clients},
      {"session", session.str()},
      {"verdict", passed() ? "PASS" : "FAIL"},
      {"convergence", {{"converged", converged}}},
      {"serverVersion", server_version},
      {"events", log.size()},
      {"acceptedCommands", accepted_commands},
      {"serverEvents", server_events},
      {"versionMatchesAccepted", version_matches()},
      {"rejected", rejected},
      {"rejectsByReason", rejects},
      {"oracle", {{"logComplete", log_complete}, {"replayMatches", oracle_ok}, {"detail", oracle_detail}}},
      {"logDigest", log_digest},
      {"exactlyOnce", {{"retriedSends", retried_commands}, {"requestsWithDuplicateEvents", duplicate_events}}},
      {"cursor",
       {{"sent", cursor.sent},
        {"delivered", cursor.delivered},
        {"maxPerSecond", cursor.max_per_second},
        {"finalPositionOk", cursor.final_position_ok},
        {"stateUnchanged", cursor.state_unchanged}}},
      {"audit", {{"violations", audit_violations}}},
      {"errors", errors},
  };
  if (!converged) {
    j["convergence"]["client"] = divergent_client;
    j["convergence"]["firstDifference"] = first_difference;
  }
  return j;
}

Result<RunReport> run_scenario(const Scenario& scenario, World& world) {
  Runner runner(scenario, world);
  return runner.run();
}

}  // namespace wow::sim
