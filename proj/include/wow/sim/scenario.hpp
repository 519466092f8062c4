#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wow/sim/generator.hpp"
#include "wow/sim/world.hpp"

namespace wow::sim {

struct ScenarioStep {
  enum class Op {
    kConnect,
    kCommand,        // one given command from `client`
    kRandom,         // `count` generated commands per client, interleaved (client -1 = all)
    kCursorBurst,    // `count` Move updates spread evenly over `ms`
    kRetryBurst,     // `count` notes, each sent twice, with periodic reconnects
    kDisconnect,
    kReconnect,
    kSleep,
    kQuiesce,
    kRestartServer,  // in-process only
    kRunUntilVersion // random commands until the server reaches `count`
  };
  Op op = Op::kQuiesce;
  int client = 0;
  std::optional<Command> command;
  int count = 0;
  std::int64_t ms = 0;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 42;
  int clients = 3;
  int grid_cols = 12;
  int grid_rows = 12;
  /// Per client, for the default script (connect all, random, quiesce).
  int random_commands = 200;
  int max_in_flight = 4;
  int max_think_ms = 12;
  int max_delay_ms = 20;
  double duplicate_commands = 0.0;
  GeneratorWeights weights;
  std::vector<ScenarioStep> script;
  /// Credentials for remote runs.
  std::vector<std::pair<std::string, std::string>> users;
};

Result<Scenario> scenario_from_json(const nlohmann::json& j);

struct CursorStats {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  /// Largest number of forwarded updates from one owner in any 1 s window.
  int max_per_second = 0;
  bool final_position_ok = true;
  bool state_unchanged = true;
};

struct RunReport {
  std::string scenario;
  std::string mode;
  std::uint64_t seed = 0;
  int clients = 0;
  SessionId session;

  bool converged = false;
  std::string divergent_client;
  std::string first_difference;

  std::uint64_t server_version = 0;
  std::uint64_t accepted_commands = 0;  // distinct client request ids with an Event
  std::uint64_t server_events = 0;      // joins and leaves issued by the server
  std::uint64_t rejected = 0;
  std::map<std::string, std::uint64_t> rejects_by_reason;

  bool log_complete = false;
  std::vector<Event> log;
  std::string log_digest;
  bool oracle_ok = false;
  std::string oracle_detail;

  std::uint64_t duplicate_events = 0;  // request ids that produced more than one Event
  std::uint64_t retried_commands = 0;
  std::vector<std::string> audit_violations;
  CursorStats cursor;
  std::vector<std::string> errors;

  std::string genesis_canonical;  // the session as created, before event 1
  std::string final_canonical;

  bool version_matches() const { return server_version == accepted_commands + server_events; }
  bool passed() const;
  nlohmann::json to_json() const;
};

/// Runs the scenario to the end and checks convergence, the replay oracle,
/// invariants and exactly-once delivery. Fails only when the world cannot be
/// reached at all (ConnectFailed).
Result<RunReport> run_scenario(const Scenario& scenario, World& world);

/// The scenario used when none is given: every client connects, sends its
/// random commands, then everything settles.
Scenario default_scenario(std::uint64_t seed, int clients, int commands_per_client);

/// Every event of a session, fetched over the public protocol by a Hello
/// with lastAckedSeq 0. Needs the journal to reach back to seq 1.
Result<std::vector<Event>> fetch_event_log(World& world, const SessionId& session,
                                           std::uint64_t through_version);

/// Replays `log` from the genesis session with the sequential reducer and
/// checks every event and the final state. Empty means they agree.
std::optional<std::string> oracle_replay(const Session& genesis, const std::vector<Event>& log,
                                         const Session& expected);

}  // namespace wow::sim
