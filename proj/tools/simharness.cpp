// Headless simulated clients against an embedded or live WoW server.
//
// Every subcommand prints a JSON report on stdout. Exit status: 0 when all
// checks pass, 1 when a check fails, 2 on usage or connection errors.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wow/gateway/config.hpp"
#include "wow/sim/crash.hpp"
#include "wow/sim/fuzz.hpp"
#include "wow/sim/golden.hpp"
#include "wow/sim/scenario.hpp"

namespace {

using nlohmann::json;
using namespace wow;
using namespace wow::sim;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kError = 2;

int emit(const json& report, bool passed) {
  std::cout << report.dump(2) << "\n";
  return passed ? kPass : kFail;
}

int error_out(const Error& e) {
  std::cout << json{{"verdict", "ERROR"}, {"error", errc_name(e.code)}, {"detail", e.detail}}.dump(2)
            << "\n";
  return kError;
}

/// --users wins, then WOW_USERS, then whatever the scenario carries.
Result<std::vector<std::pair<std::string, std::string>>> credentials(
    const std::optional<std::string>& flag,
    std::vector<std::pair<std::string, std::string>> fallback) {
  std::optional<std::string> text = flag ? flag : gateway::process_env("WOW_USERS");
  if (!text) return fallback;
  auto parsed = gateway::parse_user_list(*text);
  if (!parsed) return parsed.error();
  std::vector<std::pair<std::string, std::string>> out(parsed->begin(), parsed->end());
  return out;
}

Result<RemoteOptions> remote_options(const std::string& url, const std::optional<std::string>& users,
                                     std::vector<std::pair<std::string, std::string>> fallback = {}) {
  auto ro = parse_server_url(url);
  if (!ro) return ro.error();
  auto creds = credentials(users, std::move(fallback));
  if (!creds) return creds.error();
  if (creds->empty()) return make_error(Errc::kAuthFailed, "no credentials; pass --users or set WOW_USERS");
  ro->users = std::move(creds).value();
  return ro;
}

Result<json> read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) return make_error(Errc::kNoSuchEntity, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    return make_error(Errc::kMalformed, path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);
  CLI::App app{"WoW simulation harness"};
  app.require_subcommand(1);

  std::optional<std::string> server_url;
  std::optional<std::string> users;

  // run
  auto* run = app.add_subcommand("run", "Run a scenario and check convergence");
  std::optional<std::string> scenario_file;
  std::uint64_t run_seed = 42;
  int run_clients = 3;
  int run_commands = 200;
  bool print_log = false;
  run->add_option("--scenario", scenario_file, "Scenario JSON file");
  run->add_option("--seed", run_seed, "Seed for the default scenario");
  run->add_option("--clients", run_clients, "Clients in the default scenario")->check(CLI::Range(1, 64));
  run->add_option("--commands", run_commands, "Random commands per client in the default scenario");
  run->add_option("--server", server_url, "Live server URL; in-process when omitted");
  run->add_option("--users", users, "Credentials as name:secret,... (remote only)");
  run->add_flag("--log", print_log, "Include the full event log in the report");

  // fuzz
  auto* fz = app.add_subcommand("fuzz", "Random commands with a full audit after every step");
  FuzzOptions fo;
  bool in_process = false;
  bool layout_only = false;
  std::string mutant = "none";
  fz->add_option("--seed", fo.seed, "Generator seed");
  fz->add_option("--steps", fo.steps, "Number of steps");
  fz->add_option("--cols", fo.grid_cols, "Grid columns")->check(CLI::Range(1, 64));
  fz->add_option("--rows", fo.grid_rows, "Grid rows")->check(CLI::Range(1, 64));
  fz->add_flag("--layout-only", layout_only, "Only layout commands");
  auto* ip = fz->add_flag("--in-process", in_process, "Go through an embedded server and the wire protocol");
  fz->add_option("--server", server_url, "Go through a live server")->excludes(ip);
  fz->add_option("--users", users, "Credentials as name:secret,... (remote only)");
  fz->add_option("--mutant", mutant, "Deliberate reducer bug to inject")
      ->check(CLI::IsMember({"none", "swap-drops-content"}));

  // crash
  auto* crash = app.add_subcommand("crash", "Kill an in-process server and check the restore");
  CrashReplayOptions co;
  crash->add_option("--seed", co.seed, "Seed");
  crash->add_option("--kill-after", co.kill_after, "Server version at the kill")->check(CLI::PositiveNumber);
  crash->add_flag("--corrupt-tail", co.corrupt_tail, "Damage the last journal record first");

  // export
  auto* ex = app.add_subcommand("export", "Fetch a session's state and event log");
  std::string session_id;
  std::string export_url = "http://127.0.0.1:8080";
  bool with_events = true;
  ex->add_option("--session", session_id, "Session id")->required();
  ex->add_option("--server", export_url, "Server URL")->capture_default_str();
  ex->add_option("--users", users, "Credentials as name:secret,...");
  ex->add_flag("!--no-events", with_events, "Skip the event log");

  // golden
  auto* golden = app.add_subcommand("golden", "Write or check the golden event logs");
  std::string golden_dir;
  bool golden_check = false;
  golden->add_option("--dir", golden_dir, "Directory of golden files")->required();
  golden->add_flag("--check", golden_check, "Replay existing files instead of writing them");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    Scenario sc = default_scenario(run_seed, run_clients, run_commands);
    if (scenario_file) {
      auto j = read_json(*scenario_file);
      if (!j) return error_out(j.error());
      auto parsed = scenario_from_json(*j);
      if (!parsed) return error_out(parsed.error());
      sc = std::move(parsed).value();
    }
    Result<RunReport> report = make_error(Errc::kInternalGeometryError, "not run");
    if (server_url) {
      auto ro = remote_options(*server_url, users, sc.users);
      if (!ro) return error_out(ro.error());
      RemoteWorld world(*ro);
      report = run_scenario(sc, world);
    } else {
      InProcessOptions w;
      w.seed = sc.seed;
      w.max_delay_ms = sc.max_delay_ms;
      w.duplicate_commands = sc.duplicate_commands;
      InProcessWorld world(w);
      report = run_scenario(sc, world);
    }
    if (!report) return error_out(report.error());
    json out = report->to_json();
    if (print_log) {
      json log = json::array();
      for (const auto& e : report->log) log.push_back(event_to_json(e));
      out["log"] = std::move(log);
    }
    return emit(out, report->passed());
  }

  if (fz->parsed()) {
    if (layout_only) fo.weights = GeneratorWeights::layout_only();
    std::unique_ptr<FuzzTarget> target;
    if (server_url) {
      auto ro = remote_options(*server_url, users);
      if (!ro) return error_out(ro.error());
      target = make_wire_target([opts = *ro] { return std::make_unique<RemoteWorld>(opts); });
    } else if (in_process) {
      target = make_wire_target([seed = fo.seed] {
        InProcessOptions w;
        w.seed = seed;
        w.max_delay_ms = 3;
        return std::make_unique<InProcessWorld>(w);
      });
    } else {
      target = make_direct_target(mutant == "swap-drops-content" ? Mutation::kSwapDropsContent
                                                                 : Mutation::kNone);
    }
    const FuzzReport r = fuzz(*target, fo);
    json out = r.to_json();
    out["mutant"] = mutant;
    return emit(out, r.passed());
  }

  if (crash->parsed()) {
    auto r = crash_replay(co);
    if (!r) return error_out(r.error());
    return emit(r->to_json(), r->passed());
  }

  if (ex->parsed()) {
    auto ro = remote_options(export_url, users);
    if (!ro) return error_out(ro.error());
    RemoteWorld world(*ro);
    const SessionId sid(session_id);
    auto state = world.server_state(sid);
    if (!state) return error_out(state.error());
    json out{{"session", json::parse(canonical(*state))}, {"version", state->version}};
    if (with_events) {
      auto log = fetch_event_log(world, sid, state->version);
      if (!log) return error_out(log.error());
      json events = json::array();
      for (const auto& e : *log) events.push_back(event_to_json(e));
      out["events"] = std::move(events);
    }
    return emit(out, true);
  }

  if (golden->parsed()) {
    namespace fs = std::filesystem;
    json out = json::array();
    bool ok = true;
    for (const auto& sc : golden_scenarios()) {
      const fs::path file = fs::path(golden_dir) / (sc.name + ".json");
      if (golden_check) {
        auto j = read_json(file.string());
        const auto problem = j ? check_golden(*j) : std::optional(j.error().to_string());
        ok = ok && !problem;
        out.push_back({{"file", file.string()}, {"ok", !problem}, {"detail", problem.value_or("")}});
        continue;
      }
      auto g = make_golden(sc);
      if (!g) return error_out(g.error());
      fs::create_directories(golden_dir);
      std::ofstream(file) << g->dump(1) << "\n";
      out.push_back({{"file", file.string()}, {"events", (*g)["events"].size()}});
    }
    return emit(out, ok);
  }
  return kError;
}
