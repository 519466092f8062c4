#include "wow/sim/golden.hpp"

#include "wow/session/reducer.hpp"

namespace wow::sim {

using nlohmann::json;
using Op = ScenarioStep::Op;

namespace {

Scenario named(Scenario sc, std::string name) {
  sc.name = std::move(name);
  return sc;
}

}  // namespace

std::vector<Scenario> golden_scenarios() {
  std::vector<Scenario> out;
  out.push_back(named(default_scenario(42, 3, 60), "mixed-meeting"));

  Scenario layout = default_scenario(7, 2, 80);
  layout.weights = GeneratorWeights::layout_only();
  out.push_back(named(layout, "layout-only"));

  Scenario walls = default_scenario(11, 3, 50);
  walls.weights = GeneratorWeights{10, 30, 20, 35, 5};
  out.push_back(named(walls, "walls-and-content"));

  Scenario restart;
  restart.seed = 23;
  restart.clients = 3;
  restart.script = {
      {Op::kConnect, -1, std::nullopt, 0, 0},     {Op::kRandom, -1, std::nullopt, 25, 0},
      {Op::kRestartServer, 0, std::nullopt, 0, 0}, {Op::kRandom, -1, std::nullopt, 25, 0},
      {Op::kQuiesce, 0, std::nullopt, 0, 0},
  };
  out.push_back(named(restart, "server-restart"));

  Scenario retries;
  retries.seed = 31;
  retries.clients = 2;
  retries.duplicate_commands = 0.3;
  retries.script = {
      {Op::kConnect, -1, std::nullopt, 0, 0},
      {Op::kRandom, -1, std::nullopt, 30, 0},
      {Op::kRetryBurst, 1, std::nullopt, 40, 0},
      {Op::kDisconnect, 0, std::nullopt, 0, 0},
      {Op::kRandom, 1, std::nullopt, 20, 0},
      {Op::kReconnect, 0, std::nullopt, 0, 0},
      {Op::kQuiesce, 0, std::nullopt, 0, 0},
  };
  out.push_back(named(retries, "retries-and-reconnects"));
  return out;
}

Result<json> make_golden(const Scenario& scenario) {
  InProcessOptions w;
  w.seed = scenario.seed;
  w.max_delay_ms = scenario.max_delay_ms;
  w.duplicate_commands = scenario.duplicate_commands;
  InProcessWorld world(w);
  auto report = run_scenario(scenario, world);
  if (!report) return report.error();
  if (!report->passed()) {
    return make_error(Errc::kInternalGeometryError,
                      "scenario " + scenario.name + " failed: " + report->to_json().dump());
  }
  json events = json::array();
  for (const auto& e : report->log) events.push_back(event_to_json(e));
  return json{{"format", kGoldenFormat},
              {"name", scenario.name},
              {"seed", scenario.seed},
              {"genesis", json::parse(report->genesis_canonical)},
              {"events", std::move(events)},
              {"final", json::parse(report->final_canonical)},
              {"finalCanonical", report->final_canonical}};
}

std::optional<std::string> check_golden(const json& golden) {
  try {
    if (golden.at("format") != kGoldenFormat) return "unknown format";
    Session s = golden.at("genesis").get<Session>();
    std::uint64_t n = 0;
    for (const auto& j : golden.at("events")) {
      auto e = event_from_json(j);
      if (!e) return "event " + std::to_string(n + 1) + ": " + e.error().to_string();
      auto next = apply_event(s, *e);
      if (!next) return "seq " + std::to_string(e->seq) + ": " + next.error().to_string();
      s = std::move(next).value();
      ++n;
    }
    const std::string expected = golden.at("finalCanonical").get<std::string>();
    if (canonical(s) != expected) return "final state differs after " + std::to_string(n) + " events";
    if (canonical(golden.at("final").get<Session>()) != expected) return "final and finalCanonical disagree";
  } catch (const json::exception& e) {
    return std::string("malformed golden: ") + e.what();
  }
  return std::nullopt;
}

}  // namespace wow::sim
