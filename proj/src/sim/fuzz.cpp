#include "wow/sim/fuzz.hpp"

#include <chrono>

#include "wow/persistence/sha256.hpp"
#include "wow/session/reducer.hpp"
#include "wow/sim/audit.hpp"
#include "wow/sync/protocol.hpp"
#include "wow/sync/sync_client.hpp"

namespace wow::sim {

using nlohmann::json;

namespace {

constexpr std::int64_t kReplyBudgetMs = 30'000;

/// Fixed setup shared by every target: some contents, a four-view layout.
std::vector<Command> setup_commands(const FuzzOptions& options, const ParticipantId& owner) {
  std::vector<Command> out;
  Rng rng(options.seed ^ 0xc0ffee);
  for (int i = 0; i < options.initial_contents; ++i) {
    out.push_back(RegisterContent{synthetic_descriptor(rng, 900'000 + i, owner), std::nullopt});
  }
  out.push_back(ApplyPreset{std::nullopt, 4, 0});
  return out;
}

class DirectTarget final : public FuzzTarget {
 public:
  explicit DirectTarget(Mutation mutation) : mutation_(mutation) {}

  std::string name() const override {
    return mutation_ == Mutation::kNone ? "direct" : "direct+mutant(swap-drops-content)";
  }

  Result<Session> reset(const FuzzOptions& options) override {
    auto s = new_session(SessionId("fuzz"), "Fuzz", options.grid_cols, options.grid_rows);
    if (!s) return s.error();
    state_ = std::move(s).value();
    tick_ = 0;
    guest_present_ = false;
    auto joined = submit(JoinParticipant{actor(), "Fuzzer", ParticipantRole::kWallDisplay});
    if (!joined) return joined.error();
    for (const auto& c : setup_commands(options, actor())) (void)submit(c);
    return state_;
  }

  Result<Session> submit(const Command& command) override {
    ++tick_;
    auto applied = apply_command(state_, command,
                                 CommandMeta{actor(), 1'700'000'000'000 + tick_, "f" + std::to_string(tick_)});
    if (!applied) return applied.error();
    state_ = std::move(applied->session);
    if (mutation_ == Mutation::kSwapDropsContent) {
      if (const auto* swap = std::get_if<SwapViews>(&command)) {
        const WallId wall = swap->wall.value_or(state_.active_wall);
        if (const auto* vp = std::get_if<ViewportId>(&swap->a)) {
          if (VirtualWall* w = state_.find_wall(wall)) {
            if (Viewport* v = w->find(*vp)) v->content.reset();
          }
        }
      }
    }
    return state_;
  }

  Result<Session> churn() override {
    guest_present_ = !guest_present_;
    const ParticipantId guest("guest");
    if (guest_present_) return submit(JoinParticipant{guest, "Guest", ParticipantRole::kPersonalDevice});
    return submit(LeaveParticipant{guest});
  }

  const Session& state() const override { return state_; }
  ParticipantId actor() const override { return ParticipantId("fuzzer"); }

 private:
  Mutation mutation_;
  Session state_;
  std::int64_t tick_ = 0;
  bool guest_present_ = false;
};

class WireTarget final : public FuzzTarget {
 public:
  explicit WireTarget(std::function<std::unique_ptr<World>()> factory) : factory_(std::move(factory)) {}
  ~WireTarget() override { drop(); }

  std::string name() const override { return world_ ? world_->mode() : "wire"; }

  Result<Session> reset(const FuzzOptions& options) override {
    drop();
    world_ = factory_();
    auto sid = world_->create_session("Fuzz " + std::to_string(options.seed), options.grid_cols,
                                      options.grid_rows);
    if (!sid) return sid.error();
    sid_ = *sid;
    client_ = std::make_unique<sync::SyncClient>(sid_, sync::HelloPayload{});
    if (auto st = open(); !st) return st.error();
    for (const auto& c : setup_commands(options, actor())) (void)submit(c);
    return *client_->replica();
  }

  Result<Session> submit(const Command& command) override {
    const std::string id = "f" + std::to_string(++requests_);
    if (auto st = link_->send(sync::encode(client_->command(command, id))); !st) return st.error();
    for (std::int64_t t = 0; t < kReplyBudgetMs; ++t) {
      pump();
      if (auto it = client_->outcomes().find(id); it != client_->outcomes().end()) {
        if (!it->second.accepted) {
          return make_error(errc_from_name(it->second.reject_code).value_or(Errc::kMalformed),
                            it->second.reject_detail);
        }
        return *client_->replica();
      }
      world_->advance(1);
    }
    return make_error(Errc::kConnectFailed, "no outcome for " + id);
  }

  Result<Session> churn() override {
    link_->close();
    link_.reset();
    client_->disconnected();
    if (auto st = open(); !st) return st.error();
    return *client_->replica();
  }

  const Session& state() const override { return *client_->replica(); }
  ParticipantId actor() const override {
    return client_ && client_->participant() ? *client_->participant() : ParticipantId(user_name(0));
  }

 private:
  Status open() {
    auto link = world_->connect(sid_, 0);
    if (!link) return link.error();
    link_ = std::move(link).value();
    if (auto st = link_->send(sync::encode(client_->hello())); !st) return st;
    for (std::int64_t t = 0; t < kReplyBudgetMs; ++t) {
      pump();
      if (client_->welcomed() && client_->replica() && !client_->needs_resync()) return ok_status();
      if (client_->fatal()) return make_error(Errc::kAuthFailed, *client_->fatal());
      world_->advance(1);
    }
    return make_error(Errc::kConnectFailed, "no snapshot");
  }

  void pump() {
    for (const auto& frame : link_->take()) {
      if (auto replies = client_->handle(frame.text)) {
        for (const auto& r : *replies) (void)link_->send(sync::encode(r));
      }
    }
  }

  void drop() {
    link_.reset();
    client_.reset();
    world_.reset();
  }

  std::function<std::unique_ptr<World>()> factory_;
  std::unique_ptr<World> world_;
  std::unique_ptr<Link> link_;
  std::unique_ptr<sync::SyncClient> client_;
  SessionId sid_;
  std::uint64_t requests_ = 0;
};

/// Applies one step; returns the audit problems (empty when fine or rejected).
std::vector<std::string> apply_step(FuzzTarget& target, const Step& step, bool audit, bool* accepted,
                                    Errc* reject) {
  const Session before = target.state();
  Result<Session> after = std::holds_alternative<Churn>(step) ? target.churn()
                                                              : target.submit(std::get<Command>(step));
  *accepted = after.ok();
  if (!after) {
    *reject = after.error().code;
    return {};
  }
  if (!audit) return {};
  if (const auto* c = std::get_if<Command>(&step)) return audit_transition(before, *c, *after);
  return audit_session(*after);
}

}  // namespace

std::unique_ptr<FuzzTarget> make_direct_target(Mutation mutation) {
  return std::make_unique<DirectTarget>(mutation);
}

std::unique_ptr<FuzzTarget> make_wire_target(std::function<std::unique_ptr<World>()> world_factory) {
  return std::make_unique<WireTarget>(std::move(world_factory));
}

std::optional<std::pair<std::size_t, std::vector<std::string>>> first_violation(
    FuzzTarget& target, const FuzzOptions& options, const std::vector<Step>& steps) {
  if (!target.reset(options)) return std::nullopt;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    bool accepted = false;
    Errc reject{};
    auto problems = apply_step(target, steps[i], true, &accepted, &reject);
    if (!problems.empty()) return std::make_pair(i, std::move(problems));
  }
  return std::nullopt;
}

std::vector<Step> shrink(FuzzTarget& target, const FuzzOptions& options, std::vector<Step> steps) {
  int budget = options.shrink_budget;
  auto fails = [&](const std::vector<Step>& candidate) {
    --budget;
    return first_violation(target, options, candidate).has_value();
  };

  // Prefix bisection: the shortest failing prefix.
  std::size_t lo = 1;
  std::size_t hi = steps.size();
  while (lo < hi && budget > 0) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (fails({steps.begin(), steps.begin() + static_cast<long>(mid)})) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  steps.resize(hi);

  // Delta debugging: drop chunks, halving the chunk size down to one step.
  std::size_t chunks = 2;
  while (steps.size() >= 2 && budget > 0) {
    const std::size_t size = (steps.size() + chunks - 1) / chunks;
    bool reduced = false;
    for (std::size_t start = 0; start < steps.size() && budget > 0; start += size) {
      std::vector<Step> candidate(steps.begin(), steps.begin() + static_cast<long>(start));
      const std::size_t end = std::min(steps.size(), start + size);
      candidate.insert(candidate.end(), steps.begin() + static_cast<long>(end), steps.end());
      if (!candidate.empty() && fails(candidate)) {
        steps = std::move(candidate);
        chunks = std::max<std::size_t>(chunks - 1, 2);
        reduced = true;
        break;
      }
    }
    if (reduced) continue;
    if (chunks >= steps.size()) break;
    chunks = std::min(steps.size(), chunks * 2);
  }
  return steps;
}

FuzzReport fuzz(FuzzTarget& target, const FuzzOptions& options) {
  FuzzReport report;
  report.target = target.name();
  report.seed = options.seed;
  const auto started = std::chrono::steady_clock::now();
  if (auto st = target.reset(options); !st) {
    report.errors.push_back("reset: " + st.error().to_string());
    return report;
  }
  report.target = target.name();

  CommandGenerator gen(options.seed, options.weights);
  std::vector<Step> history;
  history.reserve(options.steps);
  for (std::uint64_t i = 0; i < options.steps; ++i) {
    Step step = gen.next(target.state(), target.actor());
    history.push_back(step);
    bool accepted = false;
    Errc reject{};
    const auto t0 = std::chrono::steady_clock::now();
    auto problems = apply_step(target, step, options.audit, &accepted, &reject);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    report.max_step_ms = std::max(report.max_step_ms, ms);
    ++report.steps;
    if (accepted) {
      ++report.accepted;
      ++report.accepted_by_command[step_name(step)];
    } else {
      ++report.rejected;
      ++report.rejects_by_reason[std::string(errc_name(reject))];
      if (reject == Errc::kConnectFailed) {
        report.errors.push_back("lost the server at step " + std::to_string(i));
        break;
      }
    }
    if (!problems.empty()) {
      FuzzViolation v;
      v.step = i;
      v.command = step_name(step);
      v.problems = std::move(problems);
      v.original_prefix = history.size();
      v.repro = shrink(target, options, history);
      report.violation = std::move(v);
      break;
    }
  }
  report.final_digest = persistence::sha256_hex(canonical(target.state()));
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

json FuzzReport::to_json() const {
  json j = {
      {"mode", "fuzz"},
      {"target", target},
      {"seed", seed},
      {"steps", steps},
      {"accepted", accepted},
      {"rejected", rejected},
      {"rejectsByReason", rejects_by_reason},
      {"acceptedByCommand", accepted_by_command},
      {"violations", violation ? 1 : 0},
      {"seconds", seconds},
      {"maxStepMs", max_step_ms},
      {"finalDigest", final_digest},
      {"errors", errors},
      {"verdict", passed() ? "PASS" : "FAIL"},
  };
  if (violation) {
    json repro = json::array();
    for (const auto& s : violation->repro) repro.push_back(step_to_json(s));
    j["violation"] = {{"step", violation->step},
                      {"command", violation->command},
                      {"problems", violation->problems},
                      {"originalPrefix", violation->original_prefix},
                      {"reproLength", violation->repro.size()},
                      {"repro", repro}};
  }
  return j;
}

}  // namespace wow::sim
