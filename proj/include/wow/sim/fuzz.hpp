#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wow/sim/generator.hpp"
#include "wow/sim/world.hpp"

namespace wow::sim {

/// Deliberate reducer bugs, used to check that the fuzzer notices them.
enum class Mutation { kNone, kSwapDropsContent };

struct FuzzOptions {
  std::uint64_t seed = 1;
  std::uint64_t steps = 10'000;
  int grid_cols = 12;
  int grid_rows = 12;
  GeneratorWeights weights;
  /// Contents registered before the first step, so layout-only runs have
  /// something to conserve.
  int initial_contents = 6;
  bool audit = true;
  /// Cap on replays spent shrinking a failure.
  int shrink_budget = 4000;
};

/// Something commands can be applied to: the bare reducer or a server.
class FuzzTarget {
 public:
  virtual ~FuzzTarget() = default;
  /// Fresh session plus the fixed setup. Returns the starting state.
  virtual Result<Session> reset(const FuzzOptions& options) = 0;
  /// The new state when accepted, the rejection otherwise.
  virtual Result<Session> submit(const Command& command) = 0;
  virtual Result<Session> churn() = 0;
  virtual const Session& state() const = 0;
  virtual ParticipantId actor() const = 0;
  virtual std::string name() const = 0;
};

std::unique_ptr<FuzzTarget> make_direct_target(Mutation mutation = Mutation::kNone);
/// Drives a server through the wire protocol as a single client. The factory
/// is called on every reset.
std::unique_ptr<FuzzTarget> make_wire_target(std::function<std::unique_ptr<World>()> world_factory);

struct FuzzViolation {
  std::uint64_t step = 0;  // 0-based index of the failing step
  std::string command;
  std::vector<std::string> problems;
  std::vector<Step> repro;  // shrunk
  std::uint64_t original_prefix = 0;
};

struct FuzzReport {
  std::string target;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::map<std::string, std::uint64_t> rejects_by_reason;
  std::map<std::string, std::uint64_t> accepted_by_command;
  std::optional<FuzzViolation> violation;
  std::vector<std::string> errors;
  double seconds = 0;
  double max_step_ms = 0;
  std::string final_digest;

  bool passed() const { return !violation && errors.empty(); }
  nlohmann::json to_json() const;
};

FuzzReport fuzz(FuzzTarget& target, const FuzzOptions& options);

/// Replays `steps` on a fresh target. Returns the index and problems of the
/// first invariant violation, if any.
std::optional<std::pair<std::size_t, std::vector<std::string>>> first_violation(
    FuzzTarget& target, const FuzzOptions& options, const std::vector<Step>& steps);

/// Smallest prefix that still fails (bisection), then delta debugging over
/// single steps and chunks. `steps` must fail to begin with.
std::vector<Step> shrink(FuzzTarget& target, const FuzzOptions& options, std::vector<Step> steps);

}  // namespace wow::sim
