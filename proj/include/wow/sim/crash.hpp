#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "wow/common/result.hpp"

namespace wow::sim {

struct CrashReplayOptions {
  std::uint64_t seed = 137;
  /// Server version at which the process is killed.
  std::uint64_t kill_after = 137;
  /// Flip a byte inside the last journal record before restoring.
  bool corrupt_tail = false;
  int clients = 3;
  /// Snapshot cadence of the killed server, small enough to be exercised.
  std::uint64_t snapshot_every_events = 50;
};

struct CrashReplayReport {
  std::uint64_t killed_at = 0;
  std::uint64_t expected_version = 0;
  std::uint64_t restored_version = 0;
  std::uint64_t replayed_events = 0;
  std::uint64_t truncated_records = 0;
  bool restored_equals_expected = false;
  /// After restore, clients reconnect, keep working and converge.
  bool resumed = false;
  std::string detail;

  bool passed() const { return restored_equals_expected && resumed; }
  nlohmann::json to_json() const;
};

/// Drives random commands through an in-process server until it reaches
/// `kill_after`, kills it without any shutdown work and restores from the
/// journal and snapshots left behind. With `corrupt_tail` the expected state
/// is the one just before the last event.
Result<CrashReplayReport> crash_replay(const CrashReplayOptions& options);

}  // namespace wow::sim
