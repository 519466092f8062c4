#pragma once

#include <cstdint>
#include <variant>

#include "wow/session/command.hpp"
#include "wow/sim/rng.hpp"

namespace wow::sim {

/// Relative frequency of each command family.
struct GeneratorWeights {
  int layout = 50;
  int content = 20;
  int notes = 15;
  int walls = 10;
  int churn = 5;

  static GeneratorWeights layout_only() { return {100, 0, 0, 0, 0}; }
};

/// A participant leaves and comes back. How that is carried out depends on
/// the target: a reconnect over the wire, or Join/Leave on a bare reducer.
struct Churn {
  friend bool operator==(const Churn&, const Churn&) = default;
};

using Step = std::variant<Command, Churn>;

/// Produces plausible commands against the caller's current view of the
/// session. Most are valid for that view; stale views and the occasional
/// deliberately bad reference exercise the reject paths.
class CommandGenerator {
 public:
  CommandGenerator(std::uint64_t seed, GeneratorWeights weights = {});

  Step next(const Session& view, const ParticipantId& actor);

  Command layout_command(const Session& view);
  Command content_command(const Session& view, const ParticipantId& actor);
  Command note_command(const Session& view, const ParticipantId& actor);
  Command wall_command(const Session& view);

  Rng& rng() { return rng_; }

 private:
  ViewportId pick_viewport(const VirtualWall& wall);
  std::optional<ContentId> pick_content(const Session& view);

  Rng rng_;
  GeneratorWeights weights_;
  std::uint64_t counter_ = 0;
};

std::string step_name(const Step& step);
nlohmann::json step_to_json(const Step& step);

/// Descriptor for a synthetic content item; file kinds get a fake blob hash.
ContentDescriptor synthetic_descriptor(Rng& rng, std::uint64_t n, const ParticipantId& owner);

}  // namespace wow::sim
