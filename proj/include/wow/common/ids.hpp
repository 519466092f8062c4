#pragma once

#include <compare>
#include <functional>
#include <string>
#include <utility>

#include <json.hpp>

namespace wow {

/// Opaque string identifier tagged by the entity it names, so a wall id
/// cannot be passed where a viewport id is expected.
template <class Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

 private:
  std::string value_;
};

using SessionId = Id<struct SessionTag>;
using WallId = Id<struct WallTag>;
using ViewportId = Id<struct ViewportTag>;
using ContentId = Id<struct ContentTag>;
using NoteId = Id<struct NoteTag>;
using ParticipantId = Id<struct ParticipantTag>;

template <class Tag>
void to_json(nlohmann::json& j, const Id<Tag>& id) {
  j = id.str();
}

template <class Tag>
void from_json(const nlohmann::json& j, Id<Tag>& id) {
  id = Id<Tag>(j.get<std::string>());
}

}  // namespace wow

template <class Tag>
struct std::hash<wow::Id<Tag>> {
  std::size_t operator()(const wow::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
