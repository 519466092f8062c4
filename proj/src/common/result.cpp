#include "wow/common/result.hpp"

#include <array>

namespace wow {
namespace {

struct Entry {
  Errc code;
  std::string_view name;
};

constexpr std::array kNames{
    Entry{Errc::kUnsupportedPresetCount, "UnsupportedPresetCount"},
    Entry{Errc::kRejectedRect, "RejectedRect"},
    Entry{Errc::kNoPlacementAvailable, "NoPlacementAvailable"},
    Entry{Errc::kStaleCandidate, "StaleCandidate"},
    Entry{Errc::kInternalGeometryError, "InternalGeometryError"},
    Entry{Errc::kNoSuchSlot, "NoSuchSlot"},
    Entry{Errc::kAlreadyMaximized, "AlreadyMaximized"},
    Entry{Errc::kNotMaximized, "NotMaximized"},
    Entry{Errc::kNothingToHide, "NothingToHide"},
    Entry{Errc::kWallMaximized, "WallMaximized"},
    Entry{Errc::kInvalidGrid, "InvalidGrid"},
    Entry{Errc::kInvalidName, "InvalidName"},
    Entry{Errc::kNoSuchEntity, "NoSuchEntity"},
    Entry{Errc::kInvalidContent, "InvalidContent"},
    Entry{Errc::kEmptyNote, "EmptyNote"},
    Entry{Errc::kInvalidViewState, "InvalidViewState"},
    Entry{Errc::kContentAlreadyVisible, "ContentAlreadyVisible"},
    Entry{Errc::kLastWall, "LastWall"},
    Entry{Errc::kForbidden, "Forbidden"},
    Entry{Errc::kMalformed, "Malformed"},
    Entry{Errc::kAuthFailed, "AuthFailed"},
    Entry{Errc::kNoSuchSession, "NoSuchSession"},
    Entry{Errc::kUnsupportedProtocol, "UnsupportedProtocol"},
    Entry{Errc::kJournalGap, "JournalGap"},
    Entry{Errc::kStorageUnavailable, "StorageUnavailable"},
    Entry{Errc::kRestoreFailed, "RestoreFailed"},
    Entry{Errc::kCorrupt, "Corrupt"},
    Entry{Errc::kConnectFailed, "ConnectFailed"},
};

}  // namespace

std::string_view errc_name(Errc code) {
  for (const auto& e : kNames) {
    if (e.code == code) return e.name;
  }
  return "Unknown";
}

std::optional<Errc> errc_from_name(std::string_view name) {
  for (const auto& e : kNames) {
    if (e.name == name) return e.code;
  }
  return std::nullopt;
}

std::string Error::to_string() const {
  std::string out(errc_name(code));
  if (!detail.empty()) {
    out += ": ";
    out += detail;
  }
  return out;
}

}  // namespace wow
