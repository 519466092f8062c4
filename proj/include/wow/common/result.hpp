#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace wow {

/// Typed failure reasons. The names returned by errc_name() are the wire
/// spelling used in Reject payloads and HTTP error bodies.
enum class Errc {
  // layout
  kUnsupportedPresetCount,
  kRejectedRect,
  kNoPlacementAvailable,
  kStaleCandidate,
  kInternalGeometryError,
  kNoSuchSlot,
  kAlreadyMaximized,
  kNotMaximized,
  kNothingToHide,
  kWallMaximized,
  kInvalidGrid,
  // session
  kInvalidName,
  kNoSuchEntity,
  kInvalidContent,
  kEmptyNote,
  kInvalidViewState,
  kContentAlreadyVisible,
  kLastWall,
  kForbidden,
  // protocol
  kMalformed,
  kAuthFailed,
  kNoSuchSession,
  kUnsupportedProtocol,
  // storage
  kJournalGap,
  kStorageUnavailable,
  kRestoreFailed,
  kCorrupt,
  // harness
  kConnectFailed,
};

std::string_view errc_name(Errc code);
std::optional<Errc> errc_from_name(std::string_view name);

struct Error {
  Errc code;
  std::string detail;

  std::string to_string() const;
};

inline Error make_error(Errc code, std::string detail = {}) {
  return Error{code, std::move(detail)};
}

class BadResultAccess : public std::logic_error {
 public:
  explicit BadResultAccess(const Error& e)
      : std::logic_error("result holds error: " + e.to_string()) {}
};

template <class T>
class [[nodiscard]] Result {
 public:
  Result(T value) : v_(std::in_place_index<0>, std::move(value)) {}  // NOLINT
  Result(Error error) : v_(std::in_place_index<1>, std::move(error)) {}  // NOLINT

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T& value() & {
    check();
    return std::get<0>(v_);
  }
  const T& value() const& {
    check();
    return std::get<0>(v_);
  }
  T&& value() && {
    check();
    return std::get<0>(std::move(v_));
  }

  const Error& error() const { return std::get<1>(v_); }

  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }
  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }

 private:
  void check() const {
    if (!ok()) throw BadResultAccess(std::get<1>(v_));
  }

  std::variant<T, Error> v_;
};

using Status = Result<std::monostate>;

inline Status ok_status() { return std::monostate{}; }

}  // namespace wow
