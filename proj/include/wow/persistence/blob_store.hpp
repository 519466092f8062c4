#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "wow/persistence/storage.hpp"

namespace wow::persistence {

struct BlobInfo {
  std::string hash;  // sha256 hex of the bytes
  std::string media_type;
  std::uint64_t size = 0;
};

struct Blob {
  BlobInfo info;
  std::string bytes;
};

/// Content-addressed file store. Identical bytes are stored once.
class BlobStore {
 public:
  explicit BlobStore(std::shared_ptr<Storage> storage) : storage_(std::move(storage)) {}

  Result<BlobInfo> put(std::string_view bytes, const std::string& media_type);
  /// NoSuchEntity for unknown or malformed hashes.
  Result<Blob> get(const std::string& hash) const;
  bool contains(const std::string& hash) const;

 private:
  std::shared_ptr<Storage> storage_;
};

bool is_blob_hash(std::string_view text);

}  // namespace wow::persistence
