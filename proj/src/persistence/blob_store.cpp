#include "wow/persistence/blob_store.hpp"

#include <algorithm>

#include <json.hpp>

#include "wow/persistence/sha256.hpp"

namespace wow::persistence {
namespace {

std::string data_key(const std::string& hash) { return "blobs/" + hash; }
std::string meta_key(const std::string& hash) { return "blobs/" + hash + ".meta"; }

}  // namespace

bool is_blob_hash(std::string_view text) {
  return text.size() == 64 && std::all_of(text.begin(), text.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

Result<BlobInfo> BlobStore::put(std::string_view bytes, const std::string& media_type) {
  BlobInfo info{sha256_hex(bytes), media_type, bytes.size()};
  if (storage_->exists(meta_key(info.hash))) {
    if (auto stored = get(info.hash)) return stored->info;
  }
  if (auto st = storage_->write_atomic(data_key(info.hash), bytes); !st) return st.error();
  const nlohmann::json meta{{"mediaType", info.media_type}, {"size", info.size}};
  if (auto st = storage_->write_atomic(meta_key(info.hash), meta.dump()); !st) return st.error();
  return info;
}

Result<Blob> BlobStore::get(const std::string& hash) const {
  if (!is_blob_hash(hash)) return make_error(Errc::kNoSuchEntity, "blob " + hash);
  auto meta_text = storage_->read(meta_key(hash));
  if (!meta_text) return meta_text.error();
  auto bytes = storage_->read(data_key(hash));
  if (!bytes) return bytes.error();
  Blob blob;
  blob.info.hash = hash;
  blob.info.size = bytes->size();
  const auto meta = nlohmann::json::parse(*meta_text, nullptr, false);
  blob.info.media_type = meta.is_object() ? meta.value("mediaType", "application/octet-stream")
                                          : "application/octet-stream";
  blob.bytes = std::move(bytes).value();
  return blob;
}

bool BlobStore::contains(const std::string& hash) const {
  return is_blob_hash(hash) && storage_->exists(meta_key(hash));
}

}  // namespace wow::persistence
