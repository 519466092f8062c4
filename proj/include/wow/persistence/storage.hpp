#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "wow/common/result.hpp"

namespace wow::persistence {

/// Flat key-value store with '/'-separated keys. Every mutating call is
/// durable when it returns ok; failures map to StorageUnavailable.
class Storage {
 public:
  virtual ~Storage() = default;

  virtual Status append(const std::string& key, std::string_view data) = 0;
  /// Replaces the value as a whole; readers see either the old or the new value.
  virtual Status write_atomic(const std::string& key, std::string_view data) = 0;
  /// NoSuchEntity when the key is absent.
  virtual Result<std::string> read(const std::string& key) const = 0;
  virtual bool exists(const std::string& key) const = 0;
  virtual Status remove(const std::string& key) = 0;
  /// Keys starting with `prefix`, sorted.
  virtual std::vector<std::string> list(const std::string& prefix) const = 0;
};

/// Plain files under a root directory, fsynced on every write.
class FileStorage final : public Storage {
 public:
  explicit FileStorage(std::filesystem::path root);

  Status append(const std::string& key, std::string_view data) override;
  Status write_atomic(const std::string& key, std::string_view data) override;
  Result<std::string> read(const std::string& key) const override;
  bool exists(const std::string& key) const override;
  Status remove(const std::string& key) override;
  std::vector<std::string> list(const std::string& prefix) const override;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path root_;
};

class MemoryStorage final : public Storage {
 public:
  Status append(const std::string& key, std::string_view data) override;
  Status write_atomic(const std::string& key, std::string_view data) override;
  Result<std::string> read(const std::string& key) const override;
  bool exists(const std::string& key) const override;
  Status remove(const std::string& key) override;
  std::vector<std::string> list(const std::string& prefix) const override;

  /// Direct access for fault injection in tests.
  void poke(const std::string& key, std::string value);

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> data_;
};

/// Wraps another storage and fails writes on demand.
class FaultyStorage final : public Storage {
 public:
  explicit FaultyStorage(std::shared_ptr<Storage> inner) : inner_(std::move(inner)) {}

  /// Writes fail while set.
  void set_failing(bool failing) { failing_ = failing; }
  /// Lets `n` more writes through, then fails all following ones.
  void fail_after(int n) { budget_ = n; }

  Status append(const std::string& key, std::string_view data) override;
  Status write_atomic(const std::string& key, std::string_view data) override;
  Result<std::string> read(const std::string& key) const override { return inner_->read(key); }
  bool exists(const std::string& key) const override { return inner_->exists(key); }
  Status remove(const std::string& key) override;
  std::vector<std::string> list(const std::string& prefix) const override {
    return inner_->list(prefix);
  }

 private:
  bool should_fail();

  std::shared_ptr<Storage> inner_;
  std::atomic<bool> failing_{false};
  std::atomic<int> budget_{-1};
};

}  // namespace wow::persistence
