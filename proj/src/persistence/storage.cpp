#include "wow/persistence/storage.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace wow::persistence {
namespace fs = std::filesystem;

namespace {

Error io_error(const std::string& what, const fs::path& path) {
  return make_error(Errc::kStorageUnavailable,
                    what + " " + path.string() + ": " + std::strerror(errno));
}

/// RAII file descriptor.
class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

 private:
  int fd_;
};

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

void sync_dir(const fs::path& dir) {
  Fd fd(::open(dir.c_str(), O_RDONLY | O_DIRECTORY));
  if (fd.valid()) ::fsync(fd.get());
}

bool valid_key(const std::string& key) {
  if (key.empty() || key.front() == '/') return false;
  std::size_t start = 0;
  while (start <= key.size()) {
    const auto end = std::min(key.find('/', start), key.size());
    const auto part = std::string_view(key).substr(start, end - start);
    if (part.empty() || part == "." || part == "..") return false;
    start = end + 1;
  }
  return true;
}

}  // namespace

FileStorage::FileStorage(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
}

fs::path FileStorage::path_for(const std::string& key) const { return root_ / key; }

Status FileStorage::append(const std::string& key, std::string_view data) {
  if (!valid_key(key)) return make_error(Errc::kStorageUnavailable, "bad key " + key);
  const fs::path path = path_for(key);
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  const bool created = !fs::exists(path, ec);
  Fd fd(::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644));
  if (!fd.valid()) return io_error("open", path);
  if (!write_all(fd.get(), data)) return io_error("write", path);
  if (::fsync(fd.get()) != 0) return io_error("fsync", path);
  if (created) sync_dir(path.parent_path());
  return ok_status();
}

Status FileStorage::write_atomic(const std::string& key, std::string_view data) {
  if (!valid_key(key)) return make_error(Errc::kStorageUnavailable, "bad key " + key);
  const fs::path path = path_for(key);
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    Fd fd(::open(tmp.c_str(), O_WRONLY | O_TRUNC | O_CREAT | O_CLOEXEC, 0644));
    if (!fd.valid()) return io_error("open", tmp);
    if (!write_all(fd.get(), data)) return io_error("write", tmp);
    if (::fsync(fd.get()) != 0) return io_error("fsync", tmp);
  }
  if (::rename(tmp.c_str(), path.c_str()) != 0) return io_error("rename", path);
  sync_dir(path.parent_path());
  return ok_status();
}

Result<std::string> FileStorage::read(const std::string& key) const {
  if (!valid_key(key)) return make_error(Errc::kNoSuchEntity, key);
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return make_error(Errc::kNoSuchEntity, key);
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) return make_error(Errc::kStorageUnavailable, "read " + key);
  return std::move(out).str();
}

bool FileStorage::exists(const std::string& key) const {
  std::error_code ec;
  return valid_key(key) && fs::is_regular_file(path_for(key), ec);
}

Status FileStorage::remove(const std::string& key) {
  std::error_code ec;
  if (!valid_key(key)) return make_error(Errc::kStorageUnavailable, "bad key " + key);
  fs::remove(path_for(key), ec);
  if (ec) return make_error(Errc::kStorageUnavailable, ec.message());
  return ok_status();
}

std::vector<std::string> FileStorage::list(const std::string& prefix) const {
  std::vector<std::string> keys;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(root_, ec);
       !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    std::string key = fs::relative(it->path(), root_).generic_string();
    if (key.ends_with(".tmp")) continue;
    if (key.starts_with(prefix)) keys.push_back(std::move(key));
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

Status MemoryStorage::append(const std::string& key, std::string_view data) {
  std::lock_guard lock(mu_);
  data_[key].append(data);
  return ok_status();
}

Status MemoryStorage::write_atomic(const std::string& key, std::string_view data) {
  std::lock_guard lock(mu_);
  data_[key] = std::string(data);
  return ok_status();
}

Result<std::string> MemoryStorage::read(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = data_.find(key);
  if (it == data_.end()) return make_error(Errc::kNoSuchEntity, key);
  return it->second;
}

bool MemoryStorage::exists(const std::string& key) const {
  std::lock_guard lock(mu_);
  return data_.contains(key);
}

Status MemoryStorage::remove(const std::string& key) {
  std::lock_guard lock(mu_);
  data_.erase(key);
  return ok_status();
}

std::vector<std::string> MemoryStorage::list(const std::string& prefix) const {
  std::lock_guard lock(mu_);
  std::vector<std::string> keys;
  for (auto it = data_.lower_bound(prefix); it != data_.end() && it->first.starts_with(prefix);
       ++it) {
    keys.push_back(it->first);
  }
  return keys;
}

void MemoryStorage::poke(const std::string& key, std::string value) {
  std::lock_guard lock(mu_);
  data_[key] = std::move(value);
}

bool FaultyStorage::should_fail() {
  if (failing_) return true;
  int budget = budget_.load();
  while (budget >= 0) {
    if (budget == 0) return true;
    if (budget_.compare_exchange_weak(budget, budget - 1)) return false;
  }
  return false;
}

Status FaultyStorage::append(const std::string& key, std::string_view data) {
  if (should_fail()) return make_error(Errc::kStorageUnavailable, "injected failure");
  return inner_->append(key, data);
}

Status FaultyStorage::write_atomic(const std::string& key, std::string_view data) {
  if (should_fail()) return make_error(Errc::kStorageUnavailable, "injected failure");
  return inner_->write_atomic(key, data);
}

Status FaultyStorage::remove(const std::string& key) {
  if (should_fail()) return make_error(Errc::kStorageUnavailable, "injected failure");
  return inner_->remove(key);
}

}  // namespace wow::persistence
