#pragma once

#include <deque>
#include <mutex>
#include <string>
#include <vector>

#include "wow/sync/sync_server.hpp"

namespace wow::sync {

/// In-memory outbox: frames queue up until the owner drains them.
class QueueOutbox final : public Outbox {
 public:
  void send(std::string text) override {
    std::lock_guard lock(mu_);
    frames_.push_back(std::move(text));
  }
  void close() override {
    std::lock_guard lock(mu_);
    closed_ = true;
  }

  std::vector<std::string> drain() {
    std::lock_guard lock(mu_);
    std::vector<std::string> out(std::make_move_iterator(frames_.begin()),
                                 std::make_move_iterator(frames_.end()));
    frames_.clear();
    return out;
  }
  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }

 private:
  mutable std::mutex mu_;
  std::deque<std::string> frames_;
  bool closed_ = false;
};

}  // namespace wow::sync
