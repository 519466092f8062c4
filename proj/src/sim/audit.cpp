#include "wow/sim/audit.hpp"

#include <set>

#include "wow/session/reducer.hpp"

namespace wow::sim {

using nlohmann::json;

namespace {

std::multiset<std::string> wall_contents(const VirtualWall& wall) {
  std::multiset<std::string> out;
  for (const auto& c : wall.hidden_stack) out.insert(c.str());
  for (const auto& v : wall.viewports) {
    if (v.content) out.insert(v.content->str());
  }
  return out;
}

std::string join(const std::multiset<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return "{" + out + "}";
}

std::string escape_pointer(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::optional<std::string> diff_at(const json& a, const json& b, const std::string& path) {
  // Numbers compare by value: parsing yields unsigned where code built signed.
  if (a.type() != b.type() && !(a.is_number() && b.is_number())) return path.empty() ? "/" : path;
  if (a.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      const std::string child = path + "/" + escape_pointer(it.key());
      if (!b.contains(it.key())) return child;
      if (auto d = diff_at(it.value(), b[it.key()], child)) return d;
    }
    for (auto it = b.begin(); it != b.end(); ++it) {
      if (!a.contains(it.key())) return path + "/" + escape_pointer(it.key());
    }
    return std::nullopt;
  }
  if (a.is_array()) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (auto d = diff_at(a[i], b[i], path + "/" + std::to_string(i))) return d;
    }
    if (a.size() != b.size()) return path + "/" + std::to_string(n);
    return std::nullopt;
  }
  if (a != b) return path.empty() ? "/" : path;
  return std::nullopt;
}

}  // namespace

std::vector<std::string> audit_transition(const Session& before, const Command& command,
                                          const Session& after) {
  std::vector<std::string> problems = audit_session(after);
  if (!is_layout_command(command)) return problems;

  // Geometry edits only ever touch the wall they target, which is the active
  // one when none is named.
  for (const auto& old_wall : before.walls) {
    const VirtualWall* new_wall = after.find_wall(old_wall.id);
    if (!new_wall) {
      problems.push_back("layout command removed wall " + old_wall.id.str());
      continue;
    }
    const auto was = wall_contents(old_wall);
    const auto now = wall_contents(*new_wall);
    if (was == now) continue;
    const auto* insert = std::get_if<InsertView>(&command);
    if (insert && insert->content && now.size() == was.size() + 1) {
      auto expected = was;
      expected.insert(insert->content->str());
      if (expected == now) continue;
    }
    problems.push_back("content not conserved on " + old_wall.id.str() + " by " +
                       std::string(command_name(command)) + ": " + join(was) + " -> " + join(now));
  }
  return problems;
}

std::optional<std::string> first_difference(const json& a, const json& b) {
  return diff_at(a, b, "");
}

std::string event_log_text(const std::vector<Event>& events) {
  std::string out;
  for (const auto& e : events) out += event_to_json(e).dump() + "\n";
  return out;
}

}  // namespace wow::sim
