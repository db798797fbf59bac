#pragma once

// Referential games: a one-step Lewis signalling game and a gridworld
// supermarket. Dynamics are deterministic given the action sequence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "cla/error.hpp"
#include "json.hpp"

namespace cla {

using json = nlohmann::json;

inline constexpr std::size_t kDefaultEnumerationCap = 100000;

enum class GameKind { lewis, supermarket };

struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct RewardParams {
  double correct = 1.0;         // lewis
  double step_penalty = -0.05;  // supermarket
  double item = 1.0;            // supermarket
  friend bool operator==(const RewardParams&, const RewardParams&) = default;
};

struct LewisLayout {
  std::vector<std::string> candidates;
  int target = 0;
  friend bool operator==(const LewisLayout&, const LewisLayout&) = default;
};

struct SupermarketLayout {
  int width = 1;
  int height = 1;
  std::vector<Cell> items;         // item id = index
  std::vector<int> shopping_list;  // item ids to collect
  Cell start;
  friend bool operator==(const SupermarketLayout&, const SupermarketLayout&) = default;
};

/// Supermarket environment actions, in id order.
enum SupermarketAction : int { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3, kPick = 4 };

/// Mutable simulation state. `collected` holds sorted item ids.
struct GameState {
  int t = 0;
  bool ended = false;
  Cell agent;
  std::vector<int> collected;
  int picked = -1;
  friend bool operator==(const GameState&, const GameState&) = default;
};

struct StepOutcome {
  GameState next_state;
  double reward = 0.0;
  std::string observation;
};

struct GameSpec {
  GameKind kind = GameKind::lewis;
  std::vector<std::string> vocab;
  int max_msg_len = 1;
  int horizon = 1;
  double gamma = 1.0;
  RewardParams rewards;
  LewisLayout lewis;
  SupermarketLayout supermarket;

  friend bool operator==(const GameSpec&, const GameSpec&) = default;

  std::size_t num_actions() const {
    return kind == GameKind::lewis ? lewis.candidates.size() : 5;
  }

  std::string action_name(int a) const {
    if (kind == GameKind::lewis) return "pick(" + std::to_string(a) + ")";
    static const char* names[] = {"N", "E", "S", "W", "pick"};
    return (a >= 0 && a < 5) ? names[a] : "?";
  }

  /// Action used by a listener that has nothing better to do.
  int idle_action() const { return kind == GameKind::lewis ? 0 : kPick; }

  int token_id(const std::string& token) const {
    auto it = std::find(vocab.begin(), vocab.end(), token);
    require(it != vocab.end(), ErrorCode::invalid_argument, "unknown token '" + token + "'");
    return static_cast<int>(it - vocab.begin());
  }

  void validate(std::size_t cap = kDefaultEnumerationCap) const;
  json to_json() const;
  static GameSpec from_json(const json& j);
  /// Stable 64-bit FNV-1a digest of the canonical JSON form, as 16 hex digits.
  std::string fingerprint() const;
};

namespace detail {

/// b^e with saturation at cap + 1, so callers can compare against cap safely.
inline std::size_t capped_pow(std::size_t b, std::size_t e, std::size_t cap) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) {
    if (b != 0 && r > (cap + 1) / b) return cap + 1;
    r *= b;
  }
  return r;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require(j.is_object(), ErrorCode::parse_error, where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    require(ok, ErrorCode::parse_error, "unknown field '" + it.key() + "' in " + where);
  }
}

inline const json& field(const json& j, const char* name, const std::string& where) {
  auto it = j.find(name);
  require(it != j.end(), ErrorCode::parse_error, "missing field '" + std::string(name) + "' in " + where);
  return *it;
}

inline bool inside(const SupermarketLayout& l, Cell c) {
  return c.x >= 0 && c.y >= 0 && c.x < l.width && c.y < l.height;
}

}  // namespace detail

inline void GameSpec::validate(std::size_t cap) const {
  require(!vocab.empty(), ErrorCode::invalid_argument, "vocab must be non-empty");
  require(std::set<std::string>(vocab.begin(), vocab.end()).size() == vocab.size(), ErrorCode::invalid_argument,
          "vocab tokens must be distinct");
  for (const auto& t : vocab)
    require(!t.empty() && t.find(' ') == std::string::npos, ErrorCode::invalid_argument,
            "vocab tokens must be non-empty and contain no spaces");
  require(max_msg_len >= 1, ErrorCode::invalid_argument, "max_msg_len must be positive");
  require(detail::capped_pow(vocab.size(), static_cast<std::size_t>(max_msg_len), cap) <= cap,
          ErrorCode::enumeration_cap,
          "|vocab|^max_msg_len exceeds the enumeration cap of " + std::to_string(cap));
  require(horizon >= 0, ErrorCode::invalid_argument, "horizon must be non-negative");
  require(gamma >= 0.0 && gamma <= 1.0, ErrorCode::invalid_argument, "gamma must lie in [0, 1]");
  if (kind == GameKind::lewis) {
    require(horizon == 1, ErrorCode::invalid_argument, "lewis games have horizon exactly 1");
    require(!lewis.candidates.empty(), ErrorCode::invalid_argument, "lewis game needs candidates");
    require(lewis.target >= 0 && lewis.target < static_cast<int>(lewis.candidates.size()),
            ErrorCode::invalid_argument, "lewis target index out of range");
  } else {
    const auto& l = supermarket;
    require(l.width >= 1 && l.height >= 1, ErrorCode::invalid_argument, "grid must be at least 1x1");
    require(detail::inside(l, l.start), ErrorCode::invalid_argument, "start cell outside grid");
    for (const auto& c : l.items) require(detail::inside(l, c), ErrorCode::invalid_argument, "item cell outside grid");
    require(std::set<Cell>(l.items.begin(), l.items.end()).size() == l.items.size(), ErrorCode::invalid_argument,
            "item cells must be distinct");
    std::set<int> seen;
    for (int id : l.shopping_list) {
      require(id >= 0 && id < static_cast<int>(l.items.size()), ErrorCode::invalid_argument,
              "shopping list names an unknown item");
      require(seen.insert(id).second, ErrorCode::invalid_argument, "shopping list repeats an item");
    }
  }
}

inline json GameSpec::to_json() const {
  json j;
  j["kind"] = kind == GameKind::lewis ? "lewis" : "supermarket";
  j["vocab"] = vocab;
  j["max_msg_len"] = max_msg_len;
  j["horizon"] = horizon;
  j["gamma"] = gamma;
  if (kind == GameKind::lewis) {
    j["reward_params"] = {{"correct", rewards.correct}};
    j["layout"] = {{"candidates", lewis.candidates}, {"target", lewis.target}};
  } else {
    const auto& l = supermarket;
    json items = json::array();
    for (const auto& c : l.items) items.push_back({c.x, c.y});
    j["reward_params"] = {{"step_penalty", rewards.step_penalty}, {"item", rewards.item}};
    j["layout"] = {{"width", l.width},
                   {"height", l.height},
                   {"items", items},
                   {"shopping_list", l.shopping_list},
                   {"start", {l.start.x, l.start.y}}};
  }
  return j;
}

inline GameSpec GameSpec::from_json(const json& j) {
  const std::string where = "game spec";
  detail::reject_unknown(j, {"kind", "vocab", "max_msg_len", "horizon", "gamma", "reward_params", "layout"}, where);
  GameSpec g;
  try {
    const auto kind = detail::field(j, "kind", where).get<std::string>();
    if (kind == "lewis") {
      g.kind = GameKind::lewis;
    } else if (kind == "supermarket") {
      g.kind = GameKind::supermarket;
    } else {
      fail(ErrorCode::parse_error, "unknown game kind '" + kind + "'");
    }
    g.vocab = detail::field(j, "vocab", where).get<std::vector<std::string>>();
    g.max_msg_len = detail::field(j, "max_msg_len", where).get<int>();
    g.horizon = detail::field(j, "horizon", where).get<int>();
    g.gamma = detail::field(j, "gamma", where).get<double>();
    const auto& rp = detail::field(j, "reward_params", where);
    const auto& lay = detail::field(j, "layout", where);
    if (g.kind == GameKind::lewis) {
      detail::reject_unknown(rp, {"correct"}, "reward_params");
      if (rp.contains("correct")) g.rewards.correct = rp["correct"].get<double>();
      detail::reject_unknown(lay, {"candidates", "target"}, "layout");
      g.lewis.candidates = detail::field(lay, "candidates", "layout").get<std::vector<std::string>>();
      g.lewis.target = detail::field(lay, "target", "layout").get<int>();
    } else {
      detail::reject_unknown(rp, {"step_penalty", "item"}, "reward_params");
      if (rp.contains("step_penalty")) g.rewards.step_penalty = rp["step_penalty"].get<double>();
      if (rp.contains("item")) g.rewards.item = rp["item"].get<double>();
      detail::reject_unknown(lay, {"width", "height", "items", "shopping_list", "start"}, "layout");
      auto& l = g.supermarket;
      l.width = detail::field(lay, "width", "layout").get<int>();
      l.height = detail::field(lay, "height", "layout").get<int>();
      for (const auto& c : detail::field(lay, "items", "layout")) {
        auto xy = c.get<std::vector<int>>();
        require(xy.size() == 2, ErrorCode::parse_error, "item cells are [x, y] pairs");
        l.items.push_back({xy[0], xy[1]});
      }
      l.shopping_list = detail::field(lay, "shopping_list", "layout").get<std::vector<int>>();
      auto s = detail::field(lay, "start", "layout").get<std::vector<int>>();
      require(s.size() == 2, ErrorCode::parse_error, "start is an [x, y] pair");
      l.start = {s[0], s[1]};
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("game spec: ") + e.what());
  }
  g.validate();
  return g;
}

inline std::string GameSpec::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a64(to_json().dump())));
  return buf;
}

// ---------------------------------------------------------------------------
// Dynamics

inline GameState initial_state(const GameSpec& game) {
  GameState s;
  if (game.kind == GameKind::supermarket) s.agent = game.supermarket.start;
  return s;
}

inline bool is_terminal(const GameSpec& game, const GameState& s) { return s.ended || s.t >= game.horizon; }

/// Lewis: "start" or "picked:k". Supermarket: "x,y|ids" with sorted collected ids.
inline std::string state_digest(const GameSpec& game, const GameState& s) {
  if (game.kind == GameKind::lewis) return s.picked < 0 ? "start" : "picked:" + std::to_string(s.picked);
  std::string d = std::to_string(s.agent.x) + "," + std::to_string(s.agent.y) + "|";
  for (std::size_t i = 0; i < s.collected.size(); ++i) {
    if (i) d += ",";
    d += std::to_string(s.collected[i]);
  }
  return d;
}

inline StepOutcome step(const GameSpec& game, const GameState& state, int action) {
  require(action >= 0 && action < static_cast<int>(game.num_actions()), ErrorCode::invalid_action,
          "action id " + std::to_string(action) + " is not in the environment action set");
  require(!is_terminal(game, state), ErrorCode::terminal_state, "cannot step a terminal state");
  StepOutcome out;
  GameState next = state;
  next.t += 1;
  if (game.kind == GameKind::lewis) {
    next.picked = action;
    next.ended = true;
    out.reward = action == game.lewis.target ? game.rewards.correct : 0.0;
  } else {
    const auto& l = game.supermarket;
    out.reward = game.rewards.step_penalty;
    switch (action) {
      case kNorth: next.agent.y = std::max(0, next.agent.y - 1); break;
      case kSouth: next.agent.y = std::min(l.height - 1, next.agent.y + 1); break;
      case kEast: next.agent.x = std::min(l.width - 1, next.agent.x + 1); break;
      case kWest: next.agent.x = std::max(0, next.agent.x - 1); break;
      case kPick:
        for (int id : l.shopping_list) {
          if (l.items[static_cast<std::size_t>(id)] != next.agent) continue;
          if (std::binary_search(next.collected.begin(), next.collected.end(), id)) continue;
          next.collected.insert(std::upper_bound(next.collected.begin(), next.collected.end(), id), id);
          out.reward = game.rewards.item;
          break;
        }
        break;
    }
    if (!l.shopping_list.empty() && next.collected.size() == l.shopping_list.size()) next.ended = true;
  }
  out.observation = state_digest(game, next);
  out.next_state = std::move(next);
  return out;
}

// ---------------------------------------------------------------------------
// Factories for the games used throughout tests and examples.

inline std::vector<std::string> letter_vocab(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(std::string(1, static_cast<char>('a' + i)));
  return v;
}

/// Lewis game with `n` candidates. Default vocabulary is the first n letters.
inline GameSpec make_lewis(std::size_t n, int target = 0, std::vector<std::string> vocab = {}, int max_msg_len = 1) {
  GameSpec g;
  g.kind = GameKind::lewis;
  g.vocab = vocab.empty() ? letter_vocab(n) : std::move(vocab);
  g.max_msg_len = max_msg_len;
  g.horizon = 1;
  g.gamma = 1.0;
  for (std::size_t i = 0; i < n; ++i) g.lewis.candidates.push_back("item" + std::to_string(i));
  g.lewis.target = target;
  g.validate();
  return g;
}

inline GameSpec make_supermarket(int width, int height, std::vector<Cell> items, std::vector<int> shopping_list,
                                 Cell start, int horizon, std::vector<std::string> vocab, int max_msg_len,
                                 double gamma = 0.95) {
  GameSpec g;
  g.kind = GameKind::supermarket;
  g.vocab = std::move(vocab);
  g.max_msg_len = max_msg_len;
  g.horizon = horizon;
  g.gamma = gamma;
  g.supermarket = {width, height, std::move(items), std::move(shopping_list), start};
  g.validate();
  return g;
}

}  // namespace cla
