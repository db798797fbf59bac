#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cla/edit_distance.hpp"
#include "cla/error.hpp"
#include "cla/game.hpp"

namespace cla {

struct Step {
  std::string state;  // digest of the state the action was taken in
  int action = 0;
  double reward = 0.0;
  friend bool operator==(const Step&, const Step&) = default;
};

/// A listener's realized state-action-reward sequence in one game.
struct Trajectory {
  std::string game;  // fingerprint of the generating GameSpec
  int horizon = 0;
  std::string origin;  // initial-state digest
  std::vector<Step> steps;
  std::string final_state;
  /// Initial digest plus the action-id sequence; injective within a game
  /// because dynamics are deterministic.
  std::string key;

  std::vector<int> actions() const {
    std::vector<int> a;
    a.reserve(steps.size());
    for (const auto& s : steps) a.push_back(s.action);
    return a;
  }

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

inline std::string canonical_key(const std::string& origin, std::span<const int> actions) {
  std::string k = origin + "/";
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) k += ".";
    k += std::to_string(actions[i]);
  }
  return k;
}

/// Incrementally records a trajectory while stepping a game.
class TrajectoryBuilder {
 public:
  explicit TrajectoryBuilder(const GameSpec& game)
      : game_(&game), state_(initial_state(game)) {
    traj_.game = game.fingerprint();
    traj_.horizon = game.horizon;
    traj_.origin = state_digest(game, state_);
  }

  const GameState& state() const { return state_; }
  bool done() const { return is_terminal(*game_, state_); }

  double push(int action) {
    auto out = step(*game_, state_, action);
    traj_.steps.push_back({state_digest(*game_, state_), action, out.reward});
    state_ = std::move(out.next_state);
    return out.reward;
  }

  Trajectory finish() const {
    Trajectory t = traj_;
    t.final_state = state_digest(*game_, state_);
    auto a = t.actions();
    t.key = canonical_key(t.origin, a);
    return t;
  }

 private:
  const GameSpec* game_;
  GameState state_;
  Trajectory traj_;
};

/// Rebuilds the trajectory produced by an action sequence from the initial state.
inline Trajectory replay(const GameSpec& game, std::span<const int> actions) {
  TrajectoryBuilder b(game);
  for (int a : actions) b.push(a);
  return b.finish();
}

/// Discounted return: sum_k gamma^k r_k.
inline double trajectory_return(const Trajectory& tau, double gamma) {
  require(gamma >= 0.0 && gamma <= 1.0, ErrorCode::invalid_argument, "gamma must lie in [0, 1]");
  double v = 0.0;
  double discount = 1.0;
  for (const auto& s : tau.steps) {
    v += discount * s.reward;
    discount *= gamma;
  }
  return v;
}

/// Normalized action edit distance. Both sequences are padded with an end
/// marker to the game horizon, which keeps the distance a metric when
/// trajectories terminate early.
inline double trajectory_distance(const Trajectory& t1, const Trajectory& t2) {
  require(t1.game == t2.game, ErrorCode::domain_mismatch, "trajectories come from different games");
  const std::size_t len = std::max({static_cast<std::size_t>(t1.horizon), t1.size(), t2.size()});
  auto padded = [len](const Trajectory& t) {
    auto a = t.actions();
    a.resize(len, -1);
    return a;
  };
  const auto a = padded(t1);
  const auto b = padded(t2);
  return normalized_edit_distance<int>(a, b);
}

/// Every feasible trajectory of `game`, deduplicated and sorted by canonical key.
inline std::vector<Trajectory> enumerate_trajectories(const GameSpec& game, std::size_t cap = kDefaultEnumerationCap) {
  const std::size_t branches = detail::capped_pow(game.num_actions(), static_cast<std::size_t>(game.horizon), cap);
  require(branches <= cap, ErrorCode::enumeration_cap,
          "|A^e|^horizon exceeds the enumeration cap of " + std::to_string(cap));
  std::map<std::string, Trajectory> found;
  std::vector<TrajectoryBuilder> stack{TrajectoryBuilder(game)};
  while (!stack.empty()) {
    TrajectoryBuilder b = std::move(stack.back());
    stack.pop_back();
    if (b.done()) {
      auto t = b.finish();
      found.emplace(t.key, std::move(t));
      continue;
    }
    for (int a = 0; a < static_cast<int>(game.num_actions()); ++a) {
      TrajectoryBuilder next = b;
      next.push(a);
      stack.push_back(std::move(next));
    }
  }
  std::vector<Trajectory> out;
  out.reserve(found.size());
  for (auto& [k, t] : found) out.push_back(std::move(t));
  return out;
}

/// The enumerated trajectory set of one game, with returns and key lookup.
/// Shared (immutably) by everything that sums or maximizes over trajectories.
class TrajectorySpace {
 public:
  explicit TrajectorySpace(GameSpec game, std::size_t cap = kDefaultEnumerationCap)
      : game_(std::move(game)), fingerprint_(game_.fingerprint()), trajectories_(enumerate_trajectories(game_, cap)) {
    values_.reserve(trajectories_.size());
    for (std::size_t i = 0; i < trajectories_.size(); ++i) {
      index_.emplace(trajectories_[i].key, i);
      values_.push_back(trajectory_return(trajectories_[i], game_.gamma));
    }
    const std::size_t n = trajectories_.size();
    if (n <= kMatrixLimit) {
      matrix_.resize(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
          matrix_[i * n + j] = matrix_[j * n + i] = trajectory_distance(trajectories_[i], trajectories_[j]);
    }
  }

  const GameSpec& game() const { return game_; }
  const std::string& fingerprint() const { return fingerprint_; }
  std::size_t size() const { return trajectories_.size(); }
  std::span<const Trajectory> trajectories() const { return trajectories_; }
  const Trajectory& operator[](std::size_t i) const { return trajectories_[i]; }
  std::span<const double> values() const { return values_; }
  double value(std::size_t i) const { return values_[i]; }

  std::optional<std::size_t> find(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const Trajectory& t) const {
    require(t.game == fingerprint_, ErrorCode::domain_mismatch, "trajectory belongs to another game");
    auto i = find(t.key);
    require(i.has_value(), ErrorCode::invalid_argument, "trajectory '" + t.key + "' is not feasible in this game");
    return *i;
  }

  double distance(std::size_t i, std::size_t j) const {
    if (!matrix_.empty()) return matrix_[i * trajectories_.size() + j];
    return trajectory_distance(trajectories_[i], trajectories_[j]);
  }

 private:
  static constexpr std::size_t kMatrixLimit = 1024;

  GameSpec game_;
  std::string fingerprint_;
  std::vector<Trajectory> trajectories_;
  std::vector<double> values_;
  std::vector<double> matrix_;  // pairwise distances, when small enough
  std::map<std::string, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const TrajectorySpace>;

inline SpacePtr make_space(const GameSpec& game, std::size_t cap = kDefaultEnumerationCap) {
  return std::make_shared<const TrajectorySpace>(game, cap);
}

// ---------------------------------------------------------------------------
// JSON

inline json to_json(const Trajectory& t) {
  json steps = json::array();
  for (const auto& s : t.steps) steps.push_back(json::array({s.state, s.action, s.reward}));
  return {{"key", t.key}, {"origin", t.origin}, {"steps", steps}, {"final", t.final_state}};
}

inline Trajectory trajectory_from_json(const json& j, const std::string& game_fingerprint, int horizon) {
  detail::reject_unknown(j, {"key", "origin", "steps", "final"}, "trajectory");
  Trajectory t;
  t.game = game_fingerprint;
  t.horizon = horizon;
  try {
    t.origin = detail::field(j, "origin", "trajectory").get<std::string>();
    t.final_state = detail::field(j, "final", "trajectory").get<std::string>();
    for (const auto& s : detail::field(j, "steps", "trajectory")) {
      require(s.is_array() && s.size() == 3, ErrorCode::parse_error, "trajectory steps are [state, action, reward]");
      t.steps.push_back({s[0].get<std::string>(), s[1].get<int>(), s[2].get<double>()});
    }
    t.key = detail::field(j, "key", "trajectory").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("trajectory: ") + e.what());
  }
  auto a = t.actions();
  require(t.key == canonical_key(t.origin, a), ErrorCode::parse_error, "trajectory key does not match its steps");
  return t;
}

}  // namespace cla
