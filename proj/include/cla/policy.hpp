#pragma once

#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "cla/message.hpp"
#include "cla/rng.hpp"
#include "cla/trajectory.hpp"

namespace cla {

using Plan = std::vector<int>;

/// Open-loop listener: a message selects a plan, and each planned action is
/// replaced by a uniformly random one with probability epsilon. Steps beyond
/// the end of a plan use the game's idle action.
struct ListenerPolicy {
  std::map<Message, Plan> codebook;
  double epsilon = 0.0;
  Plan default_plan;            // null and unknown messages
  bool default_random = false;  // if set, null/unknown messages yield uniform actions instead

  friend bool operator==(const ListenerPolicy&, const ListenerPolicy&) = default;

  /// Plan followed for `m`, or nullptr when the listener acts uniformly at random.
  const Plan* plan_for(const Message& m) const {
    if (auto it = codebook.find(m); it != codebook.end()) return &it->second;
    return default_random ? nullptr : &default_plan;
  }

  void action_probs(const GameSpec& game, const Plan* plan, std::size_t t, std::vector<double>& out) const {
    const std::size_t n = game.num_actions();
    out.assign(n, 0.0);
    if (plan == nullptr) {
      std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
      return;
    }
    const int intended = t < plan->size() ? (*plan)[t] : game.idle_action();
    for (std::size_t a = 0; a < n; ++a) out[a] = epsilon / static_cast<double>(n);
    out[static_cast<std::size_t>(intended)] += 1.0 - epsilon;
  }

  void validate(const GameSpec& game) const {
    require(epsilon >= 0.0 && epsilon <= 1.0, ErrorCode::invalid_argument, "listener epsilon must lie in [0, 1]");
    auto check_plan = [&](const Plan& p) {
      for (int a : p)
        require(a >= 0 && a < static_cast<int>(game.num_actions()), ErrorCode::invalid_action,
                "listener plan uses an invalid action");
    };
    check_plan(default_plan);
    for (const auto& [m, p] : codebook) {
      require(valid_message(game, m), ErrorCode::invalid_argument, "codebook message not valid for the game");
      check_plan(p);
    }
  }
};

/// A listener that ignores messages and always follows `plan`.
inline ListenerPolicy message_blind_listener(Plan plan, double epsilon = 0.0) {
  ListenerPolicy l;
  l.default_plan = std::move(plan);
  l.epsilon = epsilon;
  return l;
}

/// A probability vector over the trajectories of one TrajectorySpace.
struct TrajectoryDistribution {
  SpacePtr space;
  std::vector<double> probs;

  double total() const {
    double s = 0.0;
    for (double p : probs) s += p;
    return s;
  }

  static TrajectoryDistribution point_mass(SpacePtr space, std::size_t i) {
    TrajectoryDistribution d{space, std::vector<double>(space->size(), 0.0)};
    d.probs[i] = 1.0;
    return d;
  }
};

namespace detail {

inline bool extends(std::span<const int> actions, std::span<const int> prefix) {
  return actions.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), actions.begin());
}

}  // namespace detail

/// Exact distribution over trajectories induced by following `plan` (nullptr:
/// uniform actions), conditioned on the first actions being `prefix`.
inline TrajectoryDistribution plan_distribution(const ListenerPolicy& listener, const SpacePtr& space, const Plan* plan,
                                                std::span<const int> prefix = {}) {
  const auto& game = space->game();
  TrajectoryDistribution d{space, std::vector<double>(space->size(), 0.0)};
  std::vector<double> probs;
  bool any = false;
  for (std::size_t i = 0; i < space->size(); ++i) {
    const auto actions = (*space)[i].actions();
    if (!detail::extends(actions, prefix)) continue;
    any = true;
    double p = 1.0;
    for (std::size_t t = prefix.size(); t < actions.size() && p > 0.0; ++t) {
      listener.action_probs(game, plan, t, probs);
      p *= probs[static_cast<std::size_t>(actions[t])];
    }
    d.probs[i] = p;
  }
  require(any, ErrorCode::invalid_argument, "context prefix is not feasible in this game");
  return d;
}

/// pi_B(tau | m), optionally conditioned on an action-history prefix.
inline TrajectoryDistribution listener_traj_dist(const ListenerPolicy& listener, const SpacePtr& space,
                                                 const Message& message, std::span<const int> prefix = {}) {
  return plan_distribution(listener, space, listener.plan_for(message), prefix);
}

inline TrajectoryDistribution listener_traj_dist(const ListenerPolicy& listener, const GameSpec& game,
                                                 const Message& message) {
  return listener_traj_dist(listener, make_space(game), message);
}

/// Samples the listener's trajectory after hearing `message`.
inline Trajectory rollout(const GameSpec& game, const ListenerPolicy& listener, const Message& message, Rng& rng) {
  require(valid_message(game, message), ErrorCode::invalid_argument, "message is not valid for this game");
  const Plan* plan = listener.plan_for(message);
  TrajectoryBuilder b(game);
  std::vector<double> probs;
  while (!b.done()) {
    listener.action_probs(game, plan, b.state().t, probs);
    b.push(static_cast<int>(rng.categorical(probs)));
  }
  return b.finish();
}

// ---------------------------------------------------------------------------
// JSON

inline json to_json(const ListenerPolicy& l) {
  json book = json::array();
  for (const auto& [m, p] : l.codebook) book.push_back({{"message", to_json(m)}, {"plan", p}});
  return {{"codebook", book}, {"epsilon", l.epsilon}, {"default_plan", l.default_plan},
          {"default_random", l.default_random}};
}

inline ListenerPolicy listener_from_json(const json& j) {
  detail::reject_unknown(j, {"codebook", "epsilon", "default_plan", "default_random"}, "listener");
  ListenerPolicy l;
  try {
    for (const auto& e : detail::field(j, "codebook", "listener")) {
      detail::reject_unknown(e, {"message", "plan"}, "codebook entry");
      l.codebook.emplace(message_from_json(detail::field(e, "message", "codebook entry")),
                         detail::field(e, "plan", "codebook entry").get<Plan>());
    }
    l.epsilon = detail::field(j, "epsilon", "listener").get<double>();
    l.default_plan = detail::field(j, "default_plan", "listener").get<Plan>();
    l.default_random = detail::field(j, "default_random", "listener").get<bool>();
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("listener: ") + e.what());
  }
  return l;
}

}  // namespace cla
