#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cla/message.hpp"
#include "cla/policy.hpp"
#include "cla/rng.hpp"
#include "cla/transport.hpp"
#include "cla/trajectory.hpp"

namespace cla {

enum class TrajMetric { action_edit };
enum class DistLift { wasserstein1, total_variation };

struct DistanceConfig {
  TrajMetric traj_metric = TrajMetric::action_edit;
  DistLift dist_lift = DistLift::wasserstein1;
  double listening_epsilon = 1e-6;
  double signalling_alpha = 0.05;
  int permutations = 1000;
  std::uint64_t permutation_seed = 0;
  std::size_t transport_cap = 512;

  friend bool operator==(const DistanceConfig&, const DistanceConfig&) = default;

  void validate() const {
    require(listening_epsilon > 0.0, ErrorCode::invalid_argument, "listening_epsilon must be positive");
    require(signalling_alpha > 0.0 && signalling_alpha < 1.0, ErrorCode::invalid_argument,
            "signalling_alpha must lie in (0, 1)");
    require(permutations >= 100, ErrorCode::invalid_argument, "permutations must be at least 100");
    require(transport_cap >= 1, ErrorCode::invalid_argument, "transport_cap must be positive");
  }
};

inline std::string to_string(DistLift l) { return l == DistLift::wasserstein1 ? "wasserstein1" : "total_variation"; }

inline DistLift parse_lift(const std::string& s) {
  if (s == "wasserstein1") return DistLift::wasserstein1;
  if (s == "total_variation") return DistLift::total_variation;
  fail(ErrorCode::parse_error, "unknown dist_lift '" + s + "'");
}

inline json to_json(const DistanceConfig& c) {
  return {{"traj_metric", "action_edit"},          {"dist_lift", to_string(c.dist_lift)},
          {"listening_epsilon", c.listening_epsilon}, {"signalling_alpha", c.signalling_alpha},
          {"permutations", c.permutations},          {"permutation_seed", c.permutation_seed},
          {"transport_cap", c.transport_cap}};
}

inline DistanceConfig distance_config_from_json(const json& j) {
  detail::reject_unknown(j,
                         {"traj_metric", "dist_lift", "listening_epsilon", "signalling_alpha", "permutations",
                          "permutation_seed", "transport_cap"},
                         "distances");
  DistanceConfig c;
  try {
    if (j.contains("traj_metric"))
      require(j["traj_metric"].get<std::string>() == "action_edit", ErrorCode::parse_error,
              "traj_metric must be action_edit");
    if (j.contains("dist_lift")) c.dist_lift = parse_lift(j["dist_lift"].get<std::string>());
    if (j.contains("listening_epsilon")) c.listening_epsilon = j["listening_epsilon"].get<double>();
    if (j.contains("signalling_alpha")) c.signalling_alpha = j["signalling_alpha"].get<double>();
    if (j.contains("permutations")) c.permutations = j["permutations"].get<int>();
    if (j.contains("permutation_seed")) c.permutation_seed = j["permutation_seed"].get<std::uint64_t>();
    if (j.contains("transport_cap")) c.transport_cap = j["transport_cap"].get<std::size_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("distances: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Distances between trajectory distributions

namespace detail {

inline void check_distribution(const TrajectoryDistribution& p) {
  require(p.space != nullptr && p.probs.size() == p.space->size(), ErrorCode::support_mismatch,
          "distribution does not cover its support");
  for (double v : p.probs) require(v >= 0.0, ErrorCode::not_normalized, "negative probability");
  require(std::abs(p.total() - 1.0) <= 1e-9, ErrorCode::not_normalized, "distribution does not sum to 1");
}

inline double wasserstein1(const TrajectoryDistribution& p, const TrajectoryDistribution& q, std::size_t cap) {
  std::vector<std::size_t> src, dst;
  std::vector<double> supply, demand;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    const double d = p.probs[i] - q.probs[i];
    if (d > 0) {
      src.push_back(i);
      supply.push_back(d);
    } else if (d < 0) {
      dst.push_back(i);
      demand.push_back(-d);
    }
  }
  if (src.empty() || dst.empty()) return 0.0;
  require(src.size() + dst.size() <= cap, ErrorCode::transport_cap,
          "wasserstein1 support of " + std::to_string(src.size() + dst.size()) + " atoms exceeds the cap of " +
              std::to_string(cap) + "; use total_variation");
  // Totals can differ by rounding; rescale the demand side onto the supply total.
  double ts = 0.0, td = 0.0;
  for (double v : supply) ts += v;
  for (double v : demand) td += v;
  for (double& v : demand) v *= ts / td;
  const auto& space = *p.space;
  auto res = solve_transport(supply, demand, [&](std::size_t i, std::size_t j) { return space.distance(src[i], dst[j]); });
  return std::clamp(res.cost, 0.0, 1.0);
}

}  // namespace detail

/// Lifts the trajectory metric to distributions on a shared enumerated support.
inline double distribution_distance(const TrajectoryDistribution& p, const TrajectoryDistribution& q,
                                    const DistanceConfig& cfg) {
  detail::check_distribution(p);
  detail::check_distribution(q);
  require(p.space == q.space || (p.space->fingerprint() == q.space->fingerprint() && p.space->size() == q.space->size()),
          ErrorCode::support_mismatch, "distributions are over different supports");
  if (cfg.dist_lift == DistLift::total_variation) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) s += std::abs(p.probs[i] - q.probs[i]);
    return std::clamp(0.5 * s, 0.0, 1.0);
  }
  // Fixed orientation keeps the result bitwise symmetric in (p, q).
  if (q.probs < p.probs) return detail::wasserstein1(q, p, cfg.transport_cap);
  return detail::wasserstein1(p, q, cfg.transport_cap);
}

// ---------------------------------------------------------------------------
// Message semantics for one listener

namespace detail {

/// Probability that following `plan` yields exactly trajectory `tau`.
inline double plan_probability(const ListenerPolicy& listener, const GameSpec& game, const Plan* plan,
                               const Trajectory& tau) {
  std::vector<double> probs;
  double p = 1.0;
  for (std::size_t t = 0; t < tau.steps.size() && p > 0.0; ++t) {
    listener.action_probs(game, plan, t, probs);
    p *= probs[static_cast<std::size_t>(tau.steps[t].action)];
  }
  return p;
}

inline constexpr double kTieTolerance = 1e-12;

}  // namespace detail

/// m*_B(tau): the message maximizing pi_B(tau | m). Candidates are all messages
/// of length 0..L (or 1..L without the null message); ties go to the shortest,
/// then lexicographically smallest message.
inline Message optimal_message(const ListenerPolicy& listener, const SpacePtr& space, const Trajectory& target,
                               bool include_null = true) {
  const auto& game = space->game();
  space->index_of(target);
  Message best;
  double best_p = -1.0;
  std::map<const Plan*, double> cache;
  for (auto& m : message_space(game, include_null ? 0 : 1)) {
    const Plan* plan = listener.plan_for(m);
    auto it = cache.find(plan);
    if (it == cache.end()) it = cache.emplace(plan, detail::plan_probability(listener, game, plan, target)).first;
    if (it->second > best_p + detail::kTieTolerance) {
      best_p = it->second;
      best = std::move(m);
    }
  }
  return best;
}

inline Message optimal_message(const ListenerPolicy& listener, const GameSpec& game, const Trajectory& target) {
  return optimal_message(listener, make_space(game), target);
}

/// S_B(m1, m2): distance between the trajectory distributions two messages induce.
inline double semantic_distance(const ListenerPolicy& listener, const SpacePtr& space, const Message& m1,
                                const Message& m2, const DistanceConfig& cfg) {
  if (listener.plan_for(m1) == listener.plan_for(m2)) return 0.0;
  return distribution_distance(listener_traj_dist(listener, space, m1), listener_traj_dist(listener, space, m2), cfg);
}

/// Cached message semantics for one listener on one game. Messages that select
/// the same plan share a distribution, so work scales with the number of
/// distinct plans rather than the size of the message space. Thread-safe.
class ListenerSemantics {
 public:
  ListenerSemantics(ListenerPolicy listener, SpacePtr space, DistanceConfig cfg)
      : listener_(std::move(listener)), space_(std::move(space)), cfg_(cfg) {
    listener_.validate(space_->game());
    emission_ = emission_space(space_->game());
    std::map<const Plan*, std::size_t> ids;
    auto id_of = [&](const Message& m) {
      const Plan* p = listener_.plan_for(m);
      auto [it, inserted] = ids.emplace(p, plans_.size());
      if (inserted) plans_.push_back(p);
      return it->second;
    };
    null_plan_ = id_of(null_message());
    for (const auto& m : emission_) emission_plan_.push_back(id_of(m));
    dists_.reserve(plans_.size());
    for (const Plan* p : plans_) dists_.push_back(plan_distribution(listener_, space_, p));
    rows_.resize(plans_.size());
  }

  const ListenerPolicy& listener() const { return listener_; }
  const SpacePtr& space() const { return space_; }
  const DistanceConfig& config() const { return cfg_; }
  std::span<const Message> emission() const { return emission_; }

  std::size_t plan_id(const Message& m) const {
    const Plan* p = listener_.plan_for(m);
    for (std::size_t i = 0; i < plans_.size(); ++i)
      if (plans_[i] == p) return i;
    fail(ErrorCode::invalid_argument, "message is not valid for this listener's game");
  }

  const TrajectoryDistribution& distribution(const Message& m) const { return dists_[plan_id(m)]; }

  double semantic_distance(const Message& m1, const Message& m2) const {
    return row(plan_id(m1))[plan_id(m2)];
  }

  /// m*_B(target) restricted to messages a speaker can emit (length >= 1).
  Message speaker_anchor(const Trajectory& target) const {
    const std::size_t t = space_->index_of(target);
    std::size_t best = 0;
    double best_p = -1.0;
    for (std::size_t k = 0; k < emission_.size(); ++k) {
      const double p = dists_[emission_plan_[k]].probs[t];
      if (p > best_p + detail::kTieTolerance) {
        best_p = p;
        best = k;
      }
    }
    return emission_[best];
  }

  /// Probabilities over emission() proportional to exp(-S_B(anchor, m) / temperature).
  std::vector<double> emission_distribution(const Message& anchor, double temperature) const {
    require(temperature > 0.0, ErrorCode::invalid_argument, "temperature must be positive");
    const auto& r = row(plan_id(anchor));
    std::vector<double> w(emission_.size());
    double z = 0.0;
    for (std::size_t k = 0; k < emission_.size(); ++k) {
      w[k] = std::exp(-r[emission_plan_[k]] / temperature);
      z += w[k];
    }
    for (double& v : w) v /= z;
    return w;
  }

 private:
  const std::vector<double>& row(std::size_t a) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto& r = rows_[a];
    if (r.empty()) {
      r.resize(plans_.size());
      for (std::size_t b = 0; b < plans_.size(); ++b)
        r[b] = a == b ? 0.0 : distribution_distance(dists_[a], dists_[b], cfg_);
    }
    return r;
  }

  ListenerPolicy listener_;
  SpacePtr space_;
  DistanceConfig cfg_;
  std::vector<Message> emission_;
  std::vector<const Plan*> plans_;
  std::size_t null_plan_ = 0;
  std::vector<std::size_t> emission_plan_;
  std::vector<TrajectoryDistribution> dists_;
  mutable std::mutex mu_;
  mutable std::vector<std::vector<double>> rows_;
};

using SemanticsPtr = std::shared_ptr<const ListenerSemantics>;

// ---------------------------------------------------------------------------
// Detectors

struct ListeningWitness {
  std::vector<int> context;  // action-history prefix
  Message message;
  friend bool operator==(const ListeningWitness&, const ListeningWitness&) = default;
};

struct DetectorReport {
  bool detected = false;
  double statistic = 0.0;
  std::optional<double> p_value;             // signalling only
  std::optional<ListeningWitness> witness;  // listening only
};

inline json to_json(const DetectorReport& r) {
  json j = {{"detected", r.detected}, {"statistic", r.statistic}, {"p_value", nullptr}, {"witness", nullptr}};
  if (r.p_value) j["p_value"] = *r.p_value;
  if (r.witness) j["witness"] = {{"context", r.witness->context}, {"message", to_json(r.witness->message)}};
  return j;
}

inline DetectorReport detector_report_from_json(const json& j) {
  detail::reject_unknown(j, {"detected", "statistic", "p_value", "witness"}, "detector report");
  DetectorReport r;
  r.detected = detail::field(j, "detected", "detector report").get<bool>();
  r.statistic = detail::field(j, "statistic", "detector report").get<double>();
  const auto& p = detail::field(j, "p_value", "detector report");
  if (!p.is_null()) r.p_value = p.get<double>();
  const auto& w = detail::field(j, "witness", "detector report");
  if (!w.is_null())
    r.witness = ListeningWitness{w.at("context").get<std::vector<int>>(), message_from_json(w.at("message"))};
  return r;
}

/// Largest change, over contexts z and messages m, between the trajectory
/// distribution after the null message and after m.
inline DetectorReport positive_listening_test(const ListenerPolicy& listener, const SpacePtr& space,
                                              std::span<const std::vector<int>> contexts,
                                              std::span<const Message> messages, const DistanceConfig& cfg) {
  require(!messages.empty(), ErrorCode::invalid_argument, "positive_listening_test needs at least one message");
  static const std::vector<std::vector<int>> root{{}};
  if (contexts.empty()) contexts = root;
  DetectorReport r;
  for (const auto& z : contexts) {
    const auto base = listener_traj_dist(listener, space, null_message(), z);
    for (const auto& m : messages) {
      const double d =
          listener.plan_for(m) == listener.plan_for(null_message())
              ? 0.0
              : distribution_distance(base, listener_traj_dist(listener, space, m, z), cfg);
      if (!r.witness || d > r.statistic) {
        r.statistic = d;
        r.witness = ListeningWitness{z, m};
      }
    }
  }
  r.detected = r.statistic > cfg.listening_epsilon;
  return r;
}

/// What a speaker saw, did and said during one episode.
struct SignallingEpisode {
  std::vector<std::string> observations;
  std::vector<int> actions;
  std::vector<Message> messages;
};

namespace detail {

inline std::vector<std::size_t> encode_categories(const std::vector<std::string>& keys, std::size_t& n_categories) {
  std::unordered_map<std::string, std::size_t> ids;
  std::vector<std::size_t> out;
  out.reserve(keys.size());
  for (const auto& k : keys) out.push_back(ids.emplace(k, ids.size()).first->second);
  n_categories = ids.size();
  return out;
}

/// Plug-in mutual information (nats) between two categorical columns.
inline double mutual_information(std::span<const std::size_t> x, std::size_t nx, std::span<const std::size_t> y,
                                 std::size_t ny) {
  const double n = static_cast<double>(x.size());
  std::vector<double> joint(nx * ny, 0.0), cx(nx, 0.0), cy(ny, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    joint[x[i] * ny + y[i]] += 1.0;
    cx[x[i]] += 1.0;
    cy[y[i]] += 1.0;
  }
  double mi = 0.0;
  for (std::size_t a = 0; a < nx; ++a)
    for (std::size_t b = 0; b < ny; ++b) {
      const double c = joint[a * ny + b];
      if (c > 0) mi += c / n * std::log(c * n / (cx[a] * cy[b]));
    }
  return std::max(0.0, mi);
}

}  // namespace detail

/// Permutation test of dependence between each episode's message sequence and
/// its (observation, action) sequence, using empirical mutual information.
inline DetectorReport positive_signalling_test(std::span<const SignallingEpisode> episodes,
                                               const DistanceConfig& cfg) {
  cfg.validate();
  require(episodes.size() >= 30, ErrorCode::too_few_episodes,
          "positive_signalling_test needs at least 30 episodes, got " + std::to_string(episodes.size()));
  std::vector<std::string> ctx_keys, msg_keys;
  for (const auto& e : episodes) {
    json c = {e.observations, e.actions};
    json m = json::array();
    for (const auto& msg : e.messages) m.push_back(msg.tokens);
    ctx_keys.push_back(c.dump());
    msg_keys.push_back(m.dump());
  }
  std::size_t nx = 0, ny = 0;
  const auto x = detail::encode_categories(ctx_keys, nx);
  auto y = detail::encode_categories(msg_keys, ny);
  const double observed = detail::mutual_information(x, nx, y, ny);

  Rng rng(derive_seed(cfg.permutation_seed, {0x5167}));
  std::size_t at_least = 0;
  for (int k = 0; k < cfg.permutations; ++k) {
    rng.shuffle(y);
    if (detail::mutual_information(x, nx, y, ny) >= observed - 1e-12) ++at_least;
  }
  DetectorReport r;
  r.statistic = observed;
  r.p_value = static_cast<double>(at_least + 1) / static_cast<double>(cfg.permutations + 1);
  r.detected = *r.p_value < cfg.signalling_alpha;
  return r;
}

}  // namespace cla
