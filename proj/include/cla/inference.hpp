#pragma once

// Broca (trajectory -> message) and Wernicke (message -> intended trajectory)
// estimators. Wernicke pseudo-labels each observation with the MAP intended
// trajectory under a Boltzmann-rational speaker model:
//
//   tau_hat = argmax_tau  V(tau) - alpha * d(tau, tau_i)          (literal)
//   tau_hat = argmax_tau  V(tau) - alpha * E_{tau'~pi(.|m_i)} d(tau, tau')  (expected)

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cla/dataset.hpp"
#include "cla/message.hpp"
#include "cla/policy.hpp"
#include "cla/semantics.hpp"
#include "cla/trajectory.hpp"

namespace cla {

inline constexpr int kModelFormatVersion = 1;

enum class MapVariant { literal, expected };

inline std::string to_string(MapVariant v) { return v == MapVariant::literal ? "literal" : "expected"; }

inline MapVariant parse_variant(const std::string& s) {
  if (s == "literal") return MapVariant::literal;
  if (s == "expected") return MapVariant::expected;
  fail(ErrorCode::parse_error, "unknown MAP variant '" + s + "'");
}

struct MapConfig {
  double alpha = 1.0;
  MapVariant variant = MapVariant::literal;

  void validate() const { require(alpha > 0.0, ErrorCode::invalid_argument, "alpha must be positive"); }
};

/// An estimate of pi_B(. | m), needed by the expected MAP variant.
using ListenerModel = std::function<TrajectoryDistribution(const Message&)>;

/// The exact distribution of a known listener policy.
inline ListenerModel exact_listener_model(ListenerPolicy listener, SpacePtr space) {
  return [listener = std::move(listener), space = std::move(space)](const Message& m) {
    return listener_traj_dist(listener, space, m);
  };
}

/// Empirical pi_hat(. | m) from observations: the frequencies of tau_i among
/// records carrying m. Unknown messages fall back to the pooled frequencies.
inline ListenerModel empirical_listener_model(std::span<const ObservedInteraction> data, SpacePtr space) {
  std::map<Message, std::vector<double>> counts;
  std::vector<double> pooled(space->size(), 0.0);
  for (const auto& o : data) {
    const auto i = space->index_of(o.trajectory);
    auto& c = counts.try_emplace(o.message, space->size(), 0.0).first->second;
    c[i] += 1.0;
    pooled[i] += 1.0;
  }
  auto normalize = [](std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    if (s > 0)
      for (double& x : v) x /= s;
  };
  for (auto& [m, c] : counts) normalize(c);
  normalize(pooled);
  return [counts = std::move(counts), pooled = std::move(pooled), space = std::move(space)](const Message& m) {
    auto it = counts.find(m);
    return TrajectoryDistribution{space, it != counts.end() ? it->second : pooled};
  };
}

namespace detail {

/// True when candidate (score, value) beats the incumbent. Candidates are
/// visited in canonical-key order, so remaining ties keep the earlier key.
inline bool map_better(double score, double value, double best_score, double best_value) {
  if (score > best_score + kTieTolerance) return true;
  if (score < best_score - kTieTolerance) return false;
  return value > best_value + kTieTolerance;
}

}  // namespace detail

/// MAP scores of every candidate target in space order.
inline std::vector<double> map_scores(const ObservedInteraction& obs, const TrajectorySpace& space,
                                      const MapConfig& cfg, const ListenerModel* listener_model = nullptr) {
  cfg.validate();
  std::vector<double> scores(space.size());
  if (cfg.variant == MapVariant::literal) {
    const auto observed = space.index_of(obs.trajectory);
    for (std::size_t k = 0; k < space.size(); ++k)
      scores[k] = space.value(k) - cfg.alpha * space.distance(k, observed);
    return scores;
  }
  require(listener_model != nullptr && *listener_model, ErrorCode::missing_listener_model,
          "the expected MAP variant needs a listener model");
  const auto dist = (*listener_model)(obs.message);
  require(dist.probs.size() == space.size(), ErrorCode::support_mismatch, "listener model support mismatch");
  for (std::size_t k = 0; k < space.size(); ++k) {
    double expected = 0.0;
    for (std::size_t j = 0; j < space.size(); ++j)
      if (dist.probs[j] > 0.0) expected += dist.probs[j] * space.distance(k, j);
    scores[k] = space.value(k) - cfg.alpha * expected;
  }
  return scores;
}

/// MAP estimate of the intended trajectory; ties go to higher V, then canonical key.
inline const Trajectory& map_target(const ObservedInteraction& obs, const TrajectorySpace& space, const MapConfig& cfg,
                                    const ListenerModel* listener_model = nullptr) {
  const auto scores = map_scores(obs, space, cfg, listener_model);
  std::size_t best = 0;
  for (std::size_t k = 1; k < space.size(); ++k)
    if (detail::map_better(scores[k], space.value(k), scores[best], space.value(best))) best = k;
  return space[best];
}

/// P(m | target) proportional to exp(-S_B(m*_B(target), m)) over messages of
/// length 1..L. The null message is never emitted and has likelihood 0.
inline double boltzmann_message_likelihood(const ListenerSemantics& semantics, const Message& message,
                                           const Trajectory& target) {
  if (message.is_null()) return 0.0;
  const auto emission = semantics.emission();
  const auto it = std::find(emission.begin(), emission.end(), message);
  require(it != emission.end(), ErrorCode::invalid_argument, "message is not in the emission space");
  const auto p = semantics.emission_distribution(semantics.speaker_anchor(target), 1.0);
  return p[static_cast<std::size_t>(it - emission.begin())];
}

inline double boltzmann_message_likelihood(const ListenerPolicy& listener, const SpacePtr& space,
                                           const Message& message, const Trajectory& target,
                                           const DistanceConfig& cfg) {
  return boltzmann_message_likelihood(ListenerSemantics(listener, space, cfg), message, target);
}

// ---------------------------------------------------------------------------
// Broca

using MessageHistogram = std::map<Message, std::size_t>;

/// Coarse trajectory feature for backoff: the picked candidate (Lewis) or the
/// set of collected items (supermarket).
inline std::string coarse_feature(GameKind kind, const Trajectory& t) {
  if (kind == GameKind::lewis) return t.final_state;
  const auto bar = t.final_state.find('|');
  return "items:" + (bar == std::string::npos ? std::string() : t.final_state.substr(bar + 1));
}

struct BrocaModel {
  std::string game_fingerprint;
  GameKind kind = GameKind::lewis;
  double smoothing = 0.0;
  std::size_t message_count = 0;  // size of the emission space, for smoothing
  std::map<std::string, MessageHistogram> table;
  std::map<std::string, MessageHistogram> backoff;
  MessageHistogram global;

  friend bool operator==(const BrocaModel&, const BrocaModel&) = default;
};

namespace detail {

/// Most frequent message; the map's order makes ties go to shortest-then-lexicographic.
inline const Message& histogram_argmax(const MessageHistogram& h) {
  auto best = h.begin();
  for (auto it = h.begin(); it != h.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

inline void check_records(std::span<const ObservedInteraction> data, const std::string& fingerprint) {
  require(!data.empty(), ErrorCode::empty_dataset, "cannot fit on an empty dataset");
  for (const auto& o : data)
    require(o.trajectory.game == fingerprint, ErrorCode::foreign_record,
            "record trajectory comes from game " + o.trajectory.game + ", expected " + fingerprint);
}

}  // namespace detail

inline BrocaModel fit_broca(std::span<const ObservedInteraction> data, const GameSpec& game, double smoothing = 0.0) {
  require(smoothing >= 0.0, ErrorCode::invalid_argument, "smoothing must be non-negative");
  BrocaModel m;
  m.game_fingerprint = game.fingerprint();
  detail::check_records(data, m.game_fingerprint);
  m.kind = game.kind;
  m.smoothing = smoothing;
  m.message_count = emission_space(game).size();
  for (const auto& o : data) {
    ++m.table[o.trajectory.key][o.message];
    ++m.backoff[coarse_feature(m.kind, o.trajectory)][o.message];
    ++m.global[o.message];
  }
  return m;
}

inline BrocaModel fit_broca(const InteractionDataset& d, const GameSpec& game, double smoothing = 0.0) {
  return fit_broca(d.observations(), game, smoothing);
}

/// Message to send so that a community listener follows `target`.
inline Message broca_emit(const BrocaModel& model, const Trajectory& target) {
  if (auto it = model.table.find(target.key); it != model.table.end()) return detail::histogram_argmax(it->second);
  if (auto it = model.backoff.find(coarse_feature(model.kind, target)); it != model.backoff.end())
    return detail::histogram_argmax(it->second);
  return detail::histogram_argmax(model.global);
}

/// Smoothed beta(m | tau) from the exact-key histogram (add-c over the emission space).
inline double broca_probability(const BrocaModel& model, const Trajectory& target, const Message& m) {
  const MessageHistogram* h = &model.global;
  if (auto it = model.table.find(target.key); it != model.table.end()) {
    h = &it->second;
  } else if (auto b = model.backoff.find(coarse_feature(model.kind, target)); b != model.backoff.end()) {
    h = &b->second;
  }
  double total = 0.0;
  for (const auto& [msg, c] : *h) total += static_cast<double>(c);
  const auto it = h->find(m);
  const double count = it == h->end() ? 0.0 : static_cast<double>(it->second);
  const double denom = total + model.smoothing * static_cast<double>(model.message_count);
  return denom > 0.0 ? (count + model.smoothing) / denom : 0.0;
}

/// Empirical forward loss: sum_i d_m(m_i, broca_emit(tau_i)).
inline double broca_loss(const BrocaModel& model, std::span<const ObservedInteraction> data) {
  double loss = 0.0;
  for (const auto& o : data) loss += message_distance(o.message, broca_emit(model, o.trajectory));
  return loss;
}

// ---------------------------------------------------------------------------
// Wernicke

struct WernickeModel {
  std::string game_fingerprint;
  int horizon = 0;
  double gamma = 1.0;
  double alpha = 1.0;
  MapVariant variant = MapVariant::literal;
  double backoff_threshold = 0.5;
  std::map<Message, std::map<std::string, std::size_t>> table;  // message -> pseudo-label counts
  std::map<std::string, Trajectory> labels;                     // pseudo-labels by key

  friend bool operator==(const WernickeModel&, const WernickeModel&) = default;
};

inline WernickeModel fit_wernicke(std::span<const ObservedInteraction> data, const TrajectorySpace& space,
                                  const MapConfig& cfg, const ListenerModel* listener_model = nullptr,
                                  double backoff_threshold = 0.5) {
  cfg.validate();
  require(backoff_threshold >= 0.0 && backoff_threshold <= 1.0, ErrorCode::invalid_argument,
          "backoff threshold must lie in [0, 1]");
  WernickeModel w;
  w.game_fingerprint = space.fingerprint();
  detail::check_records(data, w.game_fingerprint);
  w.horizon = space.game().horizon;
  w.gamma = space.game().gamma;
  w.alpha = cfg.alpha;
  w.variant = cfg.variant;
  w.backoff_threshold = backoff_threshold;
  for (const auto& o : data) {
    const auto& label = map_target(o, space, cfg, listener_model);
    ++w.table[o.message][label.key];
    w.labels.try_emplace(label.key, label);
  }
  return w;
}

inline WernickeModel fit_wernicke(const InteractionDataset& d, const TrajectorySpace& space, const MapConfig& cfg,
                                  const ListenerModel* listener_model = nullptr, double backoff_threshold = 0.5) {
  return fit_wernicke(d.observations(), space, cfg, listener_model, backoff_threshold);
}

namespace detail {

/// Highest count, then higher V, then canonical key order.
inline const Trajectory& label_argmax(const WernickeModel& w, const std::map<std::string, std::size_t>& h) {
  const std::string* best = nullptr;
  std::size_t best_count = 0;
  double best_v = 0.0;
  for (const auto& [key, count] : h) {
    const double v = trajectory_return(w.labels.at(key), w.gamma);
    if (!best || count > best_count || (count == best_count && v > best_v + kTieTolerance)) {
      best = &key;
      best_count = count;
      best_v = v;
    }
  }
  return w.labels.at(*best);
}

}  // namespace detail

/// Intended trajectory for `message`. Unknown messages borrow the histogram of
/// the nearest known message when it lies within the backoff threshold, and
/// otherwise fall back to the highest-return pseudo-label.
inline Trajectory wernicke_decode(const WernickeModel& w, const Message& message) {
  require(!w.table.empty(), ErrorCode::empty_dataset, "Wernicke model is not fitted");
  if (auto it = w.table.find(message); it != w.table.end()) return detail::label_argmax(w, it->second);
  auto nearest = w.table.end();
  double nearest_d = 2.0;
  for (auto it = w.table.begin(); it != w.table.end(); ++it) {
    const double d = message_distance(message, it->first);
    if (d < nearest_d) {
      nearest_d = d;
      nearest = it;
    }
  }
  if (nearest_d <= w.backoff_threshold) return detail::label_argmax(w, nearest->second);
  const Trajectory* best = nullptr;
  double best_v = 0.0;
  for (const auto& [key, t] : w.labels) {
    const double v = trajectory_return(t, w.gamma);
    if (!best || v > best_v + detail::kTieTolerance) {
      best = &t;
      best_v = v;
    }
  }
  return *best;
}

/// Empirical backward objective: sum_i alpha * d(nu(m_i), tau_i) - V(nu(m_i)).
inline double wernicke_objective(const WernickeModel& w, std::span<const ObservedInteraction> data) {
  double obj = 0.0;
  for (const auto& o : data) {
    const auto decoded = wernicke_decode(w, o.message);
    obj += w.alpha * trajectory_distance(decoded, o.trajectory) - trajectory_return(decoded, w.gamma);
  }
  return obj;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline json histogram_json(const MessageHistogram& h) {
  json a = json::array();
  for (const auto& [m, c] : h) a.push_back({{"message", to_json(m)}, {"count", c}});
  return a;
}

inline MessageHistogram histogram_from_json(const json& a) {
  MessageHistogram h;
  for (const auto& e : a) h.emplace(message_from_json(e.at("message")), e.at("count").get<std::size_t>());
  return h;
}

inline void check_model_header(const json& j, const char* kind, const std::string& expected_fingerprint) {
  require(j.at("format_version").get<int>() == kModelFormatVersion, ErrorCode::format_version,
          "unsupported model format_version");
  require(j.at("kind").get<std::string>() == kind, ErrorCode::parse_error, std::string("expected a ") + kind + " model");
  const auto fp = j.at("game_fingerprint").get<std::string>();
  require(fp == expected_fingerprint, ErrorCode::fingerprint_mismatch,
          std::string(kind) + " model was fitted on game " + fp + ", expected " + expected_fingerprint);
}

}  // namespace detail

inline json to_json(const BrocaModel& m) {
  json table = json::array(), backoff = json::array();
  for (const auto& [k, h] : m.table) table.push_back({{"trajectory", k}, {"histogram", detail::histogram_json(h)}});
  for (const auto& [k, h] : m.backoff) backoff.push_back({{"feature", k}, {"histogram", detail::histogram_json(h)}});
  return {{"format_version", kModelFormatVersion},
          {"kind", "broca"},
          {"game_fingerprint", m.game_fingerprint},
          {"game_kind", m.kind == GameKind::lewis ? "lewis" : "supermarket"},
          {"smoothing", m.smoothing},
          {"message_count", m.message_count},
          {"table", table},
          {"backoff", backoff},
          {"global", detail::histogram_json(m.global)}};
}

inline BrocaModel broca_from_json(const json& j, const std::string& expected_fingerprint) {
  try {
    detail::reject_unknown(j,
                           {"format_version", "kind", "game_fingerprint", "game_kind", "smoothing", "message_count",
                            "table", "backoff", "global"},
                           "broca model");
    detail::check_model_header(j, "broca", expected_fingerprint);
    BrocaModel m;
    m.game_fingerprint = expected_fingerprint;
    m.kind = j.at("game_kind").get<std::string>() == "lewis" ? GameKind::lewis : GameKind::supermarket;
    m.smoothing = j.at("smoothing").get<double>();
    m.message_count = j.at("message_count").get<std::size_t>();
    for (const auto& e : j.at("table"))
      m.table.emplace(e.at("trajectory").get<std::string>(), detail::histogram_from_json(e.at("histogram")));
    for (const auto& e : j.at("backoff"))
      m.backoff.emplace(e.at("feature").get<std::string>(), detail::histogram_from_json(e.at("histogram")));
    m.global = detail::histogram_from_json(j.at("global"));
    require(!m.global.empty(), ErrorCode::parse_error, "broca model has no data");
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("broca model: ") + e.what());
  }
}

inline json to_json(const WernickeModel& w) {
  json table = json::array(), labels = json::array();
  for (const auto& [m, h] : w.table) {
    json hist = json::array();
    for (const auto& [k, c] : h) hist.push_back({{"trajectory", k}, {"count", c}});
    table.push_back({{"message", to_json(m)}, {"histogram", hist}});
  }
  for (const auto& [k, t] : w.labels) labels.push_back(to_json(t));
  return {{"format_version", kModelFormatVersion},
          {"kind", "wernicke"},
          {"game_fingerprint", w.game_fingerprint},
          {"horizon", w.horizon},
          {"gamma", w.gamma},
          {"alpha", w.alpha},
          {"variant", to_string(w.variant)},
          {"backoff_threshold", w.backoff_threshold},
          {"table", table},
          {"labels", labels}};
}

inline WernickeModel wernicke_from_json(const json& j, const std::string& expected_fingerprint) {
  try {
    detail::reject_unknown(j,
                           {"format_version", "kind", "game_fingerprint", "horizon", "gamma", "alpha", "variant",
                            "backoff_threshold", "table", "labels"},
                           "wernicke model");
    detail::check_model_header(j, "wernicke", expected_fingerprint);
    WernickeModel w;
    w.game_fingerprint = expected_fingerprint;
    w.horizon = j.at("horizon").get<int>();
    w.gamma = j.at("gamma").get<double>();
    w.alpha = j.at("alpha").get<double>();
    w.variant = parse_variant(j.at("variant").get<std::string>());
    w.backoff_threshold = j.at("backoff_threshold").get<double>();
    for (const auto& l : j.at("labels")) {
      auto t = trajectory_from_json(l, expected_fingerprint, w.horizon);
      w.labels.emplace(t.key, std::move(t));
    }
    for (const auto& e : j.at("table")) {
      auto& h = w.table[message_from_json(e.at("message"))];
      for (const auto& c : e.at("histogram")) {
        const auto key = c.at("trajectory").get<std::string>();
        require(w.labels.count(key) == 1, ErrorCode::parse_error, "histogram names an unknown pseudo-label");
        h.emplace(key, c.at("count").get<std::size_t>());
      }
    }
    require(!w.table.empty(), ErrorCode::parse_error, "wernicke model has no data");
    return w;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("wernicke model: ") + e.what());
  }
}

}  // namespace cla
