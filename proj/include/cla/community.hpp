#pragma once

// Synthetic language communities: a shared seeded codebook, listeners that
// execute it with epsilon noise, and Boltzmann speakers calibrated to a
// reference listener. Ground-truth targets are visible to the harness only.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <vector>

#include "cla/message.hpp"
#include "cla/policy.hpp"
#include "cla/rng.hpp"
#include "cla/semantics.hpp"
#include "cla/trajectory.hpp"

namespace cla {

enum class DefaultBehavior { stay, random };

struct CommunityConfig {
  GameSpec game;
  int n_speakers = 1;
  int n_listeners = 1;
  double epsilon = 0.0;
  std::vector<double> listener_epsilons;  // optional per-listener override
  double temp_msg = 1.0;
  double temp_target = 1.0;
  bool zero_temp_msg = false;
  bool zero_temp_target = false;
  std::size_t codebook_k = 0;  // supermarket cover size; 0 means min(64, |T|)
  DefaultBehavior default_behavior = DefaultBehavior::stay;
  DistanceConfig distances;

  friend bool operator==(const CommunityConfig&, const CommunityConfig&) = default;

  void validate() const {
    game.validate();
    distances.validate();
    require(n_speakers >= 1 && n_listeners >= 1, ErrorCode::invalid_argument, "pool sizes must be positive");
    require(epsilon >= 0.0 && epsilon <= 1.0, ErrorCode::invalid_argument, "epsilon must lie in [0, 1]");
    require(listener_epsilons.empty() || listener_epsilons.size() == static_cast<std::size_t>(n_listeners),
            ErrorCode::invalid_argument, "listener_epsilons must have one entry per listener");
    for (double e : listener_epsilons)
      require(e >= 0.0 && e <= 1.0, ErrorCode::invalid_argument, "listener epsilon must lie in [0, 1]");
    require(temp_msg > 0.0 && temp_target > 0.0, ErrorCode::invalid_argument, "temperatures must be positive");
  }
};

struct SpeakerPolicy {
  SemanticsPtr semantics;  // message semantics of the reference listener
  double temp_msg = 1.0;
  double temp_target = 1.0;
  bool zero_temp_msg = false;
  bool zero_temp_target = false;

  const ListenerPolicy& listener_ref() const { return semantics->listener(); }
};

struct Community {
  CommunityConfig config;
  std::uint64_t seed = 0;
  SpacePtr space;
  std::map<Message, Plan> codebook;
  std::vector<SpeakerPolicy> speakers;
  std::vector<ListenerPolicy> listeners;

  const GameSpec& game() const { return space->game(); }
};

// ---------------------------------------------------------------------------
// Target prior

/// P(tau) proportional to exp(V(tau) / temperature) over the enumerated space.
/// With `zero_temperature`, a point mass on the first argmax-V trajectory.
inline std::vector<double> target_prior(const TrajectorySpace& space, double temperature, bool zero_temperature) {
  const auto v = space.values();
  std::vector<double> p(v.size(), 0.0);
  if (v.empty()) return p;
  const auto top = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  if (zero_temperature) {
    p[top] = 1.0;
    return p;
  }
  require(temperature > 0.0, ErrorCode::invalid_argument, "temperature must be positive");
  double z = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) z += (p[i] = std::exp((v[i] - v[top]) / temperature));
  for (double& x : p) x /= z;
  return p;
}

inline Trajectory target_prior_sample(const TrajectorySpace& space, const SpeakerPolicy& speaker, Rng& rng) {
  const auto p = target_prior(space, speaker.temp_target, speaker.zero_temp_target);
  return space[rng.categorical(p)];
}

inline Trajectory target_prior_sample(const Community& c, Rng& rng) {
  const auto p = target_prior(*c.space, c.config.temp_target, c.config.zero_temp_target);
  return c.space->trajectories()[rng.categorical(p)];
}

// ---------------------------------------------------------------------------
// Speaker

/// P(m | target) over the emission space, proportional to
/// exp(-S_B(m*, m) / temp_msg) where m* is the speaker's optimal message.
inline std::vector<double> speaker_distribution(const SpeakerPolicy& speaker, const Trajectory& target) {
  const auto& sem = *speaker.semantics;
  const Message anchor = sem.speaker_anchor(target);
  if (speaker.zero_temp_msg) {
    std::vector<double> p(sem.emission().size(), 0.0);
    const auto it = std::find(sem.emission().begin(), sem.emission().end(), anchor);
    p[static_cast<std::size_t>(it - sem.emission().begin())] = 1.0;
    return p;
  }
  return sem.emission_distribution(anchor, speaker.temp_msg);
}

inline Message speaker_sample(const SpeakerPolicy& speaker, const Trajectory& target, Rng& rng) {
  if (speaker.zero_temp_msg) return speaker.semantics->speaker_anchor(target);
  const auto p = speaker_distribution(speaker, target);
  return speaker.semantics->emission()[rng.categorical(p)];
}

// ---------------------------------------------------------------------------
// Construction

/// Trajectories that receive a codebook message: all of them for Lewis games,
/// the top-K by return (ties by canonical key) for supermarkets.
inline std::vector<std::size_t> covering_set(const TrajectorySpace& space, std::size_t k_config) {
  std::vector<std::size_t> idx(space.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (space.game().kind == GameKind::lewis) return idx;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return space.value(a) > space.value(b); });
  const std::size_t k = std::min(k_config == 0 ? std::size_t{64} : k_config, space.size());
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Assembles a community around an explicit codebook.
inline Community assemble_community(const CommunityConfig& config, std::uint64_t seed, std::map<Message, Plan> codebook,
                                    SpacePtr space = nullptr) {
  config.validate();
  Community c;
  c.config = config;
  c.seed = seed;
  c.space = space ? std::move(space) : make_space(config.game);
  c.codebook = std::move(codebook);

  auto make_listener = [&](double eps) {
    ListenerPolicy l;
    l.codebook = c.codebook;
    l.epsilon = eps;
    l.default_random = config.default_behavior == DefaultBehavior::random;
    l.validate(c.game());
    return l;
  };
  for (int i = 0; i < config.n_listeners; ++i)
    c.listeners.push_back(make_listener(config.listener_epsilons.empty()
                                            ? config.epsilon
                                            : config.listener_epsilons[static_cast<std::size_t>(i)]));
  auto sem = std::make_shared<const ListenerSemantics>(make_listener(config.epsilon), c.space, config.distances);
  for (int i = 0; i < config.n_speakers; ++i)
    c.speakers.push_back({sem, config.temp_msg, config.temp_target, config.zero_temp_msg, config.zero_temp_target});
  return c;
}

/// Seeded shared codebook: distinct emission messages assigned to the covering set.
inline std::map<Message, Plan> make_codebook(const TrajectorySpace& space, std::size_t codebook_k, std::uint64_t seed) {
  const auto cover = covering_set(space, codebook_k);
  auto messages = emission_space(space.game());
  require(messages.size() >= cover.size(), ErrorCode::vocabulary_too_small,
          "need " + std::to_string(cover.size()) + " distinct messages but the vocabulary only yields " +
              std::to_string(messages.size()));
  Rng rng(derive_seed(seed, {0xc0deb00c}));
  rng.shuffle(messages);
  std::map<Message, Plan> book;
  for (std::size_t i = 0; i < cover.size(); ++i) book.emplace(messages[i], space[cover[i]].actions());
  return book;
}

inline Community build_community(const CommunityConfig& config, std::uint64_t seed) {
  config.validate();
  auto space = make_space(config.game);
  auto book = make_codebook(*space, config.codebook_k, seed);
  return assemble_community(config, seed, std::move(book), std::move(space));
}

// ---------------------------------------------------------------------------
// JSON

inline json to_json(const CommunityConfig& c) {
  return {{"n_speakers", c.n_speakers},
          {"n_listeners", c.n_listeners},
          {"epsilon", c.epsilon},
          {"listener_epsilons", c.listener_epsilons},
          {"temp_msg", c.temp_msg},
          {"temp_target", c.temp_target},
          {"zero_temp_msg", c.zero_temp_msg},
          {"zero_temp_target", c.zero_temp_target},
          {"codebook_k", c.codebook_k},
          {"default_behavior", c.default_behavior == DefaultBehavior::stay ? "stay" : "random"},
          {"distances", to_json(c.distances)}};
}

/// Parses the community section of a config; `game` comes from elsewhere.
inline CommunityConfig community_config_from_json(const json& j, const GameSpec& game) {
  detail::reject_unknown(j,
                         {"n_speakers", "n_listeners", "epsilon", "listener_epsilons", "temp_msg", "temp_target",
                          "zero_temp_msg", "zero_temp_target", "codebook_k", "default_behavior", "distances"},
                         "community config");
  CommunityConfig c;
  c.game = game;
  try {
    if (j.contains("n_speakers")) c.n_speakers = j["n_speakers"].get<int>();
    if (j.contains("n_listeners")) c.n_listeners = j["n_listeners"].get<int>();
    if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
    if (j.contains("listener_epsilons")) c.listener_epsilons = j["listener_epsilons"].get<std::vector<double>>();
    if (j.contains("temp_msg")) c.temp_msg = j["temp_msg"].get<double>();
    if (j.contains("temp_target")) c.temp_target = j["temp_target"].get<double>();
    if (j.contains("zero_temp_msg")) c.zero_temp_msg = j["zero_temp_msg"].get<bool>();
    if (j.contains("zero_temp_target")) c.zero_temp_target = j["zero_temp_target"].get<bool>();
    if (j.contains("codebook_k")) c.codebook_k = j["codebook_k"].get<std::size_t>();
    if (j.contains("default_behavior")) {
      const auto b = j["default_behavior"].get<std::string>();
      require(b == "stay" || b == "random", ErrorCode::parse_error, "default_behavior must be stay or random");
      c.default_behavior = b == "stay" ? DefaultBehavior::stay : DefaultBehavior::random;
    }
    if (j.contains("distances")) c.distances = distance_config_from_json(j["distances"]);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("community config: ") + e.what());
  }
  c.validate();
  return c;
}

inline json to_json(const Community& c) {
  json book = json::array();
  for (const auto& [m, p] : c.codebook) book.push_back({{"message", to_json(m)}, {"plan", p}});
  return {{"format_version", 1},
          {"seed", c.seed},
          {"game", c.config.game.to_json()},
          {"config", to_json(c.config)},
          {"codebook", book}};
}

inline Community community_from_json(const json& j) {
  detail::reject_unknown(j, {"format_version", "seed", "game", "config", "codebook"}, "community");
  try {
    require(detail::field(j, "format_version", "community").get<int>() == 1, ErrorCode::format_version,
            "unsupported community format_version");
    const auto game = GameSpec::from_json(detail::field(j, "game", "community"));
    const auto config = community_config_from_json(detail::field(j, "config", "community"), game);
    std::map<Message, Plan> book;
    for (const auto& e : detail::field(j, "codebook", "community")) {
      detail::reject_unknown(e, {"message", "plan"}, "codebook entry");
      book.emplace(message_from_json(detail::field(e, "message", "codebook entry")),
                   detail::field(e, "plan", "codebook entry").get<Plan>());
    }
    return assemble_community(config, detail::field(j, "seed", "community").get<std::uint64_t>(), std::move(book));
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("community: ") + e.what());
  }
}

}  // namespace cla
