#pragma once

// Scores the observer in both roles against a community. Every condition in
// an episode replays the same derived rng streams (paired design):
//   stream (seed, i, 0): speaker/listener choice, target and message
//   stream (seed, i, 1): listener rollout
//   stream (seed, i, 2): random-message baseline

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cla/community.hpp"
#include "cla/inference.hpp"
#include "cla/rng.hpp"
#include "cla/semantics.hpp"

namespace cla {

struct SpeakerMetrics {
  double success_rate = 0.0;
  double mean_return = 0.0;
};

struct SpeakerReport {
  SpeakerMetrics model;
  SpeakerMetrics oracle;  // sends m*_B of the episode's listener
  SpeakerMetrics random;  // uniform over the emission space
  int n = 0;
};

struct ListenerMetrics {
  double recovery_rate = 0.0;
  double mean_distance = 0.0;
  double mean_target_value = 0.0;
};

struct ListenerReport {
  ListenerMetrics model;
  ListenerMetrics literal;  // tau_hat := tau_i
  int n = 0;
};

/// One condition of one episode, for replay comparisons.
struct EpisodeTranscript {
  int episode = 0;
  std::string condition;
  std::string target;
  Message message;
  std::string outcome;  // realized (speaker eval) or decoded (listener eval) trajectory key

  friend bool operator==(const EpisodeTranscript&, const EpisodeTranscript&) = default;
};

inline SpeakerReport eval_speaker(const BrocaModel& broca, const Community& community, int n, std::uint64_t seed,
                                  std::vector<EpisodeTranscript>* transcript = nullptr) {
  require(n >= 1, ErrorCode::invalid_argument, "eval_speaker needs n >= 1");
  require(broca.game_fingerprint == community.space->fingerprint(), ErrorCode::fingerprint_mismatch,
          "Broca model was fitted on a different game");
  const auto& space = *community.space;
  const auto& game = community.game();
  const auto emission = emission_space(game);
  std::map<std::pair<int, std::size_t>, Message> oracle_cache;

  SpeakerReport rep;
  rep.n = n;
  auto score = [&](SpeakerMetrics& acc, int i, const char* cond, const Trajectory& target, const Message& m,
                   const ListenerPolicy& listener) {
    Rng roll(derive_seed(seed, {static_cast<std::uint64_t>(i), 1}));
    const auto tau = rollout(game, listener, m, roll);
    acc.success_rate += tau.key == target.key ? 1.0 : 0.0;
    acc.mean_return += trajectory_return(tau, game.gamma);
    if (transcript) transcript->push_back({i, cond, target.key, m, tau.key});
  };

  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i), 0}));
    const int lid = static_cast<int>(rng.below(community.listeners.size()));
    const auto& listener = community.listeners[static_cast<std::size_t>(lid)];
    const auto target = target_prior_sample(community, rng);

    score(rep.model, i, "model", target, broca_emit(broca, target), listener);

    const auto key = std::make_pair(lid, space.index_of(target));
    auto it = oracle_cache.find(key);
    if (it == oracle_cache.end())
      it = oracle_cache.emplace(key, optimal_message(listener, community.space, target)).first;
    score(rep.oracle, i, "oracle", target, it->second, listener);

    Rng pick(derive_seed(seed, {static_cast<std::uint64_t>(i), 2}));
    score(rep.random, i, "random", target, emission[pick.below(emission.size())], listener);
  }
  for (auto* m : {&rep.model, &rep.oracle, &rep.random}) {
    m->success_rate /= n;
    m->mean_return /= n;
  }
  return rep;
}

inline ListenerReport eval_listener(const WernickeModel& wernicke, const Community& community, int n,
                                    std::uint64_t seed, std::vector<EpisodeTranscript>* transcript = nullptr) {
  require(n >= 1, ErrorCode::invalid_argument, "eval_listener needs n >= 1");
  require(wernicke.game_fingerprint == community.space->fingerprint(), ErrorCode::fingerprint_mismatch,
          "Wernicke model was fitted on a different game");
  const auto& game = community.game();

  ListenerReport rep;
  rep.n = n;
  auto score = [&](ListenerMetrics& acc, int i, const char* cond, const Trajectory& target, const Message& m,
                   const Trajectory& decoded) {
    acc.recovery_rate += decoded.key == target.key ? 1.0 : 0.0;
    acc.mean_distance += trajectory_distance(decoded, target);
    acc.mean_target_value += trajectory_return(decoded, game.gamma);
    if (transcript) transcript->push_back({i, cond, target.key, m, decoded.key});
  };

  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i), 0}));
    const auto& speaker = community.speakers[rng.below(community.speakers.size())];
    const auto& listener = community.listeners[rng.below(community.listeners.size())];
    const auto target = target_prior_sample(*community.space, speaker, rng);
    const auto m = speaker_sample(speaker, target, rng);

    score(rep.model, i, "model", target, m, wernicke_decode(wernicke, m));

    Rng roll(derive_seed(seed, {static_cast<std::uint64_t>(i), 1}));
    score(rep.literal, i, "literal", target, m, rollout(game, listener, m, roll));
  }
  for (auto* m : {&rep.model, &rep.literal}) {
    m->recovery_rate /= n;
    m->mean_distance /= n;
    m->mean_target_value /= n;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Report output. CSV column order is part of the file format.

inline json to_json(const SpeakerReport& r) {
  auto m = [](const SpeakerMetrics& s) { return json{{"success_rate", s.success_rate}, {"mean_return", s.mean_return}}; };
  return {{"kind", "speaker"}, {"n", r.n}, {"model", m(r.model)}, {"oracle", m(r.oracle)}, {"random", m(r.random)}};
}

inline json to_json(const ListenerReport& r) {
  auto m = [](const ListenerMetrics& s) {
    return json{{"recovery_rate", s.recovery_rate},
                {"mean_distance", s.mean_distance},
                {"mean_target_value", s.mean_target_value}};
  };
  return {{"kind", "listener"}, {"n", r.n}, {"model", m(r.model)}, {"literal", m(r.literal)}};
}

inline const char* kSpeakerCsvHeader =
    "kind,n,success_rate,mean_return,oracle_success_rate,oracle_mean_return,random_success_rate,random_mean_return";
inline const char* kListenerCsvHeader =
    "kind,n,recovery_rate,mean_distance,mean_target_value,literal_recovery_rate,literal_mean_distance,"
    "literal_mean_target_value";

namespace detail {
inline std::string num(double v) { return json(v).dump(); }
}  // namespace detail

inline std::string to_csv(const SpeakerReport& r) {
  std::ostringstream os;
  os << kSpeakerCsvHeader << "\nspeaker," << r.n;
  for (const auto* m : {&r.model, &r.oracle, &r.random})
    os << ',' << detail::num(m->success_rate) << ',' << detail::num(m->mean_return);
  os << '\n';
  return os.str();
}

inline std::string to_csv(const ListenerReport& r) {
  std::ostringstream os;
  os << kListenerCsvHeader << "\nlistener," << r.n;
  for (const auto* m : {&r.model, &r.literal})
    os << ',' << detail::num(m->recovery_rate) << ',' << detail::num(m->mean_distance) << ','
       << detail::num(m->mean_target_value);
  os << '\n';
  return os.str();
}

}  // namespace cla
