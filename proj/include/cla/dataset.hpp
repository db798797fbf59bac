#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cla/community.hpp"
#include "cla/error.hpp"
#include "cla/message.hpp"
#include "cla/rng.hpp"
#include "cla/trajectory.hpp"

namespace cla {

inline constexpr int kDatasetFormatVersion = 1;

/// What an outside observer sees of one interaction: (m_i, tau_i). Inference
/// only ever receives these, never the hidden target.
struct ObservedInteraction {
  Message message;
  Trajectory trajectory;
};

struct InteractionRecord {
  Message message;
  Trajectory trajectory;
  std::optional<Trajectory> hidden_target;  // harness ground truth
  std::uint64_t episode_seed = 0;
  int speaker_id = 0;
  int listener_id = 0;

  ObservedInteraction observed() const { return {message, trajectory}; }

  friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
};

struct DatasetMeta {
  GameSpec game;
  std::uint64_t community_seed = 0;
  std::uint64_t master_seed = 0;
  double temp_msg = 1.0;
  double temp_target = 1.0;
  bool zero_temp_msg = false;
  bool zero_temp_target = false;
  std::string created;  // ISO-8601 timestamp; empty in canonical output

  friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

struct InteractionDataset {
  std::string game_fingerprint;
  DatasetMeta meta;
  std::vector<InteractionRecord> records;

  std::vector<ObservedInteraction> observations() const {
    std::vector<ObservedInteraction> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.observed());
    return out;
  }

  friend bool operator==(const InteractionDataset&, const InteractionDataset&) = default;
};

/// One episode per index: target from the Boltzmann prior, message from the
/// speaker, trajectory from the listener. Episode i uses a stream derived from
/// (master_seed, i), so output does not depend on generation order.
inline InteractionDataset collect(const Community& community, int n_episodes, std::uint64_t master_seed) {
  require(n_episodes >= 1, ErrorCode::invalid_argument, "n_episodes must be positive");
  InteractionDataset d;
  const auto& cfg = community.config;
  d.game_fingerprint = community.space->fingerprint();
  d.meta = {cfg.game, community.seed, master_seed, cfg.temp_msg, cfg.temp_target, cfg.zero_temp_msg,
            cfg.zero_temp_target, ""};
  d.records.reserve(static_cast<std::size_t>(n_episodes));
  for (int i = 0; i < n_episodes; ++i) {
    const std::uint64_t seed = derive_seed(master_seed, {static_cast<std::uint64_t>(i)});
    Rng rng(seed);
    InteractionRecord r;
    r.episode_seed = seed;
    r.speaker_id = static_cast<int>(rng.below(community.speakers.size()));
    r.listener_id = static_cast<int>(rng.below(community.listeners.size()));
    const auto& speaker = community.speakers[static_cast<std::size_t>(r.speaker_id)];
    auto target = target_prior_sample(*community.space, speaker, rng);
    r.message = speaker_sample(speaker, target, rng);
    r.trajectory =
        rollout(community.game(), community.listeners[static_cast<std::size_t>(r.listener_id)], r.message, rng);
    r.hidden_target = std::move(target);
    d.records.push_back(std::move(r));
  }
  return d;
}

// ---------------------------------------------------------------------------
// JSONL persistence: a header line, then one record per line.

inline json header_json(const InteractionDataset& d) {
  const auto& m = d.meta;
  return {{"format_version", kDatasetFormatVersion},
          {"game_fingerprint", d.game_fingerprint},
          {"meta",
           {{"game", m.game.to_json()},
            {"community_seed", m.community_seed},
            {"master_seed", m.master_seed},
            {"temp_msg", m.temp_msg},
            {"temp_target", m.temp_target},
            {"zero_temp_msg", m.zero_temp_msg},
            {"zero_temp_target", m.zero_temp_target},
            {"created", m.created}}}};
}

inline json to_json(const InteractionRecord& r) {
  return {{"message", to_json(r.message)},
          {"trajectory", to_json(r.trajectory)},
          {"hidden_target", r.hidden_target ? to_json(*r.hidden_target) : json(nullptr)},
          {"episode_seed", r.episode_seed},
          {"speaker_id", r.speaker_id},
          {"listener_id", r.listener_id}};
}

inline void write_jsonl(const InteractionDataset& d, std::ostream& os) {
  os << header_json(d).dump() << '\n';
  for (const auto& r : d.records) os << to_json(r).dump() << '\n';
}

inline std::string to_jsonl(const InteractionDataset& d) {
  std::ostringstream os;
  write_jsonl(d, os);
  return os.str();
}

inline void save(const InteractionDataset& d, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), ErrorCode::io_error, "cannot open '" + path + "' for writing");
  write_jsonl(d, os);
  require(static_cast<bool>(os), ErrorCode::io_error, "write to '" + path + "' failed");
}

inline InteractionDataset read_jsonl(std::istream& is, const std::string& name = "<stream>") {
  InteractionDataset d;
  std::string line;
  std::size_t lineno = 0;
  auto parse_error = [&](const std::string& what) {
    fail(ErrorCode::parse_error, name + ":" + std::to_string(lineno) + ": " + what);
  };
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      parse_error(std::string("malformed JSON: ") + e.what());
    }
    try {
      if (!have_header) {
        detail::reject_unknown(j, {"format_version", "game_fingerprint", "meta"}, "dataset header");
        if (j.at("format_version").get<int>() != kDatasetFormatVersion)
          fail(ErrorCode::format_version, name + ": unsupported dataset format_version");
        d.game_fingerprint = j.at("game_fingerprint").get<std::string>();
        const auto& m = j.at("meta");
        detail::reject_unknown(m,
                               {"game", "community_seed", "master_seed", "temp_msg", "temp_target", "zero_temp_msg",
                                "zero_temp_target", "created"},
                               "dataset meta");
        d.meta.game = GameSpec::from_json(m.at("game"));
        d.meta.community_seed = m.at("community_seed").get<std::uint64_t>();
        d.meta.master_seed = m.at("master_seed").get<std::uint64_t>();
        d.meta.temp_msg = m.at("temp_msg").get<double>();
        d.meta.temp_target = m.at("temp_target").get<double>();
        d.meta.zero_temp_msg = m.at("zero_temp_msg").get<bool>();
        d.meta.zero_temp_target = m.at("zero_temp_target").get<bool>();
        d.meta.created = m.at("created").get<std::string>();
        if (d.meta.game.fingerprint() != d.game_fingerprint)
          parse_error("header fingerprint does not match the embedded game");
        have_header = true;
        continue;
      }
      detail::reject_unknown(
          j, {"message", "trajectory", "hidden_target", "episode_seed", "speaker_id", "listener_id"}, "record");
      const int horizon = d.meta.game.horizon;
      InteractionRecord r;
      r.message = message_from_json(j.at("message"));
      require(valid_message(d.meta.game, r.message), ErrorCode::parse_error, "record message not valid for the game");
      r.trajectory = trajectory_from_json(j.at("trajectory"), d.game_fingerprint, horizon);
      if (!j.at("hidden_target").is_null())
        r.hidden_target = trajectory_from_json(j.at("hidden_target"), d.game_fingerprint, horizon);
      r.episode_seed = j.at("episode_seed").get<std::uint64_t>();
      r.speaker_id = j.at("speaker_id").get<int>();
      r.listener_id = j.at("listener_id").get<int>();
      d.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      parse_error(e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::format_version) throw;
      parse_error(e.what());
    }
  }
  if (!have_header) {
    lineno = 1;
    parse_error("missing header line");
  }
  return d;
}

inline InteractionDataset load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::io_error, "cannot open '" + path + "'");
  return read_jsonl(is, path);
}

/// Loads and checks that the dataset was generated from `game`.
inline InteractionDataset load(const std::string& path, const GameSpec& game) {
  auto d = load(path);
  require(d.game_fingerprint == game.fingerprint(), ErrorCode::fingerprint_mismatch,
          "dataset '" + path + "' was generated from game " + d.game_fingerprint + ", expected " + game.fingerprint());
  return d;
}

}  // namespace cla
