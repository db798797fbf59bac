#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "cla/community.hpp"
#include "cla/error.hpp"
#include "cla/inference.hpp"
#include "cla/semantics.hpp"

namespace cla {

struct InferenceConfig {
  double alpha = 1.0;
  MapVariant variant = MapVariant::literal;
  double smoothing = 0.0;
  double backoff_threshold = 0.5;
};

struct RunConfig {
  int n_episodes = 1000;
  std::uint64_t seed = 0;
  std::uint64_t community_seed = 0;
  std::string out = "out";
};

/// One experiment: game, community, inference, distances and run settings.
///
///   {"game": {...} | "game_file": "path",
///    "community": {...}, "inference": {...}, "distances": {...}, "run": {...}}
///
/// `game_file` is resolved relative to the config file. The top-level
/// "distances" section also configures the community's speakers.
struct ExperimentConfig {
  CommunityConfig community;
  InferenceConfig inference;
  RunConfig run;

  const GameSpec& game() const { return community.game; }
  const DistanceConfig& distances() const { return community.distances; }
};

inline ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  detail::reject_unknown(j, {"game", "game_file", "community", "inference", "distances", "run"}, "config");
  ExperimentConfig cfg;
  try {
    GameSpec game;
    if (j.contains("game")) {
      game = GameSpec::from_json(j["game"]);
    } else {
      require(j.contains("game_file"), ErrorCode::invalid_argument, "config needs 'game' or 'game_file'");
      const auto path = base_dir / j["game_file"].get<std::string>();
      std::ifstream is(path);
      require(static_cast<bool>(is), ErrorCode::invalid_argument, "game file '" + path.string() + "' not found");
      game = GameSpec::from_json(json::parse(is));
    }
    json community = j.value("community", json::object());
    if (j.contains("distances") && !community.contains("distances")) community["distances"] = j["distances"];
    cfg.community = community_config_from_json(community, game);

    if (j.contains("inference")) {
      const auto& inf = j["inference"];
      detail::reject_unknown(inf, {"alpha", "variant", "smoothing", "backoff_threshold"}, "inference");
      cfg.inference.alpha = inf.value("alpha", cfg.inference.alpha);
      if (inf.contains("variant")) cfg.inference.variant = parse_variant(inf["variant"].get<std::string>());
      cfg.inference.smoothing = inf.value("smoothing", cfg.inference.smoothing);
      cfg.inference.backoff_threshold = inf.value("backoff_threshold", cfg.inference.backoff_threshold);
    }
    if (j.contains("run")) {
      const auto& run = j["run"];
      detail::reject_unknown(run, {"n_episodes", "seed", "community_seed", "out"}, "run");
      cfg.run.n_episodes = run.value("n_episodes", cfg.run.n_episodes);
      cfg.run.seed = run.value("seed", cfg.run.seed);
      cfg.run.community_seed = run.value("community_seed", cfg.run.community_seed);
      cfg.run.out = run.value("out", cfg.run.out);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("config: ") + e.what());
  }
  require(cfg.inference.alpha > 0.0, ErrorCode::invalid_argument, "inference.alpha must be positive");
  require(cfg.inference.smoothing >= 0.0, ErrorCode::invalid_argument, "inference.smoothing must be non-negative");
  require(cfg.inference.backoff_threshold >= 0.0 && cfg.inference.backoff_threshold <= 1.0,
          ErrorCode::invalid_argument, "inference.backoff_threshold must lie in [0, 1]");
  require(cfg.run.n_episodes >= 1, ErrorCode::invalid_argument, "run.n_episodes must be positive");
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::io_error, "config file '" + path.string() + "' not found");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, "config '" + path.string() + "': " + e.what());
  }
  return experiment_config_from_json(j, path.parent_path());
}

}  // namespace cla
