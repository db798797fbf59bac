#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cla/cla.hpp"

namespace cla::testing {

inline GameSpec lewis3() { return make_lewis(3); }
inline GameSpec lewis4() { return make_lewis(4); }

/// 2x2 grid, item in the far corner, horizon 2: 25 full-length trajectories.
inline GameSpec market2x2(int max_msg_len = 2) {
  return make_supermarket(2, 2, {{1, 1}}, {0}, {0, 0}, 2, letter_vocab(5), max_msg_len);
}

/// 3x3 grid with the item next to the start; "E, pick" ends the episode early.
inline GameSpec market3x3() {
  return make_supermarket(3, 3, {{1, 0}, {2, 2}}, {0}, {0, 0}, 3, letter_vocab(8), 2);
}

/// Two-item list on a 3x2 grid, for early termination and multi-pick paths.
inline GameSpec market3x2_two_items() {
  return make_supermarket(3, 2, {{1, 0}, {0, 1}}, {0, 1}, {0, 0}, 4, letter_vocab(6), 2);
}

inline CommunityConfig config_for(const GameSpec& g, double epsilon = 0.0, double temp_msg = 1.0) {
  CommunityConfig c;
  c.game = g;
  c.epsilon = epsilon;
  c.temp_msg = temp_msg;
  return c;
}

/// Zero-temperature speaker, noiseless listener, codebook covering every trajectory.
inline Community deterministic_community(const GameSpec& g, std::uint64_t seed = 0) {
  auto c = config_for(g);
  c.zero_temp_msg = true;
  c.codebook_k = make_space(g)->size();
  return build_community(c, seed);
}

inline ListenerPolicy codebook_listener(std::map<Message, Plan> book, double epsilon,
                                        DefaultBehavior d = DefaultBehavior::stay) {
  ListenerPolicy l;
  l.codebook = std::move(book);
  l.epsilon = epsilon;
  l.default_random = d == DefaultBehavior::random;
  return l;
}

/// A dataset with a random small game, community, size and metadata. Some
/// records drop their hidden target; `created` exercises JSON escaping.
inline InteractionDataset random_dataset(Rng& rng) {
  const std::vector<GameSpec> games{lewis3(), lewis4(), make_lewis(2, 1, {}, 2), market2x2(),
                                    make_supermarket(2, 2, {{1, 0}}, {0}, {0, 0}, 2, letter_vocab(5), 2, 0.9)};
  auto cfg = config_for(games[rng.below(games.size())], 0.5 * rng.uniform(), 0.2 + 2.0 * rng.uniform());
  cfg.n_speakers = 1 + static_cast<int>(rng.below(3));
  cfg.n_listeners = 1 + static_cast<int>(rng.below(3));
  cfg.temp_target = 0.2 + 2.0 * rng.uniform();
  cfg.zero_temp_target = rng.below(5) == 0;
  const auto c = build_community(cfg, rng.next());
  const int n = static_cast<int>(rng.below(40));
  InteractionDataset d;
  if (n == 0) {
    d = collect(c, 1, rng.next());
    d.records.clear();
  } else {
    d = collect(c, n, rng.next());
  }
  for (auto& r : d.records)
    if (rng.below(4) == 0) r.hidden_target.reset();
  d.meta.created = rng.below(2) ? "" : "2026-10-16T12:00:00Z \"quoted\" \\ \xc3\xa9";
  return d;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cla_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cla::testing
