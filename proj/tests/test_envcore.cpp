#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"

using namespace cla;
using namespace cla::testing;

namespace {

Trajectory with_rewards(std::vector<double> rewards) {
  Trajectory t;
  for (double r : rewards) t.steps.push_back({"s", 0, r});
  return t;
}

std::vector<int> random_actions(Rng& rng, std::size_t n_actions, std::size_t len) {
  std::vector<int> a(len);
  for (auto& x : a) x = static_cast<int>(rng.below(n_actions));
  return a;
}

}  // namespace

TEST(Step, WallClampKeepsAgentAndChargesStepPenalty) {
  const auto g = market2x2();
  const auto out = step(g, initial_state(g), kWest);
  EXPECT_EQ(out.next_state.agent, (Cell{0, 0}));
  EXPECT_DOUBLE_EQ(out.reward, -0.05);
  EXPECT_FALSE(out.next_state.ended);
}

TEST(Step, MovesFollowCompassConvention) {
  const auto g = make_supermarket(3, 3, {{2, 2}}, {0}, {1, 1}, 5, letter_vocab(2), 1);
  const auto s = initial_state(g);
  EXPECT_EQ(step(g, s, kNorth).next_state.agent, (Cell{1, 0}));
  EXPECT_EQ(step(g, s, kEast).next_state.agent, (Cell{2, 1}));
  EXPECT_EQ(step(g, s, kSouth).next_state.agent, (Cell{1, 2}));
  EXPECT_EQ(step(g, s, kWest).next_state.agent, (Cell{0, 1}));
  EXPECT_EQ(step(g, s, kPick).next_state.agent, (Cell{1, 1}));
}

TEST(Step, PickOnListedItemCollectsAndPaysItemReward) {
  const auto g = market3x3();
  auto s = step(g, initial_state(g), kEast).next_state;
  const auto out = step(g, s, kPick);
  EXPECT_EQ(out.next_state.collected, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(out.reward, 1.0);
  EXPECT_TRUE(out.next_state.ended);  // the whole list is collected
  EXPECT_TRUE(is_terminal(g, out.next_state));
}

TEST(Step, PickOnUnlistedItemOrEmptyCellOnlyCostsAStep) {
  const auto g = market3x3();  // item 1 at (2,2) is not on the list
  GameState s = initial_state(g);
  s.agent = {2, 2};
  const auto out = step(g, s, kPick);
  EXPECT_TRUE(out.next_state.collected.empty());
  EXPECT_DOUBLE_EQ(out.reward, -0.05);
  EXPECT_DOUBLE_EQ(step(g, initial_state(g), kPick).reward, -0.05);
}

TEST(Step, SecondPickOfCollectedItemEarnsNothing) {
  const auto g = market3x2_two_items();
  auto s = step(g, initial_state(g), kEast).next_state;
  s = step(g, s, kPick).next_state;
  const auto again = step(g, s, kPick);
  EXPECT_DOUBLE_EQ(again.reward, -0.05);
  EXPECT_EQ(again.next_state.collected, std::vector<int>{0});
  EXPECT_FALSE(again.next_state.ended);
}

TEST(Step, LewisCorrectPickIsTerminalWithUnitReward) {
  const auto g = lewis3();
  const auto hit = step(g, initial_state(g), 0);
  EXPECT_TRUE(is_terminal(g, hit.next_state));
  EXPECT_DOUBLE_EQ(hit.reward, 1.0);
  EXPECT_DOUBLE_EQ(step(g, initial_state(g), 2).reward, 0.0);
}

TEST(Step, RejectsInvalidActionAndTerminalState) {
  const auto g = lewis3();
  try {
    step(g, initial_state(g), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_action);
  }
  const auto done = step(g, initial_state(g), 1).next_state;
  try {
    step(g, done, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::terminal_state);
  }
}

TEST(Enumerate, LewisHasOneTrajectoryPerCandidate) {
  const auto ts = enumerate_trajectories(lewis3());
  ASSERT_EQ(ts.size(), 3u);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(ts[static_cast<std::size_t>(k)].actions(), std::vector<int>{k});
}

TEST(Enumerate, SupermarketCounts) {
  EXPECT_EQ(enumerate_trajectories(make_supermarket(2, 2, {{1, 1}}, {0}, {0, 0}, 1, letter_vocab(2), 1)).size(), 5u);
  EXPECT_EQ(enumerate_trajectories(market2x2()).size(), 25u);
  // "E, pick" ends the episode after two steps, merging five length-3 continuations.
  EXPECT_EQ(enumerate_trajectories(market3x3()).size(), 121u);
}

TEST(Enumerate, SortedUniqueAndReplayable) {
  for (const auto& g : {lewis4(), market2x2(), market3x3(), market3x2_two_items()}) {
    const auto ts = enumerate_trajectories(g);
    std::set<std::string> keys;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      EXPECT_TRUE(keys.insert(ts[i].key).second);
      if (i) {
        EXPECT_LT(ts[i - 1].key, ts[i].key);
      }
      EXPECT_EQ(replay(g, ts[i].actions()), ts[i]);
    }
  }
}

TEST(Enumerate, CapIsEnforced) {
  const auto g = make_supermarket(3, 3, {{2, 2}}, {0}, {0, 0}, 8, letter_vocab(2), 1);
  try {
    enumerate_trajectories(g, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::enumeration_cap);
  }
}

TEST(Return, DiscountedSums) {
  EXPECT_DOUBLE_EQ(trajectory_return(with_rewards({1, 1, 1}), 0.5), 1.75);
  EXPECT_DOUBLE_EQ(trajectory_return(with_rewards({}), 0.9), 0.0);
  EXPECT_DOUBLE_EQ(trajectory_return(with_rewards({2, 9}), 0.0), 2.0);
}

TEST(Return, SupermarketOptimalPath) {
  const auto g = market3x3();
  const auto t = replay(g, std::vector<int>{kEast, kPick});
  EXPECT_DOUBLE_EQ(trajectory_return(t, g.gamma), -0.05 + 0.95 * 1.0);
  const auto space = make_space(g);
  const auto best = std::max_element(space->values().begin(), space->values().end()) - space->values().begin();
  EXPECT_EQ((*space)[static_cast<std::size_t>(best)].key, t.key);
}

TEST(Rollout, CodebookListenerFollowsPlan) {
  const auto g = lewis3();
  const auto l = codebook_listener({{Message{{0}}, {0}}, {Message{{1}}, {1}}, {Message{{2}}, {2}}}, 0.0);
  Rng rng(1);
  EXPECT_EQ(rollout(g, l, parse_message(g, "b"), rng).actions(), std::vector<int>{1});
}

TEST(Rollout, HorizonZeroGivesEmptyTrajectory) {
  const auto g = make_supermarket(2, 2, {{1, 1}}, {0}, {0, 0}, 0, letter_vocab(2), 1);
  Rng rng(3);
  const auto t = rollout(g, message_blind_listener({}), null_message(), rng);
  EXPECT_TRUE(t.empty());
  EXPECT_EQ(enumerate_trajectories(g).size(), 1u);
}

TEST(Rollout, SameSeedSameTrajectory) {
  const auto g = market3x3();
  const auto l = codebook_listener({{Message{{1}}, {kEast, kPick}}}, 0.1);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng a(seed), b(seed);
    EXPECT_EQ(rollout(g, l, Message{{1}}, a), rollout(g, l, Message{{1}}, b));
  }
}

TEST(Rollout, RejectsInvalidMessage) {
  Rng rng(0);
  EXPECT_THROW(rollout(lewis3(), message_blind_listener({}), Message{{7}}, rng), Error);
}

TEST(TrajectoryDistance, Examples) {
  const auto l = lewis3();
  const auto t0 = replay(l, std::vector<int>{0}), t1 = replay(l, std::vector<int>{1});
  EXPECT_EQ(trajectory_distance(t0, t0), 0.0);
  EXPECT_EQ(trajectory_distance(t0, t1), 1.0);
  const auto g = market3x3();
  EXPECT_EQ(trajectory_distance(replay(g, std::vector<int>{kNorth, kEast}), replay(g, std::vector<int>{kNorth, kWest})),
            1.0 / 3.0);  // padded to the horizon of 3
  const auto g2 = market2x2();
  EXPECT_EQ(trajectory_distance(replay(g2, std::vector<int>{kNorth, kEast}), replay(g2, std::vector<int>{kNorth, kWest})),
            0.5);
}

TEST(TrajectoryDistance, CrossGameIsDomainMismatch) {
  try {
    trajectory_distance(replay(lewis3(), std::vector<int>{0}), replay(lewis4(), std::vector<int>{0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::domain_mismatch);
  }
}

// Early termination produces sequences of different lengths; the distance
// must remain a metric on every enumerated space.
TEST(TrajectoryDistance, MetricOnEnumeratedSpaces) {
  Rng rng(11);
  for (const auto& g : {market3x3(), market3x2_two_items()}) {
    const auto space = make_space(g);
    const auto n = space->size();
    for (int k = 0; k < 3000; ++k) {
      const auto i = rng.below(n), j = rng.below(n), m = rng.below(n);
      const double dij = space->distance(i, j);
      EXPECT_EQ(dij, space->distance(j, i));
      EXPECT_EQ(dij == 0.0, i == j);
      EXPECT_LE(space->distance(i, m), dij + space->distance(j, m) + 1e-12);
    }
  }
}

TEST(Levenshtein, AgreesWithDefinitionOnRandomPairs) {
  Rng rng(5);
  for (int k = 0; k < 500; ++k) {
    const auto a = random_actions(rng, 3, rng.below(6));
    const auto b = random_actions(rng, 3, rng.below(6));
    const auto d = levenshtein<int>(a, b);
    EXPECT_EQ(d, levenshtein<int>(b, a));
    EXPECT_LE(d, std::max(a.size(), b.size()));
    EXPECT_GE(d, a.size() > b.size() ? a.size() - b.size() : b.size() - a.size());
  }
  const std::vector<int> kitten{1, 2, 3, 3, 4, 5}, sitting{6, 2, 3, 3, 2, 5, 7};
  EXPECT_EQ(levenshtein<int>(kitten, sitting), 3u);
}

TEST(GameSpecJson, RoundTripAndFingerprint) {
  for (const auto& g : {lewis3(), market3x3(), market3x2_two_items()}) {
    const auto back = GameSpec::from_json(g.to_json());
    EXPECT_EQ(back, g);
    EXPECT_EQ(back.fingerprint(), g.fingerprint());
    EXPECT_EQ(g.fingerprint().size(), 16u);
  }
  EXPECT_NE(lewis3().fingerprint(), lewis4().fingerprint());
  EXPECT_NE(make_lewis(3, 1).fingerprint(), lewis3().fingerprint());
}

TEST(GameSpecJson, RejectsUnknownFieldsAndBadValues) {
  auto j = lewis3().to_json();
  j["colour"] = "blue";
  EXPECT_THROW(GameSpec::from_json(j), Error);
  auto k = market3x3().to_json();
  k["layout"]["start"] = {5, 5};
  EXPECT_THROW(GameSpec::from_json(k), Error);
  auto h = lewis3().to_json();
  h["horizon"] = 2;
  EXPECT_THROW(GameSpec::from_json(h), Error);
}

TEST(Rng, DerivedStreamsAreOrderIndependentAndDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) EXPECT_TRUE(seen.insert(derive_seed(9, {i, 0})).second);
  EXPECT_EQ(derive_seed(9, {3, 1}), derive_seed(9, {3, 1}));
  EXPECT_NE(derive_seed(9, {3, 1}), derive_seed(9, {1, 3}));
}

TEST(Rng, BelowIsRoughlyUniform) {
  Rng rng(77);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int k = 0; k < n; ++k) ++counts[rng.below(6)];
  for (int c : counts) EXPECT_NEAR(c, n / 6.0, 5 * std::sqrt(n * (1.0 / 6) * (5.0 / 6)));
}
