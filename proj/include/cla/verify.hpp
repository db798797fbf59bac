#pragma once

// Brute-force reference computations, written independently of the fast
// paths in inference/semantics (own enumeration, own edit distance, own
// returns, sort-based argmax). Used by `cla oracle-check` and the tests.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cla/community.hpp"
#include "cla/inference.hpp"
#include "cla/policy.hpp"
#include "cla/rng.hpp"

namespace cla::verify {

struct Candidate {
  std::vector<int> actions;
  std::vector<double> rewards;
  std::string key;
};

inline void dfs(const GameSpec& g, const GameState& s, Candidate& cur, std::vector<Candidate>& out) {
  if (is_terminal(g, s)) {
    cur.key = canonical_key(state_digest(g, initial_state(g)), cur.actions);
    out.push_back(cur);
    return;
  }
  for (int a = 0; a < static_cast<int>(g.num_actions()); ++a) {
    auto o = step(g, s, a);
    cur.actions.push_back(a);
    cur.rewards.push_back(o.reward);
    dfs(g, o.next_state, cur, out);
    cur.actions.pop_back();
    cur.rewards.pop_back();
  }
}

inline std::vector<Candidate> all_candidates(const GameSpec& g) {
  std::vector<Candidate> out;
  Candidate cur;
  dfs(g, initial_state(g), cur, out);
  return out;
}

inline double value(const Candidate& c, double gamma) {
  double v = 0.0;
  for (std::size_t k = 0; k < c.rewards.size(); ++k) v += std::pow(gamma, static_cast<double>(k)) * c.rewards[k];
  return v;
}

/// Full-matrix Levenshtein over horizon-padded action sequences, normalized.
inline double distance(const std::vector<int>& a0, const std::vector<int>& b0, int horizon) {
  const std::size_t n = std::max({static_cast<std::size_t>(horizon), a0.size(), b0.size()});
  std::vector<int> a = a0, b = b0;
  a.resize(n, -1);
  b.resize(n, -1);
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(n + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= n; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return n == 0 ? 0.0 : static_cast<double>(d[n][n]) / static_cast<double>(n);
}

/// Probability that a listener following its plan for `m` produces `c`.
inline double path_probability(const GameSpec& g, const ListenerPolicy& l, const Message& m, const Candidate& c) {
  const auto it = l.codebook.find(m);
  const bool random = it == l.codebook.end() && l.default_random;
  const Plan& plan = it != l.codebook.end() ? it->second : l.default_plan;
  const double n = static_cast<double>(g.num_actions());
  double p = 1.0;
  for (std::size_t t = 0; t < c.actions.size(); ++t) {
    if (random) {
      p *= 1.0 / n;
      continue;
    }
    const int intended = t < plan.size() ? plan[t] : g.idle_action();
    p *= (c.actions[t] == intended ? 1.0 - l.epsilon : 0.0) + l.epsilon / n;
  }
  return p;
}

/// Documented argmax: highest score, then highest V, then smallest key; ties within 1e-12.
inline std::string brute_force_map_key(const GameSpec& g, const std::vector<int>& observed, const Message& m,
                                       double alpha, MapVariant variant, const ListenerPolicy* listener) {
  const auto cands = all_candidates(g);
  struct Row {
    double score, v;
    std::string key;
  };
  std::vector<Row> rows;
  for (const auto& c : cands) {
    double d = 0.0;
    if (variant == MapVariant::literal) {
      d = distance(c.actions, observed, g.horizon);
    } else {
      for (const auto& o : cands) d += path_probability(g, *listener, m, o) * distance(c.actions, o.actions, g.horizon);
    }
    const double v = value(c, g.gamma);
    rows.push_back({v - alpha * d, v, c.key});
  }
  double top = -1e300;
  for (const auto& r : rows) top = std::max(top, r.score);
  std::erase_if(rows, [&](const Row& r) { return r.score < top - 1e-12; });
  double vtop = -1e300;
  for (const auto& r : rows) vtop = std::max(vtop, r.v);
  std::erase_if(rows, [&](const Row& r) { return r.v < vtop - 1e-12; });
  return std::min_element(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.key < b.key; })->key;
}

/// m*_B by scoring every message of length 0..L; ties to shortest, then lexicographic.
inline Message brute_force_optimal_message(const GameSpec& g, const ListenerPolicy& l, const std::vector<int>& target) {
  Candidate t;
  t.actions = target;
  std::vector<Message> all;
  for (int len = 0; len <= g.max_msg_len; ++len) {
    std::vector<Message> next;
    if (len == 0) {
      next.push_back({});
    } else {
      for (const auto& m : all)
        if (static_cast<int>(m.size()) == len - 1)
          for (int tok = 0; tok < static_cast<int>(g.vocab.size()); ++tok) {
            Message e = m;
            e.tokens.push_back(tok);
            next.push_back(e);
          }
    }
    all.insert(all.end(), next.begin(), next.end());
  }
  double best = -1.0;
  for (const auto& m : all) best = std::max(best, path_probability(g, l, m, t));
  std::vector<Message> ties;
  for (const auto& m : all)
    if (path_probability(g, l, m, t) >= best - 1e-12) ties.push_back(m);
  return *std::min_element(ties.begin(), ties.end());
}

struct SuiteResult {
  std::string name;
  int passed = 0;
  int failed = 0;
};

/// Randomized MAP equivalence cases on one community's game, both variants.
inline SuiteResult check_map_equivalence(const Community& c, int cases, std::uint64_t seed) {
  SuiteResult r{"map_target == brute force (" + std::string(c.game().kind == GameKind::lewis ? "lewis" : "supermarket") + ")"};
  const auto& space = *c.space;
  const auto& listener = c.listeners.front();
  const ListenerModel model = exact_listener_model(listener, c.space);
  const auto emission = emission_space(c.game());
  Rng rng(seed);
  for (int k = 0; k < cases; ++k) {
    const Message m = emission[rng.below(emission.size())];
    const auto& tau = space[rng.below(space.size())];
    const double alpha = std::exp(std::log(1e-3) + rng.uniform() * (std::log(1e3) - std::log(1e-3)));
    for (auto variant : {MapVariant::literal, MapVariant::expected}) {
      const auto got = map_target({m, tau}, space, {alpha, variant}, &model).key;
      const auto want = brute_force_map_key(c.game(), tau.actions(), m, alpha, variant, &listener);
      (got == want ? r.passed : r.failed)++;
    }
  }
  return r;
}

inline SuiteResult check_optimal_message(const Community& c) {
  SuiteResult r{"optimal_message == brute force"};
  for (const auto& l : c.listeners)
    for (const auto& t : c.space->trajectories()) {
      const bool ok = optimal_message(l, c.space, t) == brute_force_optimal_message(c.game(), l, t.actions());
      (ok ? r.passed : r.failed)++;
    }
  return r;
}

inline SuiteResult check_speaker_normalization(const Community& c) {
  SuiteResult r{"speaker distributions sum to 1"};
  for (const auto& s : c.speakers)
    for (const auto& t : c.space->trajectories()) {
      double total = 0.0;
      for (double p : speaker_distribution(s, t)) total += p;
      (std::abs(total - 1.0) <= 1e-9 ? r.passed : r.failed)++;
    }
  return r;
}

}  // namespace cla::verify
