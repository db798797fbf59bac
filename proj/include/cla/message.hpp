#pragma once

#include <compare>
#include <string>
#include <vector>

#include "cla/edit_distance.hpp"
#include "cla/error.hpp"
#include "cla/game.hpp"

namespace cla {

/// A token sequence over a game's vocabulary. The empty message is the null message.
struct Message {
  std::vector<int> tokens;

  bool is_null() const { return tokens.empty(); }
  std::size_t size() const { return tokens.size(); }

  friend bool operator==(const Message&, const Message&) = default;

  /// Shortest first, then lexicographic token order. This is the tie rule
  /// wherever several messages score equally.
  friend std::strong_ordering operator<=>(const Message& a, const Message& b) {
    if (auto c = a.tokens.size() <=> b.tokens.size(); c != 0) return c;
    return a.tokens <=> b.tokens;
  }
};

inline Message null_message() { return {}; }

/// Token edit distance divided by max(|m1|, |m2|, 1).
inline double message_distance(const Message& m1, const Message& m2) {
  return normalized_edit_distance<int>(m1.tokens, m2.tokens);
}

/// Space-joined token strings, e.g. "a b"; the null message renders as "".
inline std::string render(const GameSpec& game, const Message& m) {
  std::string s;
  for (std::size_t i = 0; i < m.tokens.size(); ++i) {
    if (i) s += ' ';
    s += game.vocab.at(static_cast<std::size_t>(m.tokens[i]));
  }
  return s;
}

inline Message parse_message(const GameSpec& game, const std::string& text) {
  Message m;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] == ' ') {
      ++pos;
      continue;
    }
    auto end = text.find(' ', pos);
    if (end == std::string::npos) end = text.size();
    m.tokens.push_back(game.token_id(text.substr(pos, end - pos)));
    pos = end;
  }
  require(static_cast<int>(m.size()) <= game.max_msg_len, ErrorCode::invalid_argument,
          "message '" + text + "' is longer than max_msg_len");
  return m;
}

inline bool valid_message(const GameSpec& game, const Message& m) {
  if (static_cast<int>(m.size()) > game.max_msg_len) return false;
  for (int t : m.tokens)
    if (t < 0 || t >= static_cast<int>(game.vocab.size())) return false;
  return true;
}

/// All messages with min_len <= length <= max_msg_len, in Message order.
inline std::vector<Message> message_space(const GameSpec& game, int min_len = 1,
                                          std::size_t cap = kDefaultEnumerationCap) {
  const std::size_t v = game.vocab.size();
  require(detail::capped_pow(v, static_cast<std::size_t>(game.max_msg_len), cap) <= cap, ErrorCode::enumeration_cap,
          "message space exceeds the enumeration cap of " + std::to_string(cap));
  std::vector<Message> out;
  for (int len = std::max(0, min_len); len <= game.max_msg_len; ++len) {
    std::vector<int> digits(static_cast<std::size_t>(len), 0);
    while (true) {
      out.push_back({digits});
      int i = len - 1;
      while (i >= 0 && ++digits[static_cast<std::size_t>(i)] == static_cast<int>(v)) digits[static_cast<std::size_t>(i--)] = 0;
      if (i < 0) break;
    }
  }
  return out;
}

/// Messages a speaker may emit: every sequence of length 1..L.
inline std::vector<Message> emission_space(const GameSpec& game) { return message_space(game, 1); }

inline json to_json(const Message& m) { return m.tokens; }

inline Message message_from_json(const json& j) {
  require(j.is_array(), ErrorCode::parse_error, "message must be an array of token ids");
  Message m;
  for (const auto& t : j) {
    require(t.is_number_integer(), ErrorCode::parse_error, "message tokens are integers");
    m.tokens.push_back(t.get<int>());
  }
  return m;
}

}  // namespace cla
