#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace cla {

/// Unit-cost Levenshtein distance between two token sequences.
template <class T>
std::size_t levenshtein(std::span<const T> a, std::span<const T> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag : 1 + std::min({diag, up, row[j - 1]});
      diag = up;
    }
  }
  return row[b.size()];
}

/// Edit distance divided by max(|a|, |b|, 1); lies in [0, 1].
template <class T>
double normalized_edit_distance(std::span<const T> a, std::span<const T> b) {
  const std::size_t denom = std::max<std::size_t>({a.size(), b.size(), 1});
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(denom);
}

}  // namespace cla
