#include "tracefix/edit_distance.hpp"

#include <algorithm>

namespace tracefix {

namespace {

struct Table {
  std::size_t cols;
  std::vector<std::size_t> d;
  std::size_t& at(std::size_t i, std::size_t j) { return d[i * cols + j]; }
};

Table osa_table(std::span<const Token> a, std::span<const Token> b) {
  const std::size_t n = a.size(), m = b.size();
  Table t{m + 1, std::vector<std::size_t>((n + 1) * (m + 1))};
  for (std::size_t i = 0; i <= n; ++i) t.at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) t.at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      std::size_t best = std::min({t.at(i - 1, j) + 1, t.at(i, j - 1) + 1, t.at(i - 1, j - 1) + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
        best = std::min(best, t.at(i - 2, j - 2) + 1);
      t.at(i, j) = best;
    }
  }
  return t;
}

}  // namespace

std::size_t dl_distance(std::span<const Token> s1, std::span<const Token> s2) {
  if (s1.empty()) return s2.size();
  if (s2.empty()) return s1.size();
  // Three rolling rows are enough for the transposition lookback.
  const std::size_t m = s2.size();
  std::vector<std::size_t> prev2(m + 1), prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= s1.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = s1[i - 1] == s2[j - 1] ? 0 : 1;
      std::size_t best = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
      if (i > 1 && j > 1 && s1[i - 1] == s2[j - 2] && s1[i - 2] == s2[j - 1]) best = std::min(best, prev2[j - 2] + 1);
      cur[j] = best;
    }
    std::swap(prev2, prev);
    std::swap(prev, cur);
  }
  return prev[m];
}

double dl_similarity(std::span<const Token> s1, std::span<const Token> s2) {
  const std::size_t longest = std::max(s1.size(), s2.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(dl_distance(s1, s2)) / static_cast<double>(longest);
}

std::string_view to_string(EditKind kind) {
  switch (kind) {
    case EditKind::Insert: return "insert";
    case EditKind::Delete: return "delete";
    case EditKind::Substitute: return "substitute";
    case EditKind::Transpose: return "transpose";
  }
  return "?";
}

std::vector<Edit> localize_events(std::span<const Token> input, std::span<const Token> corrected) {
  Table t = osa_table(input, corrected);
  std::vector<Edit> script;
  std::size_t i = input.size(), j = corrected.size();
  while (i > 0 || j > 0) {
    const std::size_t here = t.at(i, j);
    if (i > 0 && j > 0 && input[i - 1] == corrected[j - 1] && t.at(i - 1, j - 1) == here) {
      --i;
      --j;
      continue;
    }
    if (i > 1 && j > 1 && input[i - 1] == corrected[j - 2] && input[i - 2] == corrected[j - 1] &&
        input[i - 1] != input[i - 2] && t.at(i - 2, j - 2) + 1 == here) {
      script.push_back({EditKind::Transpose, i - 2, input[i - 2], input[i - 1]});
      i -= 2;
      j -= 2;
      continue;
    }
    if (i > 0 && j > 0 && t.at(i - 1, j - 1) + 1 == here) {
      script.push_back({EditKind::Substitute, i - 1, input[i - 1], corrected[j - 1]});
      --i;
      --j;
      continue;
    }
    if (i > 0 && t.at(i - 1, j) + 1 == here) {
      script.push_back({EditKind::Delete, i - 1, input[i - 1], std::nullopt});
      --i;
      continue;
    }
    script.push_back({EditKind::Insert, i, std::nullopt, corrected[j - 1]});
    --j;
  }
  std::reverse(script.begin(), script.end());
  return script;
}

}  // namespace tracefix
