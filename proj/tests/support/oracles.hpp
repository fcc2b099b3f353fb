#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "tracefix/process_model.hpp"

namespace tftest {

// Optimal-string-alignment distance by direct recursion on suffixes:
// drop the head of either side, substitute/match heads, or swap two heads.
// Memoized on suffix lengths only to keep the exhaustive sweep affordable.
template <class Seq>
std::size_t osa_oracle(const Seq& a, const Seq& b) {
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> memo((a.size() + 1) * (b.size() + 1), kUnset);
  std::function<std::size_t(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t j) -> std::size_t {
    const std::size_t ra = a.size() - i, rb = b.size() - j;
    if (ra == 0) return rb;
    if (rb == 0) return ra;
    std::size_t& slot = memo[i * (b.size() + 1) + j];
    if (slot != kUnset) return slot;
    std::size_t best = rec(i + 1, j) + 1;
    best = std::min(best, rec(i, j + 1) + 1);
    best = std::min(best, rec(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1));
    if (ra >= 2 && rb >= 2 && a[i] == b[j + 1] && a[i + 1] == b[j]) best = std::min(best, rec(i + 2, j + 2) + 1);
    slot = best;
    return best;
  };
  return rec(0, 0);
}

// All sequences over {0..alphabet-1} with length <= max_len.
inline std::vector<std::vector<int>> all_sequences(int alphabet, std::size_t max_len) {
  std::vector<std::vector<int>> out{{}};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (int s = 0; s < alphabet; ++s) {
        auto next = out[i];
        next.push_back(s);
        out.push_back(std::move(next));
      }
    begin = end;
  }
  return out;
}

using Language = std::set<std::vector<std::string>>;

inline void interleavings(const std::vector<std::string>& x, std::size_t i, const std::vector<std::string>& y,
                          std::size_t j, std::vector<std::string>& cur, Language& out) {
  if (i == x.size() && j == y.size()) {
    out.insert(cur);
    return;
  }
  if (i < x.size()) {
    cur.push_back(x[i]);
    interleavings(x, i + 1, y, j, cur, out);
    cur.pop_back();
  }
  if (j < y.size()) {
    cur.push_back(y[j]);
    interleavings(x, i, y, j + 1, cur, out);
    cur.pop_back();
  }
}

// Exact language of a block-structured model: concatenation for sequences,
// union for choices, shuffle product for parallel blocks.
inline Language enumerate_language(const tracefix::ProcessNode& n) {
  using K = tracefix::ProcessNode::Kind;
  if (n.kind == K::Activity) return {{n.activity}};
  Language acc;
  if (n.kind == K::Choice) {
    for (const auto& c : n.children) {
      auto l = enumerate_language(c);
      acc.insert(l.begin(), l.end());
    }
    return acc;
  }
  acc = {{}};
  for (const auto& c : n.children) {
    const Language child = enumerate_language(c);
    Language next;
    for (const auto& prefix : acc)
      for (const auto& word : child) {
        if (n.kind == K::Sequence) {
          auto joined = prefix;
          joined.insert(joined.end(), word.begin(), word.end());
          next.insert(std::move(joined));
        } else {
          std::vector<std::string> cur;
          interleavings(prefix, 0, word, 0, cur, next);
        }
      }
    acc = std::move(next);
  }
  return acc;
}

}  // namespace tftest
