#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tracefix/anomaly.hpp"

namespace tracefix {

// Restricted (optimal string alignment) Damerau-Levenshtein distance.
std::size_t dl_distance(std::span<const Token> s1, std::span<const Token> s2);

// 1 - d / max(|s1|, |s2|); two empty sequences are identical (1.0).
double dl_similarity(std::span<const Token> s1, std::span<const Token> s2);

enum class EditKind { Insert, Delete, Substitute, Transpose };

std::string_view to_string(EditKind kind);

// One step of the script turning the input trace into the corrected one.
// position indexes the input: Insert goes before input[position], Delete and
// Substitute act on input[position], Transpose swaps input[position] and
// input[position + 1].
struct Edit {
  EditKind kind = EditKind::Insert;
  std::size_t position = 0;
  std::optional<Token> from;  // input symbol(s) affected; first of the pair for Transpose
  std::optional<Token> to;    // symbol written; second of the pair for Transpose

  bool operator==(const Edit&) const = default;
};

// Edit script recovered from the distance table, ordered by position. Its
// length always equals dl_distance(input, corrected).
std::vector<Edit> localize_events(std::span<const Token> input, std::span<const Token> corrected);

}  // namespace tracefix
