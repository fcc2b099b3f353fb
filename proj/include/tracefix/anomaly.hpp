#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tracefix/eventlog.hpp"

namespace tracefix {

using Token = std::int32_t;
using TokenSeq = std::vector<Token>;

enum class AnomalyKind : std::uint8_t { Missing, Skip, Replace, Insert, Early, Late };

inline constexpr std::array<AnomalyKind, 6> kAllAnomalyKinds = {
    AnomalyKind::Missing, AnomalyKind::Skip,  AnomalyKind::Replace,
    AnomalyKind::Insert,  AnomalyKind::Early, AnomalyKind::Late};

std::string_view to_string(AnomalyKind kind);
AnomalyKind anomaly_kind_from_string(std::string_view name);

// Activities occupy 0..h-1; the three special tokens follow.
struct TokenVocab {
  std::size_t num_activities = 0;

  Token pad() const noexcept { return static_cast<Token>(num_activities); }
  Token cls() const noexcept { return static_cast<Token>(num_activities + 1); }
  Token missing() const noexcept { return static_cast<Token>(num_activities + 2); }
  std::size_t size() const noexcept { return num_activities + 3; }
  bool is_activity(Token t) const noexcept { return t >= 0 && static_cast<std::size_t>(t) < num_activities; }

  bool operator==(const TokenVocab&) const = default;
};

struct InjectionConfig {
  double r_case = 0.5;
  // Exactly one of r_act / fixed_count is set.
  std::optional<double> r_act = 0.3;
  std::optional<int> fixed_count;
  std::uint64_t seed = 0;
  std::vector<AnomalyKind> enabled_kinds{kAllAnomalyKinds.begin(), kAllAnomalyKinds.end()};
  // Relabel injected traces that coincide with a known variant.
  bool relabel_by_variant = true;

  void validate() const;
  // Number of anomalous events for a trace of the given length.
  std::size_t anomalies_for(std::size_t trace_len) const;
};

struct AnomalyRecord {
  AnomalyKind kind = AnomalyKind::Missing;
  // Index into the sequence the anomaly was applied to.
  std::size_t position = 0;
  // Missing/Skip/Replace: the activity that was removed or overwritten.
  // Early/Late: the activity that was moved.
  std::optional<Token> original_activity;
  // Replace/Insert: the activity written. Early/Late: the activity it was swapped with.
  std::optional<Token> new_activity;

  bool operator==(const AnomalyRecord&) const = default;
};

enum class Label : std::uint8_t { Normal = 0, Anomalous = 1 };

struct LabeledTrace {
  std::string case_id;
  TokenSeq input_tokens;   // [CLS] + mutated trace + [PAD]..., length max_len
  TokenSeq target_tokens;  // original trace + [PAD]..., length max_len - 1
  Label label = Label::Normal;
  std::vector<AnomalyRecord> records;
  std::size_t original_length = 0;
  std::size_t mutated_length = 0;

  bool injected() const noexcept { return !records.empty(); }
  // Unpadded views.
  TokenSeq mutated() const;
  TokenSeq original() const;

  bool operator==(const LabeledTrace&) const = default;
};

struct LabeledDataset {
  std::vector<LabeledTrace> items;
  TokenVocab vocab;
  std::size_t max_len = 0;
  InjectionConfig config;
  std::vector<std::string> activity_names;

  std::size_t count(Label label) const;
  std::size_t injected_count() const;
};

// 1 + M + ceil(r_act * M) (or 1 + M + fixed_count), M the longest trace.
std::size_t max_padded_length(const EventLog& log, double r_act);
std::size_t max_padded_length(const EventLog& log, const InjectionConfig& config);

// Applies one anomaly at `pos`. Positions are validated per kind and never clamped.
std::pair<TokenSeq, AnomalyRecord> apply_anomaly(TokenSeq seq, AnomalyKind kind, std::size_t pos,
                                                 std::mt19937_64& rng, const TokenVocab& vocab);

struct Injection {
  AnomalyKind kind;
  std::size_t position;
  bool operator==(const Injection&) const = default;
};

// Chooses kinds and non-interfering positions, sorted by descending position so
// that applying them in order never shifts a later target. `num_activities`
// rules out Replace when there is no alternative activity.
std::vector<Injection> select_injections(std::size_t trace_len, const InjectionConfig& config,
                                         std::mt19937_64& rng, std::size_t num_activities = 2);

// Undoes records (applied in descending position order) to recover the original.
TokenSeq revert_anomalies(TokenSeq mutated, const std::vector<AnomalyRecord>& records);

Label relabel(const TokenSeq& mutated, const TokenSeq& original,
              const std::vector<AnomalyRecord>& records, const VariantSet& variants,
              const BehavioralProfile& profile, bool use_variants = true);

LabeledDataset build_dataset(const EventLog& log, const InjectionConfig& config,
                             const VariantSet& variants, const BehavioralProfile& profile,
                             std::size_t max_len);

// Tokenizes a raw trace for inference: [CLS] + activities + [PAD]... up to max_len.
TokenSeq encode_input(const ActivitySeq& trace, const TokenVocab& vocab, std::size_t max_len);

}  // namespace tracefix
