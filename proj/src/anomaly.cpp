#include "tracefix/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "tracefix/error.hpp"

namespace tracefix {

std::string_view to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::Missing: return "missing";
    case AnomalyKind::Skip: return "skip";
    case AnomalyKind::Replace: return "replace";
    case AnomalyKind::Insert: return "insert";
    case AnomalyKind::Early: return "early";
    case AnomalyKind::Late: return "late";
  }
  return "?";
}

AnomalyKind anomaly_kind_from_string(std::string_view name) {
  for (auto k : kAllAnomalyKinds)
    if (to_string(k) == name) return k;
  throw ConfigError("unknown anomaly kind '" + std::string(name) + "'");
}

void InjectionConfig::validate() const {
  if (!(r_case >= 0.0 && r_case <= 1.0)) throw ConfigError("r_case must lie in [0, 1]");
  if (r_act.has_value() == fixed_count.has_value())
    throw ConfigError("exactly one of r_act and fixed_count must be set");
  if (r_act && !(*r_act > 0.0 && *r_act <= 1.0)) throw ConfigError("r_act must lie in (0, 1]");
  if (fixed_count && *fixed_count < 1) throw ConfigError("fixed_count must be at least 1");
  if (enabled_kinds.empty()) throw ConfigError("at least one anomaly kind must be enabled");
}

std::size_t InjectionConfig::anomalies_for(std::size_t trace_len) const {
  if (fixed_count) return static_cast<std::size_t>(*fixed_count);
  const auto k = std::llround(*r_act * static_cast<double>(trace_len));
  return static_cast<std::size_t>(std::max<long long>(1, k));
}

TokenSeq LabeledTrace::mutated() const {
  return TokenSeq(input_tokens.begin() + 1, input_tokens.begin() + 1 + static_cast<std::ptrdiff_t>(mutated_length));
}

TokenSeq LabeledTrace::original() const {
  return TokenSeq(target_tokens.begin(), target_tokens.begin() + static_cast<std::ptrdiff_t>(original_length));
}

std::size_t LabeledDataset::count(Label label) const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [&](const LabeledTrace& t) { return t.label == label; }));
}

std::size_t LabeledDataset::injected_count() const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [](const LabeledTrace& t) { return t.injected(); }));
}

std::size_t max_padded_length(const EventLog& log, double r_act) {
  if (log.empty()) throw EmptyLogError();
  if (!(r_act > 0.0 && r_act <= 1.0)) throw ConfigError("r_act must lie in (0, 1]");
  const auto m = log.max_trace_length();
  // The small epsilon keeps products like 0.3 * 10 from rounding up to 4.
  const auto extra = static_cast<std::size_t>(std::ceil(r_act * static_cast<double>(m) - 1e-9));
  return 1 + m + extra;
}

std::size_t max_padded_length(const EventLog& log, const InjectionConfig& config) {
  if (config.fixed_count) {
    if (log.empty()) throw EmptyLogError();
    if (*config.fixed_count < 1) throw ConfigError("fixed_count must be at least 1");
    return 1 + log.max_trace_length() + static_cast<std::size_t>(*config.fixed_count);
  }
  if (!config.r_act) throw ConfigError("injection config has neither r_act nor fixed_count");
  return max_padded_length(log, *config.r_act);
}

namespace {

bool position_valid(AnomalyKind kind, std::size_t pos, std::size_t len) {
  switch (kind) {
    case AnomalyKind::Missing:
    case AnomalyKind::Skip:
    case AnomalyKind::Replace: return pos < len;
    case AnomalyKind::Insert: return pos <= len;
    case AnomalyKind::Early: return pos >= 1 && pos < len;
    case AnomalyKind::Late: return len >= 2 && pos < len - 1;
  }
  return false;
}

// Element slots touched by an anomaly, as a closed interval.
std::pair<std::size_t, std::size_t> footprint(AnomalyKind kind, std::size_t pos) {
  if (kind == AnomalyKind::Early) return {pos - 1, pos};
  if (kind == AnomalyKind::Late) return {pos, pos + 1};
  return {pos, pos};
}

}  // namespace

std::pair<TokenSeq, AnomalyRecord> apply_anomaly(TokenSeq seq, AnomalyKind kind, std::size_t pos,
                                                 std::mt19937_64& rng, const TokenVocab& vocab) {
  if (!position_valid(kind, pos, seq.size()))
    throw PreconditionError("position " + std::to_string(pos) + " is invalid for a " +
                            std::string(to_string(kind)) + " anomaly on a sequence of length " +
                            std::to_string(seq.size()));
  const auto h = vocab.num_activities;
  AnomalyRecord rec{kind, pos, std::nullopt, std::nullopt};
  const auto at = seq.begin() + static_cast<std::ptrdiff_t>(pos);
  switch (kind) {
    case AnomalyKind::Missing:
      rec.original_activity = seq[pos];
      seq[pos] = vocab.missing();
      break;
    case AnomalyKind::Skip:
      rec.original_activity = seq[pos];
      seq.erase(at);
      break;
    case AnomalyKind::Replace: {
      const Token current = seq[pos];
      Token replacement;
      if (vocab.is_activity(current)) {
        if (h < 2) throw PreconditionError("replace needs at least two activities");
        std::uniform_int_distribution<Token> pick(0, static_cast<Token>(h) - 2);
        replacement = pick(rng);
        if (replacement >= current) ++replacement;
      } else {
        std::uniform_int_distribution<Token> pick(0, static_cast<Token>(h) - 1);
        replacement = pick(rng);
      }
      rec.original_activity = current;
      rec.new_activity = replacement;
      seq[pos] = replacement;
      break;
    }
    case AnomalyKind::Insert: {
      if (h < 1) throw PreconditionError("insert needs at least one activity");
      std::uniform_int_distribution<Token> pick(0, static_cast<Token>(h) - 1);
      rec.new_activity = pick(rng);
      seq.insert(at, *rec.new_activity);
      break;
    }
    case AnomalyKind::Early:
      rec.original_activity = seq[pos];
      rec.new_activity = seq[pos - 1];
      std::swap(seq[pos - 1], seq[pos]);
      break;
    case AnomalyKind::Late:
      rec.original_activity = seq[pos];
      rec.new_activity = seq[pos + 1];
      std::swap(seq[pos], seq[pos + 1]);
      break;
  }
  return {std::move(seq), rec};
}

std::vector<Injection> select_injections(std::size_t trace_len, const InjectionConfig& config,
                                         std::mt19937_64& rng, std::size_t num_activities) {
  if (trace_len < 1) throw PreconditionError("cannot inject into an empty trace");
  std::vector<AnomalyKind> kinds;
  for (auto k : config.enabled_kinds)
    if (k != AnomalyKind::Replace || num_activities >= 2) kinds.push_back(k);
  if (kinds.empty()) throw InjectionError("no enabled anomaly kind is applicable");

  const std::size_t k = config.anomalies_for(trace_len);
  constexpr int kMaxAttempts = 100;
  std::uniform_int_distribution<std::size_t> pick_kind(0, kinds.size() - 1);
  for (int attempt = 0; attempt <= kMaxAttempts; ++attempt) {
    std::vector<Injection> out;
    std::vector<char> used(trace_len + 1, 0);
    std::size_t removed = 0;
    std::size_t inserted = 0;
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) {
      const AnomalyKind kind = kinds[pick_kind(rng)];
      std::vector<std::size_t> candidates;
      for (std::size_t p = 0; p <= trace_len; ++p) {
        if (!position_valid(kind, p, trace_len)) continue;
        auto [lo, hi] = footprint(kind, p);
        bool free = true;
        for (auto s = lo; s <= hi; ++s) free = free && !used[s];
        if (free) candidates.push_back(p);
      }
      if (candidates.empty()) {
        ok = false;
        break;
      }
      std::uniform_int_distribution<std::size_t> pick_pos(0, candidates.size() - 1);
      const std::size_t p = candidates[pick_pos(rng)];
      auto [lo, hi] = footprint(kind, p);
      for (auto s = lo; s <= hi; ++s) used[s] = 1;
      if (kind == AnomalyKind::Skip) ++removed;
      if (kind == AnomalyKind::Insert) ++inserted;
      out.push_back({kind, p});
    }
    if (!ok || trace_len + inserted <= removed) continue;
    std::sort(out.begin(), out.end(),
              [](const Injection& a, const Injection& b) { return a.position > b.position; });
    return out;
  }
  throw InjectionError("could not place " + std::to_string(k) + " anomalies in a trace of length " +
                       std::to_string(trace_len) + " after " + std::to_string(kMaxAttempts) +
                       " retries");
}

TokenSeq revert_anomalies(TokenSeq seq, const std::vector<AnomalyRecord>& records) {
  std::vector<const AnomalyRecord*> order;
  for (const auto& r : records) order.push_back(&r);
  std::sort(order.begin(), order.end(),
            [](const AnomalyRecord* a, const AnomalyRecord* b) { return a->position < b->position; });
  for (const auto* r : order) {
    const std::size_t p = r->position;
    const auto at = seq.begin() + static_cast<std::ptrdiff_t>(p);
    switch (r->kind) {
      case AnomalyKind::Missing:
      case AnomalyKind::Replace: seq.at(p) = r->original_activity.value(); break;
      case AnomalyKind::Skip: seq.insert(at, r->original_activity.value()); break;
      case AnomalyKind::Insert: seq.erase(at); break;
      case AnomalyKind::Early: std::swap(seq.at(p - 1), seq.at(p)); break;
      case AnomalyKind::Late: std::swap(seq.at(p), seq.at(p + 1)); break;
    }
  }
  return seq;
}

Label relabel(const TokenSeq& mutated, const TokenSeq& original,
              const std::vector<AnomalyRecord>& records, const VariantSet& variants,
              const BehavioralProfile& profile, bool use_variants) {
  if (records.empty()) return Label::Normal;
  const auto h = static_cast<Token>(profile.num_activities());
  const bool has_missing =
      std::any_of(mutated.begin(), mutated.end(), [&](Token t) { return t < 0 || t >= h; });
  if (!has_missing && mutated == original) return Label::Normal;

  const bool all_swaps_interleaving =
      std::all_of(records.begin(), records.end(), [&](const AnomalyRecord& r) {
        if (r.kind != AnomalyKind::Early && r.kind != AnomalyKind::Late) return false;
        if (!r.original_activity || !r.new_activity) return false;
        return profile.at(*r.original_activity, *r.new_activity) == Relation::Interleaving;
      });
  if (all_swaps_interleaving) return Label::Normal;
  if (use_variants && !has_missing && variants.contains(mutated)) return Label::Normal;
  return Label::Anomalous;
}

namespace {

std::mt19937_64 trace_rng(std::uint64_t seed, std::uint64_t index, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream};
  return std::mt19937_64(seq);
}

TokenSeq pad_to(TokenSeq seq, std::size_t len, Token pad) {
  seq.resize(len, pad);
  return seq;
}

}  // namespace

TokenSeq encode_input(const ActivitySeq& trace, const TokenVocab& vocab, std::size_t max_len) {
  if (trace.size() + 1 > max_len)
    throw DataError("trace of length " + std::to_string(trace.size()) + " exceeds model capacity of " +
                    std::to_string(max_len - 1) + " events");
  TokenSeq out;
  out.reserve(max_len);
  out.push_back(vocab.cls());
  out.insert(out.end(), trace.begin(), trace.end());
  return pad_to(std::move(out), max_len, vocab.pad());
}

LabeledDataset build_dataset(const EventLog& log, const InjectionConfig& config,
                             const VariantSet& variants, const BehavioralProfile& profile,
                             std::size_t max_len) {
  config.validate();
  if (max_len < 2) throw ConfigError("max_len must be at least 2");
  LabeledDataset ds;
  ds.vocab = TokenVocab{log.vocab().size()};
  ds.max_len = max_len;
  ds.config = config;
  ds.activity_names = log.vocab().names();

  const std::size_t n = log.size();
  const auto n_inject = static_cast<std::size_t>(std::llround(config.r_case * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto select_rng = trace_rng(config.seed, 0, 0x5e1ec7u);
  std::shuffle(order.begin(), order.end(), select_rng);
  std::vector<char> inject(n, 0);
  for (std::size_t i = 0; i < n_inject; ++i) inject[order[i]] = 1;

  ds.items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Trace& trace = log.traces()[i];
    LabeledTrace item;
    item.case_id = trace.case_id;
    const TokenSeq original = trace.activities();
    TokenSeq mutated = original;
    if (original.size() > max_len - 1)
      throw DataError("trace '" + trace.case_id + "' has " + std::to_string(original.size()) +
                      " events, more than max_len - 1 = " + std::to_string(max_len - 1));
    if (inject[i]) {
      auto rng = trace_rng(config.seed, i, 0x1a7ec7u);
      for (const auto& inj : select_injections(original.size(), config, rng, ds.vocab.num_activities)) {
        auto [next, rec] = apply_anomaly(std::move(mutated), inj.kind, inj.position, rng, ds.vocab);
        mutated = std::move(next);
        item.records.push_back(rec);
      }
      item.label = relabel(mutated, original, item.records, variants, profile, config.relabel_by_variant);
    }
    if (mutated.size() > max_len - 1)
      throw DataError("trace '" + trace.case_id + "' grows to " + std::to_string(mutated.size()) +
                      " events after injection, more than max_len - 1 = " + std::to_string(max_len - 1));
    item.original_length = original.size();
    item.mutated_length = mutated.size();
    item.input_tokens = encode_input(mutated, ds.vocab, max_len);
    item.target_tokens = pad_to(original, max_len - 1, ds.vocab.pad());
    ds.items.push_back(std::move(item));
  }
  return ds;
}

}  // namespace tracefix
