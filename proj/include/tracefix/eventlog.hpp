#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tracefix/timestamp.hpp"

namespace tracefix {

using ActivityId = std::int32_t;
using ActivitySeq = std::vector<ActivityId>;

struct Activity {
  ActivityId id = 0;
  std::string name;
};

// Activity alphabet. Ids are dense 0..size()-1 in insertion order.
class ActivityVocab {
public:
  ActivityVocab() = default;
  explicit ActivityVocab(const std::vector<std::string>& names);

  // Returns the id of `name`, adding it if it is new.
  ActivityId intern(std::string_view name);
  std::optional<ActivityId> find(std::string_view name) const;
  const std::string& name(ActivityId id) const;
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  bool operator==(const ActivityVocab& other) const { return names_ == other.names_; }

private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, ActivityId> index_;
};

struct Event {
  std::string case_id;
  ActivityId activity = 0;
  std::optional<Timestamp> timestamp;
};

struct Trace {
  std::string case_id;
  std::vector<Event> events;

  std::size_t size() const noexcept { return events.size(); }
  ActivitySeq activities() const;
};

// A parsed log. Immutable once constructed; the constructor checks that every
// trace is non-empty and every activity id resolves in the vocabulary.
class EventLog {
public:
  EventLog() = default;
  EventLog(std::vector<Trace> traces, ActivityVocab vocab);

  const std::vector<Trace>& traces() const noexcept { return traces_; }
  const ActivityVocab& vocab() const noexcept { return vocab_; }
  std::size_t size() const noexcept { return traces_.size(); }
  bool empty() const noexcept { return traces_.empty(); }
  std::size_t max_trace_length() const;

  // Convenience for tests and the synthetic generator: builds a log from
  // name sequences, interning activities in first-seen order.
  static EventLog from_sequences(const std::vector<std::vector<std::string>>& seqs);

private:
  std::vector<Trace> traces_;
  ActivityVocab vocab_;
};

struct CsvMapping {
  std::string case_column = "case_id";
  std::string activity_column = "activity";
  std::optional<std::string> timestamp_column = "timestamp";
};

// Groups rows by case id (cases ordered by first appearance), stable-sorts each
// case by timestamp, and interns activities in first-seen row order.
EventLog parse_csv(std::istream& in, const CsvMapping& mapping = {});

// Stable sort by timestamp; a trace with any missing timestamp keeps file order.
void sort_by_time(Trace& trace);

// Writes "case_id,activity,timestamp" rows; the timestamp column is empty for
// events without one.
void write_csv(std::ostream& out, const EventLog& log);

struct XesDiagnostics {
  std::size_t empty_traces_skipped = 0;
  std::size_t ignored_elements = 0;  // extensions, globals, classifiers
};

// Minimal XES reader: <log>/<trace>/<event> with "concept:name" and
// "time:timestamp" attributes. Anything else is ignored and counted.
EventLog parse_xes(std::istream& in, XesDiagnostics* diagnostics = nullptr);

struct LogStats {
  std::size_t num_traces = 0;
  std::size_t num_activities = 0;
  std::size_t avg_case_length = 0;  // rounded to nearest
  std::size_t max_case_length = 0;

  bool operator==(const LogStats&) const = default;
};

LogStats compute_stats(const EventLog& log);

class VariantSet {
public:
  void insert(ActivitySeq seq) { variants_.insert(std::move(seq)); }
  bool contains(const ActivitySeq& seq) const { return variants_.count(seq) != 0; }
  std::size_t size() const noexcept { return variants_.size(); }
  bool empty() const noexcept { return variants_.empty(); }
  const std::set<ActivitySeq>& items() const noexcept { return variants_; }

private:
  std::set<ActivitySeq> variants_;
};

VariantSet extract_variants(const EventLog& log);

enum class Relation : std::uint8_t { StrictOrder, ReverseStrictOrder, Interleaving, Exclusive };

std::string_view to_string(Relation r);

// Pairwise activity relations from the directly-follows relation a>b:
// a>b only -> strict order, b>a only -> reverse, both -> interleaving,
// neither -> exclusive.
class BehavioralProfile {
public:
  BehavioralProfile() = default;
  explicit BehavioralProfile(std::size_t num_activities)
      : h_(num_activities), cells_(num_activities * num_activities, Relation::Exclusive) {}

  Relation at(ActivityId a, ActivityId b) const { return cells_[index(a, b)]; }
  void set(ActivityId a, ActivityId b, Relation r) { cells_[index(a, b)] = r; }
  std::size_t num_activities() const noexcept { return h_; }
  bool is_consistent() const;

private:
  std::size_t index(ActivityId a, ActivityId b) const;
  std::size_t h_ = 0;
  std::vector<Relation> cells_;
};

BehavioralProfile compute_behavioral_profile(const EventLog& log);

// Seeded permutation, first floor(n * train_fraction) traces go to the first
// log. Both halves keep the full vocabulary.
std::pair<EventLog, EventLog> train_test_split(const EventLog& log, double train_fraction,
                                               std::uint64_t seed);

}  // namespace tracefix
