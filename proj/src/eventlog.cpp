#include "tracefix/eventlog.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tracefix/csv.hpp"
#include "tracefix/error.hpp"

namespace tracefix {

ActivityVocab::ActivityVocab(const std::vector<std::string>& names) {
  for (const auto& n : names) {
    if (find(n)) throw ConfigError("duplicate activity name '" + n + "'");
    intern(n);
  }
}

ActivityId ActivityVocab::intern(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it != index_.end()) return it->second;
  auto id = static_cast<ActivityId>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<ActivityId> ActivityVocab::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& ActivityVocab::name(ActivityId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= names_.size())
    throw IndexError("activity id " + std::to_string(id) + " outside vocabulary of size " +
                     std::to_string(names_.size()));
  return names_[static_cast<std::size_t>(id)];
}

ActivitySeq Trace::activities() const {
  ActivitySeq out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(e.activity);
  return out;
}

EventLog::EventLog(std::vector<Trace> traces, ActivityVocab vocab)
    : traces_(std::move(traces)), vocab_(std::move(vocab)) {
  const auto h = static_cast<ActivityId>(vocab_.size());
  for (const auto& t : traces_) {
    if (t.events.empty()) throw DataError("trace '" + t.case_id + "' has no events");
    for (const auto& e : t.events)
      if (e.activity < 0 || e.activity >= h)
        throw IndexError("trace '" + t.case_id + "' references unknown activity id " +
                         std::to_string(e.activity));
  }
}

std::size_t EventLog::max_trace_length() const {
  std::size_t m = 0;
  for (const auto& t : traces_) m = std::max(m, t.size());
  return m;
}

EventLog EventLog::from_sequences(const std::vector<std::vector<std::string>>& seqs) {
  ActivityVocab vocab;
  std::vector<Trace> traces;
  traces.reserve(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    Trace t;
    t.case_id = "c" + std::to_string(i + 1);
    for (const auto& name : seqs[i]) t.events.push_back({t.case_id, vocab.intern(name), std::nullopt});
    traces.push_back(std::move(t));
  }
  return EventLog(std::move(traces), std::move(vocab));
}

namespace {

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  std::size_t found = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != name) continue;
    if (found != header.size()) throw ConfigError("column '" + name + "' appears more than once in header");
    found = i;
  }
  if (found == header.size()) throw ConfigError("column '" + name + "' not found in header");
  return found;
}

}  // namespace

void sort_by_time(Trace& t) {
  if (std::any_of(t.events.begin(), t.events.end(), [](const Event& e) { return !e.timestamp; })) return;
  std::stable_sort(t.events.begin(), t.events.end(),
                   [](const Event& a, const Event& b) { return *a.timestamp < *b.timestamp; });
}

EventLog parse_csv(std::istream& in, const CsvMapping& mapping) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw EmptyLogError("CSV input is empty");
  if (!header->empty() && header->front().rfind("\xEF\xBB\xBF", 0) == 0) header->front().erase(0, 3);

  const std::size_t case_col = column_index(*header, mapping.case_column);
  const std::size_t act_col = column_index(*header, mapping.activity_column);
  std::optional<std::size_t> ts_col;
  if (mapping.timestamp_column) ts_col = column_index(*header, *mapping.timestamp_column);
  if (case_col == act_col || (ts_col && (*ts_col == case_col || *ts_col == act_col)))
    throw ConfigError("the same CSV column is mapped to more than one role");

  ActivityVocab vocab;
  std::vector<Trace> traces;
  std::unordered_map<std::string, std::size_t> case_index;
  while (auto row = reader.next()) {
    if (row->size() != header->size())
      throw RowError(reader.line(), "expected " + std::to_string(header->size()) + " fields, got " +
                                        std::to_string(row->size()));
    Event e;
    e.case_id = (*row)[case_col];
    const std::string& act = (*row)[act_col];
    if (e.case_id.empty()) throw RowError(reader.line(), "empty case id");
    if (act.empty()) throw RowError(reader.line(), "empty activity");
    e.activity = vocab.intern(act);
    if (ts_col && !(*row)[*ts_col].empty()) {
      e.timestamp = parse_iso8601((*row)[*ts_col]);
      if (!e.timestamp) throw RowError(reader.line(), "unparsable timestamp '" + (*row)[*ts_col] + "'");
    }
    auto [it, inserted] = case_index.try_emplace(e.case_id, traces.size());
    if (inserted) traces.push_back(Trace{e.case_id, {}});
    traces[it->second].events.push_back(std::move(e));
  }
  if (traces.empty()) throw EmptyLogError("CSV input has a header but no rows");
  for (auto& t : traces) sort_by_time(t);
  return EventLog(std::move(traces), std::move(vocab));
}

void write_csv(std::ostream& out, const EventLog& log) {
  csv::write_row(out, {"case_id", "activity", "timestamp"});
  for (const auto& t : log.traces())
    for (const auto& e : t.events)
      csv::write_row(out, {t.case_id, log.vocab().name(e.activity),
                           e.timestamp ? format_iso8601(*e.timestamp) : std::string()});
}

LogStats compute_stats(const EventLog& log) {
  if (log.empty()) throw EmptyLogError();
  LogStats s;
  s.num_traces = log.size();
  s.num_activities = log.vocab().size();
  std::size_t total = 0;
  for (const auto& t : log.traces()) {
    total += t.size();
    s.max_case_length = std::max(s.max_case_length, t.size());
  }
  s.avg_case_length = static_cast<std::size_t>(
      std::llround(static_cast<double>(total) / static_cast<double>(log.size())));
  return s;
}

VariantSet extract_variants(const EventLog& log) {
  VariantSet v;
  for (const auto& t : log.traces()) v.insert(t.activities());
  return v;
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::StrictOrder: return "strict-order";
    case Relation::ReverseStrictOrder: return "reverse-strict-order";
    case Relation::Interleaving: return "interleaving";
    case Relation::Exclusive: return "exclusive";
  }
  return "?";
}

std::size_t BehavioralProfile::index(ActivityId a, ActivityId b) const {
  if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= h_ || static_cast<std::size_t>(b) >= h_)
    throw IndexError("behavioral profile index out of range");
  return static_cast<std::size_t>(a) * h_ + static_cast<std::size_t>(b);
}

bool BehavioralProfile::is_consistent() const {
  for (std::size_t a = 0; a < h_; ++a)
    for (std::size_t b = 0; b < h_; ++b) {
      Relation ab = cells_[a * h_ + b];
      Relation ba = cells_[b * h_ + a];
      switch (ab) {
        case Relation::StrictOrder:
          if (ba != Relation::ReverseStrictOrder) return false;
          break;
        case Relation::ReverseStrictOrder:
          if (ba != Relation::StrictOrder) return false;
          break;
        case Relation::Interleaving:
        case Relation::Exclusive:
          if (ba != ab) return false;
          break;
      }
    }
  return true;
}

BehavioralProfile compute_behavioral_profile(const EventLog& log) {
  const std::size_t h = log.vocab().size();
  std::vector<char> follows(h * h, 0);
  for (const auto& t : log.traces())
    for (std::size_t i = 0; i + 1 < t.events.size(); ++i)
      follows[static_cast<std::size_t>(t.events[i].activity) * h +
              static_cast<std::size_t>(t.events[i + 1].activity)] = 1;

  BehavioralProfile profile(h);
  for (std::size_t a = 0; a < h; ++a)
    for (std::size_t b = 0; b < h; ++b) {
      const bool ab = follows[a * h + b];
      const bool ba = follows[b * h + a];
      Relation r = Relation::Exclusive;
      if (ab && ba)
        r = Relation::Interleaving;
      else if (ab)
        r = Relation::StrictOrder;
      else if (ba)
        r = Relation::ReverseStrictOrder;
      profile.set(static_cast<ActivityId>(a), static_cast<ActivityId>(b), r);
    }
  return profile;
}

std::pair<EventLog, EventLog> train_test_split(const EventLog& log, double train_fraction,
                                               std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie strictly between 0 and 1, got " +
                      std::to_string(train_fraction));
  std::vector<std::size_t> order(log.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train =
      static_cast<std::size_t>(std::floor(static_cast<double>(log.size()) * train_fraction + 1e-9));
  std::vector<Trace> train, test;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_train ? train : test).push_back(log.traces()[order[i]]);
  return {EventLog(std::move(train), log.vocab()), EventLog(std::move(test), log.vocab())};
}

}  // namespace tracefix
