#include <doctest.h>

#include <sstream>

#include "tracefix/error.hpp"
#include "tracefix/eventlog.hpp"

using namespace tracefix;

namespace {

std::vector<std::vector<std::string>> name_sequences(const EventLog& log) {
  std::vector<std::vector<std::string>> out;
  for (const auto& t : log.traces()) {
    std::vector<std::string> names;
    for (auto id : t.activities()) names.push_back(log.vocab().name(id));
    out.push_back(names);
  }
  return out;
}

EventLog csv_log(const std::string& text, const CsvMapping& m = {}) {
  std::istringstream in(text);
  return parse_csv(in, m);
}

}  // namespace

TEST_CASE("parse_csv groups rows by case in first-appearance order") {
  const EventLog log = csv_log("case_id,activity,timestamp\nc1,a,\nc2,a,\nc1,b,\n");
  REQUIRE(log.size() == 2);
  CHECK(log.traces()[0].case_id == "c1");
  CHECK(log.traces()[1].case_id == "c2");
  CHECK(log.vocab().names() == std::vector<std::string>{"a", "b"});
  CHECK(log.traces()[0].activities() == ActivitySeq{0, 1});
  CHECK(log.traces()[1].activities() == ActivitySeq{0});
}

TEST_CASE("parse_csv sorts each case by timestamp, stably on ties") {
  const EventLog log = csv_log(
      "activity,case_id,timestamp\n"
      "c,k,2020-01-01T10:00:00\n"
      "a,k,2020-01-01T08:00:00\n"
      "b,k,2020-01-01T08:00:00\n");
  CHECK(name_sequences(log) == std::vector<std::vector<std::string>>{{"a", "b", "c"}});
}

TEST_CASE("a case with a missing timestamp keeps file order") {
  const EventLog log = csv_log(
      "case_id,activity,timestamp\n"
      "k,a,2020-01-01T10:00:00\n"
      "k,b,\n"
      "k,c,2020-01-01T08:00:00\n");
  CHECK(name_sequences(log) == std::vector<std::vector<std::string>>{{"a", "b", "c"}});
}

TEST_CASE("parse_csv custom mapping and no timestamp column") {
  CsvMapping m;
  m.case_column = "Case";
  m.activity_column = "Task";
  m.timestamp_column.reset();
  const EventLog log = csv_log("Task,Case,Other\nx,1,q\ny,1,r\n", m);
  CHECK(name_sequences(log) == std::vector<std::vector<std::string>>{{"x", "y"}});
}

TEST_CASE("parse_csv errors") {
  CHECK_THROWS_AS(csv_log(""), EmptyLogError);
  CHECK_THROWS_AS(csv_log("case_id,activity,timestamp\n"), EmptyLogError);
  CHECK_THROWS_AS(csv_log("case_id,activity\nc,a\n"), ConfigError);
  CHECK_THROWS_AS(csv_log("case_id,activity,activity,timestamp\nc,a,a,\n"), ConfigError);
  CsvMapping twice;
  twice.activity_column = "case_id";
  CHECK_THROWS_AS(csv_log("case_id,activity,timestamp\nc,a,\n", twice), ConfigError);
  try {
    csv_log("case_id,activity,timestamp\nc,a,2020-01-01\nc,b,not-a-time\n");
    FAIL("expected a row error");
  } catch (const RowError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("csv round trip keeps name sequences") {
  const EventLog log = EventLog::from_sequences({{"b", "a", "c"}, {"a"}, {"c", "c", "b"}});
  std::ostringstream out;
  write_csv(out, log);
  const EventLog back = csv_log(out.str());
  CHECK(name_sequences(back) == name_sequences(log));
  CHECK(compute_stats(back).num_traces == log.size());
}

TEST_CASE("parse_xes minimal log, empty traces and ignored elements") {
  const std::string xes = R"(<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0">
  <extension name="Concept" prefix="concept" uri="http://x"/>
  <global scope="event"><string key="concept:name" value="__INVALID__"/></global>
  <trace>
    <string key="concept:name" value="case-1"/>
    <event><string key="concept:name" value="b"/><date key="time:timestamp" value="2020-01-01T10:00:00.000+00:00"/></event>
    <event><string key="concept:name" value="a"/><date key="time:timestamp" value="2020-01-01T09:00:00.000+00:00"/></event>
  </trace>
  <trace><string key="concept:name" value="empty"/></trace>
</log>)";
  std::istringstream in(xes);
  XesDiagnostics diag;
  const EventLog log = parse_xes(in, &diag);
  REQUIRE(log.size() == 1);
  CHECK(log.traces()[0].case_id == "case-1");
  CHECK(name_sequences(log) == std::vector<std::vector<std::string>>{{"a", "b"}});
  CHECK(diag.empty_traces_skipped == 1);
  CHECK(diag.ignored_elements >= 2);
}

TEST_CASE("parse_xes errors") {
  {
    std::istringstream in("<root><trace/></root>");
    CHECK_THROWS_AS(parse_xes(in), XmlError);
  }
  {
    std::istringstream in("<log><trace><event><string key=\"concept:name\" value=\"a\"></event></trace></log>");
    try {
      parse_xes(in);
      FAIL("expected an XML error");
    } catch (const XmlError& e) {
      CHECK(e.byte_offset() > 0);
    }
  }
  {
    std::istringstream in("<log><trace><event><string key=\"org:resource\" value=\"r\"/></event></trace></log>");
    CHECK_THROWS_AS(parse_xes(in), XmlError);
  }
}

TEST_CASE("compute_stats") {
  CHECK(compute_stats(EventLog::from_sequences({{"a"}})) == LogStats{1, 1, 1, 1});
  // lengths 1, 2, 2 -> mean 1.67 rounds to 2
  CHECK(compute_stats(EventLog::from_sequences({{"a"}, {"a", "b"}, {"b", "c"}})) == LogStats{3, 3, 2, 2});
  CHECK_THROWS_AS(compute_stats(EventLog{}), EmptyLogError);
}

TEST_CASE("extract_variants") {
  const EventLog log = EventLog::from_sequences({{"a", "b"}, {"a", "b"}, {"b", "a"}});
  const VariantSet v = extract_variants(log);
  CHECK(v.size() == 2);
  CHECK(v.contains({0, 1}));
  CHECK(v.contains({1, 0}));
  CHECK_FALSE(v.contains({0}));
  CHECK(extract_variants(EventLog{}).empty());
  std::vector<std::vector<std::string>> same(100, {"x", "y"});
  CHECK(extract_variants(EventLog::from_sequences(same)).size() == 1);
}

TEST_CASE("behavioral profile from directly-follows") {
  const EventLog log = EventLog::from_sequences({{"a", "b", "c"}, {"a", "c", "b"}});
  const BehavioralProfile p = compute_behavioral_profile(log);
  CHECK(p.at(1, 2) == Relation::Interleaving);
  CHECK(p.at(2, 1) == Relation::Interleaving);
  CHECK(p.at(0, 1) == Relation::StrictOrder);
  CHECK(p.at(1, 0) == Relation::ReverseStrictOrder);
  CHECK(p.is_consistent());

  const BehavioralProfile q = compute_behavioral_profile(EventLog::from_sequences({{"a", "b"}}));
  CHECK(q.at(0, 1) == Relation::StrictOrder);
  CHECK(q.at(1, 0) == Relation::ReverseStrictOrder);
  CHECK(q.at(0, 0) == Relation::Exclusive);

  const BehavioralProfile single = compute_behavioral_profile(EventLog::from_sequences({{"a"}, {"a"}}));
  CHECK(single.at(0, 0) == Relation::Exclusive);

  BehavioralProfile broken(2);
  broken.set(0, 1, Relation::StrictOrder);
  CHECK_FALSE(broken.is_consistent());
}

TEST_CASE("train_test_split") {
  std::vector<std::vector<std::string>> seqs;
  for (int i = 0; i < 10; ++i) seqs.push_back({"a", std::to_string(i)});
  const EventLog log = EventLog::from_sequences(seqs);
  auto [train, test] = train_test_split(log, 0.8, 42);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);
  CHECK(train.vocab() == log.vocab());
  CHECK(test.vocab() == log.vocab());
  auto [train2, test2] = train_test_split(log, 0.8, 42);
  CHECK(name_sequences(train) == name_sequences(train2));
  CHECK(name_sequences(test) == name_sequences(test2));
  CHECK_THROWS_AS(train_test_split(log, 1.2, 1), ConfigError);
  CHECK_THROWS_AS(train_test_split(log, 0.0, 1), ConfigError);
}

TEST_CASE("EventLog constructor rejects empty traces and unknown ids") {
  ActivityVocab v({"a"});
  CHECK_THROWS_AS(EventLog({Trace{"c", {}}}, v), DataError);
  CHECK_THROWS_AS(EventLog({Trace{"c", {Event{"c", 3, std::nullopt}}}}, v), IndexError);
}
