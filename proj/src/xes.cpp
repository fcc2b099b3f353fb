#include <expat.h>

#include <algorithm>
#include <memory>
#include <type_traits>
#include <string_view>

#include "tracefix/error.hpp"
#include "tracefix/eventlog.hpp"

namespace tracefix {
namespace {

// SAX state for the XES subset. Only attributes that are direct children of
// <trace> or <event> are interpreted; nested attribute lists are skipped.
struct XesState {
  XML_Parser parser = nullptr;
  XesDiagnostics diag;
  ActivityVocab vocab;
  std::vector<Trace> traces;

  int depth = 0;
  bool saw_root = false;
  bool in_trace = false;
  bool in_event = false;
  int trace_depth = -1;
  int event_depth = -1;
  int ignore_depth = -1;  // inside an ignored subtree when >= 0

  Trace current;
  std::size_t trace_ordinal = 0;
  std::size_t event_offset = 0;
  std::optional<std::string> event_name;
  std::optional<Timestamp> event_time;

  std::unique_ptr<Error> failure;

  std::size_t offset() const { return static_cast<std::size_t>(XML_GetCurrentByteIndex(parser)); }

  void fail(std::unique_ptr<Error> e) {
    if (!failure) failure = std::move(e);
    XML_StopParser(parser, XML_FALSE);
  }
};

std::string_view attr(const XML_Char** atts, std::string_view key) {
  for (int i = 0; atts[i]; i += 2)
    if (key == atts[i]) return atts[i + 1];
  return {};
}

bool is_attribute_element(std::string_view tag) {
  return tag == "string" || tag == "date" || tag == "int" || tag == "float" || tag == "boolean" ||
         tag == "id" || tag == "list" || tag == "container";
}

void on_start(void* user, const XML_Char* name, const XML_Char** atts) {
  auto& st = *static_cast<XesState*>(user);
  const std::string_view tag = name;
  const int depth = st.depth++;
  if (st.failure || st.ignore_depth >= 0) return;

  if (depth == 0) {
    if (tag != "log") {
      st.fail(std::make_unique<XmlError>(st.offset(), "root element is <" + std::string(tag) +
                                                          ">, expected <log>"));
      return;
    }
    st.saw_root = true;
    return;
  }

  if (!st.in_trace) {
    if (depth == 1 && tag == "trace") {
      st.in_trace = true;
      st.trace_depth = depth;
      st.current = Trace{};
      ++st.trace_ordinal;
      return;
    }
    if (tag == "extension" || tag == "global" || tag == "classifier") ++st.diag.ignored_elements;
    st.ignore_depth = depth;
    return;
  }

  if (!st.in_event) {
    if (depth == st.trace_depth + 1 && tag == "event") {
      st.in_event = true;
      st.event_depth = depth;
      st.event_offset = st.offset();
      st.event_name.reset();
      st.event_time.reset();
      return;
    }
    if (depth == st.trace_depth + 1 && tag == "string" && attr(atts, "key") == "concept:name") {
      st.current.case_id = std::string(attr(atts, "value"));
    }
    st.ignore_depth = depth;
    return;
  }

  if (depth == st.event_depth + 1 && is_attribute_element(tag)) {
    const auto key = attr(atts, "key");
    const auto value = attr(atts, "value");
    if (key == "concept:name") {
      st.event_name = std::string(value);
    } else if (key == "time:timestamp") {
      st.event_time = parse_iso8601(value);
      if (!st.event_time)
        st.fail(std::make_unique<XmlError>(st.offset(), "unparsable time:timestamp '" +
                                                            std::string(value) + "'"));
    }
  }
  st.ignore_depth = depth;
}

void on_end(void* user, const XML_Char* /*name*/) {
  auto& st = *static_cast<XesState*>(user);
  const int depth = --st.depth;
  if (st.failure) return;
  if (st.ignore_depth >= 0) {
    if (depth == st.ignore_depth) st.ignore_depth = -1;
    return;
  }
  if (st.in_event && depth == st.event_depth) {
    st.in_event = false;
    if (!st.event_name || st.event_name->empty()) {
      st.fail(std::make_unique<XmlError>(st.event_offset, "event lacks a concept:name attribute"));
      return;
    }
    Event e;
    e.activity = st.vocab.intern(*st.event_name);
    e.timestamp = st.event_time;
    st.current.events.push_back(std::move(e));
    return;
  }
  if (st.in_trace && depth == st.trace_depth) {
    st.in_trace = false;
    if (st.current.events.empty()) {
      ++st.diag.empty_traces_skipped;
      return;
    }
    if (st.current.case_id.empty()) st.current.case_id = "trace_" + std::to_string(st.trace_ordinal);
    for (auto& e : st.current.events) e.case_id = st.current.case_id;
    sort_by_time(st.current);
    st.traces.push_back(std::move(st.current));
  }
}

}  // namespace

EventLog parse_xes(std::istream& in, XesDiagnostics* diagnostics) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreate("UTF-8"), &XML_ParserFree);
  if (!parser) throw DataError("could not allocate XML parser");

  XesState st;
  st.parser = parser.get();
  XML_SetUserData(parser.get(), &st);
  XML_SetElementHandler(parser.get(), on_start, on_end);

  char buf[1 << 16];
  bool any_input = false;
  while (true) {
    in.read(buf, sizeof buf);
    const auto n = in.gcount();
    const bool last = n < static_cast<std::streamsize>(sizeof buf);
    any_input = any_input || n > 0;
    if (XML_Parse(parser.get(), buf, static_cast<int>(n), last ? XML_TRUE : XML_FALSE) ==
        XML_STATUS_ERROR) {
      if (st.failure) {
        if (auto* xe = dynamic_cast<XmlError*>(st.failure.get())) throw *xe;
        throw *st.failure;
      }
      if (!any_input) throw EmptyLogError("XES input is empty");
      throw XmlError(static_cast<std::size_t>(XML_GetCurrentByteIndex(parser.get())),
                     XML_ErrorString(XML_GetErrorCode(parser.get())));
    }
    if (last) break;
  }
  if (!st.saw_root) throw XmlError(0, "document has no <log> root");
  if (st.traces.empty()) throw EmptyLogError("XES log contains no non-empty traces");
  if (diagnostics) *diagnostics = st.diag;
  return EventLog(std::move(st.traces), std::move(st.vocab));
}

}  // namespace tracefix
