#include "tracefix/process_model.hpp"

#include <algorithm>
#include <json.hpp>
#include <random>

#include "tracefix/error.hpp"

namespace tracefix {
namespace {

using nlohmann::json;

ProcessNode from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>().empty()) throw ConfigError("process model activity name is empty");
    return ProcessNode::act(j.get<std::string>());
  }
  if (!j.is_object() || !j.contains("type")) throw ConfigError("process model node needs a \"type\"");
  const auto type = j.at("type").get<std::string>();
  if (type == "act") {
    const auto name = j.value("name", std::string());
    if (name.empty()) throw ConfigError("process model activity name is empty");
    return ProcessNode::act(name);
  }
  ProcessNode node;
  if (type == "seq")
    node.kind = ProcessNode::Kind::Sequence;
  else if (type == "choice")
    node.kind = ProcessNode::Kind::Choice;
  else if (type == "par")
    node.kind = ProcessNode::Kind::Parallel;
  else
    throw ConfigError("unknown process model node type '" + type + "'");
  if (!j.contains("children") || !j.at("children").is_array() || j.at("children").empty())
    throw ConfigError("process model node '" + type + "' has no children");
  for (const auto& c : j.at("children")) node.children.push_back(from_json(c));
  return node;
}

json to_json(const ProcessNode& n) {
  switch (n.kind) {
    case ProcessNode::Kind::Activity: return json{{"type", "act"}, {"name", n.activity}};
    case ProcessNode::Kind::Sequence:
    case ProcessNode::Kind::Choice:
    case ProcessNode::Kind::Parallel: {
      json children = json::array();
      for (const auto& c : n.children) children.push_back(to_json(c));
      const char* type = n.kind == ProcessNode::Kind::Sequence ? "seq"
                         : n.kind == ProcessNode::Kind::Choice ? "choice"
                                                               : "par";
      return json{{"type", type}, {"children", children}};
    }
  }
  return {};
}

void validate(const ProcessNode& n) {
  if (n.kind == ProcessNode::Kind::Activity) {
    if (n.activity.empty()) throw ConfigError("process model activity name is empty");
    return;
  }
  if (n.children.empty()) throw ConfigError("process model block has no children");
  for (const auto& c : n.children) validate(c);
}

void collect(const ProcessNode& n, std::vector<std::string>& out) {
  if (n.kind == ProcessNode::Kind::Activity) {
    if (std::find(out.begin(), out.end(), n.activity) == out.end()) out.push_back(n.activity);
    return;
  }
  for (const auto& c : n.children) collect(c, out);
}

void play(const ProcessNode& n, std::mt19937_64& rng, const ActivityVocab& vocab, ActivitySeq& out) {
  switch (n.kind) {
    case ProcessNode::Kind::Activity:
      out.push_back(*vocab.find(n.activity));
      return;
    case ProcessNode::Kind::Sequence:
      for (const auto& c : n.children) play(c, rng, vocab, out);
      return;
    case ProcessNode::Kind::Choice: {
      std::uniform_int_distribution<std::size_t> pick(0, n.children.size() - 1);
      play(n.children[pick(rng)], rng, vocab, out);
      return;
    }
    case ProcessNode::Kind::Parallel: {
      std::vector<ActivitySeq> branches(n.children.size());
      std::size_t remaining = 0;
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        play(n.children[i], rng, vocab, branches[i]);
        remaining += branches[i].size();
      }
      // Drawing the next branch with probability proportional to its remaining
      // length yields a uniformly random interleaving.
      std::vector<std::size_t> cursor(branches.size(), 0);
      while (remaining > 0) {
        std::uniform_int_distribution<std::size_t> pick(0, remaining - 1);
        std::size_t r = pick(rng);
        for (std::size_t i = 0; i < branches.size(); ++i) {
          const std::size_t left = branches[i].size() - cursor[i];
          if (r < left) {
            out.push_back(branches[i][cursor[i]++]);
            break;
          }
          r -= left;
        }
        --remaining;
      }
      return;
    }
  }
}

}  // namespace

ProcessNode parse_process_model(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("process model is not valid JSON: ") + e.what());
  }
  if (j.is_null() || (j.is_object() && j.empty())) throw ConfigError("process model is empty");
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed process model: ") + e.what());
  }
}

std::string process_model_to_json(const ProcessNode& model) { return to_json(model).dump(); }

std::vector<std::string> model_activities(const ProcessNode& model) {
  std::vector<std::string> out;
  collect(model, out);
  return out;
}

EventLog generate_synthetic_log(const ProcessNode& model, std::size_t n_traces, std::uint64_t seed) {
  validate(model);
  if (n_traces == 0) throw ConfigError("n_traces must be at least 1");
  ActivityVocab vocab(model_activities(model));
  std::mt19937_64 rng(seed);
  std::vector<Trace> traces;
  traces.reserve(n_traces);
  const int width = static_cast<int>(std::to_string(n_traces).size());
  for (std::size_t i = 0; i < n_traces; ++i) {
    ActivitySeq seq;
    play(model, rng, vocab, seq);
    std::string id = std::to_string(i + 1);
    Trace t;
    t.case_id = "case_" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;
    for (auto a : seq) t.events.push_back({t.case_id, a, std::nullopt});
    traces.push_back(std::move(t));
  }
  return EventLog(std::move(traces), std::move(vocab));
}

}  // namespace tracefix
