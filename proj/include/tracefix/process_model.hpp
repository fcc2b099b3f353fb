#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tracefix/eventlog.hpp"

namespace tracefix {

// Block-structured process description used to synthesize logs.
struct ProcessNode {
  enum class Kind { Sequence, Choice, Parallel, Activity };

  Kind kind = Kind::Activity;
  std::string activity;  // Activity only
  std::vector<ProcessNode> children;

  static ProcessNode act(std::string name) { return {Kind::Activity, std::move(name), {}}; }
  static ProcessNode seq(std::vector<ProcessNode> c) { return {Kind::Sequence, {}, std::move(c)}; }
  static ProcessNode choice(std::vector<ProcessNode> c) { return {Kind::Choice, {}, std::move(c)}; }
  static ProcessNode par(std::vector<ProcessNode> c) { return {Kind::Parallel, {}, std::move(c)}; }
};

// JSON form: {"type": "seq"|"choice"|"par", "children": [...]} or
// {"type": "act", "name": "a"}; a bare string is shorthand for an activity.
ProcessNode parse_process_model(std::string_view json_text);
std::string process_model_to_json(const ProcessNode& model);

// Activity names in depth-first order of first appearance.
std::vector<std::string> model_activities(const ProcessNode& model);

// Random playouts: choices uniform, parallel branches merged by a uniformly
// random interleaving. Deterministic for a given seed.
EventLog generate_synthetic_log(const ProcessNode& model, std::size_t n_traces, std::uint64_t seed);

}  // namespace tracefix
