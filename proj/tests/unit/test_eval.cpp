#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "tracefix/edit_distance.hpp"
#include "tracefix/error.hpp"
#include "tracefix/evaluation.hpp"

using namespace tracefix;

namespace {

TokenSeq apply_script(const TokenSeq& input, const std::vector<Edit>& script) {
  TokenSeq out;
  std::size_t e = 0;
  for (std::size_t i = 0; i <= input.size(); ++i) {
    while (e < script.size() && script[e].position == i && script[e].kind == EditKind::Insert) out.push_back(*script[e++].to);
    if (i == input.size()) break;
    if (e < script.size() && script[e].position == i) {
      const Edit& ed = script[e++];
      switch (ed.kind) {
        case EditKind::Delete: break;
        case EditKind::Substitute: out.push_back(*ed.to); break;
        case EditKind::Transpose:
          out.push_back(input[i + 1]);
          out.push_back(input[i]);
          ++i;
          break;
        case EditKind::Insert: FAIL("insert out of order"); break;
      }
      continue;
    }
    out.push_back(input[i]);
  }
  CHECK(e == script.size());
  return out;
}

TokenSeq to_tokens(const std::vector<int>& v) { return TokenSeq(v.begin(), v.end()); }

}  // namespace

TEST_CASE("dl distance examples") {
  CHECK(dl_distance(TokenSeq{}, TokenSeq{}) == 0);
  CHECK(dl_distance(TokenSeq{0, 1, 2}, TokenSeq{}) == 3);
  CHECK(dl_distance(TokenSeq{0, 1, 2}, TokenSeq{0, 2, 1}) == 1);
  CHECK(dl_distance(TokenSeq{0, 1, 2}, TokenSeq{0, 2}) == 1);
  CHECK(dl_distance(TokenSeq{0, 1, 2}, TokenSeq{0, 3, 1, 2}) == 1);
  // restricted variant: "ca" -> "abc" needs 3, not 2
  CHECK(dl_distance(TokenSeq{2, 0}, TokenSeq{0, 1, 2}) == 3);
  // kitten -> sitting
  CHECK(dl_distance(TokenSeq{10, 8, 19, 19, 4, 13}, TokenSeq{18, 8, 19, 19, 8, 13, 6}) == 3);
  CHECK(dl_similarity(TokenSeq{}, TokenSeq{}) == 1.0);
  CHECK(dl_similarity(TokenSeq{0, 1, 2}, TokenSeq{0, 2, 1}) == doctest::Approx(2.0 / 3.0));
  CHECK(dl_similarity(TokenSeq{0}, TokenSeq{1}) == 0.0);
}

TEST_CASE("dl distance agrees with the recursive oracle on short sequences") {
  const auto seqs = tftest::all_sequences(3, 4);
  for (const auto& a : seqs)
    for (const auto& b : seqs) {
      const TokenSeq ta = to_tokens(a), tb = to_tokens(b);
      const auto d = dl_distance(ta, tb);
      REQUIRE(d == tftest::osa_oracle(a, b));
      REQUIRE(d == dl_distance(tb, ta));
      REQUIRE((d == 0) == (a == b));
    }
  for (const auto& a : seqs)
    for (const auto& b : seqs) {
      const auto d = dl_distance(to_tokens(a), to_tokens(b));
      const auto lo = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
      REQUIRE(d >= lo);
      REQUIRE(d <= std::max(a.size(), b.size()));
    }
}

TEST_CASE("localize_events examples") {
  const auto ins = localize_events(TokenSeq{0, 2}, TokenSeq{0, 1, 2});
  REQUIRE(ins.size() == 1);
  CHECK(ins[0] == Edit{EditKind::Insert, 1, std::nullopt, 1});
  const auto tr = localize_events(TokenSeq{0, 2, 1}, TokenSeq{0, 1, 2});
  REQUIRE(tr.size() == 1);
  CHECK(tr[0] == Edit{EditKind::Transpose, 1, 2, 1});
  const auto del = localize_events(TokenSeq{0, 3, 1}, TokenSeq{0, 1});
  REQUIRE(del.size() == 1);
  CHECK(del[0] == Edit{EditKind::Delete, 1, 3, std::nullopt});
  const auto sub = localize_events(TokenSeq{0, 6, 2}, TokenSeq{0, 1, 2});
  REQUIRE(sub.size() == 1);
  CHECK(sub[0] == Edit{EditKind::Substitute, 1, 6, 1});
  CHECK(localize_events(TokenSeq{0, 1}, TokenSeq{0, 1}).empty());
  const auto tail = localize_events(TokenSeq{0}, TokenSeq{0, 1});
  REQUIRE(tail.size() == 1);
  CHECK(tail[0].position == 1);
  CHECK(to_string(EditKind::Transpose) == "transpose");
}

TEST_CASE("edit scripts are minimal, ordered and reproduce the target") {
  const auto seqs = tftest::all_sequences(3, 4);
  for (const auto& a : seqs)
    for (const auto& b : seqs) {
      const TokenSeq ta = to_tokens(a), tb = to_tokens(b);
      const auto script = localize_events(ta, tb);
      REQUIRE(script.size() == tftest::osa_oracle(a, b));
      for (std::size_t i = 1; i < script.size(); ++i) REQUIRE(script[i - 1].position <= script[i].position);
      REQUIRE(apply_script(ta, script) == tb);
    }
}

TEST_CASE("confusion counts and f-score") {
  ConfusionCounts c;
  c.add(Label::Anomalous, Label::Anomalous);
  c.add(Label::Anomalous, Label::Normal);
  c.add(Label::Normal, Label::Anomalous);
  c.add(Label::Normal, Label::Normal);
  CHECK(c == ConfusionCounts{1, 1, 1, 1});
  CHECK(c.total() == 4);
  const FScore s = f_score({8, 2, 10, 2});
  CHECK(s.precision == doctest::Approx(0.8));
  CHECK(s.recall == doctest::Approx(0.8));
  CHECK(s.f1 == doctest::Approx(0.8));
  const FScore skew = f_score({3, 1, 0, 3});
  CHECK(skew.precision == doctest::Approx(0.75));
  CHECK(skew.recall == doctest::Approx(0.5));
  CHECK(skew.f1 == doctest::Approx(0.6));
  const FScore none = f_score({0, 0, 5, 0});
  CHECK(none.f1 == 0.0);
  CHECK(none.precision == 0.0);
}

TEST_CASE("classification threshold") {
  CHECK(classify(0.5f) == Label::Normal);
  CHECK(classify(0.5001f) == Label::Anomalous);
  CHECK(classify(0.0f) == Label::Normal);
}

TEST_CASE("correct_trace") {
  const TokenVocab v{3};  // PAD 3, CLS 4, MISSING 5
  auto rows = [&](std::vector<Token> winners) {
    nn::Tensor t({winners.size(), v.size()});
    for (std::size_t r = 0; r < winners.size(); ++r) t[r * v.size() + static_cast<std::size_t>(winners[r])] = 2.0f;
    return t;
  };
  CorrectedTrace c = correct_trace(rows({2, 0, 3, 3}), v);
  CHECK(c.tokens == TokenSeq{2, 0});
  CHECK_FALSE(c.flagged);
  c = correct_trace(rows({1, 4, 5, 3}), v);
  CHECK(c.tokens == TokenSeq{1, 5});
  CHECK(c.flagged);
  c = correct_trace(rows({3, 3}), v);
  CHECK(c.tokens.empty());
  CHECK(c.flagged);
  c = correct_trace(nn::Tensor({2, v.size()}), v);  // all ties -> lowest id
  CHECK(c.tokens == TokenSeq{0, 0});
  CHECK_THROWS_AS(correct_trace(nn::Tensor({2, 4}), v), ShapeError);
}

TEST_CASE("summarize and report serialization") {
  std::vector<TraceEvaluation> t(4);
  t[0].actual = Label::Anomalous;
  t[0].predicted = Label::Anomalous;
  t[0].similarity_corrected = 1.0;
  t[0].similarity_input = 0.5;
  t[1].actual = Label::Anomalous;
  t[1].similarity_corrected = 0.5;
  t[1].similarity_input = 0.75;
  t[2].similarity_corrected = 1.0;
  t[3].similarity_corrected = 0.5;
  t[3].predicted = Label::Anomalous;
  t[3].corrected.flagged = true;
  const EvalReport r = summarize(t);
  CHECK(r.counts == ConfusionCounts{1, 1, 1, 1});
  CHECK(r.f_score == doctest::Approx(0.5));
  CHECK(r.similarity_corrected_anomalous == doctest::Approx(0.75));
  CHECK(r.similarity_input_anomalous == doctest::Approx(0.625));
  CHECK(r.similarity_corrected_normal == doctest::Approx(0.75));
  CHECK(r.anomalous_traces == 2);
  CHECK(r.normal_traces == 2);
  CHECK(r.flagged_traces == 1);

  EvalReport timed = r;
  timed.inference_seconds = 1.25;
  CHECK(to_json(timed, false) == to_json(r, false));
  CHECK_FALSE(to_json(timed, false).contains("inference_seconds"));
  const EvalReport back = eval_report_from_json(to_json(timed));
  CHECK(to_json(back) == to_json(timed));
  CHECK_THROWS_AS(eval_report_from_json(nlohmann::json::array()), FormatError);

  const std::string header = eval_csv_header(), row = eval_csv_row(r, "rc0.5-ra0.3");
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK(row.rfind("rc0.5-ra0.3,", 0) == 0);
}

TEST_CASE("evaluate_model details agree with summarize and sequential decoding") {
  const EventLog log = EventLog::from_sequences({{"a", "b", "c"}, {"a", "c"}, {"b", "c", "a", "a"}, {"c"}});
  InjectionConfig ic;
  ic.r_case = 0.5;
  const LabeledDataset ds =
      build_dataset(log, ic, extract_variants(log), compute_behavioral_profile(log), max_padded_length(log, ic));
  ModelConfig mc;
  mc.d_model = 8;
  mc.n_heads_enc = mc.n_heads_dec = 2;
  mc.n_layers_enc = mc.n_layers_dec = 1;
  mc.d_ffn = 8;
  mc.vocab_size = ds.vocab.size();
  mc.max_len = ds.max_len;
  const Model m(mc, 3);
  std::vector<TraceEvaluation> details;
  const EvalReport r = evaluate_model(m, ds, 3, &details);
  REQUIRE(details.size() == ds.items.size());
  const EvalReport again = summarize(details);
  CHECK(again.f_score == r.f_score);
  CHECK(again.similarity_corrected_anomalous == r.similarity_corrected_anomalous);
  CHECK(again.similarity_corrected_normal == r.similarity_corrected_normal);
  CHECK(r.counts == summarize(details).counts);
  CHECK(r.counts.total() == ds.items.size());
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    const auto& it = ds.items[i];
    CHECK(details[i].case_id == it.case_id);
    CHECK(details[i].actual == it.label);
    CHECK(details[i].similarity_corrected == dl_similarity(details[i].corrected.tokens, it.original()));
    CHECK(details[i].similarity_input == dl_similarity(it.mutated(), it.original()));
    CHECK(sequential_correct(m, it.input_tokens, ds.vocab).tokens == details[i].corrected.tokens);
  }
  ModelConfig other = mc;
  other.max_len += 1;
  CHECK_THROWS_AS(evaluate_model(Model(other, 1), ds), ConfigError);
}
