#include "tracefix/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tracefix/checkpoint.hpp"
#include "tracefix/csv.hpp"
#include "tracefix/dataset_io.hpp"
#include "tracefix/error.hpp"
#include "tracefix/evaluation.hpp"
#include "tracefix/pipeline.hpp"
#include "tracefix/process_model.hpp"
#include "tracefix/training.hpp"

namespace tracefix::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags shared by several subcommands, collected before they are folded into a RunConfig.
struct Flags {
  std::string config_path;
  std::string log_format = "auto";
  std::optional<std::string> case_column, activity_column, timestamp_column;
  std::optional<std::uint64_t> seed;
  std::optional<double> test_fraction;

  std::optional<double> r_case, r_act;
  std::optional<int> fixed_count;
  std::vector<std::string> kinds;
  bool no_relabel = false;

  std::optional<std::string> variant;
  std::optional<std::size_t> d_model, heads, layers, d_ffn;
  bool mask_padding = false;
  std::optional<float> dropout;
  std::optional<std::size_t> epochs, batch_size, patience, max_steps;
  std::optional<float> lr;
  std::optional<double> validation_fraction;
};

void add_log_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--log-format", f.log_format, "auto, csv or xes")->check(CLI::IsMember({"auto", "csv", "xes"}));
  cmd->add_option("--case-column", f.case_column, "CSV case id column");
  cmd->add_option("--activity-column", f.activity_column, "CSV activity column");
  cmd->add_option("--timestamp-column", f.timestamp_column, "CSV timestamp column (empty for none)");
}

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "JSON run config; its keys override flags");
  cmd->add_option("--seed", f.seed, "root seed");
  cmd->add_option("--test-fraction", f.test_fraction, "held-out share of traces");
}

void add_injection_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--r-case", f.r_case, "fraction of traces to corrupt");
  cmd->add_option("--r-act", f.r_act, "fraction of events to corrupt per chosen trace");
  cmd->add_option("--fixed-count", f.fixed_count, "fixed number of anomalies per chosen trace");
  cmd->add_option("--kinds", f.kinds, "enabled anomaly kinds")->delimiter(',');
  cmd->add_flag("--no-relabel", f.no_relabel, "keep injected traces anomalous even if they match a variant");
}

void add_model_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--variant", f.variant, "transformer-ae, encoder-only or dense-ae")
      ->check(CLI::IsMember({"transformer-ae", "encoder-only", "dense-ae"}));
  cmd->add_option("--d-model", f.d_model);
  cmd->add_option("--heads", f.heads, "attention heads (encoder and decoder)");
  cmd->add_option("--layers", f.layers, "blocks (encoder and decoder)");
  cmd->add_option("--d-ffn", f.d_ffn);
  cmd->add_flag("--mask-padding", f.mask_padding, "mask [PAD] keys in attention");
  cmd->add_option("--dropout", f.dropout);
  cmd->add_option("--epochs", f.epochs);
  cmd->add_option("--batch-size", f.batch_size);
  cmd->add_option("--lr", f.lr);
  cmd->add_option("--patience", f.patience, "early-stopping patience in epochs, 0 disables");
  cmd->add_option("--validation-fraction", f.validation_fraction);
  cmd->add_option("--max-steps", f.max_steps, "cap on optimizer steps");
}

RunConfig build_config(const Flags& f) {
  RunConfig c;
  c.log_format = log_format_from_string(f.log_format);
  if (f.case_column) c.csv.case_column = *f.case_column;
  if (f.activity_column) c.csv.activity_column = *f.activity_column;
  if (f.timestamp_column) {
    if (f.timestamp_column->empty()) c.csv.timestamp_column.reset();
    else c.csv.timestamp_column = *f.timestamp_column;
  }
  if (f.seed) c.seed = *f.seed;
  if (f.test_fraction) c.test_fraction = *f.test_fraction;

  InjectionConfig& inj = c.train_injection;
  if (f.r_case) inj.r_case = *f.r_case;
  if (f.r_act && f.fixed_count) throw ConfigError("--r-act and --fixed-count are mutually exclusive");
  if (f.r_act) inj.r_act = *f.r_act;
  if (f.fixed_count) {
    inj.r_act.reset();
    inj.fixed_count = *f.fixed_count;
  }
  if (!f.kinds.empty()) {
    inj.enabled_kinds.clear();
    for (const auto& k : f.kinds) inj.enabled_kinds.push_back(anomaly_kind_from_string(k));
  }
  if (f.no_relabel) inj.relabel_by_variant = false;

  ModelConfig& m = c.model;
  if (f.variant) m.variant = model_variant_from_string(*f.variant);
  if (f.d_model) m.d_model = *f.d_model;
  if (f.heads) m.n_heads_enc = m.n_heads_dec = *f.heads;
  if (f.layers) m.n_layers_enc = m.n_layers_dec = *f.layers;
  if (f.d_ffn) m.d_ffn = *f.d_ffn;
  if (f.mask_padding) m.mask_padding = true;
  if (f.dropout) m.dropout = *f.dropout;

  TrainConfig& t = c.train;
  if (f.epochs) t.epochs = *f.epochs;
  if (f.batch_size) t.batch_size = *f.batch_size;
  if (f.lr) t.lr = *f.lr;
  if (f.patience) t.patience = *f.patience;
  if (f.validation_fraction) t.validation_fraction = *f.validation_fraction;
  if (f.max_steps) t.max_steps = *f.max_steps;

  if (!f.config_path.empty()) return load_run_config(f.config_path, std::move(c));
  c.validate();
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

json dataset_summary(const LabeledDataset& ds) {
  std::map<std::string, std::size_t> per_kind;
  for (auto k : kAllAnomalyKinds) per_kind[std::string(to_string(k))] = 0;
  for (const auto& it : ds.items)
    for (const auto& r : it.records) ++per_kind[std::string(to_string(r.kind))];
  return json{{"traces", ds.items.size()},
              {"injected", ds.injected_count()},
              {"anomalous", ds.count(Label::Anomalous)},
              {"normal", ds.count(Label::Normal)},
              {"max_len", ds.max_len},
              {"anomalies_per_kind", per_kind}};
}

// ---- stats

int cmd_stats(const std::string& log_path, const std::string& out_format, const Flags& f, std::ostream& out) {
  RunConfig c = build_config(f);
  const EventLog log = load_log(log_path, c.log_format, c.csv);
  const LogStats s = compute_stats(log);
  if (out_format == "json") {
    out << json{{"log", log_path},
                {"traces", s.num_traces},
                {"activities", s.num_activities},
                {"avg_case_length", s.avg_case_length},
                {"max_case_length", s.max_case_length}}
               .dump(2)
        << '\n';
    return 0;
  }
  out << std::left << std::setw(12) << "traces" << std::setw(12) << "activities" << std::setw(10) << "avg_len"
      << "max_len" << '\n';
  out << std::setw(12) << s.num_traces << std::setw(12) << s.num_activities << std::setw(10) << s.avg_case_length
      << s.max_case_length << '\n';
  return 0;
}

// ---- inject

int cmd_inject(const std::string& log_path, const std::string& out_path, const std::string& part, const Flags& f,
               std::ostream& out) {
  RunConfig c = build_config(f);
  const EventLog log = load_log(log_path, c.log_format, c.csv);
  LabeledDataset ds;
  if (part == "all") {
    PreparedLogs p;
    p.variants = extract_variants(log);
    p.profile = compute_behavioral_profile(log);
    p.max_len = max_padded_length(log, c.train_injection);
    for (const auto& g : c.test_grid) p.max_len = std::max(p.max_len, max_padded_length(log, g));
    InjectionConfig inj = c.train_injection;
    inj.seed = stage_seed(c.seed, "inject:all");
    ds = build_dataset(log, inj, p.variants, p.profile, p.max_len);
  } else {
    const PreparedLogs p = prepare_logs(log, c);
    ds = part == "train" ? make_train_dataset(p, c) : make_test_dataset(p, c, c.train_injection);
  }
  save_dataset(out_path, ds);
  json summary = dataset_summary(ds);
  summary["output"] = out_path;
  summary["part"] = part;
  out << summary.dump(2) << '\n';
  return 0;
}

// ---- train

int cmd_train(const std::string& dataset_path, const std::string& out_dir, const Flags& f, std::ostream& out) {
  RunConfig c = build_config(f);
  const LabeledDataset ds = load_dataset(dataset_path);
  Model model = make_model(c, ds);
  fs::create_directories(out_dir);
  const fs::path ckpt = fs::path(out_dir) / "model.ckpt";
  std::ofstream metrics(fs::path(out_dir) / "metrics.jsonl", std::ios::binary);
  TrainHooks hooks;
  hooks.metrics_jsonl = &metrics;
  hooks.best_checkpoint = ckpt;
  hooks.on_epoch = [&](const EpochRecord& r) {
    out << "epoch " << r.epoch << "  loss " << fixed(r.train.total_loss) << "  det_acc "
        << fixed(r.train.detection_accuracy) << "  tok_acc " << fixed(r.train.token_accuracy);
    if (r.validation) out << "  val_loss " << fixed(r.validation->total_loss);
    out << "  (" << fixed(r.train.seconds, 1) << " s)\n" << std::flush;
  };
  out << "training " << to_string(c.model.variant) << " on " << ds.items.size() << " traces, "
      << model.parameter_count() << " parameters, max_len " << ds.max_len << '\n';
  const TrainResult result = train(model, ds, effective_train_config(c), hooks);
  save_checkpoint(model, ckpt);
  json summary{{"best_epoch", result.best_epoch}, {"steps", result.steps}, {"checkpoint", ckpt.string()},
               {"run_config", to_json(c)}};
  write_text(fs::path(out_dir) / "train_summary.json", summary.dump(2) + "\n");
  out << "best checkpoint: " << ckpt.string() << '\n';
  return 0;
}

// ---- eval

struct Cell {
  std::string label;
  LabeledDataset dataset;
};

void write_combined(const fs::path& dir, const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::ostringstream csv_text;
  csv_text << eval_csv_header() << '\n';
  json all = json::array();
  for (const auto& [label, report] : rows) {
    csv_text << eval_csv_row(report, label) << '\n';
    all.push_back(json{{"label", label}, {"report", to_json(report)}});
  }
  write_text(dir / "report.csv", csv_text.str());
  write_text(dir / "report.json", all.dump(2) + "\n");
}

int cmd_eval(const std::string& ckpt_path, const std::string& out_dir, const std::vector<std::string>& datasets,
             const std::string& log_path, bool single, bool force, const Flags& f, std::ostream& out) {
  RunConfig c = build_config(f);
  if (datasets.empty() == log_path.empty()) throw ConfigError("give either --dataset files or --log");
  const Model model = load_checkpoint(ckpt_path);

  std::vector<std::pair<std::string, std::function<LabeledDataset()>>> cells;
  std::optional<PreparedLogs> prepared;
  if (!datasets.empty()) {
    for (const auto& d : datasets) {
      if (!fs::exists(d)) throw ConfigError("cannot open dataset '" + d + "'");
      cells.emplace_back(fs::path(d).stem().string(), [d] { return load_dataset(d); });
    }
  } else {
    if (single) c.test_grid = {c.train_injection};
    prepared = prepare_logs(load_log(log_path, c.log_format, c.csv), c);
    for (const auto& cell : c.test_grid)
      cells.emplace_back(cell_label(cell), [&, cell] { return make_test_dataset(*prepared, c, cell); });
  }

  const fs::path dir(out_dir);
  std::vector<std::pair<std::string, EvalReport>> rows;
  for (const auto& [label, make] : cells) {
    const fs::path cell_file = dir / "cells" / (label + ".json");
    EvalReport report;
    if (!force && fs::exists(cell_file)) {
      std::ifstream in(cell_file);
      report = eval_report_from_json(json::parse(in, nullptr, true).at("report"));
      out << label << ": cached\n";
    } else {
      report = evaluate_model(model, make());
      write_text(cell_file, json{{"label", label}, {"report", to_json(report)}}.dump(2) + "\n");
      out << label << ": f1 " << fixed(report.f_score) << "  sim_corr " << fixed(report.similarity_corrected_anomalous)
          << "  sim_input " << fixed(report.similarity_input_anomalous) << "  sim_normal "
          << fixed(report.similarity_corrected_normal) << "  (" << fixed(report.inference_seconds, 2) << " s)\n"
          << std::flush;
    }
    rows.emplace_back(label, std::move(report));
  }
  write_combined(dir, rows);
  out << "wrote " << (dir / "report.csv").string() << " (" << rows.size() << " rows)\n";
  return 0;
}

// ---- correct

int cmd_correct(const std::string& ckpt_path, const std::string& log_path, const std::string& out_dir,
                std::size_t chunk, const Flags& f, std::ostream& out) {
  RunConfig c = build_config(f);
  const Model model = load_checkpoint(ckpt_path);
  const ModelConfig& mc = model.config();
  if (mc.activity_names.empty())
    throw ConfigError("checkpoint '" + ckpt_path + "' carries no activity names; retrain with this version");
  const EventLog log = load_log(log_path, c.log_format, c.csv);
  const TokenVocab vocab{mc.activity_names.size()};
  const ActivityVocab names(mc.activity_names);

  // Encode what fits; remember per-trace failures instead of aborting.
  std::vector<std::string> errors(log.size());
  std::vector<std::size_t> ok;
  std::vector<TokenSeq> inputs;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const Trace& t = log.traces()[i];
    ActivitySeq seq;
    for (const auto& e : t.events) {
      const std::string& name = log.vocab().name(e.activity);
      const auto id = names.find(name);
      if (!id) {
        errors[i] = "unknown activity '" + name + "'";
        break;
      }
      seq.push_back(*id);
    }
    if (errors[i].empty() && seq.size() + 1 > mc.max_len)
      errors[i] = "trace of " + std::to_string(seq.size()) + " events exceeds model capacity of " +
                  std::to_string(mc.max_len - 1);
    if (!errors[i].empty()) continue;
    ok.push_back(i);
    inputs.push_back(encode_input(seq, vocab, mc.max_len));
  }
  const std::vector<ForwardOutput> outputs = model.infer(inputs, chunk);

  auto token_name = [&](Token t) { return vocab.is_activity(t) ? names.name(t) : std::string("[MISSING]"); };
  fs::create_directories(out_dir);
  std::ofstream corrected(fs::path(out_dir) / "corrected.csv", std::ios::binary);
  std::ofstream labels(fs::path(out_dir) / "labels.csv", std::ios::binary);
  std::ofstream scripts(fs::path(out_dir) / "localization.jsonl", std::ios::binary);
  csv::write_row(corrected, {"case_id", "activity", "timestamp"});
  csv::write_row(labels, {"case_id", "anomaly_prob", "label", "flagged", "changed", "error"});

  std::size_t anomalous = 0, changed = 0, failed = 0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const Trace& t = log.traces()[i];
    if (!errors[i].empty()) {
      ++failed;
      for (const auto& e : t.events) csv::write_row(corrected, {t.case_id, log.vocab().name(e.activity), ""});
      csv::write_row(labels, {t.case_id, "", "", "", "", errors[i]});
      continue;
    }
    const ForwardOutput& o = outputs[next];
    const TokenSeq& input = inputs[next];
    ++next;
    const TokenSeq seq(input.begin() + 1, input.begin() + 1 + static_cast<std::ptrdiff_t>(t.size()));
    const CorrectedTrace fix = correct_trace(o.logits, vocab);
    const Label label = classify(o.anomaly_prob);
    if (label == Label::Anomalous) ++anomalous;
    const bool differs = fix.tokens != seq;
    if (differs) ++changed;
    for (Token tok : fix.tokens) csv::write_row(corrected, {t.case_id, token_name(tok), ""});
    std::ostringstream prob;
    prob << std::setprecision(6) << o.anomaly_prob;
    csv::write_row(labels, {t.case_id, prob.str(), label == Label::Anomalous ? "anomalous" : "normal",
                            fix.flagged ? "1" : "0", differs ? "1" : "0", ""});
    json edits = json::array();
    for (const Edit& e : localize_events(seq, fix.tokens)) {
      json je{{"kind", to_string(e.kind)}, {"position", e.position}};
      if (e.from) je["from"] = token_name(*e.from);
      if (e.to) je["to"] = token_name(*e.to);
      edits.push_back(je);
    }
    scripts << json{{"case_id", t.case_id}, {"edits", edits}}.dump() << '\n';
  }
  out << json{{"traces", log.size()},
              {"classified_anomalous", anomalous},
              {"changed", changed},
              {"errors", failed},
              {"output_dir", out_dir}}
             .dump(2)
      << '\n';
  return 0;
}

// ---- synth

int cmd_synth(const std::string& model_path, const std::string& out_path, std::size_t n, std::uint64_t seed,
              std::ostream& out) {
  std::ifstream in(model_path);
  if (!in) throw ConfigError("cannot open process model '" + model_path + "'");
  std::stringstream text;
  text << in.rdbuf();
  const EventLog log = generate_synthetic_log(parse_process_model(text.str()), n, seed);
  std::ostringstream csv_text;
  write_csv(csv_text, log);
  write_text(out_path, csv_text.str());
  const LogStats s = compute_stats(log);
  out << "wrote " << s.num_traces << " traces over " << s.num_activities << " activities to " << out_path << '\n';
  return 0;
}

// ---- bench

int cmd_bench(const std::string& ckpt_path, const std::string& dataset_path, std::size_t traces,
              std::size_t sequential_sample, std::size_t chunk, std::ostream& out) {
  const Model model = load_checkpoint(ckpt_path);
  const LabeledDataset ds = load_dataset(dataset_path);
  if (ds.items.empty()) throw DataError("dataset '" + dataset_path + "' is empty");
  if (ds.max_len != model.config().max_len) throw ConfigError("dataset max_len does not match the checkpoint");
  std::vector<TokenSeq> inputs;
  for (std::size_t i = 0; i < traces; ++i) inputs.push_back(ds.items[i % ds.items.size()].input_tokens);

  const auto t0 = std::chrono::steady_clock::now();
  const auto outputs = model.infer(inputs, chunk);
  const double batched = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  sequential_sample = std::max<std::size_t>(1, std::min(sequential_sample, inputs.size()));
  std::size_t agree = 0;
  const auto t1 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < sequential_sample; ++i) {
    const CorrectedTrace s = sequential_correct(model, inputs[i], ds.vocab);
    if (s.tokens == correct_trace(outputs[i].logits, ds.vocab).tokens) ++agree;
  }
  const double sequential = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  const double estimated = sequential / static_cast<double>(sequential_sample) * static_cast<double>(inputs.size());
  out << json{{"traces", inputs.size()},
              {"max_len", ds.max_len},
              {"batched_seconds", batched},
              {"sequential_sample", sequential_sample},
              {"sequential_sample_seconds", sequential},
              {"sequential_estimated_seconds", estimated},
              {"speedup", batched > 0 ? estimated / batched : 0.0},
              {"agreement", static_cast<double>(agree) / static_cast<double>(sequential_sample)}}
             .dump(2)
      << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trace anomaly detection and correction with a Transformer autoencoder", "tracefix"};
  app.require_subcommand(1);
  Flags f;

  std::string log_path, out_path, ckpt_path, dataset_path, stats_format = "table", part = "all";
  std::vector<std::string> datasets;
  bool single = false, force = false;
  std::size_t chunk = 64, bench_traces = 1000, seq_sample = 20;

  auto* stats = app.add_subcommand("stats", "Print log statistics");
  stats->add_option("log", log_path, "CSV or XES log")->required();
  stats->add_option("--format", stats_format, "table or json")->check(CLI::IsMember({"table", "json"}));
  add_log_flags(stats, f);

  auto* inject = app.add_subcommand("inject", "Inject anomalies and write a labeled dataset");
  inject->add_option("log", log_path)->required();
  inject->add_option("-o,--out", out_path, "dataset file (JSON lines)")->required();
  inject->add_option("--part", part, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}));
  add_log_flags(inject, f);
  add_run_flags(inject, f);
  add_injection_flags(inject, f);

  auto* trn = app.add_subcommand("train", "Train a model on a labeled dataset");
  trn->add_option("dataset", dataset_path)->required();
  trn->add_option("-o,--out", out_path, "output directory")->required();
  add_run_flags(trn, f);
  add_model_flags(trn, f);

  auto* evl = app.add_subcommand("eval", "Evaluate a checkpoint on datasets or on the test grid of a log");
  evl->add_option("checkpoint", ckpt_path)->required();
  evl->add_option("-o,--out", out_path, "output directory")->required();
  evl->add_option("--dataset", datasets, "labeled dataset file(s), one report row each");
  evl->add_option("--log", log_path, "log to split and inject over the test grid");
  evl->add_flag("--single", single, "evaluate only the injection given by --r-case/--r-act/--fixed-count");
  evl->add_flag("--force", force, "recompute cells that already have output");
  add_log_flags(evl, f);
  add_run_flags(evl, f);
  add_injection_flags(evl, f);

  auto* cor = app.add_subcommand("correct", "Classify and correct every trace of a raw log");
  cor->add_option("checkpoint", ckpt_path)->required();
  cor->add_option("log", log_path)->required();
  cor->add_option("-o,--out", out_path, "output directory")->required();
  cor->add_option("--chunk", chunk, "sequences per inference batch");
  add_log_flags(cor, f);
  add_run_flags(cor, f);

  auto* bench = app.add_subcommand("bench", "Time batched inference against per-position decoding");
  bench->add_option("checkpoint", ckpt_path)->required();
  bench->add_option("dataset", dataset_path)->required();
  bench->add_option("--traces", bench_traces, "traces for the batched pass");
  bench->add_option("--sequential-sample", seq_sample, "traces decoded position by position");
  bench->add_option("--chunk", chunk, "sequences per inference batch");

  auto* synth = app.add_subcommand("synth", "Play out a process model into a CSV log");
  std::size_t synth_n = 1000;
  std::uint64_t synth_seed = 0;
  synth->add_option("model", dataset_path, "process model JSON")->required();
  synth->add_option("-o,--out", out_path, "CSV log")->required();
  synth->add_option("-n,--traces", synth_n);
  synth->add_option("--seed", synth_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (stats->parsed()) return cmd_stats(log_path, stats_format, f, out);
    if (inject->parsed()) return cmd_inject(log_path, out_path, part, f, out);
    if (trn->parsed()) return cmd_train(dataset_path, out_path, f, out);
    if (evl->parsed()) return cmd_eval(ckpt_path, out_path, datasets, log_path, single, force, f, out);
    if (cor->parsed()) return cmd_correct(ckpt_path, log_path, out_path, chunk, f, out);
    if (synth->parsed()) return cmd_synth(dataset_path, out_path, synth_n, synth_seed, out);
    if (bench->parsed()) return cmd_bench(ckpt_path, dataset_path, bench_traces, seq_sample, chunk, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace tracefix::cli
