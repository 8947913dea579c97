#include "texting/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_set>

namespace texting {

using nlohmann::json;

std::string experiment_kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::full: return "full";
    case ExperimentKind::inductive: return "inductive";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::attention: return "attention";
    case ExperimentKind::stats: return "stats";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  if (name == "full") return ExperimentKind::full;
  if (name == "inductive") return ExperimentKind::inductive;
  if (name == "sweep") return ExperimentKind::sweep;
  if (name == "attention") return ExperimentKind::attention;
  if (name == "stats") return ExperimentKind::stats;
  fail("bad_config", "unknown experiment kind '" + std::string(name) + "'");
}

json train_report_to_json(const TrainReport& report) {
  json epochs = json::array();
  for (const EpochRecord& e : report.epochs) {
    json rec{{"epoch", e.epoch},
             {"train_loss", e.train_loss},
             {"val_accuracy", e.val_accuracy}};
    if (e.train_accuracy >= 0.0) rec["train_accuracy"] = e.train_accuracy;
    epochs.push_back(std::move(rec));
  }
  return json{{"seed", report.seed},
              {"best_epoch", report.best_epoch},
              {"best_val_accuracy", report.best_val_accuracy},
              {"test_accuracy", report.test_accuracy},
              {"epochs", std::move(epochs)}};
}

json stats_to_json(const StatsReport& r) {
  return json{{"dataset", r.dataset},
              {"documents", r.documents},
              {"train_documents", r.train_documents},
              {"test_documents", r.test_documents},
              {"classes", r.classes},
              {"max_vocab", r.max_vocab},
              {"min_vocab", r.min_vocab},
              {"avg_vocab", r.avg_vocab},
              {"prop_new_words", r.prop_new_words}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("kind"))
    c.kind = parse_experiment_kind(j.at("kind").get<std::string>());
  c.dataset = j.value("dataset", c.dataset);
  c.data_dir = j.value("data_dir", c.data_dir);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.embeddings_path = j.value("embeddings", c.embeddings_path);
  c.stopwords_path = j.value("stopwords", c.stopwords_path);
  if (j.contains("remove_stopwords"))
    c.remove_stopwords = j.at("remove_stopwords").get<bool>();
  c.checkpoint = j.value("checkpoint", c.checkpoint);
  c.oov_seed = j.value("oov_seed", c.oov_seed);
  if (j.contains("hyper")) c.hyper = hyper_params_from_json(j.at("hyper"));
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<uint64_t>>();
  c.channel = j.value("channel", c.channel);
  if (j.contains("fraction")) c.fraction = j.at("fraction").get<double>();
  if (j.contains("docs_per_class"))
    c.docs_per_class = j.at("docs_per_class").get<int>();
  c.fraction_sweep = j.value("fraction_sweep", c.fraction_sweep);
  c.sweep_param = j.value("sweep_param", c.sweep_param);
  if (j.contains("sweep_values"))
    c.sweep_values = j.at("sweep_values").get<std::vector<int>>();
  c.verify = j.value("verify", c.verify);
  c.write_checkpoints = j.value("write_checkpoints", c.write_checkpoints);
  c.attention_docs = j.value("attention_docs", c.attention_docs);
  return c;
}

json ExperimentConfig::to_json() const {
  json j{{"kind", experiment_kind_name(kind)},
         {"dataset", dataset},
         {"data_dir", data_dir},
         {"out_dir", out_dir},
         {"embeddings", embeddings_path},
         {"stopwords", stopwords_path},
         {"checkpoint", checkpoint},
         {"oov_seed", oov_seed},
         {"hyper", hyper_params_to_json(hyper)},
         {"seeds", seeds},
         {"channel", channel},
         {"fraction_sweep", fraction_sweep},
         {"sweep_param", sweep_param},
         {"sweep_values", sweep_values},
         {"verify", verify},
         {"write_checkpoints", write_checkpoints},
         {"attention_docs", attention_docs}};
  if (remove_stopwords) j["remove_stopwords"] = *remove_stopwords;
  if (fraction) j["fraction"] = *fraction;
  if (docs_per_class) j["docs_per_class"] = *docs_per_class;
  return j;
}

void ExperimentConfig::validate() const {
  if (dataset.empty() && kind != ExperimentKind::attention)
    fail("bad_config", "dataset name is required");
  if (seeds.empty()) fail("bad_config", "at least one seed is required");
  if (channel != "local" && channel != "global" && channel != "multi")
    fail("bad_config", "channel must be local, global or multi");
  if (kind == ExperimentKind::sweep) {
    if (sweep_param != "steps" && sweep_param != "window")
      fail("bad_config", "sweep parameter must be 'steps' or 'window'");
    if (sweep_values.empty()) fail("bad_config", "sweep values are empty");
    for (size_t i = 1; i < sweep_values.size(); ++i)
      if (sweep_values[i] <= sweep_values[i - 1])
        fail("bad_config", "sweep values must be strictly increasing");
    const int lo = sweep_values.front();
    if (sweep_param == "steps" && lo < 1)
      fail("bad_config", "steps sweep values must be >= 1");
    if (sweep_param == "window" && lo < 2)
      fail("bad_config", "window sweep values must be >= 2");
  }
  if (fraction && !(*fraction > 0.0 && *fraction <= 1.0))
    fail("bad_config", "fraction must lie in (0, 1]");
  if (docs_per_class && *docs_per_class < 1)
    fail("bad_config", "docs_per_class must be >= 1");
}

Corpus load_experiment_corpus(const ExperimentConfig& config) {
  LoadOptions opts;
  opts.remove_stopwords = config.remove_stopwords;
  if (!config.stopwords_path.empty()) opts.stopword_path = config.stopwords_path;
  return load_corpus(config.data_dir, config.dataset, opts);
}

EmbeddingTable load_experiment_embeddings(const ExperimentConfig& config) {
  if (config.embeddings_path.empty()) {
    EmbeddingTable table;
    table.dimension = config.hyper.input_dim;
    table.oov_seed = config.oov_seed;
    return table;
  }
  return load_embeddings(config.embeddings_path, config.hyper.input_dim,
                         config.oov_seed);
}

namespace {

namespace fs = std::filesystem;

void ensure_out_dir(const ExperimentConfig& config) {
  if (!config.out_dir.empty()) fs::create_directories(config.out_dir);
}

std::string out_path(const ExperimentConfig& config, const std::string& name) {
  return config.out_dir.empty() ? name : config.out_dir + "/" + name;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("io_error", "cannot write '" + path + "'");
  out << content;
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= double(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / double(xs.size() - 1))};
}

struct SplitPointers {
  std::vector<const DocGraph<float>*> train, val, test;
};

SplitPointers collect_split_pointers(const Corpus& corpus,
                                     const std::vector<DocGraph<float>>& graphs) {
  SplitPointers p;
  for (size_t i = 0; i < corpus.documents.size(); ++i) {
    switch (corpus.documents[i].split) {
      case Split::train: p.train.push_back(&graphs[i]); break;
      case Split::val: p.val.push_back(&graphs[i]); break;
      case Split::test: p.test.push_back(&graphs[i]); break;
    }
  }
  return p;
}

// One training run per requested channel; returns the test accuracy that the
// configured channel reports (voted for "multi").
struct SeedOutcome {
  double accuracy = 0.0;
  TrainReport report;
  std::optional<TrainReport> report_global;
};

SeedOutcome run_one_seed(const ExperimentConfig& config, const Corpus& base,
                         const std::vector<DocGraph<float>>& local_graphs,
                         const std::vector<DocGraph<float>>& global_graphs,
                         const HyperParams& hyper_in, uint64_t seed) {
  HyperParams hyper = hyper_in;
  hyper.seed = seed;
  Corpus corpus = split_train_val(base, hyper.val_ratio, seed);

  TrainOptions options;
  if (config.write_checkpoints) {
    ensure_out_dir(config);
    options.checkpoint_prefix = out_path(
        config, config.dataset + "_seed" + std::to_string(seed) + "_ckpt");
  }

  SeedOutcome outcome;
  if (config.channel == "local" || config.channel == "multi") {
    if (config.channel == "multi" && !options.checkpoint_prefix.empty())
      options.checkpoint_prefix += "_local";
    SplitPointers p = collect_split_pointers(corpus, local_graphs);
    TrainResult<float> local =
        train_on_graphs(p.train, p.val, p.test, base.class_count(), hyper, options);
    outcome.accuracy = local.report.test_accuracy;
    outcome.report = local.report;

    if (config.channel == "multi") {
      TrainOptions gopts = options;
      if (!gopts.checkpoint_prefix.empty()) {
        gopts.checkpoint_prefix = out_path(
            config,
            config.dataset + "_seed" + std::to_string(seed) + "_ckpt_global");
      }
      SplitPointers pg = collect_split_pointers(corpus, global_graphs);
      TrainResult<float> global_run = train_on_graphs(
          pg.train, pg.val, pg.test, base.class_count(), hyper, gopts);
      outcome.report_global = global_run.report;

      DenseMat<float> probs_local = predict_all(local.params, p.test, hyper);
      DenseMat<float> probs_global = predict_all(global_run.params, pg.test, hyper);
      const std::vector<int> voted = vote_multichannel(probs_local, probs_global);
      long correct = 0;
      for (size_t i = 0; i < p.test.size(); ++i)
        if (voted[i] == p.test[i]->label) ++correct;
      outcome.accuracy =
          p.test.empty() ? 0.0 : double(correct) / double(p.test.size());
    }
  } else {  // global only
    SplitPointers p = collect_split_pointers(corpus, global_graphs);
    TrainResult<float> run =
        train_on_graphs(p.train, p.val, p.test, base.class_count(), hyper, options);
    outcome.accuracy = run.report.test_accuracy;
    outcome.report = run.report;
  }
  return outcome;
}

}  // namespace

RunSummary run_single(const ExperimentConfig& config, const HyperParams& hyper) {
  Corpus base = load_experiment_corpus(config);
  EmbeddingTable embeddings = load_experiment_embeddings(config);

  std::vector<DocGraph<float>> local_graphs, global_graphs;
  if (config.channel == "local" || config.channel == "multi")
    local_graphs =
        build_channel_graphs<float>(base, embeddings, hyper, Channel::local);
  if (config.channel == "global" || config.channel == "multi")
    global_graphs =
        build_channel_graphs<float>(base, embeddings, hyper, Channel::global);

  RunSummary summary;
  for (uint64_t seed : config.seeds) {
    SeedOutcome o =
        run_one_seed(config, base, local_graphs, global_graphs, hyper, seed);
    summary.per_seed_accuracy.push_back(o.accuracy);
    summary.reports.push_back(std::move(o.report));
    if (o.report_global)
      summary.reports_global.push_back(std::move(*o.report_global));
  }
  std::tie(summary.mean_accuracy, summary.std_accuracy) =
      mean_std(summary.per_seed_accuracy);
  return summary;
}

RunSummary run_full(const ExperimentConfig& config) {
  config.validate();
  RunSummary summary = run_single(config, config.hyper);

  ensure_out_dir(config);
  const std::string prefix = config.dataset + "_full";

  json out;
  out["config"] = config.to_json();
  out["mean_accuracy"] = summary.mean_accuracy;
  out["std_accuracy"] = summary.std_accuracy;
  json runs = json::array();
  for (const TrainReport& r : summary.reports) runs.push_back(train_report_to_json(r));
  out["runs"] = std::move(runs);
  if (!summary.reports_global.empty()) {
    json gruns = json::array();
    for (const TrainReport& r : summary.reports_global)
      gruns.push_back(train_report_to_json(r));
    out["runs_global"] = std::move(gruns);
    json voted = json::array();
    for (double a : summary.per_seed_accuracy) voted.push_back(a);
    out["voted_accuracy"] = std::move(voted);
  }
  write_text(out_path(config, prefix + "_results.json"), out.dump(2) + "\n");

  std::string csv = "seed,test_accuracy\n";
  for (size_t i = 0; i < config.seeds.size(); ++i)
    csv += std::to_string(config.seeds[i]) + "," +
           fmt_double(summary.per_seed_accuracy[i]) + "\n";
  write_text(out_path(config, prefix + "_results.csv"), csv);

  std::string epochs = "seed,epoch,train_loss,val_acc\n";
  for (const TrainReport& r : summary.reports)
    for (const EpochRecord& e : r.epochs)
      epochs += std::to_string(r.seed) + "," + std::to_string(e.epoch) + "," +
                fmt_double(e.train_loss) + "," + fmt_double(e.val_accuracy) + "\n";
  write_text(out_path(config, prefix + "_epochs.csv"), epochs);
  return summary;
}

namespace {

// Keeps a seeded stratified sample of the training documents; document order
// is preserved. A fraction of 1.0 keeps the corpus identical.
Corpus subsample_training(const Corpus& corpus, std::optional<double> fraction,
                          std::optional<int> docs_per_class, uint64_t seed) {
  const int classes = corpus.class_count();
  std::vector<std::vector<size_t>> per_class(static_cast<size_t>(classes));
  for (size_t i = 0; i < corpus.documents.size(); ++i)
    if (corpus.documents[i].split == Split::train)
      per_class[size_t(corpus.documents[i].label)].push_back(i);

  std::vector<char> keep(corpus.documents.size(), 0);
  for (int c = 0; c < classes; ++c) {
    auto& idx = per_class[size_t(c)];
    const long n_c = long(idx.size());
    long k;
    if (docs_per_class) {
      k = *docs_per_class;
      if (k > n_c)
        fail("subset_too_large",
             "class '" + corpus.classes[size_t(c)] + "' has only " +
                 std::to_string(n_c) + " training documents, requested " +
                 std::to_string(k));
    } else {
      k = std::llround(*fraction * double(n_c));
    }
    if (k <= 0)
      fail("empty_class_sample", "class '" + corpus.classes[size_t(c)] +
                                     "' would receive zero sampled documents");
    Rng rng(mix_seed(mix_seed(seed, 0x5afull), uint64_t(c)));
    rng.shuffle(idx);
    for (long j = 0; j < k; ++j) keep[idx[size_t(j)]] = 1;
  }

  Corpus out;
  out.classes = corpus.classes;
  for (size_t i = 0; i < corpus.documents.size(); ++i)
    if (corpus.documents[i].split != Split::train || keep[i])
      out.documents.push_back(corpus.documents[i]);
  rebuild_vocabulary(out);
  return out;
}

InductiveResult inductive_point(const ExperimentConfig& config,
                                const Corpus& base,
                                const EmbeddingTable& embeddings,
                                std::optional<double> fraction,
                                std::optional<int> docs_per_class) {
  InductiveResult result;

  std::vector<double> accs;
  for (uint64_t seed : config.seeds) {
    Corpus sampled = subsample_training(base, fraction, docs_per_class, seed);

    long sampled_docs = 0;
    for (const Document& d : sampled.documents)
      if (d.split == Split::train) ++sampled_docs;
    std::unordered_set<std::string> test_words;
    for (const Document& d : sampled.documents)
      if (d.split == Split::test)
        for (const std::string& w : d.tokens) test_words.insert(w);
    long unseen = 0;
    for (const auto& w : test_words)
      if (!sampled.in_vocabulary(w)) ++unseen;

    result.sampled_documents = sampled_docs;
    result.words_in_training = long(sampled.vocabulary.size());
    result.new_words_in_test = unseen;
    result.fraction_used = fraction ? *fraction : 0.0;

    HyperParams hyper = config.hyper;
    hyper.seed = seed;
    // very small subsamples cannot sustain the configured split; fall back to
    // a single validation document rather than refusing to run
    double ratio = hyper.val_ratio;
    if (std::llround((1.0 - ratio) * double(sampled_docs)) < 1 &&
        sampled_docs >= 2)
      ratio = double(sampled_docs - 1) / double(sampled_docs);
    Corpus corpus = split_train_val(sampled, ratio, seed);
    TrainResult<float> run = train(
        corpus, embeddings, hyper,
        config.channel == "global" ? Channel::global : Channel::local, {});
    accs.push_back(run.report.test_accuracy);
  }

  result.per_seed_accuracy = accs;
  std::tie(result.mean_accuracy, result.std_accuracy) = mean_std(accs);
  return result;
}

json inductive_to_json(const InductiveResult& r) {
  return json{{"fraction", r.fraction_used},
              {"sampled_documents", r.sampled_documents},
              {"words_in_training", r.words_in_training},
              {"new_words_in_test", r.new_words_in_test},
              {"mean_accuracy", r.mean_accuracy},
              {"std_accuracy", r.std_accuracy},
              {"per_seed_accuracy", r.per_seed_accuracy}};
}

}  // namespace

const std::vector<double> kInductiveFractionGrid = {0.005, 0.01, 0.05,
                                                    0.1,   0.5,  1.0};

InductiveResult run_inductive(const ExperimentConfig& config) {
  config.validate();
  if (config.fraction.has_value() == config.docs_per_class.has_value())
    fail("bad_config",
         "inductive runs need exactly one of fraction / docs_per_class");

  Corpus base = load_experiment_corpus(config);
  EmbeddingTable embeddings = load_experiment_embeddings(config);
  InductiveResult result = inductive_point(config, base, embeddings,
                                           config.fraction, config.docs_per_class);

  ensure_out_dir(config);
  json out;
  out["config"] = config.to_json();
  out["result"] = inductive_to_json(result);
  write_text(out_path(config, config.dataset + "_inductive_results.json"),
             out.dump(2) + "\n");
  return result;
}

std::vector<InductiveResult> run_inductive_sweep(const ExperimentConfig& config) {
  config.validate();
  Corpus base = load_experiment_corpus(config);
  EmbeddingTable embeddings = load_experiment_embeddings(config);

  std::vector<InductiveResult> curve;
  for (double f : kInductiveFractionGrid)
    curve.push_back(
        inductive_point(config, base, embeddings, f, std::nullopt));

  ensure_out_dir(config);
  std::string csv =
      "fraction,sampled_documents,words_in_training,new_words_in_test,"
      "mean_accuracy,std_accuracy\n";
  for (const InductiveResult& r : curve)
    csv += fmt_double(r.fraction_used) + "," +
           std::to_string(r.sampled_documents) + "," +
           std::to_string(r.words_in_training) + "," +
           std::to_string(r.new_words_in_test) + "," +
           fmt_double(r.mean_accuracy) + "," + fmt_double(r.std_accuracy) + "\n";
  write_text(out_path(config, config.dataset + "_inductive_curve.csv"), csv);

  json out;
  out["config"] = config.to_json();
  json points = json::array();
  for (const InductiveResult& r : curve) points.push_back(inductive_to_json(r));
  out["curve"] = std::move(points);
  write_text(out_path(config, config.dataset + "_inductive_curve.json"),
             out.dump(2) + "\n");
  return curve;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  Corpus base = load_experiment_corpus(config);
  EmbeddingTable embeddings = load_experiment_embeddings(config);

  SweepResult result;
  result.parameter = config.sweep_param;

  for (int value : config.sweep_values) {
    HyperParams hyper = config.hyper;
    double density = -1.0;
    if (config.sweep_param == "steps") {
      hyper.steps = value;
    } else {
      hyper.window = value;
    }

    const Channel channel =
        config.channel == "global" ? Channel::global : Channel::local;
    std::vector<DocGraph<float>> graphs =
        build_channel_graphs<float>(base, embeddings, hyper, channel);
    if (config.sweep_param == "window") {
      double sum = 0.0;
      for (const auto& g : graphs) sum += graph_density(g);
      density = graphs.empty() ? 0.0 : sum / double(graphs.size());
    }

    SweepEntry entry;
    entry.value = value;
    entry.mean_density = density;
    for (uint64_t seed : config.seeds) {
      HyperParams h = hyper;
      h.seed = seed;
      Corpus corpus = split_train_val(base, h.val_ratio, seed);
      SplitPointers p = collect_split_pointers(corpus, graphs);
      TrainResult<float> run =
          train_on_graphs(p.train, p.val, p.test, base.class_count(), h, {});
      entry.per_seed_accuracy.push_back(run.report.test_accuracy);
    }
    std::tie(entry.mean_accuracy, entry.std_accuracy) =
        mean_std(entry.per_seed_accuracy);
    result.entries.push_back(std::move(entry));
  }

  ensure_out_dir(config);
  const std::string prefix = config.dataset + "_sweep_" + config.sweep_param;

  std::string csv = config.sweep_param + ",seed,test_accuracy";
  if (config.sweep_param == "window") csv += ",mean_density";
  csv += "\n";
  for (const SweepEntry& e : result.entries)
    for (size_t i = 0; i < config.seeds.size(); ++i) {
      csv += std::to_string(e.value) + "," + std::to_string(config.seeds[i]) +
             "," + fmt_double(e.per_seed_accuracy[i]);
      if (config.sweep_param == "window") csv += "," + fmt_double(e.mean_density);
      csv += "\n";
    }
  write_text(out_path(config, prefix + ".csv"), csv);

  json out;
  out["config"] = config.to_json();
  json entries = json::array();
  for (const SweepEntry& e : result.entries) {
    json je{{"value", e.value},
            {"mean_accuracy", e.mean_accuracy},
            {"std_accuracy", e.std_accuracy},
            {"per_seed_accuracy", e.per_seed_accuracy}};
    if (e.mean_density >= 0.0) je["mean_density"] = e.mean_density;
    entries.push_back(std::move(je));
  }
  out["entries"] = std::move(entries);
  write_text(out_path(config, prefix + ".json"), out.dump(2) + "\n");
  return result;
}

StatsReport run_stats(const ExperimentConfig& config) {
  config.validate();
  Corpus corpus = load_experiment_corpus(config);
  StatsReport report = corpus_stats(corpus);
  report.dataset = config.dataset;

  if (!config.out_dir.empty()) {
    ensure_out_dir(config);
    write_text(out_path(config, config.dataset + "_stats.json"),
               stats_to_json(report).dump(2) + "\n");
  }

  if (config.verify) {
    auto expected = reference_stats(config.dataset);
    if (!expected)
      fail("no_reference_stats",
           "no reference stats for dataset '" + config.dataset + "'");
    std::string detail;
    if (!matches_reference(report, *expected, &detail))
      fail("verify_failed", config.dataset + ": " + detail);
  }
  return report;
}

namespace {

std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void export_attention(const ParamSet<float>& params, const HyperParams& hyper,
                      const Corpus& corpus, const std::vector<size_t>& doc_indices,
                      const EmbeddingTable& embeddings,
                      const std::string& out_prefix, bool max_over_dims) {
  if (doc_indices.empty()) fail("bad_config", "no documents selected");

  std::string csv = "doc_id,word,weight,predicted_label,true_label\n";
  std::string html =
      "<!doctype html>\n<html><head><meta charset=\"utf-8\">"
      "<title>attention</title>\n<style>\n"
      "body{font-family:sans-serif;max-width:60em;margin:2em auto;}\n"
      ".doc{margin-bottom:1.5em;line-height:1.9;}\n"
      ".meta{color:#555;font-size:0.85em;}\n"
      "span.w{padding:0.1em 0.15em;border-radius:0.2em;}\n"
      "</style></head><body>\n<h1>Soft-attention weights</h1>\n";

  const int hidden = params.hidden;
  for (size_t idx : doc_indices) {
    const Document& doc = corpus.documents.at(idx);
    DocGraph<float> g = build_graph<float>(doc.tokens, hyper.window, embeddings);
    g.id = doc.id;
    g.label = doc.label;
    g = normalize_adjacency(std::move(g), hyper.adjacency_norm, hyper.self_loops);

    std::vector<const DocGraph<float>*> one{&g};
    GraphBatch<float> batch = batch_graphs(one);
    batch.labels[0] = std::max(0, doc.label);
    ForwardTrace<float> trace = forward(batch, params, hyper, Mode::eval);
    const int predicted = argmax_rows(trace.probs)[0];

    const int v = g.node_count();
    std::vector<double> weight(static_cast<size_t>(v));
    for (int i = 0; i < v; ++i) {
      auto row = trace.att_gate.top(0, v).row(i);
      weight[size_t(i)] =
          max_over_dims ? double(row.maxCoeff())
                        : double(row.sum()) / double(hidden);
    }

    double lo = weight[0], hi = weight[0];
    for (double w : weight) {
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
    std::vector<double> norm(static_cast<size_t>(v));
    for (int i = 0; i < v; ++i)
      norm[size_t(i)] = hi > lo ? (weight[size_t(i)] - lo) / (hi - lo) : 1.0;

    std::unordered_map<std::string, int> node_of;
    for (int i = 0; i < v; ++i) node_of.emplace(g.node_words[size_t(i)], i);

    const std::string pred_name = corpus.classes.at(size_t(predicted));
    const std::string true_name = doc.label >= 0 && doc.label < corpus.class_count()
                                      ? corpus.classes[size_t(doc.label)]
                                      : "?";
    for (int i = 0; i < v; ++i)
      csv += doc.id + "," + g.node_words[size_t(i)] + "," +
             fmt_double(weight[size_t(i)]) + "," + pred_name + "," + true_name +
             "\n";

    html += "<div class=\"doc\"><div class=\"meta\">" + html_escape(doc.id) +
            " &mdash; predicted: " + html_escape(pred_name) +
            ", true: " + html_escape(true_name) + "</div>\n";
    for (const std::string& tok : doc.tokens) {
      const double a = norm[size_t(node_of.at(tok))];
      char style[96];
      std::snprintf(style, sizeof style,
                    "background:rgba(255,160,0,%.3f)", a);
      html += "<span class=\"w\" style=\"" + std::string(style) + "\">" +
              html_escape(tok) + "</span> ";
    }
    html += "</div>\n";
  }
  html += "</body></html>\n";

  write_text(out_prefix + ".csv", csv);
  write_text(out_prefix + ".html", html);
}

}  // namespace texting
