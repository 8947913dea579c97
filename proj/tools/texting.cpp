// texting: individual-graph text classification at the command line.
//
//   texting stats --dataset mr --data-dir data [--verify]
//   texting train --dataset mr --data-dir data --embeddings glove.txt --seeds 1,2,3
//   texting eval --checkpoint out/mr_seed1_ckpt --dataset mr --data-dir data ...
//   texting inductive --dataset mr ... --docs-per-class 20 | --fraction 0.05 | --fraction-sweep
//   texting sweep --dataset mr ... --param steps --values 1,2,3,4
//   texting attention --checkpoint ... --dataset mr ...
//   texting dump --dataset mr --data-dir data --out graphs.jsonl

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "texting/experiments.hpp"

namespace {

using namespace texting;
using nlohmann::json;

struct CliArgs {
  std::string config_path;
  ExperimentConfig config;
  std::string seeds_csv;
  std::string values_csv;
  std::string channel;
  std::string dump_out = "graphs.jsonl";
  std::string eval_split = "test";
  bool attention_max = false;

  // hyper overrides (only applied when the flag was passed)
  int steps = -1, hidden = -1, window = -1, batch_size = -1, max_epochs = -1,
      patience = -1, input_dim = -1;
  double dropout = -1.0, lr = -1.0, grad_clip = -1.0, val_ratio = -1.0;
  std::string adjacency_norm;
  int self_loops = -1;     // tri-state
  int projection = -1;
  double fraction = -1.0;
  int docs_per_class = -1;
  int remove_stopwords = -1;
};

std::vector<uint64_t> parse_u64_list(const std::string& csv) {
  std::vector<uint64_t> out;
  size_t start = 0;
  while (start <= csv.size()) {
    size_t comma = csv.find(',', start);
    if (comma == std::string::npos) comma = csv.size();
    if (comma > start) out.push_back(std::stoull(csv.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  for (uint64_t v : parse_u64_list(csv)) out.push_back(int(v));
  return out;
}

void add_common_options(CLI::App* cmd, CliArgs& a) {
  cmd->add_option("--config", a.config_path, "JSON config file");
  cmd->add_option("--dataset", a.config.dataset, "dataset name");
  cmd->add_option("--data-dir", a.config.data_dir, "directory with <name>.meta/.texts");
  cmd->add_option("--out-dir", a.config.out_dir, "output directory");
  cmd->add_option("--embeddings", a.config.embeddings_path,
                  "pretrained embedding text file");
  cmd->add_option("--stopwords", a.config.stopwords_path, "stopword file");
  cmd->add_option("--seed,--seeds", a.seeds_csv, "comma-separated seeds");
  cmd->add_option("--channel", a.channel, "local|global|multi");
  cmd->add_option("--oov-seed", a.config.oov_seed, "seed for unseen-word vectors");
  cmd->add_flag_function(
      "--remove-stopwords{1},--keep-stopwords{0}",
      [&a](std::int64_t v) { a.remove_stopwords = v != 0 ? 1 : 0; },
      "override the per-dataset stopword default");

  cmd->add_option("--steps", a.steps, "gated interaction steps");
  cmd->add_option("--hidden", a.hidden, "hidden dimension");
  cmd->add_option("--window", a.window, "sliding-window size");
  cmd->add_option("--input-dim", a.input_dim, "word feature dimension");
  cmd->add_option("--batch-size", a.batch_size, "mini-batch size");
  cmd->add_option("--max-epochs", a.max_epochs, "epoch budget");
  cmd->add_option("--patience", a.patience, "early-stopping patience");
  cmd->add_option("--dropout", a.dropout, "dropout rate");
  cmd->add_option("--lr", a.lr, "learning rate");
  cmd->add_option("--grad-clip", a.grad_clip, "global-norm gradient clip (0 off)");
  cmd->add_option("--val-ratio", a.val_ratio, "train share of the training set");
  cmd->add_option("--adjacency-norm", a.adjacency_norm, "none|row|symmetric");
  cmd->add_flag_function(
      "--self-loops{1},--no-self-loops{0}",
      [&a](std::int64_t v) { a.self_loops = int(v); }, "adjacency self loops");
  cmd->add_flag_function(
      "--projection{1},--no-projection{0}",
      [&a](std::int64_t v) { a.projection = int(v); }, "learned input projection");
}

void finalize_config(CliArgs& a, ExperimentKind kind) {
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) fail("missing_file", "cannot open config '" + a.config_path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      fail("bad_config", std::string("config parse error: ") + e.what());
    }
    ExperimentConfig from_file = ExperimentConfig::from_json(j);
    // flags given on the command line override the file
    ExperimentConfig flags = a.config;
    a.config = from_file;
    if (!flags.dataset.empty()) a.config.dataset = flags.dataset;
    if (flags.data_dir != ".") a.config.data_dir = flags.data_dir;
    if (flags.out_dir != "out") a.config.out_dir = flags.out_dir;
    if (!flags.embeddings_path.empty()) a.config.embeddings_path = flags.embeddings_path;
    if (!flags.stopwords_path.empty()) a.config.stopwords_path = flags.stopwords_path;
    if (!flags.checkpoint.empty()) a.config.checkpoint = flags.checkpoint;
    if (flags.oov_seed != 42) a.config.oov_seed = flags.oov_seed;
    if (flags.fraction) a.config.fraction = flags.fraction;
    if (flags.docs_per_class) a.config.docs_per_class = flags.docs_per_class;
    if (flags.fraction_sweep) a.config.fraction_sweep = true;
    if (flags.verify) a.config.verify = true;
    if (flags.write_checkpoints) a.config.write_checkpoints = true;
  }
  a.config.kind = kind;
  if (!a.seeds_csv.empty()) a.config.seeds = parse_u64_list(a.seeds_csv);
  if (!a.values_csv.empty()) a.config.sweep_values = parse_int_list(a.values_csv);
  if (!a.channel.empty()) a.config.channel = a.channel;
  if (a.fraction >= 0.0) a.config.fraction = a.fraction;
  if (a.docs_per_class >= 0) a.config.docs_per_class = a.docs_per_class;
  if (a.remove_stopwords >= 0) a.config.remove_stopwords = a.remove_stopwords != 0;

  HyperParams& h = a.config.hyper;
  if (a.steps >= 0) h.steps = a.steps;
  if (a.hidden > 0) h.hidden = a.hidden;
  if (a.window > 0) h.window = a.window;
  if (a.input_dim > 0) h.input_dim = a.input_dim;
  if (a.batch_size > 0) h.batch_size = a.batch_size;
  if (a.max_epochs > 0) h.max_epochs = a.max_epochs;
  if (a.patience >= 0) h.patience = a.patience;
  if (a.dropout >= 0.0) h.dropout_rate = a.dropout;
  if (a.lr > 0.0) h.learning_rate = a.lr;
  if (a.grad_clip >= 0.0) h.grad_clip = a.grad_clip;
  if (a.val_ratio > 0.0) h.val_ratio = a.val_ratio;
  if (!a.adjacency_norm.empty()) h.adjacency_norm = parse_adj_norm(a.adjacency_norm);
  if (a.self_loops >= 0) h.self_loops = a.self_loops != 0;
  if (a.projection >= 0) h.use_projection = a.projection != 0;
}

void print_stats(const StatsReport& r) {
  std::printf("dataset          %s\n", r.dataset.c_str());
  std::printf("documents        %ld\n", r.documents);
  std::printf("training docs    %ld\n", r.train_documents);
  std::printf("test docs        %ld\n", r.test_documents);
  std::printf("classes          %d\n", r.classes);
  std::printf("max vocab        %ld\n", r.max_vocab);
  std::printf("min vocab        %ld\n", r.min_vocab);
  std::printf("avg vocab        %.2f\n", r.avg_vocab);
  std::printf("prop new words   %.2f%%\n", r.prop_new_words * 100.0);
}

int run(CLI::App& app, CliArgs& a) {
  if (app.got_subcommand("stats")) {
    finalize_config(a, ExperimentKind::stats);
    StatsReport report = run_stats(a.config);
    print_stats(report);
    if (a.config.verify) std::printf("verify           ok\n");
    return 0;
  }

  if (app.got_subcommand("train")) {
    finalize_config(a, ExperimentKind::full);
    RunSummary s = run_full(a.config);
    for (size_t i = 0; i < s.per_seed_accuracy.size(); ++i)
      std::printf("seed %llu  test_acc %.4f\n",
                  (unsigned long long)a.config.seeds[i], s.per_seed_accuracy[i]);
    std::printf("mean %.4f  std %.4f  (%zu seeds, channel %s)\n",
                s.mean_accuracy, s.std_accuracy, a.config.seeds.size(),
                a.config.channel.c_str());
    return 0;
  }

  if (app.got_subcommand("eval")) {
    finalize_config(a, ExperimentKind::full);
    if (a.config.checkpoint.empty())
      fail("bad_config", "eval requires --checkpoint");
    Checkpoint ck = load_checkpoint(a.config.checkpoint);
    a.config.hyper = ck.hyper;
    Corpus corpus = load_experiment_corpus(a.config);
    EmbeddingTable embeddings = load_experiment_embeddings(a.config);
    std::vector<DocGraph<float>> graphs = build_channel_graphs<float>(
        corpus, embeddings, ck.hyper,
        a.config.channel == "global" ? Channel::global : Channel::local);
    const Split want = parse_split(a.eval_split);
    std::vector<const DocGraph<float>*> subset;
    for (size_t i = 0; i < corpus.documents.size(); ++i)
      if (corpus.documents[i].split == want) subset.push_back(&graphs[i]);
    if (subset.empty()) fail("empty_eval", "no documents in requested split");
    const double acc = evaluate(ck.params, subset, ck.hyper);
    std::printf("%s accuracy %.4f  (%zu documents)\n", a.eval_split.c_str(),
                acc, subset.size());
    return 0;
  }

  if (app.got_subcommand("inductive")) {
    finalize_config(a, ExperimentKind::inductive);
    if (a.config.fraction_sweep) {
      auto curve = run_inductive_sweep(a.config);
      for (const InductiveResult& r : curve)
        std::printf("fraction %.3f  docs %ld  vocab %ld  new_test_words %ld  acc %.4f\n",
                    r.fraction_used, r.sampled_documents, r.words_in_training,
                    r.new_words_in_test, r.mean_accuracy);
    } else {
      InductiveResult r = run_inductive(a.config);
      std::printf("sampled docs       %ld\n", r.sampled_documents);
      std::printf("words in training  %ld\n", r.words_in_training);
      std::printf("new words in test  %ld\n", r.new_words_in_test);
      std::printf("test accuracy      %.4f (std %.4f)\n", r.mean_accuracy,
                  r.std_accuracy);
    }
    return 0;
  }

  if (app.got_subcommand("sweep")) {
    finalize_config(a, ExperimentKind::sweep);
    SweepResult s = run_sweep(a.config);
    for (const SweepEntry& e : s.entries) {
      if (e.mean_density >= 0.0)
        std::printf("%s %d  acc %.4f (std %.4f)  density %.4f\n",
                    s.parameter.c_str(), e.value, e.mean_accuracy,
                    e.std_accuracy, e.mean_density);
      else
        std::printf("%s %d  acc %.4f (std %.4f)\n", s.parameter.c_str(),
                    e.value, e.mean_accuracy, e.std_accuracy);
    }
    return 0;
  }

  if (app.got_subcommand("attention")) {
    finalize_config(a, ExperimentKind::attention);
    if (a.config.checkpoint.empty())
      fail("bad_config", "attention requires --checkpoint");
    Checkpoint ck = load_checkpoint(a.config.checkpoint);
    a.config.hyper = ck.hyper;
    Corpus corpus = load_experiment_corpus(a.config);
    EmbeddingTable embeddings = load_experiment_embeddings(a.config);
    std::vector<size_t> selected;
    for (size_t i = 0;
         i < corpus.documents.size() && int(selected.size()) < a.config.attention_docs;
         ++i)
      if (corpus.documents[i].split == Split::test) selected.push_back(i);
    if (selected.empty()) fail("empty_eval", "no test documents to render");
    std::filesystem::create_directories(a.config.out_dir);
    const std::string prefix =
        a.config.out_dir + "/" + a.config.dataset + "_attention";
    export_attention(ck.params, ck.hyper, corpus, selected, embeddings, prefix,
                     a.attention_max);
    std::printf("wrote %s.csv and %s.html (%zu documents)\n", prefix.c_str(),
                prefix.c_str(), selected.size());
    return 0;
  }

  if (app.got_subcommand("dump")) {
    finalize_config(a, ExperimentKind::stats);
    Corpus corpus = load_experiment_corpus(a.config);
    EmbeddingTable embeddings = load_experiment_embeddings(a.config);
    std::vector<DocGraph<float>> graphs = build_channel_graphs<float>(
        corpus, embeddings, a.config.hyper,
        a.config.channel == "global" ? Channel::global : Channel::local);
    std::ofstream out(a.dump_out, std::ios::binary);
    if (!out) fail("io_error", "cannot write '" + a.dump_out + "'");
    write_graph_dump(out, graphs);
    std::printf("wrote %zu graphs to %s\n", graphs.size(), a.dump_out.c_str());
    return 0;
  }

  std::fprintf(stderr, "%s", app.help().c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Inductive text classification with per-document word graphs"};
  app.require_subcommand(0, 1);

  CliArgs args;

  CLI::App* stats = app.add_subcommand("stats", "dataset statistics");
  add_common_options(stats, args);
  stats->add_flag("--verify", args.config.verify,
                  "compare against the published statistics");

  CLI::App* train = app.add_subcommand("train", "train and report test accuracy");
  add_common_options(train, args);
  train->add_flag("--save-checkpoints", args.config.write_checkpoints,
                  "write a checkpoint at every validation improvement");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common_options(eval, args);
  eval->add_option("--checkpoint", args.config.checkpoint, "checkpoint prefix");
  eval->add_option("--split", args.eval_split, "train|val|test");

  CLI::App* inductive =
      app.add_subcommand("inductive", "low-resource inductive protocol");
  add_common_options(inductive, args);
  inductive->add_option("--fraction", args.fraction,
                        "fraction of training documents per class");
  inductive->add_option("--docs-per-class", args.docs_per_class,
                        "labelled documents kept per class");
  inductive->add_flag("--fraction-sweep", args.config.fraction_sweep,
                      "sweep the preset fraction grid and emit the curve CSV");

  CLI::App* sweep = app.add_subcommand("sweep", "hyperparameter sensitivity");
  add_common_options(sweep, args);
  sweep->add_option("--param", args.config.sweep_param, "steps|window");
  sweep->add_option("--values", args.values_csv, "comma-separated values");

  CLI::App* attention =
      app.add_subcommand("attention", "per-word attention export (CSV + HTML)");
  add_common_options(attention, args);
  attention->add_option("--checkpoint", args.config.checkpoint, "checkpoint prefix");
  attention->add_option("--docs", args.config.attention_docs,
                        "number of test documents to render");
  attention->add_flag("--max-over-dims", args.attention_max,
                      "reduce the gate vector by max instead of mean");

  CLI::App* dump = app.add_subcommand("dump", "write graphs as JSON lines");
  add_common_options(dump, args);
  dump->add_option("--out", args.dump_out, "output path");

  CLI11_PARSE(app, argc, argv);

  try {
    return run(app, args);
  } catch (const texting::Error& e) {
    nlohmann::json err{{"error", {{"code", e.code()}, {"message", e.what()}}}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", {{"code", "internal"}, {"message", e.what()}}}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }
}
