#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "texting/training.hpp"

namespace texting {

nlohmann::json hyper_params_to_json(const HyperParams& hyper);
HyperParams hyper_params_from_json(const nlohmann::json& j);

// wall_seconds is deliberately not serialized: result files must be
// byte-identical across re-runs of the same config.
nlohmann::json train_report_to_json(const TrainReport& report);
nlohmann::json stats_to_json(const StatsReport& report);

enum class ExperimentKind { full, inductive, sweep, attention, stats };

std::string experiment_kind_name(ExperimentKind k);
ExperimentKind parse_experiment_kind(std::string_view name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::full;
  std::string dataset;
  std::string data_dir = ".";
  std::string out_dir = "out";
  std::string embeddings_path;  // empty: every word uses the seeded OOV sampler
  std::string stopwords_path;   // empty: built-in list
  std::optional<bool> remove_stopwords;
  std::string checkpoint;  // prefix, for attention/eval
  uint64_t oov_seed = 42;
  HyperParams hyper;
  std::vector<uint64_t> seeds{1};
  std::string channel = "local";  // local | global | multi

  // inductive
  std::optional<double> fraction;
  std::optional<int> docs_per_class;
  bool fraction_sweep = false;

  // sweep
  std::string sweep_param;  // "steps" | "window"
  std::vector<int> sweep_values;

  bool verify = false;
  bool write_checkpoints = false;
  int attention_docs = 20;  // documents rendered by the attention export

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

Corpus load_experiment_corpus(const ExperimentConfig& config);
EmbeddingTable load_experiment_embeddings(const ExperimentConfig& config);

struct RunSummary {
  std::vector<double> per_seed_accuracy;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample std; 0 for a single seed
  std::vector<TrainReport> reports;         // primary (local) channel
  std::vector<TrainReport> reports_global;  // only for channel=multi/global
};

// Trains once per seed and reports mean +/- sample std of test accuracy.
// Writes <dataset>_full_results.{json,csv} and <dataset>_full_epochs.csv.
RunSummary run_full(const ExperimentConfig& config);

struct InductiveResult {
  double fraction_used = 0.0;
  long sampled_documents = 0;
  long words_in_training = 0;
  long new_words_in_test = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::vector<double> per_seed_accuracy;
};

// Stratified low-resource protocol: subsample the training set, rebuild the
// vocabulary from the subsample only, train, report accuracy and vocabulary
// counts. Exactly one of config.fraction / config.docs_per_class is used.
InductiveResult run_inductive(const ExperimentConfig& config);

// The fraction grid {0.005, 0.01, 0.05, 0.1, 0.5, 1.0}; writes the curve CSV.
std::vector<InductiveResult> run_inductive_sweep(const ExperimentConfig& config);

extern const std::vector<double> kInductiveFractionGrid;

struct SweepEntry {
  int value = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_density = -1.0;  // only for window sweeps
  std::vector<double> per_seed_accuracy;
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepEntry> entries;
};

RunSummary run_single(const ExperimentConfig& config, const HyperParams& hyper);

// Trains per (value, seed); window sweeps also report the mean document graph
// density. Writes <dataset>_sweep_<param>.{json,csv}.
SweepResult run_sweep(const ExperimentConfig& config);

// Delegates to corpus_stats; with config.verify set, throws "verify_failed"
// on the first mismatching published cell and "no_reference_stats" for
// datasets without published numbers.
StatsReport run_stats(const ExperimentConfig& config);

// Per-word soft-attention weights of trained parameters over the selected
// documents. Writes <out_prefix>.csv (doc id, word, weight, predicted label,
// true label) and a static <out_prefix>.html rendering.
void export_attention(const ParamSet<float>& params, const HyperParams& hyper,
                      const Corpus& corpus, const std::vector<size_t>& doc_indices,
                      const EmbeddingTable& embeddings,
                      const std::string& out_prefix, bool max_over_dims = false);

}  // namespace texting
