#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "texting/rng.hpp"
#include "texting/util.hpp"

namespace texting {

enum class Split { train, val, test };

std::string split_name(Split s);
Split parse_split(std::string_view s);

struct Document {
  std::string id;
  std::vector<std::string> tokens;
  int label = -1;
  Split split = Split::train;
};

struct Corpus {
  std::vector<Document> documents;
  std::vector<std::string> classes;
  // Built from train+val documents only; test-only words never appear here.
  std::vector<std::string> vocabulary;
  std::unordered_map<std::string, int> word_index;

  int class_count() const { return int(classes.size()); }
  bool in_vocabulary(const std::string& w) const {
    return word_index.find(w) != word_index.end();
  }
};

// Recomputes vocabulary/word_index from the current train+val documents,
// in first-occurrence order.
void rebuild_vocabulary(Corpus& corpus);

// Word -> d-dimensional feature vector. Out-of-vocabulary words get a vector
// drawn uniformly from [-0.01, 0.01], derived purely from (word, oov_seed),
// so lookups are reproducible and thread-safe without coordination.
struct EmbeddingTable {
  int dimension = 0;
  uint64_t oov_seed = 0;
  std::unordered_map<std::string, int> index;
  std::vector<float> values;  // index * dimension floats
  long skipped_lines = 0;

  bool has(const std::string& word) const { return index.count(word) != 0; }

  void insert(const std::string& word, const std::vector<float>& v);

  template <class T>
  void lookup(const std::string& word, T* dst) const {
    auto it = index.find(word);
    if (it != index.end()) {
      const float* src = values.data() + size_t(it->second) * dimension;
      for (int i = 0; i < dimension; ++i) dst[i] = T(src[i]);
      return;
    }
    Rng rng(mix_seed(fnv1a64(word), oov_seed));
    for (int i = 0; i < dimension; ++i) dst[i] = T(rng.uniform(-0.01, 0.01));
  }

  template <class T>
  std::vector<T> lookup(const std::string& word) const {
    std::vector<T> out(dimension);
    lookup(word, out.data());
    return out;
  }
};

// Lowercases, splits on whitespace, optionally drops stopwords. Never throws;
// an all-stopword input yields an empty list and the caller decides.
std::vector<std::string> clean_and_tokenize(
    std::string_view raw, bool remove_stopwords,
    const std::unordered_set<std::string>& stopwords);

const std::unordered_set<std::string>& builtin_stopwords();
std::unordered_set<std::string> load_stopwords(const std::string& path);

// Stopword removal is on for every dataset except the short-document MR
// sentiment set, where it can empty a review outright.
bool default_remove_stopwords(std::string_view dataset_name);

struct LoadOptions {
  std::optional<bool> remove_stopwords;      // default: per dataset name
  std::optional<std::string> stopword_path;  // default: built-in list
};

// Two-file layout: <name>.meta lines "<id>\t<split>\t<label>", <name>.texts
// line i holds the raw text for meta line i. Labels are sorted
// lexicographically to fix class indices.
Corpus load_corpus(const std::string& data_dir, const std::string& dataset_name,
                   const LoadOptions& options = {});

// Reassigns a seeded random (1-ratio) fraction of train documents to val.
Corpus split_train_val(const Corpus& corpus, double ratio, uint64_t seed);

EmbeddingTable load_embeddings(const std::string& path, int dimension,
                               uint64_t oov_seed);

struct StatsReport {
  std::string dataset;
  long documents = 0;
  long train_documents = 0;  // train + val
  long test_documents = 0;
  int classes = 0;
  long max_vocab = 0;
  long min_vocab = 0;
  double avg_vocab = 0.0;
  double prop_new_words = 0.0;  // fraction in [0,1] of test word types unseen in training
};

StatsReport corpus_stats(const Corpus& corpus);

// Published statistics for the four benchmark datasets, for --verify.
struct ReferenceStats {
  long documents, train_documents, test_documents;
  int classes;
  long max_vocab, min_vocab;
  double avg_vocab;       // two decimals
  double prop_new_words;  // percent, two decimals
};

std::optional<ReferenceStats> reference_stats(std::string_view dataset_name);

// Compares rounded to the published precision. Returns true on an exact
// match; otherwise fills `detail` with the first mismatching cell.
bool matches_reference(const StatsReport& report, const ReferenceStats& expected,
                       std::string* detail);

}  // namespace texting
