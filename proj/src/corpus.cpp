#include "texting/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace texting {

std::string split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  fail("unknown_split", "unknown split token '" + std::string(s) + "'");
}

std::string lowercase_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = char(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> clean_and_tokenize(
    std::string_view raw, bool remove_stopwords,
    const std::unordered_set<std::string>& stopwords) {
  std::vector<std::string> tokens;
  size_t i = 0;
  const size_t n = raw.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    size_t start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    if (i > start) {
      std::string tok = lowercase_ascii(raw.substr(start, i - start));
      if (!remove_stopwords || stopwords.find(tok) == stopwords.end())
        tokens.push_back(std::move(tok));
    }
  }
  return tokens;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("missing_file", "cannot open stopword file '" + path + "'");
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (!line.empty()) out.insert(lowercase_ascii(line));
  }
  return out;
}

bool default_remove_stopwords(std::string_view dataset_name) {
  return lowercase_ascii(dataset_name) != "mr";
}

void rebuild_vocabulary(Corpus& corpus) {
  corpus.vocabulary.clear();
  corpus.word_index.clear();
  for (const Document& doc : corpus.documents) {
    if (doc.split == Split::test) continue;
    for (const std::string& w : doc.tokens) {
      auto [it, inserted] =
          corpus.word_index.emplace(w, int(corpus.vocabulary.size()));
      if (inserted) corpus.vocabulary.push_back(w);
    }
  }
}

void EmbeddingTable::insert(const std::string& word,
                            const std::vector<float>& v) {
  if (int(v.size()) != dimension)
    fail("bad_dimension", "embedding vector arity mismatch for '" + word + "'");
  auto [it, inserted] = index.emplace(word, int(index.size()));
  if (!inserted) {
    std::copy(v.begin(), v.end(), values.begin() + size_t(it->second) * dimension);
    return;
  }
  values.insert(values.end(), v.begin(), v.end());
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("missing_file", "cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

Corpus load_corpus(const std::string& data_dir, const std::string& dataset_name,
                   const LoadOptions& options) {
  const std::string base = data_dir.empty() ? dataset_name
                                            : data_dir + "/" + dataset_name;
  const std::vector<std::string> meta = read_lines(base + ".meta");
  const std::vector<std::string> texts = read_lines(base + ".texts");
  if (meta.size() != texts.size())
    fail("line_count_mismatch",
         base + ".meta has " + std::to_string(meta.size()) + " lines but " +
             base + ".texts has " + std::to_string(texts.size()));

  const bool remove_stop = options.remove_stopwords.has_value()
                               ? *options.remove_stopwords
                               : default_remove_stopwords(dataset_name);
  const std::unordered_set<std::string> stop_storage =
      options.stopword_path ? load_stopwords(*options.stopword_path)
                            : std::unordered_set<std::string>{};
  const std::unordered_set<std::string>& stopwords =
      options.stopword_path ? stop_storage : builtin_stopwords();

  Corpus corpus;
  corpus.documents.reserve(meta.size());
  std::map<std::string, int> label_names;  // sorted -> dense indices later

  struct Pending {
    std::string label;
  };
  std::vector<Pending> pending(meta.size());

  for (size_t i = 0; i < meta.size(); ++i) {
    const std::string& line = meta[i];
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string::npos ? std::string::npos
                                              : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      fail("bad_meta_line", base + ".meta line " + std::to_string(i + 1) +
                                ": expected <id>\\t<split>\\t<label>");
    Document doc;
    doc.id = line.substr(0, t1);
    doc.split = parse_split(line.substr(t1 + 1, t2 - t1 - 1));
    pending[i].label = line.substr(t2 + 1);
    label_names.emplace(pending[i].label, 0);

    doc.tokens = clean_and_tokenize(texts[i], remove_stop, stopwords);
    if (doc.tokens.empty())
      fail("empty_document", base + " document '" + doc.id + "' (line " +
                                 std::to_string(i + 1) +
                                 ") is empty after cleaning");
    corpus.documents.push_back(std::move(doc));
  }

  int next = 0;
  for (auto& [name, idx] : label_names) idx = next++;
  corpus.classes.reserve(label_names.size());
  for (const auto& [name, idx] : label_names) corpus.classes.push_back(name);
  for (size_t i = 0; i < corpus.documents.size(); ++i)
    corpus.documents[i].label = label_names.at(pending[i].label);

  rebuild_vocabulary(corpus);
  return corpus;
}

Corpus split_train_val(const Corpus& corpus, double ratio, uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    fail("bad_ratio", "train/val ratio must lie in (0,1)");
  std::vector<size_t> train_idx;
  for (size_t i = 0; i < corpus.documents.size(); ++i)
    if (corpus.documents[i].split == Split::train) train_idx.push_back(i);

  const long n_train = long(train_idx.size());
  const long n_val = std::llround((1.0 - ratio) * double(n_train));
  if (n_val <= 0)
    fail("empty_val", "ratio " + std::to_string(ratio) +
                          " yields zero validation documents");
  if (n_val >= n_train)
    fail("empty_train", "ratio " + std::to_string(ratio) +
                            " yields zero training documents");

  Rng rng(seed);
  rng.shuffle(train_idx);

  Corpus out = corpus;
  for (long k = n_train - n_val; k < n_train; ++k)
    out.documents[train_idx[size_t(k)]].split = Split::val;
  rebuild_vocabulary(out);
  return out;
}

EmbeddingTable load_embeddings(const std::string& path, int dimension,
                               uint64_t oov_seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("missing_file", "cannot open embedding file '" + path + "'");

  EmbeddingTable table;
  table.dimension = dimension;
  table.oov_seed = oov_seed;

  std::string line;
  std::vector<float> vec(static_cast<size_t>(dimension));
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (line.empty()) {
      ++table.skipped_lines;
      continue;
    }
    const char* p = line.c_str();
    const char* end = p + line.size();
    while (p < end && *p == ' ') ++p;
    const char* word_start = p;
    while (p < end && *p != ' ') ++p;
    std::string word(word_start, p);

    int got = 0;
    bool ok = !word.empty();
    char* after = nullptr;
    while (ok && p < end && got < dimension) {
      while (p < end && *p == ' ') ++p;
      if (p >= end) break;
      const float v = std::strtof(p, &after);
      if (after == p) {
        ok = false;
        break;
      }
      vec[size_t(got++)] = v;
      p = after;
    }
    while (p < end && *p == ' ') ++p;
    if (!ok || got != dimension || p != end) {
      ++table.skipped_lines;
      continue;
    }
    table.insert(word, vec);
  }

  if (table.index.empty())
    fail("empty_embeddings", "no usable lines in '" + path + "'");
  return table;
}

StatsReport corpus_stats(const Corpus& corpus) {
  StatsReport r;
  r.classes = corpus.class_count();

  std::unordered_set<std::string> train_words;
  std::unordered_set<std::string> test_words;
  long total_unique = 0;
  r.min_vocab = corpus.documents.empty() ? 0 : LONG_MAX;

  for (const Document& doc : corpus.documents) {
    ++r.documents;
    std::unordered_set<std::string> uniq(doc.tokens.begin(), doc.tokens.end());
    const long u = long(uniq.size());
    total_unique += u;
    r.max_vocab = std::max(r.max_vocab, u);
    r.min_vocab = std::min(r.min_vocab, u);
    if (doc.split == Split::test) {
      ++r.test_documents;
      for (const auto& w : uniq) test_words.insert(w);
    } else {
      ++r.train_documents;
      for (const auto& w : uniq) train_words.insert(w);
    }
  }
  if (r.documents > 0) r.avg_vocab = double(total_unique) / double(r.documents);

  long unseen = 0;
  for (const auto& w : test_words)
    if (train_words.find(w) == train_words.end()) ++unseen;
  r.prop_new_words =
      test_words.empty() ? 0.0 : double(unseen) / double(test_words.size());
  return r;
}

std::optional<ReferenceStats> reference_stats(std::string_view dataset_name) {
  const std::string name = lowercase_ascii(dataset_name);
  if (name == "mr") return ReferenceStats{10662, 7108, 3554, 2, 46, 1, 18.46, 30.07};
  if (name == "r8") return ReferenceStats{7674, 5485, 2189, 8, 291, 4, 41.25, 2.60};
  if (name == "r52") return ReferenceStats{9100, 6532, 2568, 52, 301, 4, 44.02, 2.64};
  if (name == "ohsumed") return ReferenceStats{7400, 3357, 4043, 23, 197, 11, 79.49, 8.46};
  return std::nullopt;
}

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

bool cell_eq(double got, double want) { return std::abs(got - want) < 5e-3; }

}  // namespace

bool matches_reference(const StatsReport& report, const ReferenceStats& expected,
                       std::string* detail) {
  auto mismatch = [&](const char* cell, const std::string& got,
                      const std::string& want) {
    if (detail) *detail = std::string(cell) + ": got " + got + ", expected " + want;
    return false;
  };
  if (report.documents != expected.documents)
    return mismatch("documents", std::to_string(report.documents),
                    std::to_string(expected.documents));
  if (report.train_documents != expected.train_documents)
    return mismatch("train_documents", std::to_string(report.train_documents),
                    std::to_string(expected.train_documents));
  if (report.test_documents != expected.test_documents)
    return mismatch("test_documents", std::to_string(report.test_documents),
                    std::to_string(expected.test_documents));
  if (report.classes != expected.classes)
    return mismatch("classes", std::to_string(report.classes),
                    std::to_string(expected.classes));
  if (report.max_vocab != expected.max_vocab)
    return mismatch("max_vocab", std::to_string(report.max_vocab),
                    std::to_string(expected.max_vocab));
  if (report.min_vocab != expected.min_vocab)
    return mismatch("min_vocab", std::to_string(report.min_vocab),
                    std::to_string(expected.min_vocab));
  if (!cell_eq(round2(report.avg_vocab), expected.avg_vocab))
    return mismatch("avg_vocab", std::to_string(round2(report.avg_vocab)),
                    std::to_string(expected.avg_vocab));
  if (!cell_eq(round2(report.prop_new_words * 100.0), expected.prop_new_words))
    return mismatch("prop_new_words",
                    std::to_string(round2(report.prop_new_words * 100.0)),
                    std::to_string(expected.prop_new_words));
  return true;
}

namespace {
std::atomic<int> g_workers{0};

int initial_workers() {
  if (const char* env = std::getenv("TEXTING_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return std::min(n, 256);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(std::min(hw, 64u));
}
}  // namespace

int worker_threads() {
  int w = g_workers.load();
  if (w == 0) {
    w = initial_workers();
    g_workers.store(w);
  }
  return w;
}

void set_worker_threads(int n) { g_workers.store(std::max(1, n)); }

}  // namespace texting
