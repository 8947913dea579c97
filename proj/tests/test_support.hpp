#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "texting/corpus.hpp"
#include "texting/graphs.hpp"
#include "texting/model.hpp"
#include "texting/rng.hpp"

namespace testsupport {

using namespace texting;

// Embedding table with seeded dense vectors of unit scale for the given
// words; everything else falls back to the OOV sampler.
inline EmbeddingTable make_random_embeddings(const std::vector<std::string>& words,
                                             int dim, uint64_t seed,
                                             double scale = 1.0) {
  EmbeddingTable table;
  table.dimension = dim;
  table.oov_seed = mix_seed(seed, 0xd7ull);
  std::vector<float> vec(static_cast<size_t>(dim));
  for (const std::string& w : words) {
    Rng rng(mix_seed(seed, fnv1a64(w)));
    for (int i = 0; i < dim; ++i)
      vec[size_t(i)] = float(rng.uniform(-scale, scale));
    table.insert(w, vec);
  }
  return table;
}

inline std::vector<std::string> random_tokens(Rng& rng, int alphabet,
                                              int length) {
  std::vector<std::string> tokens(static_cast<size_t>(length));
  for (int i = 0; i < length; ++i)
    tokens[size_t(i)] = "w" + std::to_string(rng.below(uint64_t(alphabet)));
  return tokens;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("texting_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
};

struct RawDoc {
  std::string id, split, label, text;
};

inline void write_dataset(const std::string& dir, const std::string& name,
                          const std::vector<RawDoc>& docs) {
  std::ofstream meta(dir + "/" + name + ".meta", std::ios::binary);
  std::ofstream texts(dir + "/" + name + ".texts", std::ios::binary);
  for (const RawDoc& d : docs) {
    meta << d.id << '\t' << d.split << '\t' << d.label << '\n';
    texts << d.text << '\n';
  }
}

// Two separable classes: "sun"-flavoured vs "ice"-flavoured vocabulary, with
// shared filler words.
inline std::vector<RawDoc> toy_docs(int train_per_class, int val_per_class,
                                    int test_per_class) {
  const std::vector<std::string> pos = {"sun", "warm", "bright", "glow"};
  const std::vector<std::string> neg = {"ice", "cold", "dark", "frost"};
  const std::vector<std::string> filler = {"the", "day", "air", "sky"};

  std::vector<RawDoc> docs;
  Rng rng(7);
  auto make_text = [&](bool positive, int k) {
    const auto& key = positive ? pos : neg;
    std::string text = key[size_t(k) % key.size()];
    text += " " + filler[size_t(rng.below(filler.size()))];
    text += " " + key[size_t(rng.below(key.size()))];
    text += " " + filler[size_t(rng.below(filler.size()))];
    return text;
  };
  int id = 0;
  auto add = [&](const std::string& split, int per_class) {
    for (int c = 0; c < 2; ++c)
      for (int k = 0; k < per_class; ++k)
        docs.push_back(RawDoc{"d" + std::to_string(id++), split,
                              c == 0 ? "plus" : "minus", make_text(c == 0, k)});
  };
  add("train", train_per_class);
  add("val", val_per_class);
  add("test", test_per_class);
  return docs;
}

inline Corpus toy_corpus(int train_per_class = 10, int val_per_class = 2,
                         int test_per_class = 2) {
  const auto docs = toy_docs(train_per_class, val_per_class, test_per_class);
  Corpus corpus;
  std::map<std::string, int> labels{{"minus", 0}, {"plus", 1}};
  for (const RawDoc& d : docs) {
    Document doc;
    doc.id = d.id;
    doc.split = parse_split(d.split);
    doc.label = labels.at(d.label);
    doc.tokens = clean_and_tokenize(d.text, false, {});
    corpus.documents.push_back(std::move(doc));
  }
  corpus.classes = {"minus", "plus"};
  rebuild_vocabulary(corpus);
  return corpus;
}

inline std::vector<std::string> toy_vocabulary() {
  return {"sun", "warm", "bright", "glow", "ice",  "cold",
          "dark", "frost", "the",   "day",  "air", "sky"};
}

// Random already-normalized graphs for property tests.
template <class T>
inline std::vector<DocGraph<T>> random_graphs(Rng& rng, int batch, int max_nodes,
                                              int dim, AdjNorm mode = AdjNorm::row,
                                              bool self_loops = true,
                                              int classes = 2) {
  EmbeddingTable table;
  table.dimension = dim;
  table.oov_seed = rng.next_u64();

  std::vector<DocGraph<T>> graphs;
  for (int b = 0; b < batch; ++b) {
    const int v = 1 + int(rng.below(uint64_t(max_nodes)));
    std::vector<std::string> tokens;
    for (int i = 0; i < v; ++i)
      tokens.push_back("n" + std::to_string(rng.next_u64() % 1000000));
    DocGraph<T> g = build_graph<T>(tokens, 2, table);
    // random symmetric edges on top of the chain from build_graph, plus
    // unit-scale features (the OOV sampler is deliberately tiny)
    for (int i = 0; i < g.node_count(); ++i)
      for (int j = i + 1; j < g.node_count(); ++j)
        if (rng.uniform() < 0.4) {
          g.adjacency(i, j) = T(1);
          g.adjacency(j, i) = T(1);
        }
    for (int i = 0; i < g.node_count(); ++i)
      for (int j = 0; j < dim; ++j)
        g.features(i, j) = T(rng.uniform(-1.0, 1.0));
    g.label = int(rng.below(uint64_t(classes)));
    graphs.push_back(normalize_adjacency(std::move(g), mode, self_loops));
  }
  return graphs;
}

template <class T>
inline GraphBatch<T> random_batch(Rng& rng, int batch, int max_nodes, int dim,
                                  AdjNorm mode = AdjNorm::row,
                                  bool self_loops = true, int classes = 2) {
  return batch_graphs(random_graphs<T>(rng, batch, max_nodes, dim, mode,
                                       self_loops, classes));
}

template <class T>
inline ParamSet<T> random_params(int input_dim, int hidden, int classes,
                                 uint64_t seed, bool use_projection = true) {
  ParamSet<T> p = ParamSet<T>::create(input_dim, hidden, classes, use_projection);
  p.init_xavier(seed);
  return p;
}

}  // namespace testsupport
