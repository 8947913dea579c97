#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "texting/corpus.hpp"
#include "texting/tensor.hpp"

namespace texting {

// One document as a word graph: unique words in first-occurrence order,
// symmetric co-occurrence adjacency, per-node feature rows.
template <class T>
struct DocGraph {
  std::string id;
  std::vector<std::string> node_words;
  DenseMat<T> adjacency;  // |V| x |V|
  DenseMat<T> features;   // |V| x d
  int label = -1;

  int node_count() const { return int(node_words.size()); }
  int feature_dim() const { return int(features.cols()); }
};

enum class AdjNorm { none, row, symmetric };

std::string adj_norm_name(AdjNorm mode);
AdjNorm parse_adj_norm(std::string_view name);

// Sliding-window co-occurrence graph. Every pair of distinct words sharing a
// window of `window` consecutive positions gets a binary edge; documents
// shorter than the window form one truncated window.
template <class T>
DocGraph<T> build_graph(const std::vector<std::string>& tokens, int window,
                        const EmbeddingTable& embeddings);

template <class T>
DocGraph<T> normalize_adjacency(DocGraph<T> g, AdjNorm mode, bool self_loops);

// Corpus-level word-pair PMI weights counted over sliding windows of the
// training documents. Only pairs with PMI > 0 are kept.
struct GlobalWordGraph {
  std::vector<std::string> words;  // training vocabulary at build time
  std::unordered_map<std::string, int> word_index;
  std::unordered_map<uint64_t, double> weights;  // key: packed (lo,hi) ids
  int window_size = 0;
  uint64_t corpus_fingerprint = 0;

  static uint64_t pack(int a, int b) {
    if (a > b) std::swap(a, b);
    return (uint64_t(uint32_t(a)) << 32) | uint64_t(uint32_t(b));
  }

  double weight(const std::string& u, const std::string& v) const {
    auto iu = word_index.find(u);
    auto iv = word_index.find(v);
    if (iu == word_index.end() || iv == word_index.end()) return 0.0;
    auto it = weights.find(pack(iu->second, iv->second));
    return it == weights.end() ? 0.0 : it->second;
  }

  size_t edge_count() const { return weights.size(); }
};

GlobalWordGraph build_global_pmi_graph(const Corpus& corpus, int window);

// Same node set as build_graph; edges taken from the global PMI graph.
// Words unseen in training keep all-zero rows.
template <class T>
DocGraph<T> extract_subgraph(const Document& doc, const GlobalWordGraph& global,
                             const EmbeddingTable& embeddings);

// Padded batch. Real nodes occupy the leading rows of every slab; node_counts
// doubles as the mask (mask(b,i) == i < node_counts[b]).
template <class T>
struct GraphBatch {
  BatchTensor<T> features;   // B x N x d
  BatchTensor<T> adjacency;  // B x N x N
  std::vector<int> node_counts;
  std::vector<int> labels;

  int size() const { return int(node_counts.size()); }
  int max_nodes() const { return features.rows(); }
  int feature_dim() const { return features.cols(); }
  bool mask(int b, int i) const { return i < node_counts[b]; }
};

template <class T>
GraphBatch<T> batch_graphs(const std::vector<const DocGraph<T>*>& graphs);

template <class T>
GraphBatch<T> batch_graphs(const std::vector<DocGraph<T>>& graphs);

// 2|E| / (|V| (|V|-1)); defined as 1.0 for single-node graphs.
template <class T>
double graph_density(const DocGraph<T>& g);

// One JSON object per line: {"id", "nodes", "edges" [[i,j,w]...], "label"}.
template <class T>
void write_graph_dump(std::ostream& out, const std::vector<DocGraph<T>>& graphs);

// ---- template definitions ----

template <class T>
DocGraph<T> build_graph(const std::vector<std::string>& tokens, int window,
                        const EmbeddingTable& embeddings) {
  if (tokens.empty()) fail("empty_document", "cannot build a graph from zero tokens");
  if (window < 2) fail("bad_window", "window must be at least 2");

  DocGraph<T> g;
  std::unordered_map<std::string, int> node_of;
  std::vector<int> ids(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    auto [it, inserted] = node_of.emplace(tokens[i], int(g.node_words.size()));
    if (inserted) g.node_words.push_back(tokens[i]);
    ids[i] = it->second;
  }

  const int v = int(g.node_words.size());
  g.adjacency = DenseMat<T>::Zero(v, v);

  const size_t len = tokens.size();
  const size_t span = std::min<size_t>(window, len);
  const size_t n_windows = len >= size_t(window) ? len - window + 1 : 1;
  for (size_t start = 0; start < n_windows; ++start) {
    for (size_t a = start; a + 1 < start + span; ++a) {
      for (size_t b = a + 1; b < start + span; ++b) {
        const int u = ids[a], w = ids[b];
        if (u == w) continue;
        g.adjacency(u, w) = T(1);
        g.adjacency(w, u) = T(1);
      }
    }
  }

  g.features = DenseMat<T>(v, embeddings.dimension);
  for (int n = 0; n < v; ++n)
    embeddings.lookup(g.node_words[size_t(n)], g.features.row(n).data());
  return g;
}

template <class T>
DocGraph<T> normalize_adjacency(DocGraph<T> g, AdjNorm mode, bool self_loops) {
  if (mode == AdjNorm::none && !self_loops) return g;
  const int v = g.node_count();
  DenseMat<T> a = g.adjacency;
  if (self_loops) a.diagonal().array() += T(1);
  if (mode == AdjNorm::none) {
    g.adjacency = std::move(a);
    return g;
  }
  Eigen::Matrix<T, Eigen::Dynamic, 1> deg = a.rowwise().sum();
  if (mode == AdjNorm::row) {
    for (int i = 0; i < v; ++i)
      if (deg(i) > T(0)) a.row(i) /= deg(i);
  } else {
    Eigen::Matrix<T, Eigen::Dynamic, 1> inv_sqrt(v);
    for (int i = 0; i < v; ++i)
      inv_sqrt(i) = deg(i) > T(0) ? T(1) / std::sqrt(deg(i)) : T(0);
    a = inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
  }
  g.adjacency = std::move(a);
  return g;
}

template <class T>
DocGraph<T> extract_subgraph(const Document& doc, const GlobalWordGraph& global,
                             const EmbeddingTable& embeddings) {
  DocGraph<T> g;
  g.id = doc.id;
  g.label = doc.label;
  std::unordered_map<std::string, int> node_of;
  for (const std::string& tok : doc.tokens) {
    auto [it, inserted] = node_of.emplace(tok, int(g.node_words.size()));
    if (inserted) g.node_words.push_back(tok);
  }
  const int v = int(g.node_words.size());
  g.adjacency = DenseMat<T>::Zero(v, v);

  std::vector<int> global_ids(size_t(v), -1);
  for (int n = 0; n < v; ++n) {
    auto it = global.word_index.find(g.node_words[size_t(n)]);
    if (it != global.word_index.end()) global_ids[size_t(n)] = it->second;
  }
  for (int i = 0; i < v; ++i) {
    if (global_ids[size_t(i)] < 0) continue;
    for (int j = i + 1; j < v; ++j) {
      if (global_ids[size_t(j)] < 0) continue;
      auto it = global.weights.find(
          GlobalWordGraph::pack(global_ids[size_t(i)], global_ids[size_t(j)]));
      if (it == global.weights.end()) continue;
      g.adjacency(i, j) = T(it->second);
      g.adjacency(j, i) = T(it->second);
    }
  }

  g.features = DenseMat<T>(v, embeddings.dimension);
  for (int n = 0; n < v; ++n)
    embeddings.lookup(g.node_words[size_t(n)], g.features.row(n).data());
  return g;
}

template <class T>
GraphBatch<T> batch_graphs(const std::vector<const DocGraph<T>*>& graphs) {
  if (graphs.empty()) fail("empty_batch", "cannot batch zero graphs");
  const int b = int(graphs.size());
  const int d = graphs[0]->feature_dim();
  int n_max = 0;
  for (const DocGraph<T>* g : graphs) {
    if (g->feature_dim() != d)
      fail("dim_mismatch", "graphs in a batch must share the feature dimension");
    n_max = std::max(n_max, g->node_count());
  }

  GraphBatch<T> batch;
  batch.features = BatchTensor<T>(b, n_max, d);
  batch.adjacency = BatchTensor<T>(b, n_max, n_max);
  batch.node_counts.resize(size_t(b));
  batch.labels.resize(size_t(b));
  for (int i = 0; i < b; ++i) {
    const DocGraph<T>& g = *graphs[size_t(i)];
    const int v = g.node_count();
    batch.node_counts[size_t(i)] = v;
    batch.labels[size_t(i)] = g.label;
    batch.features.top(i, v) = g.features;
    batch.adjacency.block(i, v, v) = g.adjacency;
  }
  return batch;
}

template <class T>
GraphBatch<T> batch_graphs(const std::vector<DocGraph<T>>& graphs) {
  std::vector<const DocGraph<T>*> ptrs;
  ptrs.reserve(graphs.size());
  for (const auto& g : graphs) ptrs.push_back(&g);
  return batch_graphs(ptrs);
}

template <class T>
double graph_density(const DocGraph<T>& g) {
  const int v = g.node_count();
  if (v <= 1) return 1.0;
  long edges2 = 0;  // counts both (i,j) and (j,i)
  for (int i = 0; i < v; ++i)
    for (int j = 0; j < v; ++j)
      if (i != j && g.adjacency(i, j) != T(0)) ++edges2;
  return double(edges2) / (double(v) * double(v - 1));
}

}  // namespace texting
