#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "texting/graphs.hpp"
#include "texting/rng.hpp"
#include "texting/tensor.hpp"

namespace texting {

struct HyperParams {
  int steps = 2;          // gated interaction steps
  int input_dim = 300;    // word feature dimension
  int hidden = 96;
  int window = 3;         // local co-occurrence window
  int pmi_window = 20;    // corpus-level window for the global channel
  double dropout_rate = 0.5;
  double learning_rate = 0.01;
  uint64_t seed = 1;
  int batch_size = 64;
  int max_epochs = 200;
  int patience = 10;
  double val_ratio = 0.9;      // train share of the given training set
  double grad_clip = 0.0;      // global-norm clip; 0 disables
  AdjNorm adjacency_norm = AdjNorm::row;
  bool self_loops = true;
  bool use_projection = true;  // learned input_dim -> hidden map
};

// Every trainable tensor. Biases are stored as 1 x n row matrices so the
// same iteration covers weights and biases uniformly (Adam, init, IO,
// finite differences).
template <class T>
struct ParamSet {
  int input_dim = 0, hidden = 0, classes = 0;
  bool use_projection = true;

  DenseMat<T> proj_w, proj_b;          // input projection
  DenseMat<T> agg_w;                   // neighbour aggregation
  DenseMat<T> update_w, update_u, update_b;
  DenseMat<T> reset_w, reset_u, reset_b;
  DenseMat<T> cand_w, cand_u, cand_b;  // candidate state
  DenseMat<T> att_w, att_b;            // readout soft-attention gate
  DenseMat<T> trans_w, trans_b;        // readout feature transform
  DenseMat<T> cls_w, cls_b;            // softmax classifier

  static ParamSet<T> create(int input_dim, int hidden, int classes,
                            bool use_projection);
  void init_xavier(uint64_t seed);
  void set_zero();
  long parameter_count() const;

  std::vector<std::pair<const char*, DenseMat<T>*>> tensors();
  std::vector<std::pair<const char*, const DenseMat<T>*>> tensors() const;

  template <class U>
  ParamSet<U> cast() const;
};

enum class Mode { train, eval };

// Inverted-dropout configuration. `stream` distinguishes batches so masks
// never depend on thread scheduling; masks are a pure function of
// (seed, stream, graph index).
struct DropoutState {
  double rate = 0.0;
  uint64_t seed = 0;
  uint64_t stream = 0;
};

// Every intermediate needed for the backward pass and for attention export.
// Padded node positions are exactly zero in all per-node tensors.
template <class T>
struct ForwardTrace {
  int steps = 0;
  std::vector<int> node_counts;

  std::vector<BatchTensor<T>> h;       // steps+1 entries; h[0] after dropout
  std::vector<BatchTensor<T>> msg;     // neighbour aggregate per step
  std::vector<BatchTensor<T>> update;  // update gate per step
  std::vector<BatchTensor<T>> reset;   // reset gate per step
  std::vector<BatchTensor<T>> cand;    // candidate state per step

  BatchTensor<T> att_gate;   // sigma(f1(h_t)) per node
  BatchTensor<T> trans;      // tanh(f2(h_t)) per node
  BatchTensor<T> node_emb;   // gated node embedding h_v
  DenseMat<T> mean_pool, max_pool;
  std::vector<int> max_src;  // B*hidden argmax rows feeding max_pool
  DenseMat<T> graph_emb;           // mean + max
  DenseMat<T> graph_emb_dropped;   // after readout dropout (== graph_emb in eval)
  DenseMat<T> logits, probs;
  std::vector<T> per_graph_loss;
  T loss = T(0);

  BatchTensor<T> drop_h0;    // inverted-dropout scale factors; empty in eval
  DenseMat<T> drop_graph;
};

// One gated interaction step over a padded batch; padded rows of the result
// are zero.
template <class T>
BatchTensor<T> ggnn_step(const BatchTensor<T>& h, const BatchTensor<T>& adjacency,
                         const std::vector<int>& node_counts,
                         const ParamSet<T>& params);

// Projection (+ optional dropout on the initial states) followed by `steps`
// interaction steps. steps == 0 returns the projected input unchanged.
template <class T>
BatchTensor<T> interact(const GraphBatch<T>& batch, int steps,
                        const ParamSet<T>& params, Mode mode,
                        const DropoutState& dropout = {});

// Soft-attention readout: per-node sigmoid gate times tanh transform,
// averaged over real nodes plus a per-dimension max over real nodes.
template <class T>
DenseMat<T> readout(const BatchTensor<T>& h, const std::vector<int>& node_counts,
                    const ParamSet<T>& params);

template <class T>
DenseMat<T> predict(const DenseMat<T>& graph_emb, const ParamSet<T>& params);

// Mean over the batch of -log p[label]. Prefer cross_entropy_from_logits in
// any path where logits exist; this overload serves callers that only have
// probabilities.
template <class T>
T loss_from_probabilities(const DenseMat<T>& probabilities,
                          const std::vector<int>& labels);

template <class T>
T cross_entropy_from_logits(const DenseMat<T>& logits,
                            const std::vector<int>& labels);

template <class T>
ForwardTrace<T> forward(const GraphBatch<T>& batch, const ParamSet<T>& params,
                        const HyperParams& hyper, Mode mode,
                        const DropoutState& dropout = {});

// Checkpoints: <prefix>.json manifest (tensor names/shapes/offsets, the
// hyperparameters, the seed) plus <prefix>.bin of row-major little-endian
// 32-bit floats.
void save_checkpoint(const std::string& prefix, const ParamSet<float>& params,
                     const HyperParams& hyper);

struct Checkpoint {
  ParamSet<float> params;
  HyperParams hyper;
};

Checkpoint load_checkpoint(const std::string& prefix);

// ---- implementation ----

namespace detail {

constexpr int kGraphChunk = 8;  // graphs per deterministic work unit

template <class T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

// Inverted-dropout scale row for graph b of a given stream: 0 with
// probability rate, 1/(1-rate) otherwise.
template <class T>
void fill_dropout(MapMat<T> dst, const DropoutState& st, uint64_t tag, int b) {
  const double keep = 1.0 - st.rate;
  Rng rng(mix_seed(mix_seed(st.seed, st.stream), mix_seed(tag, uint64_t(b))));
  const T scale = T(1.0 / keep);
  for (int i = 0; i < dst.rows(); ++i)
    for (int j = 0; j < dst.cols(); ++j)
      dst(i, j) = rng.uniform() < keep ? scale : T(0);
}

// h_out = cand .* z + h_prev .* (1 - z) for one graph, writing optional trace
// blocks. All matrices are V x hidden views.
template <class T>
void step_graph(CMapMat<T> h_prev, CStridedMat<T> adj, const ParamSet<T>& p,
                MapMat<T> h_out, MapMat<T>* out_msg, MapMat<T>* out_update,
                MapMat<T>* out_reset, MapMat<T>* out_cand) {
  DenseMat<T> msg = adj * (h_prev * p.agg_w);

  DenseMat<T> z = msg * p.update_w + h_prev * p.update_u;
  z.rowwise() += p.update_b.row(0);
  z = z.unaryExpr([](T x) { return sigmoid(x); });

  DenseMat<T> r = msg * p.reset_w + h_prev * p.reset_u;
  r.rowwise() += p.reset_b.row(0);
  r = r.unaryExpr([](T x) { return sigmoid(x); });

  DenseMat<T> c = msg * p.cand_w + (r.array() * h_prev.array()).matrix() * p.cand_u;
  c.rowwise() += p.cand_b.row(0);
  c = c.array().tanh().matrix();

  h_out = (c.array() * z.array() + h_prev.array() * (T(1) - z.array())).matrix();

  if (out_msg) *out_msg = msg;
  if (out_update) *out_update = z;
  if (out_reset) *out_reset = r;
  if (out_cand) *out_cand = c;
}

// Attention readout for one graph; fills the graph_emb row and optional trace
// blocks. max_src gets the argmax row per dimension.
template <class T>
void readout_graph(CMapMat<T> h_final, const ParamSet<T>& p,
                   Eigen::Ref<DenseMat<T>> emb_row, MapMat<T>* out_gate,
                   MapMat<T>* out_trans, MapMat<T>* out_node_emb,
                   Eigen::Ref<DenseMat<T>> mean_row,
                   Eigen::Ref<DenseMat<T>> max_row, int* max_src) {
  const int v = int(h_final.rows());
  const int hidden = int(h_final.cols());
  if (v <= 0) fail("empty_graph", "readout needs at least one real node");

  DenseMat<T> gate = h_final * p.att_w;
  gate.rowwise() += p.att_b.row(0);
  gate = gate.unaryExpr([](T x) { return sigmoid(x); });

  DenseMat<T> tr = h_final * p.trans_w;
  tr.rowwise() += p.trans_b.row(0);
  tr = tr.array().tanh().matrix();

  DenseMat<T> node_emb = (gate.array() * tr.array()).matrix();

  mean_row = node_emb.colwise().sum() / T(v);
  for (int j = 0; j < hidden; ++j) {
    int best = 0;
    T best_val = node_emb(0, j);
    for (int i = 1; i < v; ++i)
      if (node_emb(i, j) > best_val) {
        best_val = node_emb(i, j);
        best = i;
      }
    max_row(0, j) = best_val;
    if (max_src) max_src[j] = best;
  }
  emb_row = mean_row + max_row;

  if (out_gate) *out_gate = gate;
  if (out_trans) *out_trans = tr;
  if (out_node_emb) *out_node_emb = node_emb;
}

template <class T>
void softmax_row(Eigen::Ref<DenseMat<T>> row) {
  const T m = row.maxCoeff();
  row = (row.array() - m).exp().matrix();
  row /= row.sum();
}

template <class T>
T log_sum_exp_row(const Eigen::Ref<const DenseMat<T>>& row) {
  const T m = row.maxCoeff();
  return m + std::log((row.array() - m).exp().sum());
}

}  // namespace detail

template <class T>
BatchTensor<T> ggnn_step(const BatchTensor<T>& h, const BatchTensor<T>& adjacency,
                         const std::vector<int>& node_counts,
                         const ParamSet<T>& params) {
  if (h.batch() != adjacency.batch() || h.batch() != int(node_counts.size()) ||
      h.rows() != adjacency.rows() || adjacency.rows() != adjacency.cols() ||
      h.cols() != params.hidden)
    fail("shape_mismatch", "ggnn_step: inconsistent batch shapes");

  BatchTensor<T> out(h.batch(), h.rows(), h.cols());
  detail::parallel_chunks(h.batch(), detail::kGraphChunk,
                          [&](int, int lo, int hi) {
    for (int b = lo; b < hi; ++b) {
      const int v = node_counts[size_t(b)];
      if (v == 0) continue;
      detail::step_graph<T>(h.top(b, v), adjacency.block(b, v, v), params,
                            out.top(b, v), nullptr, nullptr, nullptr, nullptr);
    }
  });
  return out;
}

template <class T>
BatchTensor<T> interact(const GraphBatch<T>& batch, int steps,
                        const ParamSet<T>& params, Mode mode,
                        const DropoutState& dropout) {
  if (steps < 0) fail("bad_steps", "steps must be non-negative");
  const int b = batch.size();
  const int n = batch.max_nodes();
  const bool drop = mode == Mode::train && dropout.rate > 0.0;

  BatchTensor<T> h(b, n, params.hidden);
  detail::parallel_chunks(b, detail::kGraphChunk, [&](int, int lo, int hi) {
    for (int g = lo; g < hi; ++g) {
      const int v = batch.node_counts[size_t(g)];
      if (params.use_projection) {
        h.top(g, v) = batch.features.top(g, v) * params.proj_w;
        h.top(g, v).rowwise() += params.proj_b.row(0);
      } else {
        h.top(g, v) = batch.features.top(g, v);
      }
      if (drop) {
        DenseMat<T> mask(v, params.hidden);
        detail::fill_dropout<T>(MapMat<T>(mask.data(), v, params.hidden),
                                dropout, 0x1d0u, g);
        h.top(g, v).array() *= mask.array();
      }
    }
  });

  for (int s = 0; s < steps; ++s)
    h = ggnn_step(h, batch.adjacency, batch.node_counts, params);
  return h;
}

template <class T>
DenseMat<T> readout(const BatchTensor<T>& h, const std::vector<int>& node_counts,
                    const ParamSet<T>& params) {
  const int b = h.batch();
  DenseMat<T> emb(b, params.hidden);
  DenseMat<T> mean_rows(b, params.hidden), max_rows(b, params.hidden);
  detail::parallel_chunks(b, detail::kGraphChunk, [&](int, int lo, int hi) {
    for (int g = lo; g < hi; ++g)
      detail::readout_graph<T>(h.top(g, node_counts[size_t(g)]), params,
                               emb.row(g), nullptr, nullptr, nullptr,
                               mean_rows.row(g), max_rows.row(g), nullptr);
  });
  return emb;
}

template <class T>
DenseMat<T> predict(const DenseMat<T>& graph_emb, const ParamSet<T>& params) {
  DenseMat<T> logits = graph_emb * params.cls_w;
  logits.rowwise() += params.cls_b.row(0);
  for (int i = 0; i < logits.rows(); ++i) detail::softmax_row<T>(logits.row(i));
  return logits;
}

template <class T>
T loss_from_probabilities(const DenseMat<T>& probabilities,
                          const std::vector<int>& labels) {
  if (probabilities.rows() != long(labels.size()))
    fail("shape_mismatch", "loss: labels do not match probability rows");
  T total = T(0);
  for (int i = 0; i < probabilities.rows(); ++i)
    total += -std::log(probabilities(i, labels[size_t(i)]));
  return total / T(probabilities.rows());
}

template <class T>
T cross_entropy_from_logits(const DenseMat<T>& logits,
                            const std::vector<int>& labels) {
  if (logits.rows() != long(labels.size()))
    fail("shape_mismatch", "loss: labels do not match logit rows");
  T total = T(0);
  for (int i = 0; i < logits.rows(); ++i)
    total += detail::log_sum_exp_row<T>(logits.row(i)) -
             logits(i, labels[size_t(i)]);
  return total / T(logits.rows());
}

template <class T>
ForwardTrace<T> forward(const GraphBatch<T>& batch, const ParamSet<T>& params,
                        const HyperParams& hyper, Mode mode,
                        const DropoutState& dropout_in) {
  const int b = batch.size();
  const int n = batch.max_nodes();
  const int hidden = params.hidden;
  const int steps = hyper.steps;
  const int classes = params.classes;

  DropoutState dropout = dropout_in;
  dropout.rate = hyper.dropout_rate;
  const bool drop = mode == Mode::train && dropout.rate > 0.0;

  ForwardTrace<T> tr;
  tr.steps = steps;
  tr.node_counts = batch.node_counts;
  tr.h.assign(size_t(steps) + 1, BatchTensor<T>(b, n, hidden));
  tr.msg.assign(size_t(steps), BatchTensor<T>(b, n, hidden));
  tr.update.assign(size_t(steps), BatchTensor<T>(b, n, hidden));
  tr.reset.assign(size_t(steps), BatchTensor<T>(b, n, hidden));
  tr.cand.assign(size_t(steps), BatchTensor<T>(b, n, hidden));
  tr.att_gate = BatchTensor<T>(b, n, hidden);
  tr.trans = BatchTensor<T>(b, n, hidden);
  tr.node_emb = BatchTensor<T>(b, n, hidden);
  tr.mean_pool.setZero(b, hidden);
  tr.max_pool.setZero(b, hidden);
  tr.max_src.assign(size_t(b) * hidden, 0);
  tr.graph_emb.setZero(b, hidden);
  tr.graph_emb_dropped.setZero(b, hidden);
  tr.logits.setZero(b, classes);
  tr.probs.setZero(b, classes);
  tr.per_graph_loss.assign(size_t(b), T(0));
  if (drop) {
    tr.drop_h0 = BatchTensor<T>(b, n, hidden);
    tr.drop_graph.setZero(b, hidden);
  }

  detail::parallel_chunks(b, detail::kGraphChunk, [&](int, int lo, int hi) {
    for (int g = lo; g < hi; ++g) {
      const int v = batch.node_counts[size_t(g)];

      if (params.use_projection) {
        tr.h[0].top(g, v) = batch.features.top(g, v) * params.proj_w;
        tr.h[0].top(g, v).rowwise() += params.proj_b.row(0);
      } else {
        tr.h[0].top(g, v) = batch.features.top(g, v);
      }
      if (drop) {
        detail::fill_dropout<T>(tr.drop_h0.top(g, v), dropout, 0x1d0u, g);
        tr.h[0].top(g, v).array() *= tr.drop_h0.top(g, v).array();
      }

      for (int s = 0; s < steps; ++s) {
        MapMat<T> m = tr.msg[size_t(s)].top(g, v);
        MapMat<T> z = tr.update[size_t(s)].top(g, v);
        MapMat<T> r = tr.reset[size_t(s)].top(g, v);
        MapMat<T> c = tr.cand[size_t(s)].top(g, v);
        detail::step_graph<T>(tr.h[size_t(s)].ctop(g, v),
                              batch.adjacency.cblock(g, v, v), params,
                              tr.h[size_t(s) + 1].top(g, v), &m, &z, &r, &c);
      }

      MapMat<T> gate = tr.att_gate.top(g, v);
      MapMat<T> transform = tr.trans.top(g, v);
      MapMat<T> node_emb = tr.node_emb.top(g, v);
      detail::readout_graph<T>(tr.h[size_t(steps)].ctop(g, v), params,
                               tr.graph_emb.row(g), &gate, &transform,
                               &node_emb, tr.mean_pool.row(g),
                               tr.max_pool.row(g),
                               tr.max_src.data() + size_t(g) * hidden);

      if (drop) {
        detail::fill_dropout<T>(
            MapMat<T>(tr.drop_graph.row(g).data(), 1, hidden), dropout, 0x96u, g);
        tr.graph_emb_dropped.row(g) =
            (tr.graph_emb.row(g).array() * tr.drop_graph.row(g).array()).matrix();
      } else {
        tr.graph_emb_dropped.row(g) = tr.graph_emb.row(g);
      }

      tr.logits.row(g) = tr.graph_emb_dropped.row(g) * params.cls_w;
      tr.logits.row(g) += params.cls_b.row(0);
      tr.probs.row(g) = tr.logits.row(g);
      detail::softmax_row<T>(tr.probs.row(g));
      tr.per_graph_loss[size_t(g)] =
          detail::log_sum_exp_row<T>(tr.logits.row(g)) -
          tr.logits(g, batch.labels[size_t(g)]);
    }
  });

  T total = T(0);
  for (int g = 0; g < b; ++g) total += tr.per_graph_loss[size_t(g)];
  tr.loss = total / T(b);
  return tr;
}

// ---- ParamSet ----

template <class T>
ParamSet<T> ParamSet<T>::create(int input_dim, int hidden, int classes,
                                bool use_projection) {
  if (!use_projection && input_dim != hidden)
    fail("bad_config",
         "projection disabled requires input_dim == hidden (" +
             std::to_string(input_dim) + " vs " + std::to_string(hidden) + ")");
  ParamSet<T> p;
  p.input_dim = input_dim;
  p.hidden = hidden;
  p.classes = classes;
  p.use_projection = use_projection;

  auto zeros = [](int r, int c) { return DenseMat<T>::Zero(r, c); };
  p.proj_w = zeros(input_dim, hidden);
  p.proj_b = zeros(1, hidden);
  p.agg_w = zeros(hidden, hidden);
  p.update_w = zeros(hidden, hidden);
  p.update_u = zeros(hidden, hidden);
  p.update_b = zeros(1, hidden);
  p.reset_w = zeros(hidden, hidden);
  p.reset_u = zeros(hidden, hidden);
  p.reset_b = zeros(1, hidden);
  p.cand_w = zeros(hidden, hidden);
  p.cand_u = zeros(hidden, hidden);
  p.cand_b = zeros(1, hidden);
  p.att_w = zeros(hidden, hidden);
  p.att_b = zeros(1, hidden);
  p.trans_w = zeros(hidden, hidden);
  p.trans_b = zeros(1, hidden);
  p.cls_w = zeros(hidden, classes);
  p.cls_b = zeros(1, classes);
  return p;
}

template <class T>
std::vector<std::pair<const char*, DenseMat<T>*>> ParamSet<T>::tensors() {
  return {
      {"proj_w", &proj_w},     {"proj_b", &proj_b},
      {"agg_w", &agg_w},       {"update_w", &update_w},
      {"update_u", &update_u}, {"update_b", &update_b},
      {"reset_w", &reset_w},   {"reset_u", &reset_u},
      {"reset_b", &reset_b},   {"cand_w", &cand_w},
      {"cand_u", &cand_u},     {"cand_b", &cand_b},
      {"att_w", &att_w},       {"att_b", &att_b},
      {"trans_w", &trans_w},   {"trans_b", &trans_b},
      {"cls_w", &cls_w},       {"cls_b", &cls_b},
  };
}

template <class T>
std::vector<std::pair<const char*, const DenseMat<T>*>> ParamSet<T>::tensors()
    const {
  auto list = const_cast<ParamSet<T>*>(this)->tensors();
  std::vector<std::pair<const char*, const DenseMat<T>*>> out;
  out.reserve(list.size());
  for (auto& [name, mat] : list) out.emplace_back(name, mat);
  return out;
}

template <class T>
void ParamSet<T>::init_xavier(uint64_t seed) {
  Rng rng(mix_seed(seed, 0x1417u));
  for (auto& [name, mat] : tensors()) {
    if (std::string_view(name).ends_with("_b")) {
      mat->setZero();
      continue;
    }
    const double bound =
        std::sqrt(6.0 / double(mat->rows() + mat->cols()));
    for (int i = 0; i < mat->rows(); ++i)
      for (int j = 0; j < mat->cols(); ++j)
        (*mat)(i, j) = T(rng.uniform(-bound, bound));
  }
  if (!use_projection) {
    proj_w.setZero();
    proj_b.setZero();
  }
}

template <class T>
void ParamSet<T>::set_zero() {
  for (auto& [name, mat] : tensors()) mat->setZero();
}

template <class T>
long ParamSet<T>::parameter_count() const {
  long total = 0;
  for (auto& [name, mat] : tensors())
    total += long(mat->rows()) * long(mat->cols());
  if (!use_projection)
    total -= long(proj_w.rows()) * long(proj_w.cols()) + long(proj_b.cols());
  return total;
}

template <class T>
template <class U>
ParamSet<U> ParamSet<T>::cast() const {
  ParamSet<U> out =
      ParamSet<U>::create(input_dim, hidden, classes, use_projection);
  auto src = tensors();
  auto dst = out.tensors();
  for (size_t i = 0; i < src.size(); ++i)
    *dst[i].second = src[i].second->template cast<U>();
  return out;
}

}  // namespace texting
