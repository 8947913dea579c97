#pragma once

#include <string>
#include <vector>

#include "texting/model.hpp"

namespace texting {

template <class T>
using GradientSet = ParamSet<T>;

template <class T>
struct AdamState {
  ParamSet<T> first_moment;
  ParamSet<T> second_moment;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState<T> like(const ParamSet<T>& params) {
    AdamState<T> st;
    st.first_moment = ParamSet<T>::create(params.input_dim, params.hidden,
                                          params.classes, params.use_projection);
    st.second_moment = st.first_moment;
    return st;
  }
};

// Exact reverse-mode gradients of the forward trace: backprop through the
// unrolled recurrence and both readout pooling branches.
template <class T>
GradientSet<T> backward(const ForwardTrace<T>& trace, const GraphBatch<T>& batch,
                        const ParamSet<T>& params);

// Bias-corrected Adam. Throws with the offending tensor name if any gradient
// element is non-finite.
template <class T>
void adam_step(ParamSet<T>& params, const GradientSet<T>& grads,
               AdamState<T>& state, double learning_rate);

template <class T>
double global_grad_norm(const GradientSet<T>& grads);

template <class T>
void scale_gradients(GradientSet<T>& grads, double factor);

enum class Channel { local, global };

std::string channel_name(Channel c);
Channel parse_channel(std::string_view name);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double train_accuracy = -1.0;  // only when tracked
};

struct TrainReport {
  uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;           // 1-based
  double best_val_accuracy = 0.0;
  double test_accuracy = 0.0;
  double wall_seconds = 0.0;    // console-only; never serialized
};

struct TrainOptions {
  bool track_train_accuracy = false;
  bool verbose = false;
  std::string checkpoint_prefix;  // written at every val improvement if set
  std::string epoch_csv;          // per-epoch metrics if set
};

template <class T>
struct TrainResult {
  ParamSet<T> params;
  TrainReport report;
};

// Builds graphs for the requested channel and runs mini-batch training with
// early stopping on validation accuracy; returns the best-val parameters.
TrainResult<float> train(const Corpus& corpus, const EmbeddingTable& embeddings,
                         const HyperParams& hyper, Channel channel,
                         const TrainOptions& options = {});

// Same loop over pre-built (already normalized) graphs; `classes` fixes the
// classifier width.
TrainResult<float> train_on_graphs(const std::vector<const DocGraph<float>*>& train_graphs,
                                   const std::vector<const DocGraph<float>*>& val_graphs,
                                   const std::vector<const DocGraph<float>*>& test_graphs,
                                   int classes, const HyperParams& hyper,
                                   const TrainOptions& options = {});

// Builds normalized per-document graphs for one channel, aligned with
// corpus.documents. The global channel counts PMI over train+val documents.
template <class T>
std::vector<DocGraph<T>> build_channel_graphs(const Corpus& corpus,
                                              const EmbeddingTable& embeddings,
                                              const HyperParams& hyper,
                                              Channel channel);

template <class T>
DenseMat<T> predict_all(const ParamSet<T>& params,
                        const std::vector<const DocGraph<T>*>& graphs,
                        const HyperParams& hyper);

// Fraction of graphs whose argmax probability equals the label; argmax ties
// break toward the lowest class index.
template <class T>
double evaluate(const ParamSet<T>& params,
                const std::vector<const DocGraph<T>*>& graphs,
                const HyperParams& hyper);

template <class T>
std::vector<int> argmax_rows(const DenseMat<T>& probabilities);

// 1:1 vote of two channels: argmax of the averaged probability rows.
template <class T>
std::vector<int> vote_multichannel(const DenseMat<T>& p_local,
                                   const DenseMat<T>& p_global);

// Hard-label variant: each channel votes its argmax; disagreements fall back
// to the local channel's choice.
template <class T>
std::vector<int> vote_multichannel_hard(const DenseMat<T>& p_local,
                                        const DenseMat<T>& p_global);

// ---- template definitions ----

namespace detail {

// Per-graph gradient contribution, accumulated into `acc`.
template <class T>
void backward_graph(const ForwardTrace<T>& tr, const GraphBatch<T>& batch,
                    const ParamSet<T>& p, int g, GradientSet<T>& acc) {
  const int v = batch.node_counts[size_t(g)];
  const int hidden = p.hidden;
  const int steps = tr.steps;
  const T inv_b = T(1) / T(batch.size());
  const bool dropped = !tr.drop_h0.empty();

  // softmax + cross-entropy
  DenseMat<T> dlogit = tr.probs.row(g);
  dlogit(0, batch.labels[size_t(g)]) -= T(1);
  dlogit *= inv_b;

  acc.cls_w.noalias() += tr.graph_emb_dropped.row(g).transpose() * dlogit;
  acc.cls_b += dlogit;

  DenseMat<T> d_emb = dlogit * p.cls_w.transpose();  // 1 x hidden
  if (dropped) d_emb.array() *= tr.drop_graph.row(g).array();

  // readout: mean + max pooling
  DenseMat<T> d_node = DenseMat<T>::Zero(v, hidden);
  d_node.rowwise() += (d_emb / T(v)).row(0);
  const int* max_src = tr.max_src.data() + size_t(g) * hidden;
  for (int j = 0; j < hidden; ++j) d_node(max_src[j], j) += d_emb(0, j);

  CMapMat<T> gate = tr.att_gate.top(g, v);
  CMapMat<T> transform = tr.trans.top(g, v);
  CMapMat<T> h_final = tr.h[size_t(steps)].top(g, v);

  DenseMat<T> d_gate_pre =
      (d_node.array() * transform.array() * gate.array() * (T(1) - gate.array()))
          .matrix();
  DenseMat<T> d_trans_pre =
      (d_node.array() * gate.array() * (T(1) - transform.array().square()))
          .matrix();

  acc.att_w.noalias() += h_final.transpose() * d_gate_pre;
  acc.att_b += d_gate_pre.colwise().sum();
  acc.trans_w.noalias() += h_final.transpose() * d_trans_pre;
  acc.trans_b += d_trans_pre.colwise().sum();

  DenseMat<T> d_h = d_gate_pre * p.att_w.transpose() +
                    d_trans_pre * p.trans_w.transpose();  // v x hidden

  // backprop through the unrolled gated updates
  for (int s = steps; s >= 1; --s) {
    CMapMat<T> z = tr.update[size_t(s) - 1].top(g, v);
    CMapMat<T> r = tr.reset[size_t(s) - 1].top(g, v);
    CMapMat<T> c = tr.cand[size_t(s) - 1].top(g, v);
    CMapMat<T> h_prev = tr.h[size_t(s) - 1].top(g, v);
    CMapMat<T> msg = tr.msg[size_t(s) - 1].top(g, v);
    CStridedMat<T> adj = batch.adjacency.block(g, v, v);

    DenseMat<T> d_cand_pre =
        (d_h.array() * z.array() * (T(1) - c.array().square())).matrix();
    DenseMat<T> d_update_pre =
        (d_h.array() * (c.array() - h_prev.array()) * z.array() *
         (T(1) - z.array()))
            .matrix();
    DenseMat<T> d_h_prev = (d_h.array() * (T(1) - z.array())).matrix();

    DenseMat<T> reset_h = (r.array() * h_prev.array()).matrix();
    acc.cand_w.noalias() += msg.transpose() * d_cand_pre;
    acc.cand_u.noalias() += reset_h.transpose() * d_cand_pre;
    acc.cand_b += d_cand_pre.colwise().sum();

    DenseMat<T> d_msg = d_cand_pre * p.cand_w.transpose();
    DenseMat<T> d_reset_h = d_cand_pre * p.cand_u.transpose();
    DenseMat<T> d_reset_pre =
        (d_reset_h.array() * h_prev.array() * r.array() * (T(1) - r.array()))
            .matrix();
    d_h_prev.array() += d_reset_h.array() * r.array();

    acc.reset_w.noalias() += msg.transpose() * d_reset_pre;
    acc.reset_u.noalias() += h_prev.transpose() * d_reset_pre;
    acc.reset_b += d_reset_pre.colwise().sum();
    d_msg.noalias() += d_reset_pre * p.reset_w.transpose();
    d_h_prev.noalias() += d_reset_pre * p.reset_u.transpose();

    acc.update_w.noalias() += msg.transpose() * d_update_pre;
    acc.update_u.noalias() += h_prev.transpose() * d_update_pre;
    acc.update_b += d_update_pre.colwise().sum();
    d_msg.noalias() += d_update_pre * p.update_w.transpose();
    d_h_prev.noalias() += d_update_pre * p.update_u.transpose();

    // msg = adj * (h_prev * agg_w); adj may be asymmetric after row
    // normalization, so the transpose matters.
    DenseMat<T> d_pre_msg = adj.transpose() * d_msg;
    acc.agg_w.noalias() += h_prev.transpose() * d_pre_msg;
    d_h_prev.noalias() += d_pre_msg * p.agg_w.transpose();

    d_h = std::move(d_h_prev);
  }

  if (dropped) d_h.array() *= tr.drop_h0.top(g, v).array();
  if (p.use_projection) {
    acc.proj_w.noalias() += batch.features.top(g, v).transpose() * d_h;
    acc.proj_b += d_h.colwise().sum();
  }
}

}  // namespace detail

template <class T>
GradientSet<T> backward(const ForwardTrace<T>& trace, const GraphBatch<T>& batch,
                        const ParamSet<T>& params) {
  if (int(trace.node_counts.size()) != batch.size() ||
      trace.node_counts != batch.node_counts)
    fail("trace_mismatch", "backward: trace does not belong to this batch");

  const int b = batch.size();
  const int n_chunks = (b + detail::kGraphChunk - 1) / detail::kGraphChunk;
  std::vector<GradientSet<T>> partial(
      size_t(n_chunks),
      ParamSet<T>::create(params.input_dim, params.hidden, params.classes,
                          params.use_projection));

  detail::parallel_chunks(b, detail::kGraphChunk, [&](int chunk, int lo, int hi) {
    for (int g = lo; g < hi; ++g)
      detail::backward_graph(trace, batch, params, g, partial[size_t(chunk)]);
  });

  GradientSet<T> grads = std::move(partial[0]);
  auto dst = grads.tensors();
  for (int c = 1; c < n_chunks; ++c) {
    auto src = partial[size_t(c)].tensors();
    for (size_t i = 0; i < dst.size(); ++i) *dst[i].second += *src[i].second;
  }
  return grads;
}

template <class T>
void adam_step(ParamSet<T>& params, const GradientSet<T>& grads,
               AdamState<T>& state, double learning_rate) {
  ++state.step;
  const T b1 = T(state.beta1);
  const T b2 = T(state.beta2);
  const T eps = T(state.epsilon);
  const T corr1 = T(1) - T(std::pow(state.beta1, double(state.step)));
  const T corr2 = T(1) - T(std::pow(state.beta2, double(state.step)));
  const T lr = T(learning_rate);

  auto ps = params.tensors();
  auto gs = grads.tensors();
  auto ms = state.first_moment.tensors();
  auto vs = state.second_moment.tensors();
  for (size_t i = 0; i < ps.size(); ++i) {
    const DenseMat<T>& g = *gs[i].second;
    if (!g.allFinite())
      fail("non_finite_gradient",
           std::string("non-finite gradient in tensor '") + gs[i].first +
               "' at step " + std::to_string(state.step));
    DenseMat<T>& m = *ms[i].second;
    DenseMat<T>& mv = *vs[i].second;
    m = b1 * m + (T(1) - b1) * g;
    mv = (b2 * mv.array() + (T(1) - b2) * g.array().square()).matrix();
    ps[i].second->array() -=
        lr * (m.array() / corr1) / ((mv.array() / corr2).sqrt() + eps);
  }
}

template <class T>
double global_grad_norm(const GradientSet<T>& grads) {
  double sq = 0.0;
  for (const auto& [name, mat] : grads.tensors())
    sq += double(mat->template cast<double>().squaredNorm());
  return std::sqrt(sq);
}

template <class T>
void scale_gradients(GradientSet<T>& grads, double factor) {
  for (auto& [name, mat] : grads.tensors()) *mat *= T(factor);
}

template <class T>
std::vector<int> argmax_rows(const DenseMat<T>& probabilities) {
  std::vector<int> out(static_cast<size_t>(probabilities.rows()));
  for (int i = 0; i < probabilities.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < probabilities.cols(); ++j)
      if (probabilities(i, j) > probabilities(i, best)) best = j;
    out[size_t(i)] = best;
  }
  return out;
}

template <class T>
DenseMat<T> predict_all(const ParamSet<T>& params,
                        const std::vector<const DocGraph<T>*>& graphs,
                        const HyperParams& hyper) {
  if (graphs.empty()) fail("empty_eval", "no graphs to evaluate");
  DenseMat<T> probs(long(graphs.size()), params.classes);
  const int bs = std::max(1, hyper.batch_size);
  for (size_t start = 0; start < graphs.size(); start += size_t(bs)) {
    const size_t end = std::min(graphs.size(), start + size_t(bs));
    std::vector<const DocGraph<T>*> chunk(graphs.begin() + long(start),
                                          graphs.begin() + long(end));
    GraphBatch<T> batch = batch_graphs(chunk);
    BatchTensor<T> h = interact(batch, hyper.steps, params, Mode::eval);
    DenseMat<T> emb = readout(h, batch.node_counts, params);
    probs.middleRows(long(start), long(end - start)) = predict(emb, params);
  }
  return probs;
}

template <class T>
double evaluate(const ParamSet<T>& params,
                const std::vector<const DocGraph<T>*>& graphs,
                const HyperParams& hyper) {
  DenseMat<T> probs = predict_all(params, graphs, hyper);
  std::vector<int> pred = argmax_rows(probs);
  long correct = 0;
  for (size_t i = 0; i < graphs.size(); ++i)
    if (pred[i] == graphs[i]->label) ++correct;
  return double(correct) / double(graphs.size());
}

template <class T>
std::vector<int> vote_multichannel(const DenseMat<T>& p_local,
                                   const DenseMat<T>& p_global) {
  if (p_local.rows() != p_global.rows() || p_local.cols() != p_global.cols())
    fail("shape_mismatch", "vote: probability matrices differ in shape");
  DenseMat<T> avg = (p_local + p_global) / T(2);
  return argmax_rows(avg);
}

template <class T>
std::vector<int> vote_multichannel_hard(const DenseMat<T>& p_local,
                                        const DenseMat<T>& p_global) {
  if (p_local.rows() != p_global.rows() || p_local.cols() != p_global.cols())
    fail("shape_mismatch", "vote: probability matrices differ in shape");
  std::vector<int> a = argmax_rows(p_local);
  std::vector<int> b = argmax_rows(p_global);
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) b[i] = a[i];  // local channel breaks disagreements
  return b;
}

template <class T>
std::vector<DocGraph<T>> build_channel_graphs(const Corpus& corpus,
                                              const EmbeddingTable& embeddings,
                                              const HyperParams& hyper,
                                              Channel channel) {
  std::vector<DocGraph<T>> graphs(corpus.documents.size());
  if (channel == Channel::local) {
    detail::parallel_chunks(
        int(corpus.documents.size()), 64, [&](int, int lo, int hi) {
          for (int i = lo; i < hi; ++i) {
            const Document& doc = corpus.documents[size_t(i)];
            DocGraph<T> g = build_graph<T>(doc.tokens, hyper.window, embeddings);
            g.id = doc.id;
            g.label = doc.label;
            graphs[size_t(i)] = normalize_adjacency(
                std::move(g), hyper.adjacency_norm, hyper.self_loops);
          }
        });
  } else {
    const GlobalWordGraph global =
        build_global_pmi_graph(corpus, hyper.pmi_window);
    detail::parallel_chunks(
        int(corpus.documents.size()), 64, [&](int, int lo, int hi) {
          for (int i = lo; i < hi; ++i) {
            DocGraph<T> g = extract_subgraph<T>(corpus.documents[size_t(i)],
                                                global, embeddings);
            graphs[size_t(i)] = normalize_adjacency(
                std::move(g), hyper.adjacency_norm, hyper.self_loops);
          }
        });
  }
  return graphs;
}

}  // namespace texting
