// Acceptance suite. Runs every release criterion and prints one line per
// criterion. Hermetic criteria always run; benchmark-data criteria run when
// the dataset files are present (--data-dir / TEXTING_DATA_DIR, and
// --glove / TEXTING_GLOVE for the embedding-dependent ones) and are skipped
// otherwise. Exit code is nonzero iff any criterion fails.
//
//   acceptance [--data-dir DIR] [--glove FILE] [--only 1,4,11]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <set>
#include <sstream>

#include "reference_model.hpp"
#include "test_support.hpp"
#include "texting/experiments.hpp"

using namespace texting;

namespace {

struct Options {
  std::string data_dir;
  std::string glove;
  std::set<int> only;
};

struct Outcome {
  enum Status { pass, fail, skip } status = pass;
  std::string detail;

  static Outcome ok(std::string d = "") { return {pass, std::move(d)}; }
  static Outcome bad(std::string d) { return {fail, std::move(d)}; }
  static Outcome off(std::string d) { return {skip, std::move(d)}; }
};

bool dataset_present(const Options& opt, const std::string& name) {
  if (opt.data_dir.empty()) return false;
  return std::filesystem::exists(opt.data_dir + "/" + name + ".meta") &&
         std::filesystem::exists(opt.data_dir + "/" + name + ".texts");
}

bool glove_present(const Options& opt) {
  return !opt.glove.empty() && std::filesystem::exists(opt.glove);
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---- 1: graph construction oracle -----------------------------------------

std::set<std::pair<std::string, std::string>> oracle_edges(
    const std::vector<std::string>& tokens, int window) {
  std::set<std::pair<std::string, std::string>> edges;
  const size_t len = tokens.size();
  const size_t span = std::min<size_t>(size_t(window), len);
  const size_t n_windows = len >= size_t(window) ? len - size_t(window) + 1 : 1;
  for (size_t start = 0; start < n_windows; ++start)
    for (size_t a = start; a < start + span; ++a)
      for (size_t b = a + 1; b < start + span; ++b) {
        if (tokens[a] == tokens[b]) continue;
        auto p = std::minmax(tokens[a], tokens[b]);
        edges.emplace(p.first, p.second);
      }
  return edges;
}

Outcome criterion_graph_oracle(const Options&) {
  EmbeddingTable table;
  table.dimension = 2;
  table.oov_seed = 1;
  Rng rng(0xACCE01);
  long checked = 0;
  for (int round = 0; round < 1000; ++round) {
    const int alphabet = 1 + int(rng.below(20));
    const int len = 1 + int(rng.below(60));
    const std::vector<std::string> tokens =
        testsupport::random_tokens(rng, alphabet, len);
    for (int window = 2; window <= 6; ++window) {
      DocGraph<float> g = build_graph<float>(tokens, window, table);
      std::set<std::pair<std::string, std::string>> got;
      for (int i = 0; i < g.node_count(); ++i)
        for (int j = i + 1; j < g.node_count(); ++j)
          if (g.adjacency(i, j) != 0.0f) {
            auto p = std::minmax(g.node_words[size_t(i)], g.node_words[size_t(j)]);
            got.emplace(p.first, p.second);
          }
      if (got != oracle_edges(tokens, window))
        return Outcome::bad("edge set mismatch at sequence " +
                            std::to_string(round) + ", window " +
                            std::to_string(window));
      if (g.adjacency != g.adjacency.transpose().eval())
        return Outcome::bad("asymmetric adjacency");
      ++checked;
    }
  }
  return Outcome::ok(std::to_string(checked) + " sequence/window pairs exact");
}

// ---- 2: gradient check -----------------------------------------------------

Outcome criterion_gradient_check(const Options&) {
  Rng rng(0xACCE02);
  double worst = 0.0;
  long elements = 0;
  struct Inst {
    int dim, hidden, classes, steps, batch;
    AdjNorm mode;
    bool self_loops, projection;
  };
  const Inst instances[] = {
      {3, 4, 2, 1, 1, AdjNorm::row, true, true},
      {4, 5, 3, 2, 2, AdjNorm::row, true, true},
      {5, 6, 2, 3, 3, AdjNorm::symmetric, false, true},
      {4, 4, 3, 2, 2, AdjNorm::none, true, false},
      {3, 6, 2, 3, 1, AdjNorm::row, false, true},
      {5, 5, 2, 1, 3, AdjNorm::symmetric, true, true},
  };
  for (const Inst& inst : instances) {
    std::vector<DocGraph<double>> graphs = testsupport::random_graphs<double>(
        rng, inst.batch, 4, inst.dim, inst.mode, inst.self_loops, inst.classes);
    GraphBatch<double> batch = batch_graphs(graphs);
    ParamSet<double> p = testsupport::random_params<double>(
        inst.dim, inst.projection ? inst.hidden : inst.dim, inst.classes,
        rng.next_u64(), inst.projection);
    HyperParams hyper;
    hyper.steps = inst.steps;
    hyper.input_dim = inst.dim;
    hyper.hidden = inst.projection ? inst.hidden : inst.dim;
    hyper.dropout_rate = 0.0;

    ForwardTrace<double> trace = forward(batch, p, hyper, Mode::eval);
    GradientSet<double> grads = backward(trace, batch, p);
    auto gs = grads.tensors();
    auto ps = p.tensors();
    const double eps = 1e-5;
    for (size_t t = 0; t < ps.size(); ++t) {
      if (!p.use_projection &&
          std::string_view(ps[t].first).substr(0, 4) == "proj")
        continue;
      DenseMat<double>& mat = *ps[t].second;
      for (int i = 0; i < mat.rows(); ++i)
        for (int j = 0; j < mat.cols(); ++j) {
          const double orig = mat(i, j);
          mat(i, j) = orig + eps;
          const double lp = double(forward(batch, p, hyper, Mode::eval).loss);
          mat(i, j) = orig - eps;
          const double lm = double(forward(batch, p, hyper, Mode::eval).loss);
          mat(i, j) = orig;
          const double fd = (lp - lm) / (2.0 * eps);
          const double ad = (*gs[t].second)(i, j);
          const double diff = std::abs(ad - fd);
          ++elements;
          if (diff < 1e-9) continue;
          worst = std::max(
              worst, diff / std::max({std::abs(ad), std::abs(fd), 1e-6}));
        }
    }
  }
  if (worst >= 1e-4)
    return Outcome::bad("max relative error " + fmt(worst, 8));
  return Outcome::ok(std::to_string(elements) +
                     " parameter elements, max rel err " + fmt(worst, 8));
}

// ---- 3: forward oracle -----------------------------------------------------

Outcome criterion_forward_oracle(const Options&) {
  Rng rng(0xACCE03);
  double worst = 0.0;
  for (int round = 0; round < 100; ++round) {
    const int dim = 2 + int(rng.below(4));
    const int hidden = 2 + int(rng.below(4));
    const int classes = 2 + int(rng.below(2));
    const int steps = int(rng.below(4));
    const int nb = 1 + int(rng.below(3));
    const AdjNorm mode = static_cast<AdjNorm>(rng.below(3));

    std::vector<DocGraph<double>> graphs = testsupport::random_graphs<double>(
        rng, nb, 4, dim, mode, rng.uniform() < 0.5, classes);
    GraphBatch<double> batch = batch_graphs(graphs);
    ParamSet<double> p = testsupport::random_params<double>(dim, hidden, classes,
                                                            rng.next_u64());
    HyperParams hyper;
    hyper.steps = steps;
    hyper.input_dim = dim;
    hyper.hidden = hidden;
    hyper.dropout_rate = 0.0;

    ForwardTrace<double> trace = forward(batch, p, hyper, Mode::eval);
    refmodel::RefParams rp = refmodel::from_params(p);
    for (int g = 0; g < nb; ++g) {
      const int v = batch.node_counts[size_t(g)];
      refmodel::Mat feats(static_cast<size_t>(v),
                          std::vector<double>(static_cast<size_t>(dim)));
      refmodel::Mat adj(static_cast<size_t>(v),
                        std::vector<double>(static_cast<size_t>(v)));
      for (int i = 0; i < v; ++i) {
        for (int j = 0; j < dim; ++j)
          feats[size_t(i)][size_t(j)] = batch.features.slab(g)(i, j);
        for (int j = 0; j < v; ++j)
          adj[size_t(i)][size_t(j)] = batch.adjacency.slab(g)(i, j);
      }
      refmodel::RefResult res =
          refmodel::ref_forward(feats, adj, rp, steps, batch.labels[size_t(g)]);
      for (int c = 0; c < classes; ++c) {
        worst = std::max(worst,
                         std::abs(trace.probs(g, c) - res.probs[size_t(c)]));
        worst = std::max(worst,
                         std::abs(trace.logits(g, c) - res.logits[size_t(c)]));
      }
      worst = std::max(
          worst, std::abs(double(trace.per_graph_loss[size_t(g)]) - res.loss));
    }
  }
  if (worst >= 1e-10) return Outcome::bad("max abs deviation " + fmt(worst, 14));
  return Outcome::ok("100 instances, max abs deviation " + fmt(worst, 14));
}

// ---- 4: invariance suite ---------------------------------------------------

Outcome criterion_invariances(const Options&) {
  Rng rng(0xACCE04);

  // permutation invariance of logits
  for (int round = 0; round < 25; ++round) {
    const int dim = 3, hidden = 6, classes = 3;
    std::vector<DocGraph<double>> graphs = testsupport::random_graphs<double>(
        rng, 1, 6, dim, AdjNorm::row, true, classes);
    DocGraph<double>& g = graphs[0];
    const int v = g.node_count();
    std::vector<int> perm(static_cast<size_t>(v));
    for (int i = 0; i < v; ++i) perm[size_t(i)] = i;
    Rng prng(rng.next_u64());
    prng.shuffle(perm);
    DocGraph<double> pg = g;
    for (int i = 0; i < v; ++i) {
      pg.features.row(perm[size_t(i)]) = g.features.row(i);
      for (int j = 0; j < v; ++j)
        pg.adjacency(perm[size_t(i)], perm[size_t(j)]) = g.adjacency(i, j);
    }
    ParamSet<double> p =
        testsupport::random_params<double>(dim, hidden, classes, rng.next_u64());
    HyperParams h;
    h.steps = 2;
    h.input_dim = dim;
    h.hidden = hidden;
    h.dropout_rate = 0.0;
    std::vector<DocGraph<double>> a{g}, b{pg};
    ForwardTrace<double> ta = forward(batch_graphs(a), p, h, Mode::eval);
    ForwardTrace<double> tb = forward(batch_graphs(b), p, h, Mode::eval);
    if ((ta.logits - tb.logits).cwiseAbs().maxCoeff() >= 1e-9)
      return Outcome::bad("permutation changed logits");
  }

  // padding invariance
  for (int round = 0; round < 25; ++round) {
    const int dim = 3, hidden = 5, classes = 2;
    std::vector<DocGraph<double>> graphs = testsupport::random_graphs<double>(
        rng, 2, 4, dim, AdjNorm::row, true, classes);
    GraphBatch<double> tight = batch_graphs(graphs);
    GraphBatch<double> wide;
    const int n_pad = tight.max_nodes() + 3;
    wide.features = BatchTensor<double>(tight.size(), n_pad, dim);
    wide.adjacency = BatchTensor<double>(tight.size(), n_pad, n_pad);
    wide.node_counts = tight.node_counts;
    wide.labels = tight.labels;
    for (int g = 0; g < tight.size(); ++g) {
      const int v = tight.node_counts[size_t(g)];
      wide.features.top(g, v) = tight.features.ctop(g, v);
      wide.adjacency.block(g, v, v) = tight.adjacency.cblock(g, v, v);
    }
    ParamSet<double> p =
        testsupport::random_params<double>(dim, hidden, classes, rng.next_u64());
    HyperParams h;
    h.steps = 2;
    h.input_dim = dim;
    h.hidden = hidden;
    h.dropout_rate = 0.0;
    ForwardTrace<double> ta = forward(tight, p, h, Mode::eval);
    ForwardTrace<double> tb = forward(wide, p, h, Mode::eval);
    if ((ta.logits - tb.logits).cwiseAbs().maxCoeff() >= 1e-12)
      return Outcome::bad("padding changed logits");
  }

  // t-hop locality on disjoint components: perturbing one component leaves
  // the other's states bitwise untouched
  {
    EmbeddingTable table;
    table.dimension = 4;
    table.oov_seed = 3;
    auto combined = [&](double bump) {
      DocGraph<double> g;
      g.node_words = {"a", "b", "c", "d"};
      g.label = 0;
      g.adjacency = DenseMat<double>::Zero(4, 4);
      g.adjacency(0, 1) = g.adjacency(1, 0) = 1.0;
      g.adjacency(2, 3) = g.adjacency(3, 2) = 1.0;
      g.features = DenseMat<double>(4, 4);
      Rng frng(17);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g.features(i, j) = frng.uniform(-1, 1);
      g.features(2, 0) += bump;
      return normalize_adjacency(std::move(g), AdjNorm::row, true);
    };
    ParamSet<double> p = testsupport::random_params<double>(4, 6, 2, 99);
    for (int steps = 1; steps <= 3; ++steps) {
      std::vector<DocGraph<double>> g0{combined(0.0)}, g1{combined(2.0)};
      GraphBatch<double> b0 = batch_graphs(g0), b1 = batch_graphs(g1);
      BatchTensor<double> h0 = interact(b0, steps, p, Mode::eval);
      BatchTensor<double> h1 = interact(b1, steps, p, Mode::eval);
      for (int i = 0; i < 2; ++i)
        if (h0.slab(0).row(i) != h1.slab(0).row(i))
          return Outcome::bad("cross-component leakage at t=" +
                              std::to_string(steps));
      if (h0.slab(0).row(2) == h1.slab(0).row(2))
        return Outcome::bad("perturbation had no effect at all");
    }
  }

  // gate ranges, boundedness, softmax normalization
  for (int round = 0; round < 25; ++round) {
    const int dim = 4, hidden = 6;
    GraphBatch<double> batch = testsupport::random_batch<double>(rng, 3, 5, dim);
    ParamSet<double> p =
        testsupport::random_params<double>(dim, hidden, 2, rng.next_u64());
    HyperParams h;
    h.steps = 3;
    h.input_dim = dim;
    h.hidden = hidden;
    h.dropout_rate = 0.0;
    ForwardTrace<double> tr = forward(batch, p, h, Mode::eval);
    double m0 = 0.0;
    for (int g = 0; g < batch.size(); ++g)
      m0 = std::max(m0, tr.h[0]
                            .ctop(g, batch.node_counts[size_t(g)])
                            .cwiseAbs()
                            .maxCoeff());
    const double bound = std::max(m0, 1.0);
    for (int s = 1; s <= 3; ++s)
      for (int g = 0; g < batch.size(); ++g) {
        const int v = batch.node_counts[size_t(g)];
        const auto z = tr.update[size_t(s) - 1].ctop(g, v);
        const auto r = tr.reset[size_t(s) - 1].ctop(g, v);
        if (!(z.minCoeff() > 0.0 && z.maxCoeff() < 1.0))
          return Outcome::bad("update gate left (0,1)");
        if (!(r.minCoeff() > 0.0 && r.maxCoeff() < 1.0))
          return Outcome::bad("reset gate left (0,1)");
        if (tr.h[size_t(s)].ctop(g, v).cwiseAbs().maxCoeff() > bound + 1e-12)
          return Outcome::bad("state escaped the max(M,1) bound");
      }
    for (int g = 0; g < batch.size(); ++g) {
      if (std::abs(tr.probs.row(g).sum() - 1.0) >= 1e-12)
        return Outcome::bad("softmax row does not sum to 1");
      if (tr.probs.row(g).minCoeff() <= 0.0)
        return Outcome::bad("softmax row not strictly positive");
    }
  }

  return Outcome::ok("permutation, padding, locality, gates, bounds, softmax");
}

// ---- 5: toy overfit ---------------------------------------------------------

Outcome criterion_toy_overfit(const Options&) {
  Corpus corpus = testsupport::toy_corpus(10, 2, 2);
  EmbeddingTable table = testsupport::make_random_embeddings(
      testsupport::toy_vocabulary(), 8, 12345);
  HyperParams hyper;
  hyper.steps = 2;
  hyper.input_dim = 8;
  hyper.hidden = 16;
  hyper.dropout_rate = 0.0;
  hyper.batch_size = 8;
  hyper.max_epochs = 200;
  hyper.patience = 200;
  hyper.seed = 1;
  TrainOptions options;
  options.track_train_accuracy = true;
  TrainResult<float> r = train(corpus, table, hyper, Channel::local, options);
  for (const EpochRecord& e : r.report.epochs)
    if (e.train_accuracy == 1.0)
      return Outcome::ok("100% train accuracy at epoch " +
                         std::to_string(e.epoch));
  return Outcome::bad("never reached 100% train accuracy in 200 epochs");
}

// ---- 6: dataset statistics -------------------------------------------------

Outcome criterion_table_stats(const Options& opt) {
  const char* names[] = {"mr", "R8", "R52", "ohsumed"};
  std::vector<std::string> found;
  for (const char* name : names)
    if (dataset_present(opt, name)) found.push_back(name);
  if (found.empty())
    return Outcome::off("no benchmark datasets under --data-dir");

  std::string verified;
  for (const std::string& name : found) {
    ExperimentConfig c;
    c.dataset = name;
    c.data_dir = opt.data_dir;
    c.out_dir = "";
    c.verify = true;
    try {
      run_stats(c);
    } catch (const Error& e) {
      return Outcome::bad(std::string(e.what()));
    }
    if (!verified.empty()) verified += ", ";
    verified += name;
  }
  if (found.size() < 4)
    return Outcome::ok("verified " + verified + " (others not present)");
  return Outcome::ok("all cells match for " + verified);
}

// ---- 7/8: benchmark reproduction --------------------------------------------

ExperimentConfig benchmark_config(const Options& opt, const std::string& name) {
  ExperimentConfig c;
  c.dataset = name;
  c.data_dir = opt.data_dir;
  c.out_dir = "acceptance_out";
  c.embeddings_path = opt.glove;
  c.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  c.hyper = HyperParams{};  // paper defaults: lr 0.01, dropout 0.5, window 3
  return c;
}

Outcome criterion_mr(const Options& opt) {
  if (!dataset_present(opt, "mr")) return Outcome::off("mr dataset not present");
  if (!glove_present(opt)) return Outcome::off("embedding file not present");
  ExperimentConfig c = benchmark_config(opt, "mr");
  RunSummary s = run_full(c);
  const double pct = 100.0 * s.mean_accuracy;
  if (pct < 78.3 || pct > 81.3)
    return Outcome::bad("mean accuracy " + fmt(pct, 2) +
                        "% outside [78.3, 81.3]");
  return Outcome::ok("mean " + fmt(pct, 2) + "% +/- " +
                     fmt(100.0 * s.std_accuracy, 2) + " over 10 seeds");
}

Outcome criterion_r8(const Options& opt) {
  if (!dataset_present(opt, "R8") && !dataset_present(opt, "r8"))
    return Outcome::off("R8 dataset not present");
  if (!glove_present(opt)) return Outcome::off("embedding file not present");
  ExperimentConfig c =
      benchmark_config(opt, dataset_present(opt, "R8") ? "R8" : "r8");
  RunSummary s = run_full(c);
  const double pct = 100.0 * s.mean_accuracy;
  if (pct < 97.0) return Outcome::bad("mean accuracy " + fmt(pct, 2) + "% < 97.0");
  return Outcome::ok("mean " + fmt(pct, 2) + "% +/- " +
                     fmt(100.0 * s.std_accuracy, 2) + " over 10 seeds");
}

// ---- 9: inductive protocol ---------------------------------------------------

Outcome criterion_inductive(const Options& opt) {
  if (!dataset_present(opt, "mr")) return Outcome::off("mr dataset not present");
  if (!glove_present(opt)) return Outcome::off("embedding file not present");
  ExperimentConfig c = benchmark_config(opt, "mr");
  c.kind = ExperimentKind::inductive;
  c.docs_per_class = 20;
  c.seeds = {1};
  InductiveResult r = run_inductive(c);
  std::string detail = "vocab " + std::to_string(r.words_in_training) +
                       ", new test words " + std::to_string(r.new_words_in_test) +
                       ", acc " + fmt(100.0 * r.mean_accuracy, 2) + "%";
  if (std::abs(double(r.words_in_training) - 465.0) > 46.5)
    return Outcome::bad(detail + "; vocabulary outside 465 +/- 10%");
  if (std::abs(double(r.new_words_in_test) - 18299.0) > 1829.9)
    return Outcome::bad(detail + "; new-word count outside 18299 +/- 10%");
  if (r.mean_accuracy <= 0.58) return Outcome::bad(detail + "; accuracy <= 58%");
  return Outcome::ok(detail);
}

// ---- 10: sensitivity trends ---------------------------------------------------

Outcome criterion_sensitivity(const Options& opt) {
  // density monotonicity is invariant-backed and always verifiable
  {
    testsupport::TempDir dir("accept_sweep");
    testsupport::write_dataset(dir.str(), "toy", testsupport::toy_docs(30, 0, 6));
    ExperimentConfig c;
    c.dataset = "toy";
    c.data_dir = dir.str();
    c.out_dir = dir.str() + "/out";
    c.remove_stopwords = false;
    c.kind = ExperimentKind::sweep;
    c.sweep_param = "window";
    c.sweep_values = {2, 3, 4, 5};
    c.seeds = {1};
    c.hyper.input_dim = 6;
    c.hyper.hidden = 8;
    c.hyper.batch_size = 16;
    c.hyper.max_epochs = 2;
    c.hyper.patience = 2;
    c.hyper.steps = 1;
    SweepResult s = run_sweep(c);
    for (size_t i = 1; i < s.entries.size(); ++i)
      if (s.entries[i].mean_density < s.entries[i - 1].mean_density)
        return Outcome::bad("density decreased with a wider window");
  }

  if (!dataset_present(opt, "mr") || !glove_present(opt))
    return Outcome::ok(
        "density monotone on synthetic corpus; steps sweep skipped "
        "(mr/embeddings not present)");

  ExperimentConfig c = benchmark_config(opt, "mr");
  c.kind = ExperimentKind::sweep;
  c.sweep_param = "steps";
  c.sweep_values = {1, 2, 3, 4};
  c.seeds = {1};
  SweepResult s = run_sweep(c);
  size_t best = 0;
  for (size_t i = 1; i < s.entries.size(); ++i)
    if (s.entries[i].mean_accuracy > s.entries[best].mean_accuracy) best = i;
  if (s.entries[best].value == 4)
    return Outcome::bad("peak accuracy at the maximum tested step");
  std::string accs;
  for (const auto& e : s.entries) {
    if (!accs.empty()) accs += " ";
    accs += fmt(100.0 * e.mean_accuracy, 2);
  }
  return Outcome::ok("density monotone; steps accuracy [" + accs + "], peak at " +
                     std::to_string(s.entries[best].value));
}

// ---- 11: reproducibility -------------------------------------------------------

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_determinism(const Options&) {
  testsupport::TempDir dir("accept_det");
  testsupport::write_dataset(dir.str(), "toy", testsupport::toy_docs(10, 0, 4));
  ExperimentConfig c;
  c.dataset = "toy";
  c.data_dir = dir.str();
  c.out_dir = dir.str() + "/out";
  c.remove_stopwords = false;
  c.hyper.input_dim = 6;
  c.hyper.hidden = 8;
  c.hyper.batch_size = 8;
  c.hyper.max_epochs = 3;
  c.hyper.patience = 3;
  c.hyper.steps = 1;
  c.hyper.dropout_rate = 0.5;
  c.seeds = {1, 2};

  run_full(c);
  const std::string j1 = slurp(c.out_dir + "/toy_full_results.json");
  const std::string r1 = slurp(c.out_dir + "/toy_full_results.csv");
  const std::string e1 = slurp(c.out_dir + "/toy_full_epochs.csv");
  run_full(c);
  if (slurp(c.out_dir + "/toy_full_results.json") != j1)
    return Outcome::bad("results JSON differs between identical runs");
  if (slurp(c.out_dir + "/toy_full_results.csv") != r1)
    return Outcome::bad("results CSV differs between identical runs");
  if (slurp(c.out_dir + "/toy_full_epochs.csv") != e1)
    return Outcome::bad("epoch CSV differs between identical runs");

  ExperimentConfig cs = c;
  cs.kind = ExperimentKind::sweep;
  cs.sweep_param = "window";
  cs.sweep_values = {2, 3};
  cs.seeds = {1};
  run_sweep(cs);
  const std::string s1 = slurp(c.out_dir + "/toy_sweep_window.csv");
  run_sweep(cs);
  if (slurp(c.out_dir + "/toy_sweep_window.csv") != s1)
    return Outcome::bad("sweep CSV differs between identical runs");

  return Outcome::ok("byte-identical JSON/CSV over repeated runs");
}

struct Criterion {
  int number;
  const char* name;
  Outcome (*fn)(const Options&);
  double time_limit = 0.0;  // seconds; 0 = none stated
};

const Criterion kCriteria[] = {
    {1, "graph-construction oracle", criterion_graph_oracle, 10.0},
    {2, "gradient check vs finite differences", criterion_gradient_check, 60.0},
    {3, "forward matches scalar reference", criterion_forward_oracle},
    {4, "invariance suite", criterion_invariances},
    {5, "toy corpus overfit", criterion_toy_overfit, 30.0},
    {6, "benchmark statistics verification", criterion_table_stats},
    {7, "MR accuracy reproduction", criterion_mr},
    {8, "R8 accuracy reproduction", criterion_r8},
    {9, "inductive low-resource protocol", criterion_inductive},
    {10, "sensitivity trends", criterion_sensitivity},
    {11, "byte-identical reproducibility", criterion_determinism},
};

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  if (const char* env = std::getenv("TEXTING_DATA_DIR")) opt.data_dir = env;
  if (const char* env = std::getenv("TEXTING_GLOVE")) opt.glove = env;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--data-dir" && i + 1 < argc) opt.data_dir = argv[++i];
    else if (arg == "--glove" && i + 1 < argc) opt.glove = argv[++i];
    else if (arg == "--only" && i + 1 < argc) {
      std::istringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) opt.only.insert(std::stoi(tok));
    } else {
      std::fprintf(stderr,
                   "usage: acceptance [--data-dir DIR] [--glove FILE] "
                   "[--only N,M,...]\n");
      return 2;
    }
  }

  int failures = 0;
  for (const Criterion& c : kCriteria) {
    if (!opt.only.empty() && !opt.only.count(c.number)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.fn(opt);
    } catch (const std::exception& e) {
      outcome = Outcome::bad(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const char* status = outcome.status == Outcome::pass ? "PASS"
                         : outcome.status == Outcome::fail ? "FAIL"
                                                           : "SKIP";
    if (outcome.status == Outcome::fail) ++failures;
    std::printf("[%2d] %-40s %s  (%.1fs)%s%s\n", c.number, c.name, status, secs,
                outcome.detail.empty() ? "" : "  - ", outcome.detail.c_str());
  }
  if (failures > 0) {
    std::printf("%d criterion(s) FAILED\n", failures);
    return 1;
  }
  return 0;
}
