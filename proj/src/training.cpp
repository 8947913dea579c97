#include "texting/training.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

namespace texting {

std::string channel_name(Channel c) {
  return c == Channel::local ? "local" : "global";
}

Channel parse_channel(std::string_view name) {
  if (name == "local") return Channel::local;
  if (name == "global") return Channel::global;
  fail("bad_config", "unknown channel '" + std::string(name) + "'");
}

namespace {

void write_epoch_csv(const std::string& path, const TrainReport& report) {
  std::ofstream out(path);
  if (!out) fail("io_error", "cannot write '" + path + "'");
  out << "epoch,train_loss,val_acc\n";
  char buf[128];
  for (const EpochRecord& e : report.epochs) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g\n", e.epoch, e.train_loss,
                  e.val_accuracy);
    out << buf;
  }
}

}  // namespace

TrainResult<float> train_on_graphs(
    const std::vector<const DocGraph<float>*>& train_graphs,
    const std::vector<const DocGraph<float>*>& val_graphs,
    const std::vector<const DocGraph<float>*>& test_graphs, int classes,
    const HyperParams& hyper, const TrainOptions& options) {
  if (train_graphs.empty()) fail("empty_train", "no training graphs");
  if (val_graphs.empty()) fail("empty_val", "no validation graphs");

  const auto t0 = std::chrono::steady_clock::now();

  const int input_dim = train_graphs[0]->feature_dim();
  ParamSet<float> params = ParamSet<float>::create(input_dim, hyper.hidden,
                                                   classes, hyper.use_projection);
  params.init_xavier(hyper.seed);
  AdamState<float> adam = AdamState<float>::like(params);

  TrainResult<float> result;
  result.report.seed = hyper.seed;
  ParamSet<float> best_params = params;
  double best_val = -1.0;
  int best_epoch = 0;
  int stale_epochs = 0;

  Rng shuffle_rng(mix_seed(hyper.seed, 0x5875ull));
  std::vector<size_t> order(train_graphs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  const int batch_size = std::max(1, hyper.batch_size);

  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    long seen = 0;
    int batch_index = 0;
    for (size_t start = 0; start < order.size(); start += size_t(batch_size)) {
      const size_t end = std::min(order.size(), start + size_t(batch_size));
      std::vector<const DocGraph<float>*> chunk;
      chunk.reserve(end - start);
      for (size_t k = start; k < end; ++k)
        chunk.push_back(train_graphs[order[k]]);

      GraphBatch<float> batch = batch_graphs(chunk);
      DropoutState dropout;
      dropout.seed = hyper.seed;
      dropout.stream = (uint64_t(epoch) << 32) | uint64_t(batch_index);
      ForwardTrace<float> trace =
          forward(batch, params, hyper, Mode::train, dropout);
      GradientSet<float> grads = backward(trace, batch, params);
      if (hyper.grad_clip > 0.0) {
        const double norm = global_grad_norm(grads);
        if (norm > hyper.grad_clip)
          scale_gradients(grads, hyper.grad_clip / norm);
      }
      adam_step(params, grads, adam, hyper.learning_rate);

      loss_sum += double(trace.loss) * double(end - start);
      seen += long(end - start);
      ++batch_index;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / double(seen);
    rec.val_accuracy = evaluate(params, val_graphs, hyper);
    if (options.track_train_accuracy)
      rec.train_accuracy = evaluate(params, train_graphs, hyper);
    result.report.epochs.push_back(rec);

    if (options.verbose)
      std::fprintf(stderr, "epoch %3d  train_loss %.4f  val_acc %.4f\n", epoch,
                   rec.train_loss, rec.val_accuracy);

    if (rec.val_accuracy > best_val) {
      best_val = rec.val_accuracy;
      best_epoch = epoch;
      best_params = params;
      stale_epochs = 0;
      if (!options.checkpoint_prefix.empty())
        save_checkpoint(options.checkpoint_prefix, params, hyper);
    } else if (++stale_epochs > hyper.patience) {
      break;
    }
  }

  result.report.best_epoch = best_epoch;
  result.report.best_val_accuracy = best_val;
  result.report.test_accuracy =
      test_graphs.empty() ? 0.0 : evaluate(best_params, test_graphs, hyper);
  result.params = std::move(best_params);

  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  if (!options.epoch_csv.empty()) write_epoch_csv(options.epoch_csv, result.report);
  return result;
}

TrainResult<float> train(const Corpus& corpus, const EmbeddingTable& embeddings,
                         const HyperParams& hyper, Channel channel,
                         const TrainOptions& options) {
  const std::vector<DocGraph<float>> graphs =
      build_channel_graphs<float>(corpus, embeddings, hyper, channel);

  std::vector<const DocGraph<float>*> train_g, val_g, test_g;
  for (size_t i = 0; i < corpus.documents.size(); ++i) {
    switch (corpus.documents[i].split) {
      case Split::train: train_g.push_back(&graphs[i]); break;
      case Split::val: val_g.push_back(&graphs[i]); break;
      case Split::test: test_g.push_back(&graphs[i]); break;
    }
  }
  return train_on_graphs(train_g, val_g, test_g, corpus.class_count(), hyper,
                         options);
}

}  // namespace texting
