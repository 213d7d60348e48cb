#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sead/bleu.hpp"
#include "sead/decode.hpp"
#include "sead/noising.hpp"
#include "sead/store.hpp"
#include "sead/transformer.hpp"
#include "sead/vocab.hpp"

namespace sead {

struct TrainConfig {
  int epochs = 40;
  int batch_size = 16;
  int patience = 5;  // epochs without dev improvement; <= 0 disables
  uint64_t seed = 1;
  bool use_pointer = true;  // must match the model's pointer switch
  NoiseConfig noise;
  nn::OptimConfig optim;
  int max_len = 96;   // decode bound for the dev metric
  int log_every = 0;  // batches between progress lines; 0 silences them
};

class DivergedLossError : public std::runtime_error {
 public:
  DivergedLossError(int epoch, int batch, double value)
      : std::runtime_error("non-finite loss " + std::to_string(value) +
                           " at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch)),
        epoch(epoch),
        batch(batch) {}
  int epoch, batch;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0;  // mean per-target-position nll
  double dev_bleu = 0;
  bool improved = false;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = -1;
  double best_dev_bleu = 0;
  size_t skipped_too_long = 0;  // sample-epoch events over the length bound
  int64_t steps = 0;
};

// Model-ready form of one training instance.
struct EncodedSample {
  std::vector<int> src_ids;
  std::vector<int> tgt_in;  // bos then target ids
  std::vector<std::vector<int>> supervision;  // one row per tgt_in entry
  size_t fallbacks = 0;
};

EncodedSample encode_instance(const TrainingInstance& inst,
                              const Vocabulary& vocab, bool use_pointer);

// Noise-free <2sql> formulation of a record (question in, gold SQL out).
TrainingInstance clean_instance(const ExampleRecord& record,
                                const Schema& schema);

ForeignColumnSampler make_foreign_sampler(const TableMap& tables,
                                          const std::string& exclude_table_id);

// Greedy-decode BLEU of the model against serialized gold targets.
template <typename Sc>
double dev_bleu(const TransformerT<Sc>& model, const Vocabulary& vocab,
                const CorpusSplit& split, const TableMap& tables, int max_len) {
  std::vector<std::vector<std::string>> cands, refs;
  for (const auto& rec : split.records) {
    auto it = tables.find(rec.table_id);
    if (it == tables.end()) continue;
    TrainingInstance inst = clean_instance(rec, schema_of(it->second));
    cands.push_back(greedy_decode(model, vocab, inst.source, max_len).tokens);
    refs.push_back(inst.target);
  }
  return corpus_bleu(cands, refs);
}

// Denoising training loop: per-sample noise is redrawn every epoch, gradients
// are accumulated over each batch and normalized by its target positions, and
// the best dev-BLEU parameters are restored at the end.
template <typename Sc>
TrainResult train_model(TransformerT<Sc>& model, const Vocabulary& vocab,
                        const CorpusSplit& train, const CorpusSplit& dev,
                        const TableMap& tables, const TrainConfig& cfg,
                        std::ostream* log = nullptr) {
  if (train.records.empty())
    throw std::invalid_argument("empty training split");
  if (model.config().pointer_enabled != cfg.use_pointer)
    throw std::invalid_argument(
        "pointer switch disagrees between model and train config");

  nn::AdamOptimizer<Sc> opt(cfg.optim);
  TrainResult res;
  std::vector<typename TransformerT<Sc>::M> best;
  double best_bleu = -1;
  int since_best = 0;
  const int max_pos = model.config().max_positions;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<size_t> order(train.records.size());
    std::iota(order.begin(), order.end(), size_t{0});
    {
      auto rng = derive_rng(cfg.seed, 3000 + epoch, 0);
      std::shuffle(order.begin(), order.end(), rng);
    }

    double epoch_loss = 0;
    int64_t epoch_tokens = 0;
    int batch_index = 0;
    for (size_t at = 0; at < order.size(); at += cfg.batch_size, ++batch_index) {
      std::vector<EncodedSample> batch;
      std::vector<size_t> batch_records;
      size_t end = std::min(order.size(), at + cfg.batch_size);
      for (size_t k = at; k < end; ++k) {
        const ExampleRecord& rec = train.records[order[k]];
        auto it = tables.find(rec.table_id);
        if (it == tables.end()) continue;
        auto noise_rng = derive_rng(cfg.seed, 1000 + epoch, order[k]);
        auto sampler = make_foreign_sampler(tables, rec.table_id);
        TrainingInstance inst = make_instance(rec, schema_of(it->second),
                                              cfg.noise, noise_rng, sampler);
        EncodedSample s = encode_instance(inst, vocab, cfg.use_pointer);
        if (s.src_ids.size() > static_cast<size_t>(max_pos) ||
            s.tgt_in.size() > static_cast<size_t>(max_pos)) {
          ++res.skipped_too_long;
          continue;
        }
        batch.push_back(std::move(s));
        batch_records.push_back(order[k]);
      }
      if (batch.empty()) continue;

      int64_t rows = 0;
      for (const auto& s : batch) rows += static_cast<int64_t>(s.tgt_in.size());
      model.params().zero_grads();
      double batch_loss = 0;
      for (size_t i = 0; i < batch.size(); ++i) {
        auto drop_rng = derive_rng(cfg.seed, 2000 + epoch, batch_records[i]);
        nn::Tape<Sc> tape;
        auto lg = model.build_loss(tape, batch[i].src_ids, batch[i].tgt_in,
                                   batch[i].supervision, &drop_rng);
        double lv = tape.value(lg.loss)(0, 0);
        if (!std::isfinite(lv)) throw DivergedLossError(epoch, batch_index, lv);
        batch_loss += lv;
        tape.backward(lg.loss, Sc(1.0 / double(rows)));
      }
      opt.step(model.params());
      epoch_loss += batch_loss;
      epoch_tokens += rows;
      if (log && cfg.log_every > 0 && batch_index % cfg.log_every == 0) {
        (*log) << "epoch " << epoch << " batch " << batch_index << " loss "
               << batch_loss / double(rows) << "\n";
      }
    }

    EpochStats st;
    st.epoch = epoch;
    st.train_loss = epoch_tokens ? epoch_loss / double(epoch_tokens) : 0;
    st.dev_bleu = dev.records.empty()
                      ? 0
                      : dev_bleu(model, vocab, dev, tables, cfg.max_len);
    st.improved = st.dev_bleu > best_bleu + 1e-9;
    if (st.improved) {
      best_bleu = st.dev_bleu;
      best = model.snapshot();
      res.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    res.history.push_back(st);
    if (log) {
      (*log) << "epoch " << epoch << " train_loss " << st.train_loss
             << " dev_bleu " << st.dev_bleu << (st.improved ? " *" : "")
             << "\n";
    }
    if (cfg.patience > 0 && since_best >= cfg.patience) break;
  }

  if (!best.empty()) model.restore(best);
  res.best_dev_bleu = std::max(best_bleu, 0.0);
  res.steps = opt.steps_taken();
  return res;
}

// Run directory layout: model.bin + vocab.txt.
template <typename Sc>
void save_run(const std::string& dir, const TransformerT<Sc>& model,
              const Vocabulary& vocab) {
  std::filesystem::create_directories(dir);
  model.save(dir + "/model.bin");
  save_vocab(dir + "/vocab.txt", vocab);
}

template <typename Sc>
std::pair<TransformerT<Sc>, Vocabulary> load_run(const std::string& dir) {
  return {TransformerT<Sc>::load(dir + "/model.bin"),
          load_vocab(dir + "/vocab.txt")};
}

}  // namespace sead
