#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sead/bleu.hpp"
#include "sead/decode.hpp"
#include "sead/metrics.hpp"
#include "sead/text.hpp"
#include "sead/train.hpp"

namespace sead {

enum class DecodeMode { Greedy, Beam, EgCs, EgAcs };

std::optional<DecodeMode> decode_mode_from_name(const std::string& name);
const std::string& decode_mode_name(DecodeMode mode);

struct EvalOptions {
  DecodeMode mode = DecodeMode::Greedy;
  int beam = 4;  // plain beam width (Beam mode)
  EgConfig eg;   // released-slot policy (EgCs / EgAcs modes)
  int max_len = 96;
};

// Decodes every record of the split and scores it against gold. Records with
// an unresolvable table are skipped. BLEU is corpus-level over the decoded
// token streams vs the serialized gold queries.
template <typename Sc>
EvalReport evaluate_split(const TransformerT<Sc>& model, const Vocabulary& vocab,
                          const CorpusSplit& split, const TableMap& tables,
                          const EvalOptions& opts = {}) {
  EvalReport rep;
  std::vector<std::vector<std::string>> cands, refs;
  size_t index = 0;
  for (const auto& rec : split.records) {
    auto it = tables.find(rec.table_id);
    if (it == tables.end()) {
      ++index;
      continue;
    }
    const Table& table = it->second;
    Schema schema = schema_of(table);
    TrainingInstance inst = clean_instance(rec, schema);

    std::vector<std::string> pred_tokens;
    std::string note;
    switch (opts.mode) {
      case DecodeMode::Greedy:
        pred_tokens = greedy_decode(model, vocab, inst.source, opts.max_len).tokens;
        break;
      case DecodeMode::Beam: {
        auto ranked =
            beam_search(model, vocab, inst.source, opts.beam, opts.max_len);
        if (!ranked.empty()) pred_tokens = std::move(ranked.front().tokens);
        break;
      }
      case DecodeMode::EgCs:
      case DecodeMode::EgAcs: {
        EgConfig eg = opts.eg;
        eg.agg_drop = opts.mode == DecodeMode::EgAcs;
        eg.max_len = opts.max_len;
        EgResult r = eg_decode(model, vocab, inst.source, schema, table, eg);
        pred_tokens = std::move(r.tokens);
        note = r.status == EgStatus::Validated
                   ? "validated"
                   : (r.status == EgStatus::Degraded ? "degraded"
                                                     : "no_parseable");
        break;
      }
    }

    ExampleVerdict v;
    v.index = index++;
    v.prediction = join_tokens(pred_tokens);
    v.decode_note = note;
    auto parsed = parse_sql(pred_tokens, schema);
    if (parsed.ok()) {
      v.parsed = true;
      v.lf = acc_lf(*parsed.query, rec.gold);
      v.ex = acc_ex(*parsed.query, rec.gold, table);
      v.components = component_scores(*parsed.query, rec.gold);
    }
    rep.verdicts.push_back(std::move(v));
    cands.push_back(std::move(pred_tokens));
    refs.push_back(serialize_sql(rec.gold, schema));
  }
  rep.recompute();
  rep.bleu = corpus_bleu(cands, refs);
  return rep;
}

// ---- ablation ---------------------------------------------------------------

struct AblationRow {
  std::string name;
  bool pointer = true;
  NoiseConfig noise;
};

// The study grid: plain seq2seq, +pointer, +infilling, each denoising
// objective alone, and the full pipeline.
std::vector<AblationRow> default_ablation_rows();

struct AblationCell {
  uint64_t seed = 0;
  double acc_lf = 0;
  double acc_ex = 0;
};

struct AblationResult {
  std::string name;
  std::vector<AblationCell> cells;
  double mean_lf = 0;
  double mean_ex = 0;
  std::string error;  // non-empty when this row's training failed
};

std::string ablation_table(const std::vector<AblationResult>& rows);

// Trains one model per (row, seed) with shared data and shared seeds, then
// greedy-evaluates on the eval split. Per-row failures are recorded, not
// propagated.
template <typename Sc>
std::vector<AblationResult> run_ablation(
    const std::vector<AblationRow>& rows, const std::vector<uint64_t>& seeds,
    const TableMap& tables, const CorpusSplit& train, const CorpusSplit& eval,
    const Vocabulary& vocab, const ModelConfig& model_cfg,
    const TrainConfig& base, std::ostream* log = nullptr) {
  std::vector<AblationResult> out;
  for (const AblationRow& row : rows) {
    AblationResult res;
    res.name = row.name;
    try {
      for (uint64_t seed : seeds) {
        ModelConfig mc = model_cfg;
        mc.pointer_enabled = row.pointer;
        TrainConfig tc = base;
        tc.seed = seed;
        tc.use_pointer = row.pointer;
        tc.noise = row.noise;
        TransformerT<Sc> model(mc, vocab.size(), seed);
        train_model(model, vocab, train, eval, tables, tc, log);
        EvalReport rep = evaluate_split(model, vocab, eval, tables);
        res.cells.push_back({seed, rep.acc_lf, rep.acc_ex});
        if (log) {
          (*log) << row.name << " seed " << seed << " acc_lf " << rep.acc_lf
                 << " acc_ex " << rep.acc_ex << "\n";
        }
      }
      for (const auto& c : res.cells) {
        res.mean_lf += c.acc_lf;
        res.mean_ex += c.acc_ex;
      }
      if (!res.cells.empty()) {
        res.mean_lf /= res.cells.size();
        res.mean_ex /= res.cells.size();
      }
    } catch (const std::exception& e) {
      res.error = e.what();
    }
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace sead
