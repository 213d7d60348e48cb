#include "sead/train.hpp"

namespace sead {

EncodedSample encode_instance(const TrainingInstance& inst,
                              const Vocabulary& vocab, bool use_pointer) {
  EncodedSample out;
  out.src_ids = vocab.encode(inst.source);
  out.tgt_in.reserve(inst.target.size() + 1);
  out.tgt_in.push_back(vocab.bos_id);
  for (const auto& t : inst.target) out.tgt_in.push_back(vocab.id_or_unk(t));
  PointerAlignment align =
      align_targets(inst, vocab, use_pointer, /*strict=*/false);
  out.fallbacks = align.fallback_count;
  out.supervision = std::move(align.supervision);
  out.supervision.push_back({vocab.eos_id});
  return out;
}

TrainingInstance clean_instance(const ExampleRecord& record,
                                const Schema& schema) {
  // a zero-noise config draws nothing from the rng
  std::mt19937_64 rng(0);
  return make_instance(record, schema, NoiseConfig::none(), rng);
}

ForeignColumnSampler make_foreign_sampler(const TableMap& tables,
                                          const std::string& exclude_table_id) {
  // captures tables by reference; the map must outlive the sampler
  return [&tables, exclude_table_id](std::mt19937_64& rng) {
    return sample_foreign_column(rng, tables, exclude_table_id);
  };
}

}  // namespace sead
