#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sead/sql.hpp"
#include "sead/store.hpp"

namespace sead {

struct NoiseConfig {
  double p_drop = 0.1;
  double p_add = 0.1;
  double p_shuffle = 0.3;
  double p_swap = 0.5;
  // Erosion (permute/remove/add) applies to every sample when enabled; the
  // switch exists for the shuffle-only ablation and for plain S2S training.
  bool erosion_enabled = true;
  bool shuffle_enabled = true;
  bool infilling_enabled = false;
  double infill_rate = 0.15;
  double infill_mean_span = 3.0;
  uint64_t seed = 0;

  // Plain S2S formulation: no noise at all.
  static NoiseConfig none() {
    NoiseConfig cfg;
    cfg.p_drop = cfg.p_add = cfg.p_shuffle = cfg.p_swap = 0.0;
    cfg.erosion_enabled = false;
    cfg.shuffle_enabled = false;
    cfg.infilling_enabled = false;
    return cfg;
  }
};

enum class Direction { ToSql, ToNl };

struct TrainingInstance {
  std::vector<std::string> source;  // prefix + query-side tokens + schema
  std::vector<std::string> target;
  Direction direction = Direction::ToSql;
};

// index_map entry for columns dropped by erosion.
constexpr int kRemovedColumn = -2;

struct ErosionOutcome {
  Schema eroded_schema;
  std::vector<int> index_map;  // old column index -> new index or kRemovedColumn
  std::vector<std::string> modified_sql;
};

using ForeignColumnSampler =
    std::function<std::optional<Column>(std::mt19937_64&)>;

// Permutes column contents, drops each with p_drop, inserts a foreign column
// with p_add. Separator tokens stay in ascending order over the result; the
// SQL column references are rewritten to the new slot tokens, with <unk>
// substituted for removed columns.
ErosionOutcome erode(const Schema& schema, const SqlQuery& sql,
                     const NoiseConfig& cfg, std::mt19937_64& rng,
                     const ForeignColumnSampler& foreign = nullptr);

struct TokenSpan {
  size_t begin = 0;
  size_t length = 0;
};

// Non-overlapping spans of tokens matching a schema column name
// (case-insensitive, longest match first, left to right).
std::vector<TokenSpan> find_column_spans(const std::vector<std::string>& tokens,
                                         const Schema& schema);

// Permutes the given entity spans in place; all other tokens keep their
// relative order. Fewer than two spans: unchanged.
std::vector<std::string> shuffle_entity_spans(
    const std::vector<std::string>& tokens, const std::vector<TokenSpan>& spans,
    std::mt19937_64& rng);

// Column-entity shuffle over a serialized SQL sequence: every <coli>/<unk>
// token is an entity slot.
std::vector<std::string> shuffle_entities(const std::vector<std::string>& tokens,
                                          std::mt19937_64& rng);

// Replaces random contiguous spans (Poisson mean span length, ~rate of all
// tokens) with single <mask> tokens.
std::vector<std::string> apply_infilling(const std::vector<std::string>& tokens,
                                         std::mt19937_64& rng,
                                         double rate = 0.15,
                                         double mean_span = 3.0);

// The per-sample noising pipeline: erosion, then the self-supervision branch
// gated by p_shuffle (optionally swapping source/target with p_swap), then
// the direction prefix and the schema segment.
TrainingInstance make_instance(const ExampleRecord& record,
                               const Schema& schema, const NoiseConfig& cfg,
                               std::mt19937_64& rng,
                               const ForeignColumnSampler& foreign = nullptr);

// Stable per-record rng derivation so parallel augmentation is order-free.
std::mt19937_64 derive_rng(uint64_t master_seed, uint64_t stream,
                           uint64_t index);

const std::string& direction_name(Direction d);
std::optional<Direction> direction_from_name(const std::string& name);

}  // namespace sead
