#include "sead/noising.hpp"

#include <algorithm>
#include <numeric>

#include "sead/text.hpp"

namespace sead {

namespace {

double draw_unit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  return d(rng);
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::mt19937_64 derive_rng(uint64_t master_seed, uint64_t stream,
                           uint64_t index) {
  uint64_t s = splitmix64(master_seed ^ splitmix64(stream * 0x100000001b3ULL ^
                                                   splitmix64(index)));
  return std::mt19937_64(s);
}

ErosionOutcome erode(const Schema& schema, const SqlQuery& sql,
                     const NoiseConfig& cfg, std::mt19937_64& rng,
                     const ForeignColumnSampler& foreign) {
  const int n = schema.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // A fully zero-noise config must reproduce the clean instance exactly, so
  // the content permutation only runs when some noise is active.
  if (cfg.p_drop > 0 || cfg.p_add > 0) std::shuffle(order.begin(), order.end(), rng);

  // Survivors of the removal pass, as original indices in permuted order.
  std::vector<int> kept;
  for (int old_index : order) {
    if (draw_unit(rng) >= cfg.p_drop) kept.push_back(old_index);
  }

  std::optional<Column> added;
  size_t insert_at = 0;
  if (cfg.p_add > 0 && draw_unit(rng) < cfg.p_add && foreign) {
    added = foreign(rng);
    if (added) {
      std::uniform_int_distribution<size_t> d(0, kept.size());
      insert_at = d(rng);
    }
  }

  ErosionOutcome out;
  out.index_map.assign(n, kRemovedColumn);
  out.eroded_schema.table_id = schema.table_id;
  int next_index = 0;
  for (size_t slot = 0; slot <= kept.size(); ++slot) {
    if (added && slot == insert_at) {
      Column col = *added;
      col.index = next_index++;
      out.eroded_schema.columns.push_back(std::move(col));
    }
    if (slot == kept.size()) break;
    Column col = schema.columns[kept[slot]];
    col.index = next_index;
    out.index_map[kept[slot]] = next_index;
    ++next_index;
    out.eroded_schema.columns.push_back(std::move(col));
  }

  auto remap = [&](int old_index) {
    if (old_index == kUnknownColumn) return kUnknownColumn;
    int mapped = out.index_map[old_index];
    return mapped == kRemovedColumn ? kUnknownColumn : mapped;
  };
  SqlQuery remapped = sql;
  remapped.select_column = remap(sql.select_column);
  for (Condition& cond : remapped.conditions) cond.column = remap(cond.column);
  out.modified_sql = serialize_sql(remapped, out.eroded_schema);
  return out;
}

std::vector<TokenSpan> find_column_spans(const std::vector<std::string>& tokens,
                                         const Schema& schema) {
  std::vector<std::vector<std::string>> names;
  for (const Column& col : schema.columns) {
    std::vector<std::string> name;
    for (const std::string& w : col.name) name.push_back(lower(w));
    names.push_back(std::move(name));
  }
  // Longest names first so multi-word mentions win over their prefixes.
  std::sort(names.begin(), names.end(),
            [](const auto& a, const auto& b) { return a.size() > b.size(); });

  std::vector<TokenSpan> spans;
  size_t i = 0;
  while (i < tokens.size()) {
    size_t matched = 0;
    for (const auto& name : names) {
      if (name.empty() || i + name.size() > tokens.size()) continue;
      bool ok = true;
      for (size_t k = 0; k < name.size(); ++k) {
        if (lower(tokens[i + k]) != name[k]) {
          ok = false;
          break;
        }
      }
      if (ok) {
        matched = name.size();
        break;
      }
    }
    if (matched) {
      spans.push_back(TokenSpan{i, matched});
      i += matched;
    } else {
      ++i;
    }
  }
  return spans;
}

std::vector<std::string> shuffle_entity_spans(
    const std::vector<std::string>& tokens, const std::vector<TokenSpan>& spans,
    std::mt19937_64& rng) {
  if (spans.size() < 2) return tokens;
  std::vector<int> order(spans.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::string> out;
  out.reserve(tokens.size());
  size_t pos = 0;
  for (size_t s = 0; s < spans.size(); ++s) {
    while (pos < spans[s].begin) out.push_back(tokens[pos++]);
    const TokenSpan& src = spans[order[s]];
    for (size_t k = 0; k < src.length; ++k) {
      out.push_back(tokens[src.begin + k]);
    }
    pos += spans[s].length;
  }
  while (pos < tokens.size()) out.push_back(tokens[pos++]);
  return out;
}

std::vector<std::string> shuffle_entities(const std::vector<std::string>& tokens,
                                          std::mt19937_64& rng) {
  std::vector<TokenSpan> spans;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (is_col_or_unk_token(tokens[i])) spans.push_back(TokenSpan{i, 1});
  }
  return shuffle_entity_spans(tokens, spans, rng);
}

std::vector<std::string> apply_infilling(const std::vector<std::string>& tokens,
                                         std::mt19937_64& rng, double rate,
                                         double mean_span) {
  if (tokens.empty() || rate <= 0) return tokens;
  const double p_start = rate / std::max(1.0, mean_span);
  std::poisson_distribution<int> span_dist(mean_span);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  size_t i = 0;
  while (i < tokens.size()) {
    if (draw_unit(rng) < p_start) {
      size_t len = static_cast<size_t>(std::max(1, span_dist(rng)));
      len = std::min(len, tokens.size() - i);
      out.push_back(tok::kMask);
      i += len;
    } else {
      out.push_back(tokens[i++]);
    }
  }
  return out;
}

TrainingInstance make_instance(const ExampleRecord& record,
                               const Schema& schema, const NoiseConfig& cfg,
                               std::mt19937_64& rng,
                               const ForeignColumnSampler& foreign) {
  std::vector<std::string> src = tokenize_text(record.question);
  std::vector<std::string> tgt = serialize_sql(record.gold, schema);
  Schema schema_out = schema;

  if (cfg.erosion_enabled) {
    ErosionOutcome erosion = erode(schema, record.gold, cfg, rng, foreign);
    tgt = std::move(erosion.modified_sql);
    schema_out = std::move(erosion.eroded_schema);
  }

  bool tgt_is_sql = true;
  const bool has_self_supervision = cfg.shuffle_enabled || cfg.infilling_enabled;
  if (has_self_supervision && draw_unit(rng) < cfg.p_shuffle) {
    if (draw_unit(rng) < cfg.p_swap) {
      std::swap(src, tgt);
      tgt_is_sql = false;
    }
    std::vector<std::string> corrupted = tgt;
    if (cfg.shuffle_enabled) {
      if (tgt_is_sql) {
        corrupted = shuffle_entities(corrupted, rng);
      } else {
        corrupted = shuffle_entity_spans(
            corrupted, find_column_spans(corrupted, schema), rng);
      }
    }
    if (cfg.infilling_enabled) {
      corrupted =
          apply_infilling(corrupted, rng, cfg.infill_rate, cfg.infill_mean_span);
    }
    src = std::move(corrupted);
  }

  TrainingInstance instance;
  instance.direction = tgt_is_sql ? Direction::ToSql : Direction::ToNl;
  instance.source.push_back(tgt_is_sql ? tok::kToSql : tok::kToNl);
  instance.source.insert(instance.source.end(), src.begin(), src.end());
  std::vector<std::string> schema_tokens = serialize_schema(schema_out);
  instance.source.insert(instance.source.end(), schema_tokens.begin(),
                         schema_tokens.end());
  instance.target = std::move(tgt);
  return instance;
}

const std::string& direction_name(Direction d) {
  static const std::string to_sql = "to_sql", to_nl = "to_nl";
  return d == Direction::ToSql ? to_sql : to_nl;
}

std::optional<Direction> direction_from_name(const std::string& name) {
  if (name == "to_sql") return Direction::ToSql;
  if (name == "to_nl") return Direction::ToNl;
  return std::nullopt;
}

}  // namespace sead
