#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sead/noising.hpp"
#include "sead/store.hpp"

namespace sead {

enum class TokenPartition { Special, SqlKeyword, ColumnWord, CorpusWord };

// Number of <coli> separator tokens reserved up front.
constexpr int kNumColTokens = 64;

class EmptyCorpusError : public std::runtime_error {
 public:
  EmptyCorpusError() : std::runtime_error("cannot build vocabulary: empty corpus") {}
};

class UnsupervisablePositionError : public std::runtime_error {
 public:
  explicit UnsupervisablePositionError(size_t pos, const std::string& token)
      : std::runtime_error("target position " + std::to_string(pos) +
                           " ('" + token + "') is out of vocabulary and absent from source"),
        position(pos) {}
  size_t position;
};

struct Vocabulary {
  std::vector<std::string> tokens;         // id -> token, ids dense 0..|V|-1
  std::vector<TokenPartition> partitions;  // id -> partition
  std::unordered_map<std::string, int> ids;

  int pad_id = -1, bos_id = -1, eos_id = -1, unk_id = -1;
  int to_sql_id = -1, to_nl_id = -1, mask_id = -1, backtick_id = -1;

  int size() const { return static_cast<int>(tokens.size()); }

  std::optional<int> id_of(const std::string& token) const {
    auto it = ids.find(token);
    if (it == ids.end()) return std::nullopt;
    return it->second;
  }

  int id_or_unk(const std::string& token) const {
    auto it = ids.find(token);
    return it == ids.end() ? unk_id : it->second;
  }

  std::vector<int> encode(const std::vector<std::string>& toks) const {
    std::vector<int> out;
    out.reserve(toks.size());
    for (const auto& t : toks) out.push_back(id_or_unk(t));
    return out;
  }
};

// Deterministic closed vocabulary: specials, SQL keywords, column words from
// the table headers, then corpus words at or above min_freq sorted by
// (frequency desc, token asc). Below-threshold words stay reachable through
// the pointer mechanism.
Vocabulary build_vocab(const CorpusSplit& corpus, const TableMap& tables,
                       int min_freq = 1);

// Plain token-per-line file with a partition annotation per line.
void save_vocab(const std::string& path, const Vocabulary& vocab);
Vocabulary load_vocab(const std::string& path);

struct PointerAlignment {
  // Per target position: supervision indices in the hybrid space
  // [0, |V| + |source|). The first |V| indices are vocabulary ids, the rest
  // are source positions offset by |V|.
  std::vector<std::vector<int>> supervision;
  size_t fallback_count = 0;  // positions mapped to <unk> in lenient mode
};

// Maps every target token to its vocabulary id (when in V) plus every source
// position holding an identical token. strict mode raises
// UnsupervisablePositionError when a position has neither; lenient mode maps
// it to <unk> and counts it. use_pointer=false restricts supervision to
// vocabulary ids.
PointerAlignment align_targets(const TrainingInstance& instance,
                               const Vocabulary& vocab, bool use_pointer = true,
                               bool strict = true);

// True when every condition value token of the gold query occurs in the
// question or the serialized schema (the pointer-reachability check done at
// ingestion time).
bool values_pointer_reachable(const ExampleRecord& record, const Schema& schema);

}  // namespace sead
