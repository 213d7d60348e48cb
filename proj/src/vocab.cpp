#include "sead/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "sead/sql.hpp"
#include "sead/text.hpp"

namespace sead {

namespace {

void push_token(Vocabulary& v, const std::string& tok, TokenPartition part) {
  if (v.ids.count(tok)) return;  // first partition wins
  v.ids.emplace(tok, v.size());
  v.tokens.push_back(tok);
  v.partitions.push_back(part);
}

void bind_special_ids(Vocabulary& v) {
  v.pad_id = v.id_or_unk(tok::kPad);
  v.bos_id = v.id_or_unk(tok::kBos);
  v.eos_id = v.id_or_unk(tok::kEos);
  v.unk_id = *v.id_of(tok::kUnk);
  v.to_sql_id = v.id_or_unk(tok::kToSql);
  v.to_nl_id = v.id_or_unk(tok::kToNl);
  v.mask_id = v.id_or_unk(tok::kMask);
  v.backtick_id = v.id_or_unk(tok::kBacktick);
}

void push_specials(Vocabulary& v) {
  push_token(v, tok::kPad, TokenPartition::Special);
  push_token(v, tok::kBos, TokenPartition::Special);
  push_token(v, tok::kEos, TokenPartition::Special);
  push_token(v, tok::kUnk, TokenPartition::Special);
  push_token(v, tok::kToSql, TokenPartition::Special);
  push_token(v, tok::kToNl, TokenPartition::Special);
  push_token(v, tok::kMask, TokenPartition::Special);
  push_token(v, tok::kBacktick, TokenPartition::Special);
  for (int i = 0; i < kNumColTokens; ++i)
    push_token(v, col_token(i), TokenPartition::Special);
}

char partition_tag(TokenPartition p) {
  switch (p) {
    case TokenPartition::Special: return 'S';
    case TokenPartition::SqlKeyword: return 'K';
    case TokenPartition::ColumnWord: return 'C';
    case TokenPartition::CorpusWord: return 'W';
  }
  return '?';
}

TokenPartition partition_from_tag(char c) {
  switch (c) {
    case 'S': return TokenPartition::Special;
    case 'K': return TokenPartition::SqlKeyword;
    case 'C': return TokenPartition::ColumnWord;
    case 'W': return TokenPartition::CorpusWord;
  }
  throw std::runtime_error(std::string("bad vocabulary partition tag '") + c + "'");
}

}  // namespace

Vocabulary build_vocab(const CorpusSplit& corpus, const TableMap& tables,
                       int min_freq) {
  if (corpus.records.empty()) throw EmptyCorpusError();

  Vocabulary v;
  push_specials(v);
  for (const auto& kw : sql_keyword_tokens())
    push_token(v, kw, TokenPartition::SqlKeyword);

  std::set<std::string> col_words;
  for (const auto& [id, table] : tables)
    for (const auto& name : table.header)
      for (const auto& w : tokenize_text(name)) col_words.insert(w);
  for (const auto& w : col_words) push_token(v, w, TokenPartition::ColumnWord);

  std::map<std::string, int64_t> freq;
  for (const auto& rec : corpus.records) {
    for (const auto& w : tokenize_text(rec.question)) ++freq[w];
    for (const auto& cond : rec.gold.conditions)
      for (const auto& w : tokenize_text(cond.value)) ++freq[w];
  }
  std::vector<std::pair<std::string, int64_t>> by_freq(freq.begin(), freq.end());
  std::stable_sort(by_freq.begin(), by_freq.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  for (const auto& [w, n] : by_freq)
    if (n >= min_freq) push_token(v, w, TokenPartition::CorpusWord);

  bind_special_ids(v);
  return v;
}

void save_vocab(const std::string& path, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open vocabulary file for writing: " + path);
  for (int i = 0; i < vocab.size(); ++i)
    out << vocab.tokens[i] << '\t' << partition_tag(vocab.partitions[i]) << '\n';
}

Vocabulary load_vocab(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  Vocabulary v;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab + 2 != line.size())
      throw std::runtime_error("malformed vocabulary line " + std::to_string(line_no));
    std::string tok = line.substr(0, tab);
    if (v.ids.count(tok))
      throw std::runtime_error("duplicate vocabulary token at line " + std::to_string(line_no));
    push_token(v, tok, partition_from_tag(line[tab + 1]));
  }
  if (v.tokens.empty()) throw std::runtime_error("empty vocabulary file: " + path);
  if (!v.ids.count(tok::kUnk))
    throw std::runtime_error("vocabulary file lacks " + std::string(tok::kUnk));
  bind_special_ids(v);
  return v;
}

PointerAlignment align_targets(const TrainingInstance& instance,
                               const Vocabulary& vocab, bool use_pointer,
                               bool strict) {
  PointerAlignment out;
  out.supervision.reserve(instance.target.size());
  const int nv = vocab.size();
  for (size_t t = 0; t < instance.target.size(); ++t) {
    const std::string& tok = instance.target[t];
    std::vector<int> sup;
    if (auto id = vocab.id_of(tok)) sup.push_back(*id);
    if (use_pointer) {
      for (size_t s = 0; s < instance.source.size(); ++s)
        if (instance.source[s] == tok) sup.push_back(nv + static_cast<int>(s));
    }
    if (sup.empty()) {
      if (strict) throw UnsupervisablePositionError(t, tok);
      sup.push_back(vocab.unk_id);
      ++out.fallback_count;
    }
    out.supervision.push_back(std::move(sup));
  }
  return out;
}

bool values_pointer_reachable(const ExampleRecord& record, const Schema& schema) {
  std::set<std::string> seen;
  for (const auto& w : tokenize_text(record.question)) seen.insert(w);
  for (const auto& w : serialize_schema(schema)) seen.insert(w);
  for (const auto& cond : record.gold.conditions)
    for (const auto& w : tokenize_text(cond.value))
      if (!seen.count(w)) return false;
  return true;
}

}  // namespace sead
