#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sead/executor.hpp"
#include "sead/sql.hpp"
#include "sead/transformer.hpp"
#include "sead/vocab.hpp"

namespace sead {

struct DecodedSeq {
  std::vector<std::string> tokens;  // surface form, no bos/eos
  double logprob = 0.0;
  bool ended = false;  // reached eos rather than the length bound
};

// One next-token option after pooling vocabulary and pointer mass that share
// a surface form. hybrid_index is the smallest contributing index, kept for
// deterministic tie-breaks.
struct SurfaceCandidate {
  std::string token;
  double prob = 0.0;
  int hybrid_index = 0;
};

// Candidates sorted by (prob desc, hybrid_index asc). pad and bos never
// appear; eos does.
std::vector<SurfaceCandidate> merge_surfaces(
    const HybridDistribution& dist, const Vocabulary& vocab,
    const std::vector<std::string>& source);

// ---- incremental grammar classification ------------------------------------

enum class SlotClass {
  Structural,    // keyword, parenthesis, opening backtick, from/table
  SelectColumn,  // aggregation or column after `select` / inside parens
  CondColumn,
  CondOperator,
  ValueWord,     // words inside backticks, including the closing backtick
  Complete,      // the only legal continuation is eos
  Invalid,
};

// Tracks a partial serialized query token by token. Ungrammatical pushes are
// permanent: the parser stays Invalid.
class PrefixParser {
 public:
  SlotClass next_slot() const;
  void push(const std::string& tok);
  bool invalid() const { return st_ == St::Bad; }
  // true when eos would close a grammatical query here
  bool complete() const { return st_ == St::AfterTable || st_ == St::AfterCondClose; }
  int conditions() const { return conds_; }

 private:
  enum class St {
    Start,
    AfterSelect,
    AfterAgg,
    AfterAggLParen,
    AfterAggCol,
    SelDone,
    AfterFrom,
    AfterTable,
    AfterWhere,
    AfterCondCol,
    AfterCondOp,
    InValue,
    AfterCondClose,
    Bad,
  };
  St st_ = St::Start;
  int conds_ = 0;
};

// Replays the prefix; a position is released when the next token sits in a
// WHERE-clause slot (condition column, operator, or value span). Invalid
// prefixes are never released.
bool position_released(const std::vector<std::string>& prefix,
                       bool release_select = false);

// ---- execution-guided validation -------------------------------------------

// Relaxed copy used only for validation: aggregation cleared, GT/LT
// conditions removed.
SqlQuery agg_drop_transform(const SqlQuery& query);

struct CandidateVerdict {
  bool parsed = false;
  bool executed = false;
  bool nonempty = false;
};

// Walks candidates in the given order, returns the index of the first whose
// (optionally relaxed) form executes with a non-empty result, or -1. verdicts,
// when supplied, records the pipeline stage every candidate reached.
int validate_candidates(const std::vector<std::vector<std::string>>& candidates,
                        const Schema& schema, const Table& table, bool agg_drop,
                        std::vector<CandidateVerdict>* verdicts = nullptr);

enum class EgStatus { Validated, Degraded, NoParseableCandidate };

struct EgConfig {
  int beam_k = 5;              // expansion width at released slots
  bool agg_drop = true;        // validate the relaxed query form
  bool release_select = false;
  int max_len = 96;
  int max_candidates = 32;
};

struct EgResult {
  std::vector<std::string> tokens;
  std::optional<SqlQuery> query;  // untransformed parse of tokens
  EgStatus status = EgStatus::NoParseableCandidate;
  int validated_rank = -1;  // probability-order index that passed validation
  double logprob = 0.0;
};

// ---- model-driven search -----------------------------------------------------

namespace detail {

template <typename S>
struct Hyp {
  typename TransformerT<S>::Session sess;
  std::vector<std::string> tokens;
  double logprob = 0.0;
  bool greedy_lane = false;
  PrefixParser parser;
  std::vector<SurfaceCandidate> next;
};

template <typename S>
void refresh(Hyp<S>& h, const Vocabulary& vocab,
             const std::vector<std::string>& source, int token_id) {
  auto scores = h.sess.feed(token_id);
  h.next = merge_surfaces(hybrid_distribution<S>(scores, vocab.size()), vocab,
                          source);
}

}  // namespace detail

// Length-bounded beam search over the hybrid space; pointer picks surface as
// the pointed source token. Hypotheses are ranked by cumulative
// log-probability without length normalization. Sequences failing to reach
// eos within max_len are returned with ended=false.
template <typename S>
std::vector<DecodedSeq> beam_search(const TransformerT<S>& model,
                                    const Vocabulary& vocab,
                                    const std::vector<std::string>& source,
                                    int width, int max_len = 96) {
  if (width < 1) throw std::invalid_argument("beam width must be >= 1");
  using H = detail::Hyp<S>;
  auto enc = model.encode(vocab.encode(source));

  std::vector<H> live(1);
  live[0].sess = model.start_session(enc);
  detail::refresh(live[0], vocab, source, vocab.bos_id);

  std::vector<DecodedSeq> done;
  for (int step = 0; step < max_len && !live.empty(); ++step) {
    struct Entry {
      size_t parent;
      const SurfaceCandidate* cand;
      double lp;
    };
    std::vector<Entry> pool;
    for (size_t i = 0; i < live.size(); ++i) {
      int take = std::min<int>(width, static_cast<int>(live[i].next.size()));
      for (int c = 0; c < take; ++c)
        pool.push_back({i, &live[i].next[c],
                        live[i].logprob + std::log(live[i].next[c].prob)});
    }
    std::stable_sort(pool.begin(), pool.end(),
                     [](const Entry& a, const Entry& b) { return a.lp > b.lp; });
    if (pool.size() > static_cast<size_t>(width)) pool.resize(width);

    std::vector<H> next_live;
    for (const Entry& e : pool) {
      if (e.cand->token == tok::kEos) {
        DecodedSeq d;
        d.tokens = live[e.parent].tokens;
        d.logprob = e.lp;
        d.ended = true;
        done.push_back(std::move(d));
        continue;
      }
      H h = live[e.parent];  // deep session copy
      h.tokens.push_back(e.cand->token);
      h.logprob = e.lp;
      detail::refresh(h, vocab, source, vocab.id_or_unk(e.cand->token));
      next_live.push_back(std::move(h));
    }
    live = std::move(next_live);
    if (done.size() >= static_cast<size_t>(width)) break;
  }
  for (auto& h : live) {
    DecodedSeq d;
    d.tokens = std::move(h.tokens);
    d.logprob = h.logprob;
    d.ended = false;
    done.push_back(std::move(d));
  }
  std::stable_sort(done.begin(), done.end(),
                   [](const DecodedSeq& a, const DecodedSeq& b) {
                     return a.logprob > b.logprob;
                   });
  if (done.size() > static_cast<size_t>(width)) done.resize(width);
  return done;
}

template <typename S>
DecodedSeq greedy_decode(const TransformerT<S>& model, const Vocabulary& vocab,
                         const std::vector<std::string>& source,
                         int max_len = 96) {
  auto out = beam_search(model, vocab, source, 1, max_len);
  return out.empty() ? DecodedSeq{} : std::move(out.front());
}

// Clause-sensitive execution-guided decoding: width 1 everywhere except
// released WHERE-clause slots, which branch beam_k ways. The all-greedy lane
// is never pruned while unfinished. Completed candidates are validated in
// log-probability order; the first to execute non-empty (after the optional
// relaxation) wins. When none does, the best parseable candidate is returned
// as Degraded; when nothing parses, the best candidate is returned with
// NoParseableCandidate.
template <typename S>
EgResult eg_decode(const TransformerT<S>& model, const Vocabulary& vocab,
                   const std::vector<std::string>& source, const Schema& schema,
                   const Table& table, const EgConfig& cfg = {}) {
  if (cfg.beam_k < 1) throw std::invalid_argument("beam_k must be >= 1");
  using H = detail::Hyp<S>;
  auto enc = model.encode(vocab.encode(source));

  std::vector<H> live(1);
  live[0].sess = model.start_session(enc);
  live[0].greedy_lane = true;
  detail::refresh(live[0], vocab, source, vocab.bos_id);

  struct Completed {
    std::vector<std::string> tokens;
    double logprob;
  };
  std::vector<Completed> completed;

  for (int step = 0; step < cfg.max_len && !live.empty() &&
                     completed.size() < static_cast<size_t>(cfg.max_candidates);
       ++step) {
    struct Entry {
      size_t parent;
      const SurfaceCandidate* cand;
      double lp;
      bool greedy;
    };
    std::vector<Entry> pool;
    for (size_t i = 0; i < live.size(); ++i) {
      H& h = live[i];
      SlotClass slot = h.parser.next_slot();
      bool released = !h.parser.invalid() &&
                      (slot == SlotClass::CondColumn ||
                       slot == SlotClass::CondOperator ||
                       slot == SlotClass::ValueWord ||
                       (cfg.release_select && slot == SlotClass::SelectColumn));
      int w = released ? cfg.beam_k : 1;
      int take = std::min<int>(w, static_cast<int>(h.next.size()));
      for (int c = 0; c < take; ++c)
        pool.push_back({i, &h.next[c], h.logprob + std::log(h.next[c].prob),
                        h.greedy_lane && c == 0});
    }
    std::stable_sort(pool.begin(), pool.end(),
                     [](const Entry& a, const Entry& b) { return a.lp > b.lp; });
    // the greedy continuation survives every prune
    std::vector<Entry> picked;
    for (const Entry& e : pool)
      if (e.greedy) picked.push_back(e);
    for (const Entry& e : pool) {
      if (picked.size() >= static_cast<size_t>(cfg.beam_k)) break;
      if (!e.greedy) picked.push_back(e);
    }

    std::vector<H> next_live;
    for (const Entry& e : picked) {
      if (e.cand->token == tok::kEos) {
        completed.push_back({live[e.parent].tokens, e.lp});
        continue;
      }
      H h = live[e.parent];
      h.greedy_lane = e.greedy;
      h.tokens.push_back(e.cand->token);
      h.logprob = e.lp;
      h.parser.push(e.cand->token);
      detail::refresh(h, vocab, source, vocab.id_or_unk(e.cand->token));
      next_live.push_back(std::move(h));
    }
    live = std::move(next_live);
  }
  for (auto& h : live) completed.push_back({std::move(h.tokens), h.logprob});

  std::stable_sort(completed.begin(), completed.end(),
                   [](const Completed& a, const Completed& b) {
                     return a.logprob > b.logprob;
                   });

  std::vector<std::vector<std::string>> cand_tokens;
  cand_tokens.reserve(completed.size());
  for (const auto& c : completed) cand_tokens.push_back(c.tokens);

  EgResult out;
  int winner = validate_candidates(cand_tokens, schema, table, cfg.agg_drop);
  if (winner >= 0) {
    out.tokens = completed[winner].tokens;
    out.logprob = completed[winner].logprob;
    out.query = parse_sql(out.tokens, schema).query;
    out.status = EgStatus::Validated;
    out.validated_rank = winner;
    return out;
  }
  for (size_t i = 0; i < cand_tokens.size(); ++i) {
    auto parsed = parse_sql(cand_tokens[i], schema);
    if (parsed.ok()) {
      out.tokens = completed[i].tokens;
      out.logprob = completed[i].logprob;
      out.query = parsed.query;
      out.status = EgStatus::Degraded;
      return out;
    }
  }
  if (!completed.empty()) {
    out.tokens = completed.front().tokens;
    out.logprob = completed.front().logprob;
  }
  out.status = EgStatus::NoParseableCandidate;
  return out;
}

}  // namespace sead
