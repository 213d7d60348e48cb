#include "sead/decode.hpp"

#include <map>

namespace sead {

std::vector<SurfaceCandidate> merge_surfaces(
    const HybridDistribution& dist, const Vocabulary& vocab,
    const std::vector<std::string>& source) {
  std::map<std::string, SurfaceCandidate> pool;
  auto fold = [&](const std::string& surface, double p, int index) {
    auto [it, fresh] = pool.try_emplace(surface);
    SurfaceCandidate& c = it->second;
    if (fresh) {
      c.token = surface;
      c.hybrid_index = index;
    }
    c.prob += p;
    c.hybrid_index = std::min(c.hybrid_index, index);
  };
  for (int i = 0; i < dist.vocab_size; ++i) {
    if (i == vocab.pad_id || i == vocab.bos_id) continue;
    fold(vocab.tokens[i], dist.probs[i], i);
  }
  for (size_t s = 0; s < source.size(); ++s)
    fold(source[s], dist.probs[dist.vocab_size + s],
         dist.vocab_size + static_cast<int>(s));

  std::vector<SurfaceCandidate> out;
  out.reserve(pool.size());
  for (auto& [_, c] : pool) out.push_back(std::move(c));
  std::sort(out.begin(), out.end(),
            [](const SurfaceCandidate& a, const SurfaceCandidate& b) {
              if (a.prob != b.prob) return a.prob > b.prob;
              return a.hybrid_index < b.hybrid_index;
            });
  return out;
}

SlotClass PrefixParser::next_slot() const {
  switch (st_) {
    case St::Start:
    case St::AfterAgg:
    case St::SelDone:
    case St::AfterFrom:
    case St::AfterCondOp:
      return SlotClass::Structural;
    case St::AfterSelect:
    case St::AfterAggLParen:
      return SlotClass::SelectColumn;
    case St::AfterAggCol:
      return SlotClass::Structural;  // the closing parenthesis
    case St::AfterTable:
      return SlotClass::Structural;  // `where` or eos
    case St::AfterWhere:
      return SlotClass::CondColumn;
    case St::AfterCondCol:
      return SlotClass::CondOperator;
    case St::InValue:
      return SlotClass::ValueWord;
    case St::AfterCondClose:
      return conds_ >= kMaxConditions ? SlotClass::Complete
                                      : SlotClass::Structural;
    case St::Bad:
      return SlotClass::Invalid;
  }
  return SlotClass::Invalid;
}

void PrefixParser::push(const std::string& tok) {
  switch (st_) {
    case St::Start:
      st_ = tok == tok::kSelect ? St::AfterSelect : St::Bad;
      return;
    case St::AfterSelect:
      if (agg_from_token(tok)) {
        st_ = St::AfterAgg;
      } else if (is_col_or_unk_token(tok)) {
        st_ = St::SelDone;
      } else {
        st_ = St::Bad;
      }
      return;
    case St::AfterAgg:
      st_ = tok == tok::kLParen ? St::AfterAggLParen : St::Bad;
      return;
    case St::AfterAggLParen:
      st_ = is_col_or_unk_token(tok) ? St::AfterAggCol : St::Bad;
      return;
    case St::AfterAggCol:
      st_ = tok == tok::kRParen ? St::SelDone : St::Bad;
      return;
    case St::SelDone:
      st_ = tok == tok::kFrom ? St::AfterFrom : St::Bad;
      return;
    case St::AfterFrom:
      st_ = tok == tok::kTable ? St::AfterTable : St::Bad;
      return;
    case St::AfterTable:
      st_ = tok == tok::kWhere ? St::AfterWhere : St::Bad;
      return;
    case St::AfterWhere:
      if (is_col_or_unk_token(tok)) {
        ++conds_;
        st_ = St::AfterCondCol;
      } else {
        st_ = St::Bad;
      }
      return;
    case St::AfterCondCol:
      st_ = op_from_token(tok) ? St::AfterCondOp : St::Bad;
      return;
    case St::AfterCondOp:
      st_ = tok == tok::kBacktick ? St::InValue : St::Bad;
      return;
    case St::InValue:
      if (tok == tok::kBacktick) st_ = St::AfterCondClose;
      return;  // any other token extends the value span
    case St::AfterCondClose:
      if (tok == tok::kAnd && conds_ < kMaxConditions) {
        st_ = St::AfterWhere;
      } else {
        st_ = St::Bad;
      }
      return;
    case St::Bad:
      return;
  }
}

bool position_released(const std::vector<std::string>& prefix,
                       bool release_select) {
  PrefixParser p;
  for (const auto& t : prefix) p.push(t);
  switch (p.next_slot()) {
    case SlotClass::CondColumn:
    case SlotClass::CondOperator:
    case SlotClass::ValueWord:
      return true;
    case SlotClass::SelectColumn:
      return release_select;
    default:
      return false;
  }
}

SqlQuery agg_drop_transform(const SqlQuery& query) {
  SqlQuery out = query;
  out.aggregation = Agg::None;
  out.conditions.erase(
      std::remove_if(out.conditions.begin(), out.conditions.end(),
                     [](const Condition& c) { return c.op != CondOp::Eq; }),
      out.conditions.end());
  return out;
}

int validate_candidates(const std::vector<std::vector<std::string>>& candidates,
                        const Schema& schema, const Table& table, bool agg_drop,
                        std::vector<CandidateVerdict>* verdicts) {
  if (verdicts) verdicts->assign(candidates.size(), {});
  for (size_t i = 0; i < candidates.size(); ++i) {
    auto parsed = parse_sql(candidates[i], schema);
    if (!parsed.ok()) continue;
    if (verdicts) (*verdicts)[i].parsed = true;
    SqlQuery probe = agg_drop ? agg_drop_transform(*parsed.query)
                              : *parsed.query;
    auto outcome = execute(probe, table);
    if (!outcome.ok()) continue;
    if (verdicts) (*verdicts)[i].executed = true;
    if (outcome.result->empty_flag) continue;
    if (verdicts) (*verdicts)[i].nonempty = true;
    return static_cast<int>(i);
  }
  return -1;
}

}  // namespace sead
