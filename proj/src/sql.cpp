#include "sead/sql.hpp"

#include <algorithm>
#include <array>
#include <tuple>

#include "sead/text.hpp"

namespace sead {

namespace {

const std::array<std::string, kNumAggs> kAggTokens = {"",    "max", "min",
                                                      "count", "sum", "avg"};
const std::array<std::string, kNumCondOps> kOpTokens = {"=", ">", "<"};

}  // namespace

const std::string& agg_token(Agg agg) {
  return kAggTokens[static_cast<int>(agg)];
}

const std::string& op_token(CondOp op) {
  return kOpTokens[static_cast<int>(op)];
}

const std::string& col_type_token(ColType t) {
  static const std::string kText = "text", kReal = "real";
  return t == ColType::Text ? kText : kReal;
}

std::optional<Agg> agg_from_token(const std::string& t) {
  for (int i = 1; i < kNumAggs; ++i) {
    if (kAggTokens[i] == t) return static_cast<Agg>(i);
  }
  return std::nullopt;
}

std::optional<CondOp> op_from_token(const std::string& t) {
  for (int i = 0; i < kNumCondOps; ++i) {
    if (kOpTokens[i] == t) return static_cast<CondOp>(i);
  }
  return std::nullopt;
}

std::string col_token(int index) {
  if (index == kUnknownColumn) return tok::kUnk;
  return "<col" + std::to_string(index) + ">";
}

std::optional<int> col_index_from_token(const std::string& t) {
  if (t.size() < 6 || t.compare(0, 4, "<col") != 0 || t.back() != '>') {
    return std::nullopt;
  }
  int value = 0;
  for (size_t i = 4; i + 1 < t.size(); ++i) {
    char c = t[i];
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
    if (value > 100000) return std::nullopt;
  }
  return value;
}

bool is_col_or_unk_token(const std::string& t) {
  return t == tok::kUnk || col_index_from_token(t).has_value();
}

const std::vector<std::string>& sql_keyword_tokens() {
  static const std::vector<std::string> kKeywords = {
      tok::kSelect, tok::kFrom,  tok::kTable,  tok::kWhere, tok::kAnd,
      tok::kLParen, tok::kRParen, tok::kColon, "=",         ">",
      "<",          "max",       "min",        "count",     "sum",
      "avg",        "text",      "real"};
  return kKeywords;
}

std::vector<std::string> serialize_schema(const Schema& schema) {
  std::vector<std::string> out;
  for (const Column& col : schema.columns) {
    out.push_back(col_token(col.index));
    out.insert(out.end(), col.name.begin(), col.name.end());
    out.push_back(tok::kColon);
    out.push_back(col_type_token(col.type));
  }
  return out;
}

namespace {

void append_column_ref(std::vector<std::string>& out, int index,
                       const Schema& schema) {
  if (index != kUnknownColumn &&
      (index < 0 || index >= schema.size())) {
    throw UnknownColumnError(index);
  }
  out.push_back(col_token(index));
}

void append_value(std::vector<std::string>& out, const std::string& value) {
  out.push_back(tok::kBacktick);
  for (const std::string& w : tokenize_text(value)) {
    if (w == tok::kBacktick) continue;
    out.push_back(w);
  }
  out.push_back(tok::kBacktick);
}

}  // namespace

std::vector<std::string> serialize_sql(const SqlQuery& query,
                                       const Schema& schema) {
  std::vector<std::string> out;
  out.push_back(tok::kSelect);
  if (query.aggregation != Agg::None) {
    out.push_back(agg_token(query.aggregation));
    out.push_back(tok::kLParen);
    append_column_ref(out, query.select_column, schema);
    out.push_back(tok::kRParen);
  } else {
    append_column_ref(out, query.select_column, schema);
  }
  out.push_back(tok::kFrom);
  out.push_back(tok::kTable);
  if (!query.conditions.empty()) {
    out.push_back(tok::kWhere);
    for (size_t i = 0; i < query.conditions.size(); ++i) {
      if (i) out.push_back(tok::kAnd);
      const Condition& cond = query.conditions[i];
      append_column_ref(out, cond.column, schema);
      out.push_back(op_token(cond.op));
      append_value(out, cond.value);
    }
  }
  return out;
}

namespace {

class SqlParser {
 public:
  SqlParser(const std::vector<std::string>& tokens, const Schema& schema)
      : tokens_(tokens), schema_(schema) {}

  ParseResult run() {
    SqlQuery query;
    if (!expect(tok::kSelect)) return fail("expected 'select'");
    if (at_end()) return fail("truncated after 'select'");

    if (auto agg = agg_from_token(peek())) {
      query.aggregation = *agg;
      advance();
      if (!expect(tok::kLParen)) return fail("expected '('");
      if (!parse_column(query.select_column)) return {std::nullopt, error_};
      if (!expect(tok::kRParen)) return fail("expected ')'");
    } else {
      if (!parse_column(query.select_column)) return {std::nullopt, error_};
    }

    if (!expect(tok::kFrom)) return fail("expected 'from'");
    if (!expect(tok::kTable)) return fail("expected 'table'");

    if (!at_end()) {
      if (!expect(tok::kWhere)) return fail("expected 'where' or end");
      while (true) {
        if (query.conditions.size() >=
            static_cast<size_t>(kMaxConditions)) {
          return fail("more than 4 conditions");
        }
        Condition cond;
        if (!parse_column(cond.column)) return {std::nullopt, error_};
        if (at_end()) return fail("truncated condition: expected operator");
        if (auto op = op_from_token(peek())) {
          cond.op = *op;
          advance();
        } else {
          return fail("expected comparison operator");
        }
        if (!expect(tok::kBacktick)) return fail("expected opening backtick");
        std::vector<std::string> words;
        while (!at_end() && peek() != tok::kBacktick) {
          words.push_back(peek());
          advance();
        }
        if (!expect(tok::kBacktick)) return fail("expected closing backtick");
        cond.value = join_tokens(words);
        query.conditions.push_back(std::move(cond));
        if (at_end()) break;
        if (!expect(tok::kAnd)) return fail("expected 'and' or end");
      }
    }
    if (!at_end()) return fail("trailing tokens");
    return {query, {}};
  }

 private:
  bool at_end() const { return pos_ >= tokens_.size(); }
  const std::string& peek() const { return tokens_[pos_]; }
  void advance() { ++pos_; }

  bool expect(const std::string& t) {
    if (at_end() || tokens_[pos_] != t) return false;
    advance();
    return true;
  }

  bool parse_column(int& out) {
    if (at_end()) {
      set_error("truncated: expected column token");
      return false;
    }
    const std::string& t = peek();
    if (t == tok::kUnk) {
      out = kUnknownColumn;
      advance();
      return true;
    }
    auto idx = col_index_from_token(t);
    if (!idx) {
      set_error("expected column token, got '" + t + "'");
      return false;
    }
    if (*idx >= schema_.size()) {
      set_error("column index out of schema range: " + t);
      return false;
    }
    out = *idx;
    advance();
    return true;
  }

  ParseResult fail(const std::string& reason) {
    set_error(reason);
    return {std::nullopt, error_};
  }

  void set_error(const std::string& reason) {
    error_ = ParseError{pos_, reason};
  }

  const std::vector<std::string>& tokens_;
  const Schema& schema_;
  size_t pos_ = 0;
  ParseError error_;
};

}  // namespace

ParseResult parse_sql(const std::vector<std::string>& tokens,
                      const Schema& schema) {
  return SqlParser(tokens, schema).run();
}

SqlQuery canonicalize(const SqlQuery& query) {
  SqlQuery out = query;
  for (Condition& cond : out.conditions) {
    cond.value = normalize_text(cond.value);
  }
  std::sort(out.conditions.begin(), out.conditions.end(),
            [](const Condition& a, const Condition& b) {
              return std::tie(a.column, a.op, a.value) <
                     std::tie(b.column, b.op, b.value);
            });
  return out;
}

}  // namespace sead
