#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sead {

enum class ColType { Text, Real };

enum class Agg { None = 0, Max, Min, Count, Sum, Avg };
constexpr int kNumAggs = 6;

enum class CondOp { Eq = 0, Gt, Lt };
constexpr int kNumCondOps = 3;

constexpr int kMaxConditions = 4;

// Sentinel for a column reference whose schema entry has been masked out.
constexpr int kUnknownColumn = -1;

struct Column {
  int index = 0;
  std::vector<std::string> name;  // word tokens, non-empty
  ColType type = ColType::Text;
};

struct Schema {
  std::string table_id;
  std::vector<Column> columns;

  int size() const { return static_cast<int>(columns.size()); }
};

struct Condition {
  int column = 0;
  CondOp op = CondOp::Eq;
  std::string value;

  bool operator==(const Condition&) const = default;
};

struct SqlQuery {
  int select_column = 0;
  Agg aggregation = Agg::None;
  std::vector<Condition> conditions;

  bool operator==(const SqlQuery&) const = default;
};

struct ParseError {
  size_t position = 0;
  std::string reason;
};

struct ParseResult {
  std::optional<SqlQuery> query;
  ParseError error;

  bool ok() const { return query.has_value(); }
};

class UnknownColumnError : public std::runtime_error {
 public:
  explicit UnknownColumnError(int index)
      : std::runtime_error("column index out of range: " +
                           std::to_string(index)) {}
};

// Fixed token inventory of the serialization grammar.
namespace tok {
inline constexpr const char* kSelect = "select";
inline constexpr const char* kFrom = "from";
inline constexpr const char* kTable = "table";
inline constexpr const char* kWhere = "where";
inline constexpr const char* kAnd = "and";
inline constexpr const char* kLParen = "(";
inline constexpr const char* kRParen = ")";
inline constexpr const char* kColon = ":";
inline constexpr const char* kBacktick = "`";
inline constexpr const char* kUnk = "<unk>";
inline constexpr const char* kToSql = "<2sql>";
inline constexpr const char* kToNl = "<2nl>";
inline constexpr const char* kMask = "<mask>";
inline constexpr const char* kPad = "<pad>";
inline constexpr const char* kBos = "<s>";
inline constexpr const char* kEos = "</s>";
}  // namespace tok

const std::string& agg_token(Agg agg);          // "", "max", ..., "avg"
const std::string& op_token(CondOp op);         // "=", ">", "<"
const std::string& col_type_token(ColType t);   // "text", "real"
std::optional<Agg> agg_from_token(const std::string& t);
std::optional<CondOp> op_from_token(const std::string& t);

std::string col_token(int index);                        // 3 -> "<col3>"
std::optional<int> col_index_from_token(const std::string& t);
bool is_col_or_unk_token(const std::string& t);

// All SQL keywords that can appear in a serialized query or schema segment.
const std::vector<std::string>& sql_keyword_tokens();

// `<coli> [name words] : [type]` per column, in column order.
std::vector<std::string> serialize_schema(const Schema& schema);

// `select [agg (] <colI> [)] from table [where <colJ> op `+value+` [and ..]]`.
// Backticks embedded in values are dropped so the quoting stays unambiguous.
// Throws UnknownColumnError for an index outside the schema that is not the
// kUnknownColumn sentinel.
std::vector<std::string> serialize_sql(const SqlQuery& query,
                                       const Schema& schema);

// Inverse of serialize_sql over grammatical token sequences. Malformed input
// yields a ParseError value, never a throw.
ParseResult parse_sql(const std::vector<std::string>& tokens,
                      const Schema& schema);

// Normalizes value whitespace/punctuation spacing and sorts conditions by
// (column, operator, value). Idempotent.
SqlQuery canonicalize(const SqlQuery& query);

}  // namespace sead
