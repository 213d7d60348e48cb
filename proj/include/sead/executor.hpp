#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sead/sql.hpp"
#include "sead/store.hpp"

namespace sead {

struct Value {
  std::string text;
  std::optional<double> num;

  static Value from_cell(const std::string& cell);
  static Value from_number(double v);

  std::string repr() const;
};

struct ResultSet {
  std::vector<Value> values;
  bool empty_flag = true;
};

enum class ExecErrorKind { UnknownColumn, TypeMismatch, MalformedQuery };

struct ExecError {
  ExecErrorKind kind = ExecErrorKind::MalformedQuery;
  std::string detail;
};

struct ExecOutcome {
  std::optional<ResultSet> result;
  std::optional<ExecError> error;

  bool ok() const { return result.has_value(); }
};

// Filters rows by the conjunction of conditions, projects the select column,
// applies the aggregation. EQ compares case-insensitively after trimming;
// GT/LT compare numerically and raise TypeMismatch when either side does not
// parse. A kUnknownColumn reference anywhere raises UnknownColumn. COUNT over
// zero rows yields the value 0 with empty_flag false; the other aggregations
// over zero rows yield an empty result.
ExecOutcome execute(const SqlQuery& query, const Table& table);

// Order-insensitive multiset comparison; numeric cells compared with 1e-9
// relative tolerance, text cells case-insensitively after trimming.
bool results_equal(const ResultSet& a, const ResultSet& b);

}  // namespace sead
