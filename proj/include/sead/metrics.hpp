#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sead/executor.hpp"
#include "sead/sql.hpp"
#include "sead/store.hpp"

namespace sead {

// Canonicalized AST equality: conditions order-insensitive, values compared
// after whitespace normalization, column indices and aggregation exact.
bool acc_lf(const SqlQuery& pred, const SqlQuery& gold);

// Execution-result equality on the example's table. A prediction whose
// execution errors never matches, even if gold errors too.
bool acc_ex(const SqlQuery& pred, const SqlQuery& gold, const Table& table);

struct ComponentFlags {
  bool s_col = false;  // select column
  bool s_agg = false;  // aggregation
  bool w_col = false;  // multiset of condition columns
  bool w_op = false;   // multiset of (column, operator)
  bool w_val = false;  // multiset of (column, operator, value)
};

ComponentFlags component_scores(const SqlQuery& pred, const SqlQuery& gold);

struct ExampleVerdict {
  size_t index = 0;
  bool parsed = false;
  bool lf = false;
  bool ex = false;
  ComponentFlags components;
  std::string prediction;  // decoded tokens joined, empty when none
  std::string decode_note;  // e.g. eg status
};

struct EvalReport {
  size_t n = 0;
  double acc_lf = 0, acc_ex = 0;
  double s_col = 0, s_agg = 0, w_col = 0, w_op = 0, w_val = 0;
  double bleu = 0;  // candidate vs serialized gold, corpus level
  std::vector<ExampleVerdict> verdicts;

  // recomputes every fraction from the verdict log
  void recompute();
};

std::string report_json(const EvalReport& rep);
// aligned two-column table, percentages with one decimal
std::string report_table(const EvalReport& rep, const std::string& title = "");

}  // namespace sead
