#include "sead/executor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sead/text.hpp"

namespace sead {

Value Value::from_cell(const std::string& cell) {
  return Value{cell, parse_number(cell)};
}

Value Value::from_number(double v) {
  return Value{"", v};
}

std::string Value::repr() const {
  if (!num) return text;
  if (!text.empty()) return text;
  std::ostringstream os;
  os << *num;
  return os.str();
}

namespace {

ExecOutcome exec_error(ExecErrorKind kind, std::string detail) {
  return ExecOutcome{std::nullopt, ExecError{kind, std::move(detail)}};
}

bool eq_match(const std::string& cell, const std::string& value) {
  return lower(trim(cell)) == lower(trim(value));
}

}  // namespace

ExecOutcome execute(const SqlQuery& query, const Table& table) {
  auto check_column = [&](int index) -> std::optional<ExecError> {
    if (index == kUnknownColumn) {
      return ExecError{ExecErrorKind::UnknownColumn, "<unk> column"};
    }
    if (index < 0 || index >= table.width()) {
      return ExecError{ExecErrorKind::UnknownColumn,
                       "column " + std::to_string(index) + " out of range"};
    }
    return std::nullopt;
  };

  if (auto err = check_column(query.select_column)) {
    return {std::nullopt, err};
  }
  for (const Condition& cond : query.conditions) {
    if (auto err = check_column(cond.column)) return {std::nullopt, err};
  }
  if (query.conditions.size() > static_cast<size_t>(kMaxConditions)) {
    return exec_error(ExecErrorKind::MalformedQuery, "more than 4 conditions");
  }

  std::vector<std::optional<double>> cond_nums(query.conditions.size());
  for (size_t i = 0; i < query.conditions.size(); ++i) {
    const Condition& cond = query.conditions[i];
    if (cond.op == CondOp::Eq) continue;
    cond_nums[i] = parse_number(cond.value);
    if (!cond_nums[i]) {
      return exec_error(ExecErrorKind::TypeMismatch,
                        "non-numeric comparison value '" + cond.value + "'");
    }
  }

  // Every condition is evaluated on every row so errors do not depend on
  // condition order.
  std::vector<const std::vector<std::string>*> filtered;
  for (const auto& row : table.rows) {
    bool match = true;
    for (size_t i = 0; i < query.conditions.size(); ++i) {
      const Condition& cond = query.conditions[i];
      const std::string& cell = row[cond.column];
      if (cond.op == CondOp::Eq) {
        if (!eq_match(cell, cond.value)) match = false;
      } else {
        auto cell_num = parse_number(cell);
        if (!cell_num) {
          return exec_error(ExecErrorKind::TypeMismatch,
                            "non-numeric cell '" + cell + "'");
        }
        bool holds = cond.op == CondOp::Gt ? *cell_num > *cond_nums[i]
                                           : *cell_num < *cond_nums[i];
        if (!holds) match = false;
      }
    }
    if (match) filtered.push_back(&row);
  }

  ResultSet rs;
  const int sel = query.select_column;
  switch (query.aggregation) {
    case Agg::None: {
      for (const auto* row : filtered) rs.values.push_back(Value::from_cell((*row)[sel]));
      rs.empty_flag = rs.values.empty();
      return {rs, std::nullopt};
    }
    case Agg::Count: {
      rs.values.push_back(Value::from_number(static_cast<double>(filtered.size())));
      rs.empty_flag = false;
      return {rs, std::nullopt};
    }
    default: {
      if (filtered.empty()) {
        rs.empty_flag = true;
        return {rs, std::nullopt};
      }
      std::vector<double> nums;
      nums.reserve(filtered.size());
      for (const auto* row : filtered) {
        auto v = parse_number((*row)[sel]);
        if (!v) {
          return exec_error(ExecErrorKind::TypeMismatch,
                            "aggregation over non-numeric cell '" +
                                (*row)[sel] + "'");
        }
        nums.push_back(*v);
      }
      double out = 0;
      switch (query.aggregation) {
        case Agg::Max: out = *std::max_element(nums.begin(), nums.end()); break;
        case Agg::Min: out = *std::min_element(nums.begin(), nums.end()); break;
        case Agg::Sum: {
          for (double v : nums) out += v;
          break;
        }
        case Agg::Avg: {
          for (double v : nums) out += v;
          out /= static_cast<double>(nums.size());
          break;
        }
        default: break;
      }
      rs.values.push_back(Value::from_number(out));
      rs.empty_flag = false;
      return {rs, std::nullopt};
    }
  }
}

namespace {

bool value_less(const Value& a, const Value& b) {
  bool an = a.num.has_value(), bn = b.num.has_value();
  if (an != bn) return an < bn;
  if (an && *a.num != *b.num) return *a.num < *b.num;
  return lower(trim(a.text)) < lower(trim(b.text));
}

bool value_equal(const Value& a, const Value& b) {
  if (a.num && b.num) {
    double tol = 1e-9 * std::max({1.0, std::fabs(*a.num), std::fabs(*b.num)});
    return std::fabs(*a.num - *b.num) <= tol;
  }
  if (a.num != b.num) return false;  // one numeric, one not
  return lower(trim(a.text)) == lower(trim(b.text));
}

}  // namespace

bool results_equal(const ResultSet& a, const ResultSet& b) {
  if (a.empty_flag != b.empty_flag) return false;
  if (a.values.size() != b.values.size()) return false;
  std::vector<Value> sa = a.values, sb = b.values;
  std::sort(sa.begin(), sa.end(), value_less);
  std::sort(sb.begin(), sb.end(), value_less);
  for (size_t i = 0; i < sa.size(); ++i) {
    if (!value_equal(sa[i], sb[i])) return false;
  }
  return true;
}

}  // namespace sead
