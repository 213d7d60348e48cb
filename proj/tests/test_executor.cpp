#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sead/executor.hpp"
#include "sead/store.hpp"
#include "sead/text.hpp"

using namespace sead;

namespace {

Table mini_table() {
  Table t;
  t.id = "t";
  t.header = {"name", "score", "team"};
  t.types = {ColType::Text, ColType::Real, ColType::Text};
  t.rows = {
      {"Ann", "3", "red"},
      {"bob", "4.5", "Red"},
      {"cy", "2", "blue"},
      {"ann", "7", "blue"},
  };
  t.dirty = {false, false, false};
  return t;
}

// Deliberately naive second implementation. Filters rows per condition with
// its own comparison code, then aggregates with plain loops.
struct OracleOut {
  bool error = false;
  std::vector<std::string> cells;   // Agg::None
  bool has_number = false;
  double number = 0;                // other aggregates
  bool empty = false;
};

bool oracle_num(const std::string& s, double* out) {
  auto v = parse_number(s);
  if (!v) return false;
  *out = *v;
  return true;
}

std::string oracle_fold(const std::string& s) {
  std::string t = trim(s);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return t;
}

OracleOut oracle_execute(const SqlQuery& q, const Table& t) {
  OracleOut out;
  int w = static_cast<int>(t.width());
  if (q.select_column < 0 || q.select_column >= w) { out.error = true; return out; }
  for (const auto& c : q.conditions)
    if (c.column < 0 || c.column >= w) { out.error = true; return out; }

  // any GT/LT condition with an unparseable constant is an error regardless
  // of which rows would match
  for (const auto& c : q.conditions) {
    double tmp;
    if (c.op != CondOp::Eq && !oracle_num(c.value, &tmp)) { out.error = true; return out; }
  }

  std::vector<size_t> kept;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    bool match = true;
    for (const auto& c : q.conditions) {
      const std::string& cell = t.rows[r][c.column];
      if (c.op == CondOp::Eq) {
        if (oracle_fold(cell) != oracle_fold(c.value)) match = false;
      } else {
        double cv, qv;
        oracle_num(c.value, &qv);
        if (!oracle_num(cell, &cv)) { out.error = true; return out; }
        if (c.op == CondOp::Gt && !(cv > qv)) match = false;
        if (c.op == CondOp::Lt && !(cv < qv)) match = false;
      }
    }
    if (match) kept.push_back(r);
  }

  if (q.aggregation == Agg::None) {
    for (size_t r : kept) out.cells.push_back(t.rows[r][q.select_column]);
    out.empty = out.cells.empty();
    return out;
  }
  if (q.aggregation == Agg::Count) {
    out.has_number = true;
    out.number = static_cast<double>(kept.size());
    out.empty = false;
    return out;
  }
  if (kept.empty()) { out.empty = true; return out; }
  std::vector<double> vals;
  for (size_t r : kept) {
    double v;
    if (!oracle_num(t.rows[r][q.select_column], &v)) { out.error = true; return out; }
    vals.push_back(v);
  }
  out.has_number = true;
  switch (q.aggregation) {
    case Agg::Max: out.number = *std::max_element(vals.begin(), vals.end()); break;
    case Agg::Min: out.number = *std::min_element(vals.begin(), vals.end()); break;
    case Agg::Sum: out.number = 0; for (double v : vals) out.number += v; break;
    case Agg::Avg: {
      double s = 0;
      for (double v : vals) s += v;
      out.number = s / static_cast<double>(vals.size());
      break;
    }
    default: break;
  }
  return out;
}

bool agree(const ExecOutcome& got, const OracleOut& want) {
  if (want.error) return !got.ok();
  if (!got.ok()) return false;
  const ResultSet& rs = *got.result;
  if (want.has_number) {
    if (rs.values.size() != 1) return false;
    if (!rs.values[0].num) return false;
    double a = *rs.values[0].num, b = want.number;
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
  }
  if (rs.empty_flag != want.empty) return false;
  if (rs.values.size() != want.cells.size()) return false;
  std::vector<std::string> a, b;
  for (const auto& v : rs.values) a.push_back(oracle_fold(v.repr()));
  for (const auto& c : want.cells) b.push_back(oracle_fold(c));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

Table random_table(std::mt19937_64& rng) {
  static const std::vector<std::string> words{
      "red", "blue", "ann", "bob", "fox", "sun", "oak", "n/a", "Ann", " red"};
  Table t;
  t.id = "rt";
  std::uniform_int_distribution<int> wdist(1, 4), rdist(0, 20);
  int w = wdist(rng);
  int nrows = rdist(rng);
  for (int c = 0; c < w; ++c) {
    t.header.push_back("c" + std::to_string(c));
    t.types.push_back(c % 2 ? ColType::Real : ColType::Text);
  }
  std::uniform_int_distribution<int> widx(0, static_cast<int>(words.size()) - 1);
  std::uniform_int_distribution<int> num(-5, 30);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int r = 0; r < nrows; ++r) {
    std::vector<std::string> row;
    for (int c = 0; c < w; ++c) {
      double roll = unit(rng);
      if (t.types[c] == ColType::Real) {
        // mostly numbers with occasional junk so TypeMismatch paths fire
        if (roll < 0.85)
          row.push_back(std::to_string(num(rng)));
        else if (roll < 0.92)
          row.push_back(std::to_string(num(rng)) + ".5");
        else
          row.push_back(words[widx(rng)]);
      } else {
        if (roll < 0.8)
          row.push_back(words[widx(rng)]);
        else
          row.push_back(std::to_string(num(rng)));
      }
    }
    t.rows.push_back(std::move(row));
  }
  t.dirty.assign(w, false);
  return t;
}

SqlQuery random_query(std::mt19937_64& rng, const Table& t) {
  std::uniform_int_distribution<int> col(0, static_cast<int>(t.width()) - 1);
  std::uniform_int_distribution<int> agg(0, 5), op(0, 2), nc(0, 3);
  std::uniform_int_distribution<int> num(-5, 30);
  std::uniform_real_distribution<double> unit(0, 1);
  static const std::vector<std::string> words{"red", "ann", "fox", "zzz", "4"};
  std::uniform_int_distribution<int> widx(0, static_cast<int>(words.size()) - 1);

  SqlQuery q;
  q.select_column = col(rng);
  if (unit(rng) < 0.05) q.select_column = 99;  // exercise UnknownColumn
  q.aggregation = static_cast<Agg>(agg(rng));
  int n = nc(rng);
  for (int i = 0; i < n; ++i) {
    Condition c;
    c.column = col(rng);
    c.op = static_cast<CondOp>(op(rng));
    if (c.op == CondOp::Eq) {
      // half the time copy a real cell so equality actually fires
      if (!t.rows.empty() && unit(rng) < 0.5) {
        std::uniform_int_distribution<size_t> ridx(0, t.rows.size() - 1);
        c.value = t.rows[ridx(rng)][c.column];
      } else {
        c.value = words[widx(rng)];
      }
    } else {
      if (unit(rng) < 0.9)
        c.value = std::to_string(num(rng));
      else
        c.value = words[widx(rng)];  // unparseable constants
    }
    q.conditions.push_back(std::move(c));
  }
  return q;
}

}  // namespace

TEST_CASE("plain selection keeps matching cells") {
  Table t = mini_table();
  SqlQuery q;
  q.select_column = 0;
  q.conditions = {{2, CondOp::Eq, "blue"}};
  auto out = execute(q, t);
  REQUIRE(out.ok());
  REQUIRE(out.result->values.size() == 2);
  CHECK(out.result->values[0].repr() == "cy");
  CHECK(out.result->values[1].repr() == "ann");
  CHECK_FALSE(out.result->empty_flag);
}

TEST_CASE("equality is case and padding insensitive") {
  Table t = mini_table();
  SqlQuery q;
  q.select_column = 1;
  q.conditions = {{0, CondOp::Eq, "  ANN "}};
  auto out = execute(q, t);
  REQUIRE(out.ok());
  CHECK(out.result->values.size() == 2);
}

TEST_CASE("aggregates reduce to one number") {
  Table t = mini_table();
  SqlQuery q;
  q.select_column = 1;

  q.aggregation = Agg::Max;
  auto out = execute(q, t);
  REQUIRE(out.ok());
  CHECK(*out.result->values[0].num == doctest::Approx(7.0));

  q.aggregation = Agg::Min;
  CHECK(*execute(q, t).result->values[0].num == doctest::Approx(2.0));

  q.aggregation = Agg::Sum;
  CHECK(*execute(q, t).result->values[0].num == doctest::Approx(16.5));

  q.aggregation = Agg::Avg;
  CHECK(*execute(q, t).result->values[0].num == doctest::Approx(4.125));

  q.aggregation = Agg::Count;
  CHECK(*execute(q, t).result->values[0].num == doctest::Approx(4.0));
}

TEST_CASE("count of zero rows is a non-empty result") {
  Table t = mini_table();
  SqlQuery q;
  q.select_column = 0;
  q.aggregation = Agg::Count;
  q.conditions = {{0, CondOp::Eq, "nobody"}};
  auto out = execute(q, t);
  REQUIRE(out.ok());
  CHECK(*out.result->values[0].num == doctest::Approx(0.0));
  CHECK_FALSE(out.result->empty_flag);
}

TEST_CASE("numeric aggregate over zero rows is empty") {
  Table t = mini_table();
  SqlQuery q;
  q.select_column = 1;
  q.aggregation = Agg::Max;
  q.conditions = {{0, CondOp::Eq, "nobody"}};
  auto out = execute(q, t);
  REQUIRE(out.ok());
  CHECK(out.result->values.empty());
  CHECK(out.result->empty_flag);
}

TEST_CASE("error taxonomy") {
  Table t = mini_table();
  SqlQuery q;

  q.select_column = 9;
  CHECK(execute(q, t).error->kind == ExecErrorKind::UnknownColumn);

  q.select_column = kUnknownColumn;
  CHECK(execute(q, t).error->kind == ExecErrorKind::UnknownColumn);

  q.select_column = 0;
  q.conditions = {{7, CondOp::Eq, "x"}};
  CHECK(execute(q, t).error->kind == ExecErrorKind::UnknownColumn);

  q.conditions = {{1, CondOp::Gt, "banana"}};
  CHECK(execute(q, t).error->kind == ExecErrorKind::TypeMismatch);

  q.conditions = {{0, CondOp::Gt, "1"}};  // text cells fail numeric parse
  CHECK(execute(q, t).error->kind == ExecErrorKind::TypeMismatch);

  q.conditions.clear();
  q.select_column = 0;
  q.aggregation = Agg::Sum;  // text select under numeric aggregate
  CHECK(execute(q, t).error->kind == ExecErrorKind::TypeMismatch);
}

TEST_CASE("condition order does not change the outcome") {
  Table t = mini_table();
  SqlQuery a, b;
  a.select_column = b.select_column = 1;
  a.aggregation = b.aggregation = Agg::Sum;
  // one condition errors on some row, the other filters those rows out
  a.conditions = {{1, CondOp::Gt, "x"}, {0, CondOp::Eq, "ann"}};
  b.conditions = {{0, CondOp::Eq, "ann"}, {1, CondOp::Gt, "x"}};
  auto ra = execute(a, t);
  auto rb = execute(b, t);
  CHECK(ra.ok() == rb.ok());
  CHECK(ra.error->kind == rb.error->kind);
}

TEST_CASE("results_equal compares as multisets with tolerance") {
  ResultSet a, b;
  a.values = {Value::from_cell("x"), Value::from_cell("3")};
  b.values = {Value::from_cell("3.0000000000001"), Value::from_cell("X ")};
  a.empty_flag = b.empty_flag = false;
  CHECK(results_equal(a, b));

  b.values[0] = Value::from_cell("3.1");
  CHECK_FALSE(results_equal(a, b));

  ResultSet c, d;
  c.empty_flag = true;
  d.empty_flag = false;
  CHECK_FALSE(results_equal(c, d));

  ResultSet e, f;
  e.values = {Value::from_number(2.0)};
  f.values = {Value::from_cell("2")};
  e.empty_flag = f.empty_flag = false;
  CHECK(results_equal(e, f));

  f.values = {Value::from_cell("two")};
  CHECK_FALSE(results_equal(e, f));
}

TEST_CASE("executor agrees with the row-scan oracle") {
  std::mt19937_64 rng(0xFEEDu);
  const int kQueries = 1000;
  Table t;
  int mismatches = 0;
  for (int i = 0; i < kQueries; ++i) {
    if (i % 25 == 0) t = random_table(rng);
    SqlQuery q = random_query(rng, t);
    auto got = execute(q, t);
    auto want = oracle_execute(q, t);
    if (!agree(got, want)) ++mismatches;
  }
  CHECK(mismatches == 0);
}
