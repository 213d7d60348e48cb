#include <random>
#include <vector>

#include <json.hpp>

#include "doctest.h"
#include "sead/metrics.hpp"

using namespace sead;

namespace {

Table duplicate_rows_table() {
  Table t;
  t.id = "dup";
  t.header = {"name", "tag"};
  t.types = {ColType::Text, ColType::Text};
  t.rows = {{"ada", "x"}, {"ada", "y"}, {"bob", "z"}};
  t.dirty = {false, false};
  return t;
}

SqlQuery q(int sel, Agg agg, std::vector<Condition> conds) {
  SqlQuery out;
  out.select_column = sel;
  out.aggregation = agg;
  out.conditions = std::move(conds);
  return out;
}

}  // namespace

TEST_CASE("logical form match is canonical, not positional") {
  SqlQuery a = q(0, Agg::None, {{1, CondOp::Eq, "x"}, {0, CondOp::Gt, "3"}});
  SqlQuery b = q(0, Agg::None, {{0, CondOp::Gt, "3"}, {1, CondOp::Eq, "x"}});
  CHECK(acc_lf(a, a));
  CHECK(acc_lf(a, b));
  SqlQuery c = a;
  c.aggregation = Agg::Max;
  CHECK_FALSE(acc_lf(a, c));
  SqlQuery d = a;
  d.conditions[0].value = "  x  ";  // whitespace-normalized equal
  CHECK(acc_lf(a, d));
}

TEST_CASE("execution match accepts execution-equivalent differing forms") {
  Table t = duplicate_rows_table();
  SqlQuery gold = q(0, Agg::None, {{1, CondOp::Eq, "x"}});
  CHECK(acc_ex(gold, gold, t));

  // different value, same selected rows
  SqlQuery pred = q(0, Agg::None, {{1, CondOp::Eq, "y"}});
  CHECK(acc_ex(pred, gold, t));
  CHECK_FALSE(acc_lf(pred, gold));

  // prediction that cannot execute never matches
  SqlQuery broken = q(kUnknownColumn, Agg::None, {});
  CHECK_FALSE(acc_ex(broken, gold, t));
}

TEST_CASE("component flags follow their definitions") {
  SqlQuery gold =
      q(1, Agg::Count, {{0, CondOp::Eq, "a"}, {2, CondOp::Gt, "5"}});

  auto all = component_scores(gold, gold);
  CHECK(all.s_col);
  CHECK(all.s_agg);
  CHECK(all.w_col);
  CHECK(all.w_op);
  CHECK(all.w_val);

  SqlQuery value_off = gold;
  value_off.conditions[0].value = "b";
  auto f = component_scores(value_off, gold);
  CHECK(f.w_col);
  CHECK(f.w_op);
  CHECK_FALSE(f.w_val);

  SqlQuery reordered = gold;
  std::swap(reordered.conditions[0], reordered.conditions[1]);
  auto r = component_scores(reordered, gold);
  CHECK(r.w_col);
  CHECK(r.w_op);
  CHECK(r.w_val);

  SqlQuery op_off = gold;
  op_off.conditions[1].op = CondOp::Lt;
  auto o = component_scores(op_off, gold);
  CHECK(o.w_col);
  CHECK_FALSE(o.w_op);
  CHECK_FALSE(o.w_val);

  SqlQuery col_off = gold;
  col_off.conditions[1].column = 1;
  auto c = component_scores(col_off, gold);
  CHECK_FALSE(c.w_col);
  CHECK_FALSE(c.w_op);
  CHECK_FALSE(c.w_val);
}

TEST_CASE("component flags nest over random query pairs") {
  std::mt19937_64 rng(77);
  auto random_query = [&]() {
    SqlQuery out;
    out.select_column = static_cast<int>(rng() % 3);
    out.aggregation = static_cast<Agg>(rng() % kNumAggs);
    int n = static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
      Condition c;
      c.column = static_cast<int>(rng() % 3);
      c.op = static_cast<CondOp>(rng() % kNumCondOps);
      c.value = std::string(1, char('a' + rng() % 3));
      out.conditions.push_back(c);
    }
    return out;
  };
  for (int trial = 0; trial < 2000; ++trial) {
    SqlQuery a = random_query(), b = random_query();
    auto f = component_scores(a, b);
    if (f.w_val) CHECK(f.w_op);
    if (f.w_op) CHECK(f.w_col);
  }
}

TEST_CASE("report fractions recompute exactly from the verdict log") {
  EvalReport rep;
  for (int i = 0; i < 8; ++i) {
    ExampleVerdict v;
    v.index = i;
    v.parsed = i > 0;
    v.lf = i % 2 == 0;
    v.ex = i % 4 != 3;
    v.components.s_col = i < 6;
    v.components.s_agg = true;
    v.components.w_col = i % 2 == 1;
    v.components.w_op = i % 4 == 1;
    v.components.w_val = false;
    rep.verdicts.push_back(v);
  }
  rep.recompute();
  CHECK(rep.n == 8);
  CHECK(rep.acc_lf == doctest::Approx(0.5));
  CHECK(rep.acc_ex == doctest::Approx(0.75));
  CHECK(rep.s_col == doctest::Approx(0.75));
  CHECK(rep.s_agg == doctest::Approx(1.0));
  CHECK(rep.w_col == doctest::Approx(0.5));
  CHECK(rep.w_op == doctest::Approx(0.25));
  CHECK(rep.w_val == doctest::Approx(0.0));

  // a second recompute is a fixed point
  double lf = rep.acc_lf;
  rep.recompute();
  CHECK(rep.acc_lf == lf);
}

TEST_CASE("json report is valid and carries every field") {
  EvalReport rep;
  ExampleVerdict v;
  v.index = 0;
  v.parsed = v.lf = v.ex = true;
  v.prediction = "select <col0> from table";
  v.decode_note = "validated";
  rep.verdicts.push_back(v);
  rep.recompute();
  rep.bleu = 61.25;

  auto j = nlohmann::json::parse(report_json(rep));
  CHECK(j["n"] == 1);
  CHECK(j["acc_lf"] == 1.0);
  CHECK(j["bleu"] == 61.25);
  CHECK(j["components"]["w_val"] == 0.0);
  REQUIRE(j["verdicts"].size() == 1);
  CHECK(j["verdicts"][0]["prediction"] == "select <col0> from table");
  CHECK(j["verdicts"][0]["note"] == "validated");

  std::string table = report_table(rep, "eval");
  CHECK(table.find("eval") != std::string::npos);
  CHECK(table.find("acc_lf") != std::string::npos);
  CHECK(table.find("100.0") != std::string::npos);
}
