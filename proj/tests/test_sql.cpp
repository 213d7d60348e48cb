#include <doctest.h>

#include <random>

#include "sead/sql.hpp"
#include "sead/store.hpp"
#include "sead/text.hpp"

using namespace sead;

namespace {

Schema toy_schema() {
  Schema s;
  s.table_id = "t0";
  s.columns = {
      {0, {"player", "name"}, ColType::Text},
      {1, {"score"}, ColType::Real},
      {2, {"team"}, ColType::Text},
  };
  return s;
}

}  // namespace

TEST_CASE("schema serialization interleaves separators, names and types") {
  auto toks = serialize_schema(toy_schema());
  CHECK(toks == std::vector<std::string>{
                    "<col0>", "player", "name", ":", "text",
                    "<col1>", "score", ":", "real",
                    "<col2>", "team", ":", "text"});
}

TEST_CASE("sql serialization wraps values and uses column tokens") {
  SqlQuery q;
  q.select_column = 1;
  q.aggregation = Agg::Max;
  q.conditions = {{2, CondOp::Eq, "red sox"}};
  auto toks = serialize_sql(q, toy_schema());
  CHECK(toks == std::vector<std::string>{
                    "select", "max", "(", "<col1>", ")", "from", "table",
                    "where", "<col2>", "=", "`", "red", "sox", "`"});
}

TEST_CASE("sql serialization without aggregate or conditions") {
  SqlQuery q;
  q.select_column = 0;
  auto toks = serialize_sql(q, toy_schema());
  CHECK(toks == std::vector<std::string>{"select", "<col0>", "from", "table"});
}

TEST_CASE("serialization rejects out of range columns") {
  SqlQuery q;
  q.select_column = 7;
  CHECK_THROWS_AS(serialize_sql(q, toy_schema()), UnknownColumnError);
}

TEST_CASE("removed columns serialize as unknown token") {
  SqlQuery q;
  q.select_column = kUnknownColumn;
  q.conditions = {{kUnknownColumn, CondOp::Gt, "3"}};
  auto toks = serialize_sql(q, toy_schema());
  CHECK(toks == std::vector<std::string>{"select", "<unk>", "from", "table",
                                         "where", "<unk>", ">", "`", "3", "`"});
}

TEST_CASE("parser inverts serialization") {
  SqlQuery q;
  q.select_column = 1;
  q.aggregation = Agg::Count;
  q.conditions = {{0, CondOp::Eq, "john smith"}, {1, CondOp::Gt, "3.5"}};
  auto r = parse_sql(serialize_sql(q, toy_schema()), toy_schema());
  REQUIRE(r.ok());
  CHECK(*r.query == q);
}

TEST_CASE("parser reports malformed inputs with positions") {
  auto s = toy_schema();
  auto bad = [&](const std::vector<std::string>& toks) {
    auto r = parse_sql(toks, s);
    CHECK_FALSE(r.ok());
    return r.error.position;
  };
  CHECK(bad({}) == 0);                                              // empty
  CHECK(bad({"from", "table"}) == 0);                               // no select
  bad({"select", "max", "<col0>", "from", "table"});                // missing paren
  bad({"select", "<col9>", "from", "table"});                       // column range
  bad({"select", "<col0>", "from"});                                // truncated
  bad({"select", "<col0>", "from", "table", "where", "<col1>"});    // no op
  bad({"select", "<col0>", "from", "table", "where", "<col1>", "=", "3"});  // no ticks
  bad({"select", "<col0>", "from", "table", "x"});                  // trailing junk
}

TEST_CASE("parser rejects more than four conditions") {
  SqlQuery q;
  q.select_column = 0;
  for (int i = 0; i < 4; ++i)
    q.conditions.push_back({1, CondOp::Gt, std::to_string(i)});
  auto s = toy_schema();
  auto toks = serialize_sql(q, s);
  REQUIRE(parse_sql(toks, s).ok());
  std::vector<std::string> extra{"and", "<col1>", ">", "`", "9", "`"};
  toks.insert(toks.end(), extra.begin(), extra.end());
  CHECK_FALSE(parse_sql(toks, s).ok());
}

TEST_CASE("canonicalize sorts conditions and normalizes values") {
  SqlQuery a, b;
  a.select_column = b.select_column = 0;
  a.conditions = {{1, CondOp::Gt, "3"}, {0, CondOp::Eq, "x  y"}};
  b.conditions = {{0, CondOp::Eq, "x y"}, {1, CondOp::Gt, "3"}};
  CHECK(canonicalize(a) == canonicalize(b));
  CHECK(canonicalize(canonicalize(a)) == canonicalize(a));
}

TEST_CASE("round-trip holds across random query and schema draws") {
  std::mt19937_64 rng(7);
  auto corpus = gen_synthetic_corpus(11, 6, 400, 0);
  int checked = 0;
  for (const auto& rec : corpus.train.records) {
    const auto schema = schema_of(corpus.tables.at(rec.table_id));
    auto toks = serialize_sql(rec.gold, schema);
    auto r = parse_sql(toks, schema);
    REQUIRE(r.ok());
    REQUIRE(*r.query == rec.gold);
    ++checked;
  }
  CHECK(checked == 400);
}
