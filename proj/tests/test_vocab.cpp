#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>

#include "sead/noising.hpp"
#include "sead/sql.hpp"
#include "sead/store.hpp"
#include "sead/text.hpp"
#include "sead/vocab.hpp"

using namespace sead;
namespace fs = std::filesystem;

namespace {

SyntheticCorpus small_corpus() { return gen_synthetic_corpus(77, 5, 40, 10); }

}  // namespace

TEST_CASE("vocabulary ids are dense and partitions ordered") {
  auto corpus = small_corpus();
  auto v = build_vocab(corpus.train, corpus.tables, 1);
  REQUIRE(v.size() > 0);
  CHECK(v.tokens.size() == v.partitions.size());
  CHECK(v.ids.size() == v.tokens.size());
  for (int i = 0; i < v.size(); ++i) CHECK(*v.id_of(v.tokens[i]) == i);

  // partition blocks appear in order: specials, keywords, column words, corpus
  int last_rank = 0;
  auto rank = [](TokenPartition p) {
    switch (p) {
      case TokenPartition::Special: return 0;
      case TokenPartition::SqlKeyword: return 1;
      case TokenPartition::ColumnWord: return 2;
      case TokenPartition::CorpusWord: return 3;
    }
    return 4;
  };
  for (int i = 0; i < v.size(); ++i) {
    CHECK(rank(v.partitions[i]) >= last_rank);
    last_rank = rank(v.partitions[i]);
  }

  CHECK(v.pad_id == 0);
  CHECK(v.id_of(tok::kToSql).has_value());
  CHECK(v.id_of(tok::kToNl).has_value());
  CHECK(v.id_of(col_token(0)).has_value());
  CHECK(v.id_of(col_token(kNumColTokens - 1)).has_value());
  CHECK(v.id_of("select").has_value());
  CHECK(v.id_of("where").has_value());
}

TEST_CASE("partitions are disjoint with keyword priority") {
  auto corpus = small_corpus();
  auto v = build_vocab(corpus.train, corpus.tables, 1);
  // "count" a keyword even though questions contain the word
  auto id = v.id_of("count");
  REQUIRE(id.has_value());
  CHECK(v.partitions[*id] == TokenPartition::SqlKeyword);
  std::set<std::string> seen;
  for (const auto& t : v.tokens) CHECK(seen.insert(t).second);
}

TEST_CASE("min_freq filters corpus words but not schema words") {
  auto corpus = small_corpus();
  auto v1 = build_vocab(corpus.train, corpus.tables, 1);
  auto v100 = build_vocab(corpus.train, corpus.tables, 1000000);
  CHECK(v100.size() < v1.size());
  int corpus_words = 0;
  for (auto p : v100.partitions)
    if (p == TokenPartition::CorpusWord) ++corpus_words;
  CHECK(corpus_words == 0);
  int col_words = 0;
  for (auto p : v100.partitions)
    if (p == TokenPartition::ColumnWord) ++col_words;
  CHECK(col_words > 0);
}

TEST_CASE("empty corpus is rejected") {
  CorpusSplit empty;
  TableMap tables;
  CHECK_THROWS_AS(build_vocab(empty, tables, 1), EmptyCorpusError);
}

TEST_CASE("vocabulary file round-trips") {
  auto corpus = small_corpus();
  auto v = build_vocab(corpus.train, corpus.tables, 1);
  auto path = fs::temp_directory_path() /
              ("vocab_" + std::to_string(std::random_device{}()) + ".txt");
  save_vocab(path.string(), v);
  auto w = load_vocab(path.string());
  fs::remove(path);
  CHECK(w.tokens == v.tokens);
  REQUIRE(w.partitions.size() == v.partitions.size());
  for (size_t i = 0; i < v.partitions.size(); ++i)
    CHECK(w.partitions[i] == v.partitions[i]);
  CHECK(w.pad_id == v.pad_id);
  CHECK(w.eos_id == v.eos_id);
  CHECK(w.unk_id == v.unk_id);
}

TEST_CASE("alignment covers vocabulary ids and source copies") {
  auto corpus = small_corpus();
  auto v = build_vocab(corpus.train, corpus.tables, 1);

  TrainingInstance inst;
  inst.source = {"<2sql>", "alpha", "beta", "alpha", "<col0>"};
  inst.target = {"select", "alpha", "<col0>"};
  auto a = align_targets(inst, v, true, false);
  REQUIRE(a.supervision.size() == 3);

  // keyword has a vocab id and no source copy
  REQUIRE(a.supervision[0].size() == 1);
  CHECK(a.supervision[0][0] == *v.id_of("select"));

  // "alpha" is out of vocabulary but occurs twice in the source
  bool alpha_in_vocab = v.id_of("alpha").has_value();
  size_t expected = (alpha_in_vocab ? 1 : 0) + 2;
  REQUIRE(a.supervision[1].size() == expected);
  CHECK(a.supervision[1][expected - 2] == v.size() + 1);
  CHECK(a.supervision[1][expected - 1] == v.size() + 3);

  // separator token both in vocab and in source
  REQUIRE(a.supervision[2].size() == 2);
  CHECK(a.supervision[2][0] == *v.id_of(col_token(0)));
  CHECK(a.supervision[2][1] == v.size() + 4);
}

TEST_CASE("strict alignment raises on unreachable targets") {
  auto corpus = small_corpus();
  auto v = build_vocab(corpus.train, corpus.tables, 1);
  TrainingInstance inst;
  inst.source = {"<2sql>", "x"};
  inst.target = {"zzzzunseen"};
  CHECK_THROWS_AS(align_targets(inst, v, true, true), UnsupervisablePositionError);
  auto a = align_targets(inst, v, true, false);
  REQUIRE(a.supervision.size() == 1);
  CHECK(a.supervision[0] == std::vector<int>{v.unk_id});
  CHECK(a.fallback_count == 1);
}

TEST_CASE("pointer-free alignment never references source positions") {
  auto corpus = small_corpus();
  auto v = build_vocab(corpus.train, corpus.tables, 1);
  const auto& rec = corpus.train.records[0];
  const auto schema = schema_of(corpus.tables.at(rec.table_id));
  std::mt19937_64 rng(4);
  auto inst = make_instance(rec, schema, NoiseConfig::none(), rng, nullptr);
  auto a = align_targets(inst, v, false, false);
  for (const auto& sup : a.supervision)
    for (int idx : sup) CHECK(idx < v.size());
}

TEST_CASE("training instances from the generator are fully supervisable") {
  auto corpus = small_corpus();
  auto v = build_vocab(corpus.train, corpus.tables, 1);
  auto sampler = [&](std::mt19937_64& r) {
    return sample_foreign_column(r, corpus.tables, "");
  };
  NoiseConfig cfg;  // defaults: erosion + shuffle on
  for (size_t i = 0; i < corpus.train.records.size(); ++i) {
    const auto& rec = corpus.train.records[i];
    const auto schema = schema_of(corpus.tables.at(rec.table_id));
    auto rng = derive_rng(5, 0, i);
    auto inst = make_instance(rec, schema, cfg, rng, sampler);
    auto a = align_targets(inst, v, true, false);
    CHECK(a.fallback_count == 0);
  }
}

TEST_CASE("pointer reachability check flags out-of-question values") {
  auto corpus = small_corpus();
  const auto& rec = corpus.train.records[0];
  const auto schema = schema_of(corpus.tables.at(rec.table_id));
  CHECK(values_pointer_reachable(rec, schema));

  ExampleRecord bad = rec;
  Condition c;
  c.column = 0;
  c.op = CondOp::Eq;
  c.value = "qqqqnowhere";
  bad.gold.conditions.push_back(c);
  CHECK_FALSE(values_pointer_reachable(bad, schema));
}
