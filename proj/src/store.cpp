#include "sead/store.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sead/executor.hpp"
#include "sead/text.hpp"

namespace sead {

using nlohmann::json;

namespace {

std::string cell_to_string(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  return j.dump();
}

ColType col_type_from_string(const std::string& s, size_t line_no) {
  if (s == "text") return ColType::Text;
  if (s == "real") return ColType::Real;
  throw FormatError(line_no, "unknown column type '" + s + "'");
}

void note(IngestStats* stats, const std::string& msg) {
  if (stats) stats->warnings.push_back(msg);
}

}  // namespace

Table validate_table(Table table, size_t line_no) {
  if (table.header.empty()) throw FormatError(line_no, "table has no columns");
  if (table.header.size() != table.types.size()) {
    throw FormatError(line_no, "header/types length mismatch");
  }
  for (const std::string& name : table.header) {
    if (tokenize_text(name).empty()) {
      throw FormatError(line_no, "empty column name");
    }
  }
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw FormatError(line_no, "row width mismatch");
    }
  }
  table.dirty.assign(table.header.size(), false);
  for (size_t c = 0; c < table.header.size(); ++c) {
    if (table.types[c] != ColType::Real) continue;
    for (const auto& row : table.rows) {
      if (!parse_number(row[c])) {
        table.dirty[c] = true;
        break;
      }
    }
  }
  return table;
}

TableMap load_tables(const std::string& path, const IngestOptions& opts,
                     IngestStats* stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tables file: " + path);
  TableMap tables;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (stats) stats->lines = line_no;
    if (trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      Table t;
      t.id = j.at("id").get<std::string>();
      for (const auto& h : j.at("header")) t.header.push_back(cell_to_string(h));
      for (const auto& s : j.at("types")) {
        t.types.push_back(
            col_type_from_string(s.get<std::string>(), line_no));
      }
      for (const auto& row : j.at("rows")) {
        std::vector<std::string> cells;
        for (const auto& cell : row) cells.push_back(cell_to_string(cell));
        t.rows.push_back(std::move(cells));
      }
      t = validate_table(std::move(t), line_no);
      tables[t.id] = std::move(t);
      if (stats) ++stats->parsed;
    } catch (const FormatError&) {
      if (opts.strict) throw;
      if (stats) ++stats->skipped;
      note(stats, "skipped malformed table at line " + std::to_string(line_no));
    } catch (const json::exception& e) {
      if (opts.strict) throw FormatError(line_no, e.what());
      if (stats) ++stats->skipped;
      note(stats, "skipped unparseable table at line " + std::to_string(line_no));
    }
  }
  return tables;
}

namespace {

ExampleRecord parse_example_line(const json& j, const TableMap& tables,
                                 size_t line_no) {
  ExampleRecord rec;
  rec.question = j.at("question").get<std::string>();
  rec.table_id = j.at("table_id").get<std::string>();
  auto it = tables.find(rec.table_id);
  if (it == tables.end()) throw MissingTableError(rec.table_id);
  const Table& table = it->second;

  const json& sql = j.at("sql");
  int sel = sql.at("sel").get<int>();
  int agg = sql.at("agg").get<int>();
  if (sel < 0 || sel >= table.width()) {
    throw FormatError(line_no, "sel out of range");
  }
  if (agg < 0 || agg >= kNumAggs) {
    throw FormatError(line_no, "agg out of range");
  }
  rec.gold.select_column = sel;
  rec.gold.aggregation = static_cast<Agg>(agg);
  for (const auto& c : sql.at("conds")) {
    if (!c.is_array() || c.size() != 3) {
      throw FormatError(line_no, "malformed condition");
    }
    Condition cond;
    cond.column = c[0].get<int>();
    int op = c[1].get<int>();
    if (cond.column < 0 || cond.column >= table.width()) {
      throw FormatError(line_no, "condition column out of range");
    }
    if (op < 0 || op >= kNumCondOps) {
      throw FormatError(line_no, "condition operator out of range");
    }
    cond.op = static_cast<CondOp>(op);
    cond.value = cell_to_string(c[2]);
    rec.gold.conditions.push_back(std::move(cond));
  }
  if (rec.gold.conditions.size() > static_cast<size_t>(kMaxConditions)) {
    throw FormatError(line_no, "more than 4 conditions");
  }
  return rec;
}

}  // namespace

CorpusSplit ingest_examples(const std::string& path, const TableMap& tables,
                            SplitName name, const IngestOptions& opts,
                            IngestStats* stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open examples file: " + path);
  CorpusSplit split;
  split.name = name;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (stats) stats->lines = line_no;
    if (trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      split.records.push_back(parse_example_line(j, tables, line_no));
      if (stats) ++stats->parsed;
    } catch (const MissingTableError&) {
      if (opts.strict) throw;
      if (stats) ++stats->skipped;
      note(stats, "skipped record with missing table at line " +
                      std::to_string(line_no));
    } catch (const FormatError&) {
      if (opts.strict) throw;
      if (stats) ++stats->skipped;
      note(stats,
           "skipped malformed record at line " + std::to_string(line_no));
    } catch (const json::exception& e) {
      if (opts.strict) throw FormatError(line_no, e.what());
      if (stats) ++stats->skipped;
      note(stats,
           "skipped unparseable record at line " + std::to_string(line_no));
    }
  }
  if (split.records.empty()) {
    note(stats, "split '" + path + "' has no records");
  }
  return split;
}

CorpusSplit ingest_examples(const std::string& examples_path,
                            const std::string& tables_path, SplitName name,
                            const IngestOptions& opts, IngestStats* stats) {
  TableMap tables = load_tables(tables_path, opts, stats);
  return ingest_examples(examples_path, tables, name, opts, stats);
}

void write_tables(const std::string& path, const std::vector<Table>& tables) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write tables file: " + path);
  for (const Table& t : tables) {
    json j;
    j["id"] = t.id;
    j["header"] = t.header;
    std::vector<std::string> types;
    for (ColType ct : t.types) types.push_back(col_type_token(ct));
    j["types"] = types;
    j["rows"] = t.rows;
    out << j.dump() << '\n';
  }
}

void write_examples(const std::string& path, const CorpusSplit& split) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write examples file: " + path);
  for (const ExampleRecord& rec : split.records) {
    json conds = json::array();
    for (const Condition& c : rec.gold.conditions) {
      conds.push_back(json::array(
          {c.column, static_cast<int>(c.op), c.value}));
    }
    json j;
    j["question"] = rec.question;
    j["table_id"] = rec.table_id;
    j["sql"] = {{"sel", rec.gold.select_column},
                {"agg", static_cast<int>(rec.gold.aggregation)},
                {"conds", conds}};
    out << j.dump() << '\n';
  }
}

Schema schema_of(const Table& table) {
  Schema schema;
  schema.table_id = table.id;
  for (int i = 0; i < table.width(); ++i) {
    Column col;
    col.index = i;
    col.name = tokenize_text(table.header[i]);
    col.type = table.types[i];
    schema.columns.push_back(std::move(col));
  }
  return schema;
}

std::optional<Column> sample_foreign_column(std::mt19937_64& rng,
                                            const TableMap& tables,
                                            const std::string& exclude_table_id) {
  std::vector<const Table*> candidates;
  for (const auto& [id, table] : tables) {
    if (id != exclude_table_id) candidates.push_back(&table);
  }
  if (candidates.empty()) return std::nullopt;
  std::uniform_int_distribution<size_t> pick_table(0, candidates.size() - 1);
  const Table* t = candidates[pick_table(rng)];
  std::uniform_int_distribution<int> pick_col(0, t->width() - 1);
  int c = pick_col(rng);
  Column col;
  col.index = c;
  col.name = tokenize_text(t->header[c]);
  col.type = t->types[c];
  return col;
}

void write_tables(const std::string& path, const TableMap& tables) {
  std::vector<Table> flat;
  flat.reserve(tables.size());
  for (const auto& [id, t] : tables) flat.push_back(t);
  write_tables(path, flat);
}

TableMap as_table_map(const std::vector<Table>& tables) {
  TableMap map;
  for (const Table& t : tables) map[t.id] = t;
  return map;
}

// ---------------------------------------------------------------------------
// Synthetic corpus generation
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string>& text_column_pool() {
  static const std::vector<std::string> pool = {
      "city",    "team",     "player", "nation",  "venue",  "outcome",
      "label",   "owner",    "driver", "engine",  "model",  "coach",
      "district", "county",  "format", "sponsor", "team name",
      "first name", "last name", "home town"};
  return pool;
}

const std::vector<std::string>& real_column_pool() {
  static const std::vector<std::string> pool = {
      "score",  "year",   "rank",   "points",   "wins",   "age",
      "height", "goals",  "round",  "prize",    "speed",  "laps",
      "capacity", "budget", "area", "price",    "final score",
      "birth year", "home wins", "total goals"};
  return pool;
}

const std::vector<std::string>& text_value_pool() {
  static const std::vector<std::string> pool = {
      "arden",  "bolton", "casper", "delmar",  "edison",  "fargo",
      "galway", "harlow", "irving", "juneau",  "keller",  "lisbon",
      "madrid", "norfolk", "oslo",  "perth",   "quincy",  "racine",
      "salem",  "tacoma", "utica",  "verona",  "weston",  "yonkers",
      "zurich", "amber",  "birch",  "cedar",   "dahlia",  "elm",
      "fern",   "hazel",  "iris",   "jasmine", "laurel",  "maple",
      "olive",  "poppy",  "rowan",  "sage",    "tulip",   "willow",
      "apollo", "boreas", "castor", "dorian",  "eris",    "felix",
      "gaia",   "helios", "icarus", "jupiter", "kronos",  "luna",
      "midas",  "nyx",    "orion",  "pallas",  "rhea",    "selene",
      "titan",  "vesta",  "wren",   "atlas",   "bruno",   "cosmo",
      "dante",  "enzo",   "flint",  "gino",    "hugo",    "ivo",
      "jett",   "kai",    "leo",    "milo",    "nico",    "otto",
      "pax",    "remy"};
  return pool;
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& pool) {
  std::uniform_int_distribution<size_t> d(0, pool.size() - 1);
  return pool[d(rng)];
}

int rand_int(std::mt19937_64& rng, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  return d(rng);
}

double rand_unit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  return d(rng);
}

std::string format_number(double v) {
  if (v == static_cast<long long>(v)) {
    return std::to_string(static_cast<long long>(v));
  }
  std::ostringstream os;
  os.precision(1);
  os << std::fixed << v;
  return os.str();
}

std::string gen_text_value(std::mt19937_64& rng) {
  std::string v = pick(rng, text_value_pool());
  if (rand_unit(rng) < 0.4) v += " " + pick(rng, text_value_pool());
  return v;
}

std::string gen_real_value(std::mt19937_64& rng) {
  if (rand_unit(rng) < 0.7) return format_number(rand_int(rng, 1, 400));
  return format_number(rand_int(rng, 10, 4000) / 10.0);
}

Table gen_table(std::mt19937_64& rng, int index) {
  Table t;
  t.id = "synth_t" + std::to_string(index);
  int n_cols = rand_int(rng, 3, 6);
  std::vector<std::string> text_names = text_column_pool();
  std::vector<std::string> real_names = real_column_pool();
  std::shuffle(text_names.begin(), text_names.end(), rng);
  std::shuffle(real_names.begin(), real_names.end(), rng);
  size_t ti = 0, ri = 0;
  for (int c = 0; c < n_cols; ++c) {
    // Guarantee at least one column of each type.
    bool text = c == 0 ? true : (c == 1 ? false : rand_unit(rng) < 0.5);
    if (text) {
      t.header.push_back(text_names[ti++ % text_names.size()]);
      t.types.push_back(ColType::Text);
    } else {
      t.header.push_back(real_names[ri++ % real_names.size()]);
      t.types.push_back(ColType::Real);
    }
  }
  int n_rows = rand_int(rng, 8, 16);
  for (int r = 0; r < n_rows; ++r) {
    std::vector<std::string> row;
    for (int c = 0; c < n_cols; ++c) {
      row.push_back(t.types[c] == ColType::Text ? gen_text_value(rng)
                                                : gen_real_value(rng));
    }
    t.rows.push_back(std::move(row));
  }
  return validate_table(std::move(t), 0);
}

const std::vector<std::string>& head_phrases(Agg agg) {
  static const std::vector<std::string> none = {"what is", "show", "list",
                                                "which", "give"};
  static const std::vector<std::string> cnt = {"how many", "count of",
                                               "number of"};
  static const std::vector<std::string> mx = {"largest", "highest", "maximum",
                                              "top"};
  static const std::vector<std::string> mn = {"smallest", "lowest", "minimum"};
  static const std::vector<std::string> sm = {"total", "sum of", "combined"};
  static const std::vector<std::string> av = {"average", "mean", "typical"};
  switch (agg) {
    case Agg::None: return none;
    case Agg::Count: return cnt;
    case Agg::Max: return mx;
    case Agg::Min: return mn;
    case Agg::Sum: return sm;
    case Agg::Avg: return av;
  }
  return none;
}

const std::vector<std::string>& op_phrases(CondOp op) {
  static const std::vector<std::string> eq = {"is", "equals", "of"};
  static const std::vector<std::string> gt = {"above", "over", "more than"};
  static const std::vector<std::string> lt = {"below", "under", "less than"};
  switch (op) {
    case CondOp::Eq: return eq;
    case CondOp::Gt: return gt;
    case CondOp::Lt: return lt;
  }
  return eq;
}

struct GenExample {
  SqlQuery query;
  std::string question;
};

GenExample gen_example(std::mt19937_64& rng, const Table& table) {
  GenExample out;
  int width = table.width();
  std::uniform_int_distribution<int> col_dist(0, width - 1);
  int anchor = rand_int(rng, 0, static_cast<int>(table.rows.size()) - 1);
  const auto& anchor_row = table.rows[anchor];

  // SELECT clause.
  out.query.select_column = col_dist(rng);
  double agg_draw = rand_unit(rng);
  if (agg_draw < 0.45) {
    out.query.aggregation = Agg::None;
  } else if (agg_draw < 0.6) {
    out.query.aggregation = Agg::Count;
  } else {
    if (table.types[out.query.select_column] != ColType::Real) {
      // Numeric aggregations need a real column; retarget if one exists.
      std::vector<int> real_cols;
      for (int c = 0; c < width; ++c) {
        if (table.types[c] == ColType::Real) real_cols.push_back(c);
      }
      out.query.select_column = real_cols[rand_int(
          rng, 0, static_cast<int>(real_cols.size()) - 1)];
    }
    static const Agg numeric_aggs[] = {Agg::Max, Agg::Min, Agg::Sum, Agg::Avg};
    out.query.aggregation = numeric_aggs[rand_int(rng, 0, 3)];
  }

  // WHERE clause: anchored to one row so the conjunction is satisfiable.
  double nc_draw = rand_unit(rng);
  int n_conds = nc_draw < 0.15 ? 0 : nc_draw < 0.6 ? 1 : nc_draw < 0.9 ? 2 : 3;
  n_conds = std::min(n_conds, width);
  std::vector<int> cols(width);
  for (int c = 0; c < width; ++c) cols[c] = c;
  std::shuffle(cols.begin(), cols.end(), rng);
  for (int i = 0; i < n_conds; ++i) {
    Condition cond;
    cond.column = cols[i];
    const std::string& cell = anchor_row[cond.column];
    if (table.types[cond.column] == ColType::Text) {
      cond.op = CondOp::Eq;
      cond.value = cell;
    } else {
      double draw = rand_unit(rng);
      double v = *parse_number(cell);
      if (draw < 0.5) {
        cond.op = CondOp::Eq;
        cond.value = cell;
      } else if (draw < 0.75) {
        cond.op = CondOp::Gt;
        cond.value = format_number(v - rand_int(rng, 1, 3));
      } else {
        cond.op = CondOp::Lt;
        cond.value = format_number(v + rand_int(rng, 1, 3));
      }
    }
    out.query.conditions.push_back(std::move(cond));
  }

  // Question: head + condition mentions in random order.
  std::string q = pick(rng, head_phrases(out.query.aggregation));
  q += " " + normalize_text(table.header[out.query.select_column]);
  if (!out.query.conditions.empty()) {
    static const std::vector<std::string> seps = {"when", "where", "with",
                                                  "for"};
    q += " " + pick(rng, seps);
    std::vector<int> order(out.query.conditions.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t i = 0; i < order.size(); ++i) {
      const Condition& cond = out.query.conditions[order[i]];
      if (i) q += " and";
      q += " " + normalize_text(table.header[cond.column]);
      q += " " + pick(rng, op_phrases(cond.op));
      q += " " + normalize_text(cond.value);
    }
  }
  out.question = q;
  return out;
}

std::vector<ExampleRecord> gen_split(std::mt19937_64& rng,
                                     const std::vector<Table>& tables,
                                     int n_examples) {
  std::vector<ExampleRecord> records;
  records.reserve(n_examples);
  std::uniform_int_distribution<size_t> table_dist(0, tables.size() - 1);
  while (static_cast<int>(records.size()) < n_examples) {
    const Table& table = tables[table_dist(rng)];
    GenExample gen = gen_example(rng, table);
    auto outcome = execute(gen.query, table);
    if (!outcome.ok() || outcome.result->empty_flag) continue;
    ExampleRecord rec;
    rec.question = gen.question;
    rec.table_id = table.id;
    rec.gold = std::move(gen.query);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

SyntheticCorpus gen_synthetic_corpus(uint64_t seed, int n_tables, int n_train,
                                     int n_dev) {
  if (n_tables < 1) throw std::invalid_argument("n_tables must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Table> tables;
  tables.reserve(n_tables);
  for (int i = 0; i < n_tables; ++i) tables.push_back(gen_table(rng, i));
  SyntheticCorpus corpus;
  corpus.train.name = SplitName::Train;
  corpus.train.records = gen_split(rng, tables, n_train);
  corpus.dev.name = SplitName::Dev;
  corpus.dev.records = gen_split(rng, tables, n_dev);
  corpus.tables = as_table_map(tables);
  return corpus;
}

std::pair<TableMap, CorpusSplit> gen_synthetic(uint64_t seed, int n_tables,
                                               int n_examples) {
  if (n_examples < 1) throw std::invalid_argument("n_examples must be >= 1");
  SyntheticCorpus corpus = gen_synthetic_corpus(seed, n_tables, n_examples, 0);
  return {std::move(corpus.tables), std::move(corpus.train)};
}

}  // namespace sead
