#pragma once

#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sead/sql.hpp"

namespace sead {

struct Table {
  std::string id;
  std::vector<std::string> header;
  std::vector<ColType> types;
  std::vector<std::vector<std::string>> rows;
  // Per-column: true when a real-typed column holds cells that do not parse
  // as numbers. Kept as text; the executor decides comparability.
  std::vector<bool> dirty;

  int width() const { return static_cast<int>(header.size()); }
};

struct ExampleRecord {
  std::string question;
  std::string table_id;
  SqlQuery gold;
};

enum class SplitName { Train, Dev, Test };

struct CorpusSplit {
  SplitName name = SplitName::Train;
  std::vector<ExampleRecord> records;

  size_t size() const { return records.size(); }
};

class FormatError : public std::runtime_error {
 public:
  FormatError(size_t line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
        line_no(line_no) {}
  size_t line_no;
};

class MissingTableError : public std::runtime_error {
 public:
  explicit MissingTableError(const std::string& table_id)
      : std::runtime_error("unknown table_id: " + table_id),
        table_id(table_id) {}
  std::string table_id;
};

struct IngestOptions {
  bool strict = false;  // abort on the first malformed line instead of skipping
};

struct IngestStats {
  size_t lines = 0;
  size_t parsed = 0;
  size_t skipped = 0;
  std::vector<std::string> warnings;
};

using TableMap = std::map<std::string, Table>;

// Rejects tables violating the structural invariants (header/types length
// mismatch, ragged rows, empty column names) and flags dirty real columns.
Table validate_table(Table table, size_t line_no);

TableMap load_tables(const std::string& path, const IngestOptions& opts = {},
                     IngestStats* stats = nullptr);

// One JSON object per line: question, table_id, sql{sel, agg, conds}.
CorpusSplit ingest_examples(const std::string& path, const TableMap& tables,
                            SplitName name, const IngestOptions& opts = {},
                            IngestStats* stats = nullptr);

// Convenience: load tables then examples from the two files.
CorpusSplit ingest_examples(const std::string& examples_path,
                            const std::string& tables_path, SplitName name,
                            const IngestOptions& opts = {},
                            IngestStats* stats = nullptr);

void write_tables(const std::string& path, const std::vector<Table>& tables);
void write_tables(const std::string& path, const TableMap& tables);
void write_examples(const std::string& path, const CorpusSplit& split);

Schema schema_of(const Table& table);

// Uniform draw of a column from a table other than exclude_table_id.
// Empty when fewer than two tables exist (addition noise is then disabled).
std::optional<Column> sample_foreign_column(std::mt19937_64& rng,
                                            const TableMap& tables,
                                            const std::string& exclude_table_id);

struct SyntheticCorpus {
  TableMap tables;
  CorpusSplit train;
  CorpusSplit dev;
};

// Deterministic templated corpus over small random tables. Every gold query
// executes non-empty on its own table; question text mentions condition
// columns and values verbatim, in randomized order.
SyntheticCorpus gen_synthetic_corpus(uint64_t seed, int n_tables, int n_train,
                                     int n_dev);

std::pair<TableMap, CorpusSplit> gen_synthetic(uint64_t seed, int n_tables,
                                               int n_examples);

TableMap as_table_map(const std::vector<Table>& tables);

}  // namespace sead
