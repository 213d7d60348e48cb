#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sead/bleu.hpp"
#include "sead/config.hpp"
#include "sead/pipeline.hpp"

namespace py = pybind11;
using namespace sead;

namespace {

using Model = TransformerT<float>;

SqlQuery parse_or_throw(const std::vector<std::string>& tokens,
                        const Schema& schema) {
  ParseResult r = parse_sql(tokens, schema);
  if (!r.ok()) {
    std::ostringstream msg;
    msg << "parse failed at position " << r.error.position << ": "
        << r.error.reason;
    throw py::value_error(msg.str());
  }
  return *r.query;
}

ResultSet execute_or_throw(const SqlQuery& q, const Table& t) {
  ExecOutcome out = execute(q, t);
  if (!out.ok()) throw std::runtime_error(out.error->detail);
  return *out.result;
}

TrainingInstance noised_instance(const ExampleRecord& rec, const Schema& schema,
                                 const NoiseConfig& noise, uint64_t seed,
                                 const TableMap& tables) {
  auto rng = derive_rng(seed, 0, 0);
  auto sampler = make_foreign_sampler(tables, rec.table_id);
  return make_instance(rec, schema, noise, rng, sampler);
}

}  // namespace

PYBIND11_MODULE(_sead, m) {
  m.doc() = "schema-aware denoising text-to-SQL pipeline";

  // ---- enums ----
  py::enum_<ColType>(m, "ColType")
      .value("TEXT", ColType::Text)
      .value("REAL", ColType::Real);
  py::enum_<Agg>(m, "Agg")
      .value("NONE", Agg::None)
      .value("MAX", Agg::Max)
      .value("MIN", Agg::Min)
      .value("COUNT", Agg::Count)
      .value("SUM", Agg::Sum)
      .value("AVG", Agg::Avg);
  py::enum_<CondOp>(m, "CondOp")
      .value("EQ", CondOp::Eq)
      .value("GT", CondOp::Gt)
      .value("LT", CondOp::Lt);
  py::enum_<SplitName>(m, "SplitName")
      .value("TRAIN", SplitName::Train)
      .value("DEV", SplitName::Dev)
      .value("TEST", SplitName::Test);
  py::enum_<Direction>(m, "Direction")
      .value("TO_SQL", Direction::ToSql)
      .value("TO_NL", Direction::ToNl);
  py::enum_<DecodeMode>(m, "DecodeMode")
      .value("GREEDY", DecodeMode::Greedy)
      .value("BEAM", DecodeMode::Beam)
      .value("EG_CS", DecodeMode::EgCs)
      .value("EG_ACS", DecodeMode::EgAcs);
  py::enum_<EgStatus>(m, "EgStatus")
      .value("VALIDATED", EgStatus::Validated)
      .value("DEGRADED", EgStatus::Degraded)
      .value("NO_PARSEABLE", EgStatus::NoParseableCandidate);

  // ---- SQL / schema ----
  py::class_<Condition>(m, "Condition")
      .def(py::init<>())
      .def(py::init([](int column, CondOp op, std::string value) {
             return Condition{column, op, std::move(value)};
           }),
           py::arg("column"), py::arg("op"), py::arg("value"))
      .def_readwrite("column", &Condition::column)
      .def_readwrite("op", &Condition::op)
      .def_readwrite("value", &Condition::value)
      .def("__eq__", [](const Condition& a, const Condition& b) { return a == b; })
      .def("__repr__", [](const Condition& c) {
        return "Condition(" + std::to_string(c.column) + ", " +
               op_token(c.op) + ", '" + c.value + "')";
      });

  py::class_<SqlQuery>(m, "SqlQuery")
      .def(py::init<>())
      .def(py::init([](int sel, Agg agg, std::vector<Condition> conds) {
             return SqlQuery{sel, agg, std::move(conds)};
           }),
           py::arg("select_column"), py::arg("aggregation") = Agg::None,
           py::arg("conditions") = std::vector<Condition>{})
      .def_readwrite("select_column", &SqlQuery::select_column)
      .def_readwrite("aggregation", &SqlQuery::aggregation)
      .def_readwrite("conditions", &SqlQuery::conditions)
      .def("__eq__", [](const SqlQuery& a, const SqlQuery& b) { return a == b; });

  py::class_<Column>(m, "Column")
      .def_readonly("index", &Column::index)
      .def_readonly("name", &Column::name)
      .def_readonly("type", &Column::type);

  py::class_<Schema>(m, "Schema")
      .def_readonly("table_id", &Schema::table_id)
      .def_readonly("columns", &Schema::columns)
      .def("__len__", &Schema::size);

  // ---- storage ----
  py::class_<Table>(m, "Table")
      .def(py::init<>())
      .def_readwrite("id", &Table::id)
      .def_readwrite("header", &Table::header)
      .def_readwrite("types", &Table::types)
      .def_readwrite("rows", &Table::rows)
      .def_property_readonly("width", &Table::width);

  py::class_<ExampleRecord>(m, "ExampleRecord")
      .def(py::init<>())
      .def(py::init([](std::string question, std::string table_id, SqlQuery gold) {
             return ExampleRecord{std::move(question), std::move(table_id),
                                  std::move(gold)};
           }),
           py::arg("question"), py::arg("table_id"), py::arg("gold"))
      .def_readwrite("question", &ExampleRecord::question)
      .def_readwrite("table_id", &ExampleRecord::table_id)
      .def_readwrite("gold", &ExampleRecord::gold);

  py::class_<CorpusSplit>(m, "CorpusSplit")
      .def(py::init<>())
      .def(py::init([](SplitName name, std::vector<ExampleRecord> records) {
             return CorpusSplit{name, std::move(records)};
           }),
           py::arg("name"), py::arg("records"))
      .def_readwrite("name", &CorpusSplit::name)
      .def_readwrite("records", &CorpusSplit::records)
      .def("__len__", &CorpusSplit::size);

  py::class_<SyntheticCorpus>(m, "SyntheticCorpus")
      .def_readonly("tables", &SyntheticCorpus::tables)
      .def_readonly("train", &SyntheticCorpus::train)
      .def_readonly("dev", &SyntheticCorpus::dev);

  m.def("gen_synthetic_corpus", &gen_synthetic_corpus, py::arg("seed"),
        py::arg("n_tables"), py::arg("n_train"), py::arg("n_dev"));
  m.def(
      "load_tables",
      [](const std::string& path, bool strict) {
        return load_tables(path, IngestOptions{strict}, nullptr);
      },
      py::arg("path"), py::arg("strict") = false);
  m.def(
      "ingest_examples",
      [](const std::string& path, const TableMap& tables, SplitName split,
         bool strict) {
        return ingest_examples(path, tables, split, IngestOptions{strict},
                               nullptr);
      },
      py::arg("path"), py::arg("tables"), py::arg("split") = SplitName::Train,
      py::arg("strict") = false);
  m.def("schema_of", &schema_of, py::arg("table"));

  // ---- text / serialization ----
  m.def("tokenize_text", &tokenize_text, py::arg("text"));
  m.def("normalize_text", &normalize_text, py::arg("text"));
  m.def("join_tokens", &join_tokens, py::arg("tokens"));
  m.def("serialize_schema", &serialize_schema, py::arg("schema"));
  m.def("serialize_sql", &serialize_sql, py::arg("query"), py::arg("schema"));
  m.def("parse_sql", &parse_or_throw, py::arg("tokens"), py::arg("schema"));
  m.def(
      "canonicalize",
      [](const SqlQuery& q) { return sead::canonicalize(q); },
      py::arg("query"));

  // ---- execution ----
  py::class_<Value>(m, "Value")
      .def_readonly("text", &Value::text)
      .def_readonly("num", &Value::num)
      .def("__repr__", &Value::repr);
  py::class_<ResultSet>(m, "ResultSet")
      .def_readonly("values", &ResultSet::values)
      .def_readonly("empty", &ResultSet::empty_flag)
      .def("__len__",
           [](const ResultSet& r) { return r.values.size(); });
  m.def("execute", &execute_or_throw, py::arg("query"), py::arg("table"));
  m.def("results_equal", &results_equal, py::arg("a"), py::arg("b"));

  // ---- noising ----
  py::class_<NoiseConfig>(m, "NoiseConfig")
      .def(py::init<>())
      .def_static("none", &NoiseConfig::none)
      .def_readwrite("p_drop", &NoiseConfig::p_drop)
      .def_readwrite("p_add", &NoiseConfig::p_add)
      .def_readwrite("p_shuffle", &NoiseConfig::p_shuffle)
      .def_readwrite("p_swap", &NoiseConfig::p_swap)
      .def_readwrite("erosion_enabled", &NoiseConfig::erosion_enabled)
      .def_readwrite("shuffle_enabled", &NoiseConfig::shuffle_enabled)
      .def_readwrite("infilling_enabled", &NoiseConfig::infilling_enabled)
      .def_readwrite("infill_rate", &NoiseConfig::infill_rate)
      .def_readwrite("infill_mean_span", &NoiseConfig::infill_mean_span);

  py::class_<TrainingInstance>(m, "TrainingInstance")
      .def_readonly("source", &TrainingInstance::source)
      .def_readonly("target", &TrainingInstance::target)
      .def_readonly("direction", &TrainingInstance::direction);

  m.def("make_instance", &noised_instance, py::arg("record"), py::arg("schema"),
        py::arg("noise"), py::arg("seed"), py::arg("tables"));
  m.def("clean_instance", &clean_instance, py::arg("record"), py::arg("schema"));

  // ---- vocabulary ----
  py::class_<Vocabulary>(m, "Vocabulary")
      .def_readonly("tokens", &Vocabulary::tokens)
      .def("__len__", &Vocabulary::size)
      .def("encode", &Vocabulary::encode, py::arg("tokens"))
      .def("id_of", &Vocabulary::id_of, py::arg("token"));
  m.def(
      "build_vocab",
      [](const CorpusSplit& corpus, const TableMap& tables, int min_freq) {
        return build_vocab(corpus, tables, min_freq);
      },
      py::arg("corpus"), py::arg("tables"), py::arg("min_freq") = 1);

  // ---- model / training ----
  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("layers", &ModelConfig::layers)
      .def_readwrite("hidden", &ModelConfig::hidden)
      .def_readwrite("heads", &ModelConfig::heads)
      .def_readwrite("ffn", &ModelConfig::ffn)
      .def_readwrite("dropout", &ModelConfig::dropout)
      .def_readwrite("max_positions", &ModelConfig::max_positions)
      .def_readwrite("pointer_enabled", &ModelConfig::pointer_enabled);

  py::class_<nn::OptimConfig>(m, "OptimConfig")
      .def(py::init<>())
      .def_readwrite("lr", &nn::OptimConfig::lr)
      .def_readwrite("warmup_steps", &nn::OptimConfig::warmup_steps)
      .def_readwrite("weight_decay", &nn::OptimConfig::weight_decay)
      .def_readwrite("clip_norm", &nn::OptimConfig::clip_norm);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("patience", &TrainConfig::patience)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("use_pointer", &TrainConfig::use_pointer)
      .def_readwrite("noise", &TrainConfig::noise)
      .def_readwrite("optim", &TrainConfig::optim)
      .def_readwrite("max_len", &TrainConfig::max_len);

  py::class_<EpochStats>(m, "EpochStats")
      .def_readonly("epoch", &EpochStats::epoch)
      .def_readonly("train_loss", &EpochStats::train_loss)
      .def_readonly("dev_bleu", &EpochStats::dev_bleu)
      .def_readonly("improved", &EpochStats::improved);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("history", &TrainResult::history)
      .def_readonly("best_epoch", &TrainResult::best_epoch)
      .def_readonly("best_dev_bleu", &TrainResult::best_dev_bleu)
      .def_readonly("steps", &TrainResult::steps);

  py::class_<Model>(m, "Transformer")
      .def(py::init<const ModelConfig&, int, uint64_t>(), py::arg("config"),
           py::arg("vocab_size"), py::arg("seed") = 1)
      .def_property_readonly("vocab_size", &Model::vocab_size)
      .def_property_readonly(
          "param_count",
          [](const Model& m_) { return m_.params().count(); });

  m.def(
      "train_model",
      [](Model& model, const Vocabulary& vocab, const CorpusSplit& train,
         const CorpusSplit& dev, const TableMap& tables, const TrainConfig& cfg,
         bool verbose) {
        std::ostream* log = verbose ? &std::cerr : nullptr;
        py::gil_scoped_release release;
        return train_model(model, vocab, train, dev, tables, cfg, log);
      },
      py::arg("model"), py::arg("vocab"), py::arg("train"), py::arg("dev"),
      py::arg("tables"), py::arg("config"), py::arg("verbose") = false);

  m.def("save_run", &save_run<float>, py::arg("dir"), py::arg("model"),
        py::arg("vocab"));
  m.def("load_run", &load_run<float>, py::arg("dir"));

  // ---- decoding ----
  py::class_<DecodedSeq>(m, "DecodedSeq")
      .def_readonly("tokens", &DecodedSeq::tokens)
      .def_readonly("logprob", &DecodedSeq::logprob)
      .def_readonly("ended", &DecodedSeq::ended);

  py::class_<EgConfig>(m, "EgConfig")
      .def(py::init<>())
      .def_readwrite("beam_k", &EgConfig::beam_k)
      .def_readwrite("agg_drop", &EgConfig::agg_drop)
      .def_readwrite("release_select", &EgConfig::release_select)
      .def_readwrite("max_len", &EgConfig::max_len)
      .def_readwrite("max_candidates", &EgConfig::max_candidates);

  py::class_<EgResult>(m, "EgResult")
      .def_readonly("tokens", &EgResult::tokens)
      .def_readonly("query", &EgResult::query)
      .def_readonly("status", &EgResult::status)
      .def_readonly("validated_rank", &EgResult::validated_rank)
      .def_readonly("logprob", &EgResult::logprob);

  m.def(
      "greedy_decode",
      [](Model& model, const Vocabulary& vocab,
         const std::vector<std::string>& source) {
        py::gil_scoped_release release;
        return greedy_decode(model, vocab, source);
      },
      py::arg("model"), py::arg("vocab"), py::arg("source"));
  m.def(
      "beam_search",
      [](Model& model, const Vocabulary& vocab,
         const std::vector<std::string>& source, int width, int max_len) {
        py::gil_scoped_release release;
        return beam_search(model, vocab, source, width, max_len);
      },
      py::arg("model"), py::arg("vocab"), py::arg("source"),
      py::arg("width") = 4, py::arg("max_len") = 96);
  m.def(
      "eg_decode",
      [](Model& model, const Vocabulary& vocab,
         const std::vector<std::string>& source, const Schema& schema,
         const Table& table, const EgConfig& cfg) {
        py::gil_scoped_release release;
        return eg_decode(model, vocab, source, schema, table, cfg);
      },
      py::arg("model"), py::arg("vocab"), py::arg("source"), py::arg("schema"),
      py::arg("table"), py::arg("config") = EgConfig{});

  // ---- evaluation ----
  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("n", &EvalReport::n)
      .def_readonly("acc_lf", &EvalReport::acc_lf)
      .def_readonly("acc_ex", &EvalReport::acc_ex)
      .def_readonly("s_col", &EvalReport::s_col)
      .def_readonly("s_agg", &EvalReport::s_agg)
      .def_readonly("w_col", &EvalReport::w_col)
      .def_readonly("w_op", &EvalReport::w_op)
      .def_readonly("w_val", &EvalReport::w_val)
      .def_readonly("bleu", &EvalReport::bleu)
      .def("to_json", [](const EvalReport& r) { return report_json(r); })
      .def("to_table",
           [](const EvalReport& r, const std::string& title) {
             return report_table(r, title);
           },
           py::arg("title") = "eval");

  py::class_<EvalOptions>(m, "EvalOptions")
      .def(py::init<>())
      .def_readwrite("mode", &EvalOptions::mode)
      .def_readwrite("beam", &EvalOptions::beam)
      .def_readwrite("eg", &EvalOptions::eg)
      .def_readwrite("max_len", &EvalOptions::max_len);

  m.def(
      "evaluate_split",
      [](Model& model, const Vocabulary& vocab, const CorpusSplit& split,
         const TableMap& tables, const EvalOptions& opts) {
        py::gil_scoped_release release;
        return evaluate_split(model, vocab, split, tables, opts);
      },
      py::arg("model"), py::arg("vocab"), py::arg("split"), py::arg("tables"),
      py::arg("options") = EvalOptions{});

  // ---- metrics ----
  m.def("corpus_bleu", &corpus_bleu, py::arg("candidates"),
        py::arg("references"), py::arg("max_n") = 4);
}
