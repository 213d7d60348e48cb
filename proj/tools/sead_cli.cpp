#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sead/config.hpp"
#include "sead/pipeline.hpp"

using namespace sead;
using nlohmann::json;

namespace {

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void info(const std::string& msg) {
  if (g_log_level >= 1) std::cerr << msg << "\n";
}
void debug(const std::string& msg) {
  if (g_log_level >= 2) std::cerr << msg << "\n";
}

struct GlobalOpts {
  uint64_t seed = 1;
  std::string config_path;
  bool strict = false;
  KvMap kv;

  IngestOptions ingest() const { return IngestOptions{strict}; }
};

void report_ingest(const std::string& what, const IngestStats& stats) {
  std::ostringstream line;
  line << what << ": " << stats.parsed << " parsed, " << stats.skipped
       << " skipped of " << stats.lines << " lines";
  info(line.str());
  for (const auto& w : stats.warnings) debug("  " + w);
}

TableMap load_tables_logged(const std::string& path, const GlobalOpts& g) {
  IngestStats stats;
  TableMap tables = load_tables(path, g.ingest(), &stats);
  report_ingest("tables " + path, stats);
  return tables;
}

CorpusSplit load_examples_logged(const std::string& path,
                                 const TableMap& tables, SplitName name,
                                 const GlobalOpts& g) {
  IngestStats stats;
  CorpusSplit split = ingest_examples(path, tables, name, g.ingest(), &stats);
  report_ingest("examples " + path, stats);
  return split;
}

json query_to_json(const SqlQuery& q) {
  json conds = json::array();
  for (const auto& c : q.conditions)
    conds.push_back({c.column, static_cast<int>(c.op), c.value});
  return {{"sel", q.select_column},
          {"agg", static_cast<int>(q.aggregation)},
          {"conds", std::move(conds)}};
}

// decode inputs: JSONL with question + table_id; a gold sql object is
// optional and ignored here
std::vector<ExampleRecord> load_decode_inputs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  std::vector<ExampleRecord> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("question") ||
        !j.contains("table_id")) {
      throw FormatError(line_no, "expected {question, table_id}");
    }
    ExampleRecord rec;
    rec.question = j["question"].get<std::string>();
    rec.table_id = j["table_id"].get<std::string>();
    out.push_back(std::move(rec));
  }
  return out;
}

TrainConfig train_config_from(const GlobalOpts& g) {
  TrainConfig tc;
  tc.seed = g.seed;
  apply_train_config(tc, g.kv);
  apply_noise_config(tc.noise, g.kv);
  if (g.kv.count("train.seed") == 0) tc.seed = g.seed;
  return tc;
}

ModelConfig model_config_from(const GlobalOpts& g) {
  ModelConfig mc;
  apply_model_config(mc, g.kv);
  return mc;
}

// ---- subcommands -------------------------------------------------------------

int cmd_ingest(const GlobalOpts& g, const std::string& tables_path,
               const std::string& examples_path, const std::string& split_name,
               const std::string& out_dir) {
  auto split = SplitName::Train;
  if (split_name == "dev") split = SplitName::Dev;
  if (split_name == "test") split = SplitName::Test;

  TableMap tables = load_tables_logged(tables_path, g);
  CorpusSplit examples =
      load_examples_logged(examples_path, tables, split, g);

  std::filesystem::create_directories(out_dir);
  write_tables(out_dir + "/tables.jsonl", tables);
  write_examples(out_dir + "/" + split_name + ".jsonl", examples);
  info("wrote " + out_dir + "/tables.jsonl and " + out_dir + "/" + split_name +
       ".jsonl");
  return 0;
}

int cmd_gen_synthetic(const GlobalOpts& g, int n_tables, int n_train, int n_dev,
                      const std::string& out_dir) {
  SyntheticCorpus corpus = gen_synthetic_corpus(g.seed, n_tables, n_train, n_dev);
  std::filesystem::create_directories(out_dir);
  write_tables(out_dir + "/tables.jsonl", corpus.tables);
  write_examples(out_dir + "/train.jsonl", corpus.train);
  write_examples(out_dir + "/dev.jsonl", corpus.dev);
  std::ostringstream line;
  line << "synthetic corpus: " << corpus.tables.size() << " tables, "
       << corpus.train.size() << " train, " << corpus.dev.size() << " dev -> "
       << out_dir;
  info(line.str());
  return 0;
}

int cmd_augment(const GlobalOpts& g, const std::string& tables_path,
                const std::string& examples_path, const std::string& out_path,
                int epoch) {
  TableMap tables = load_tables_logged(tables_path, g);
  CorpusSplit examples =
      load_examples_logged(examples_path, tables, SplitName::Train, g);

  NoiseConfig noise;
  apply_noise_config(noise, g.kv);

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write: " + out_path);
  size_t kept = 0;
  for (size_t i = 0; i < examples.records.size(); ++i) {
    const ExampleRecord& rec = examples.records[i];
    auto it = tables.find(rec.table_id);
    if (it == tables.end()) continue;
    // mirrors the training-loop noise stream for the given epoch
    auto rng = derive_rng(g.seed, 1000 + epoch, i);
    auto sampler = make_foreign_sampler(tables, rec.table_id);
    TrainingInstance inst =
        make_instance(rec, schema_of(it->second), noise, rng, sampler);
    json j = {{"source", inst.source},
              {"target", inst.target},
              {"direction", direction_name(inst.direction)}};
    out << j.dump() << "\n";
    ++kept;
  }
  info("wrote " + std::to_string(kept) + " instances to " + out_path);
  return 0;
}

int cmd_train(const GlobalOpts& g, const std::string& tables_path,
              const std::string& train_path, const std::string& dev_path,
              const std::string& out_dir, int min_freq) {
  TableMap tables = load_tables_logged(tables_path, g);
  CorpusSplit train =
      load_examples_logged(train_path, tables, SplitName::Train, g);
  CorpusSplit dev;
  if (!dev_path.empty())
    dev = load_examples_logged(dev_path, tables, SplitName::Dev, g);

  Vocabulary vocab = build_vocab(train, tables, min_freq);
  info("vocabulary: " + std::to_string(vocab.size()) + " tokens");

  ModelConfig mc = model_config_from(g);
  TrainConfig tc = train_config_from(g);
  tc.use_pointer = mc.pointer_enabled;
  if (tc.log_every == 0 && g_log_level >= 2) tc.log_every = 10;

  TransformerT<float> model(mc, vocab.size(), tc.seed);
  info("training: " + std::to_string(model.params().count()) + " parameters");
  std::ostream* log = g_log_level >= 1 ? &std::cerr : nullptr;
  TrainResult res = train_model(model, vocab, train, dev, tables, tc, log);

  save_run(out_dir, model, vocab);
  json hist = json::array();
  for (const auto& st : res.history)
    hist.push_back({{"epoch", st.epoch},
                    {"train_loss", st.train_loss},
                    {"dev_bleu", st.dev_bleu},
                    {"improved", st.improved}});
  json summary = {{"best_epoch", res.best_epoch},
                  {"best_dev_bleu", res.best_dev_bleu},
                  {"steps", res.steps},
                  {"skipped_too_long", res.skipped_too_long},
                  {"history", std::move(hist)}};
  std::ofstream hout(out_dir + "/history.json");
  hout << summary.dump(2) << "\n";
  info("saved run to " + out_dir + " (best dev BLEU " +
       std::to_string(res.best_dev_bleu) + " at epoch " +
       std::to_string(res.best_epoch) + ")");
  return 0;
}

int cmd_decode(const GlobalOpts& g, const std::string& model_dir,
               const std::string& tables_path, const std::string& in_path,
               const std::string& eg_mode, int beam_k,
               const std::string& out_path) {
  auto [model, vocab] = load_run<float>(model_dir);
  TableMap tables = load_tables_logged(tables_path, g);
  std::vector<ExampleRecord> inputs = load_decode_inputs(in_path);

  EgConfig eg;
  apply_eg_config(eg, g.kv);
  if (beam_k > 0) eg.beam_k = beam_k;

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write: " + out_path);

  size_t parsed_count = 0;
  for (const auto& rec : inputs) {
    auto it = tables.find(rec.table_id);
    if (it == tables.end()) throw MissingTableError(rec.table_id);
    Schema schema = schema_of(it->second);
    TrainingInstance inst = clean_instance(rec, schema);

    std::vector<std::string> tokens;
    std::string status = "greedy";
    if (eg_mode == "off") {
      tokens = greedy_decode(model, vocab, inst.source).tokens;
    } else {
      EgConfig cfg = eg;
      cfg.agg_drop = eg_mode == "acs";
      EgResult r =
          eg_decode(model, vocab, inst.source, schema, it->second, cfg);
      tokens = std::move(r.tokens);
      status = r.status == EgStatus::Validated
                   ? "validated"
                   : (r.status == EgStatus::Degraded ? "degraded"
                                                     : "no_parseable");
    }

    json j = {{"question", rec.question},
              {"table_id", rec.table_id},
              {"status", status}};
    auto parse = parse_sql(tokens, schema);
    if (parse.ok()) {
      ++parsed_count;
      SqlQuery canon = canonicalize(*parse.query);
      j["sql"] = join_tokens(serialize_sql(canon, schema));
      j["ast"] = query_to_json(canon);
    } else {
      j["sql"] = join_tokens(tokens);
      j["ast"] = nullptr;
    }
    out << j.dump() << "\n";
  }
  info("decoded " + std::to_string(inputs.size()) + " questions (" +
       std::to_string(parsed_count) + " parseable) to " + out_path);
  return 0;
}

int cmd_eval(const GlobalOpts& g, const std::string& model_dir,
             const std::string& tables_path, const std::string& examples_path,
             const std::string& mode_name, int beam,
             const std::string& json_path) {
  auto mode = decode_mode_from_name(mode_name);
  if (!mode) throw std::runtime_error("unknown decode mode: " + mode_name);

  auto [model, vocab] = load_run<float>(model_dir);
  TableMap tables = load_tables_logged(tables_path, g);
  CorpusSplit split =
      load_examples_logged(examples_path, tables, SplitName::Test, g);

  EvalOptions opts;
  opts.mode = *mode;
  opts.beam = beam;
  apply_eg_config(opts.eg, g.kv);

  EvalReport rep = evaluate_split(model, vocab, split, tables, opts);
  std::cout << report_table(rep, "eval (" + mode_name + ")");
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("cannot write: " + json_path);
    out << report_json(rep) << "\n";
    info("wrote " + json_path);
  }
  return 0;
}

int cmd_ablate(const GlobalOpts& g, const std::string& tables_path,
               const std::string& train_path, const std::string& eval_path,
               const std::string& rows_csv, const std::string& seeds_csv,
               const std::string& out_path) {
  TableMap tables = load_tables_logged(tables_path, g);
  CorpusSplit train =
      load_examples_logged(train_path, tables, SplitName::Train, g);
  CorpusSplit eval =
      load_examples_logged(eval_path, tables, SplitName::Dev, g);

  std::vector<AblationRow> all = default_ablation_rows();
  std::vector<AblationRow> rows;
  if (rows_csv.empty() || rows_csv == "all") {
    rows = all;
  } else {
    std::istringstream in(rows_csv);
    std::string name;
    while (std::getline(in, name, ',')) {
      bool found = false;
      for (const auto& r : all)
        if (r.name == name) {
          rows.push_back(r);
          found = true;
        }
      if (!found) throw std::runtime_error("unknown ablation row: " + name);
    }
  }

  std::vector<uint64_t> seeds;
  {
    std::istringstream in(seeds_csv);
    std::string s;
    while (std::getline(in, s, ',')) seeds.push_back(std::stoull(s));
  }
  if (seeds.empty()) throw std::runtime_error("no seeds given");

  Vocabulary vocab = build_vocab(train, tables);
  ModelConfig mc = model_config_from(g);
  TrainConfig tc = train_config_from(g);

  std::ostream* log = g_log_level >= 1 ? &std::cerr : nullptr;
  auto results = run_ablation<float>(rows, seeds, tables, train, eval, vocab,
                                     mc, tc, log);
  std::string table = ablation_table(results);
  std::cout << table;
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << table;
    json j = json::array();
    for (const auto& r : results) {
      json cells = json::array();
      for (const auto& c : r.cells)
        cells.push_back(
            {{"seed", c.seed}, {"acc_lf", c.acc_lf}, {"acc_ex", c.acc_ex}});
      j.push_back({{"row", r.name},
                   {"mean_lf", r.mean_lf},
                   {"mean_ex", r.mean_ex},
                   {"error", r.error},
                   {"cells", std::move(cells)}});
    }
    std::ofstream jout(out_path + ".json");
    jout << j.dump(2) << "\n";
    info("wrote " + out_path + " and " + out_path + ".json");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"denoising text-to-SQL pipeline"};
  app.require_subcommand(1);

  GlobalOpts g;
  std::string log_level = "info";
  app.add_option("--seed", g.seed, "master random seed");
  app.add_option("--config", g.config_path, "key=value config file");
  app.add_option("--log-level", log_level, "quiet, info, or debug")
      ->check(CLI::IsMember({"quiet", "info", "debug"}));
  app.add_flag("--strict", g.strict, "abort on malformed input lines");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate and normalize a corpus");
  std::string in_tables, in_examples, in_split = "train", in_out = ".";
  ingest->add_option("--tables", in_tables)->required();
  ingest->add_option("--examples", in_examples)->required();
  ingest->add_option("--split", in_split)
      ->check(CLI::IsMember({"train", "dev", "test"}));
  ingest->add_option("--out", in_out)->required();

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "emit a toy corpus");
  int gen_tables = 4, gen_train = 500, gen_dev = 100;
  std::string gen_out = ".";
  gen->add_option("--tables", gen_tables);
  gen->add_option("--train", gen_train);
  gen->add_option("--dev", gen_dev);
  gen->add_option("--out", gen_out)->required();

  // augment
  auto* aug = app.add_subcommand("augment", "emit noised training instances");
  std::string aug_tables, aug_examples, aug_out;
  int aug_epoch = 0;
  aug->add_option("--tables", aug_tables)->required();
  aug->add_option("--examples", aug_examples)->required();
  aug->add_option("--out", aug_out)->required();
  aug->add_option("--epoch", aug_epoch, "noise stream epoch index");

  // train
  auto* train = app.add_subcommand("train", "train a model");
  std::string tr_tables, tr_train, tr_dev, tr_out;
  int tr_min_freq = 1;
  train->add_option("--tables", tr_tables)->required();
  train->add_option("--train", tr_train)->required();
  train->add_option("--dev", tr_dev);
  train->add_option("--out", tr_out)->required();
  train->add_option("--min-freq", tr_min_freq, "vocabulary frequency floor");

  // decode
  auto* dec = app.add_subcommand("decode", "decode questions to SQL");
  std::string de_model, de_tables, de_in, de_eg = "acs", de_out;
  int de_beam_k = 0;
  dec->add_option("--model", de_model)->required();
  dec->add_option("--tables", de_tables)->required();
  dec->add_option("--in", de_in)->required();
  dec->add_option("--eg", de_eg)->check(CLI::IsMember({"off", "cs", "acs"}));
  dec->add_option("--beam-k", de_beam_k, "released-slot expansion width");
  dec->add_option("--out", de_out)->required();

  // eval
  auto* ev = app.add_subcommand("eval", "score a model against gold");
  std::string ev_model, ev_tables, ev_examples, ev_mode = "greedy", ev_json;
  int ev_beam = 4;
  ev->add_option("--model", ev_model)->required();
  ev->add_option("--tables", ev_tables)->required();
  ev->add_option("--examples", ev_examples)->required();
  ev->add_option("--mode", ev_mode)
      ->check(CLI::IsMember({"greedy", "beam", "eg-cs", "eg-acs"}));
  ev->add_option("--beam", ev_beam);
  ev->add_option("--json", ev_json, "write the JSON report here");

  // ablate
  auto* ab = app.add_subcommand("ablate", "train and score the study grid");
  std::string ab_tables, ab_train, ab_eval, ab_rows = "all",
              ab_seeds = "1,2,3", ab_out;
  ab->add_option("--tables", ab_tables)->required();
  ab->add_option("--train", ab_train)->required();
  ab->add_option("--eval", ab_eval)->required();
  ab->add_option("--rows", ab_rows, "comma-separated row names or 'all'");
  ab->add_option("--seeds", ab_seeds, "comma-separated seeds");
  ab->add_option("--out", ab_out, "write the result table here");

  // lets --seed and friends appear after the subcommand name too
  for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  if (log_level == "quiet") g_log_level = 0;
  if (log_level == "debug") g_log_level = 2;

  try {
    if (!g.config_path.empty()) {
      g.kv = load_kv_file(g.config_path);
      auto unknown = unknown_keys(g.kv);
      if (!unknown.empty()) {
        std::string joined;
        for (const auto& k : unknown) joined += " " + k;
        throw ConfigError("unknown config keys:" + joined);
      }
    }

    if (*ingest)
      return cmd_ingest(g, in_tables, in_examples, in_split, in_out);
    if (*gen) return cmd_gen_synthetic(g, gen_tables, gen_train, gen_dev, gen_out);
    if (*aug) return cmd_augment(g, aug_tables, aug_examples, aug_out, aug_epoch);
    if (*train) return cmd_train(g, tr_tables, tr_train, tr_dev, tr_out, tr_min_freq);
    if (*dec)
      return cmd_decode(g, de_model, de_tables, de_in, de_eg, de_beam_k, de_out);
    if (*ev)
      return cmd_eval(g, ev_model, ev_tables, ev_examples, ev_mode, ev_beam,
                      ev_json);
    if (*ab)
      return cmd_ablate(g, ab_tables, ab_train, ab_eval, ab_rows, ab_seeds,
                        ab_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
