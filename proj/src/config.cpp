#include "sead/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "sead/text.hpp"

namespace sead {

KvMap parse_kv_text(const std::string& text) {
  KvMap out;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key = value");
    std::string key = trim(trimmed.substr(0, eq));
    std::string value = trim(trimmed.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    out[key] = value;
  }
  return out;
}

KvMap load_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_kv_text(buf.str());
}

namespace {

const std::string* find(const KvMap& kv, const std::string& key) {
  auto it = kv.find(key);
  return it == kv.end() ? nullptr : &it->second;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ConfigError("bad value for " + key + ": '" + value + "'");
}

}  // namespace

int kv_int(const KvMap& kv, const std::string& key, int def) {
  const std::string* v = find(kv, key);
  if (!v) return def;
  try {
    size_t used = 0;
    int out = std::stoi(*v, &used);
    if (used != v->size()) bad_value(key, *v);
    return out;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, *v);
  }
}

double kv_double(const KvMap& kv, const std::string& key, double def) {
  const std::string* v = find(kv, key);
  if (!v) return def;
  try {
    size_t used = 0;
    double out = std::stod(*v, &used);
    if (used != v->size()) bad_value(key, *v);
    return out;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, *v);
  }
}

bool kv_bool(const KvMap& kv, const std::string& key, bool def) {
  const std::string* v = find(kv, key);
  if (!v) return def;
  std::string s = lower(*v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, *v);
}

uint64_t kv_u64(const KvMap& kv, const std::string& key, uint64_t def) {
  const std::string* v = find(kv, key);
  if (!v) return def;
  try {
    size_t used = 0;
    unsigned long long out = std::stoull(*v, &used);
    if (used != v->size()) bad_value(key, *v);
    return out;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, *v);
  }
}

std::string kv_str(const KvMap& kv, const std::string& key,
                   const std::string& def) {
  const std::string* v = find(kv, key);
  return v ? *v : def;
}

void apply_model_config(ModelConfig& cfg, const KvMap& kv) {
  cfg.layers = kv_int(kv, "model.layers", cfg.layers);
  cfg.hidden = kv_int(kv, "model.hidden", cfg.hidden);
  cfg.heads = kv_int(kv, "model.heads", cfg.heads);
  cfg.ffn = kv_int(kv, "model.ffn", cfg.ffn);
  cfg.dropout = kv_double(kv, "model.dropout", cfg.dropout);
  cfg.max_positions = kv_int(kv, "model.max_positions", cfg.max_positions);
  cfg.pointer_enabled = kv_bool(kv, "model.pointer", cfg.pointer_enabled);
}

void apply_train_config(TrainConfig& cfg, const KvMap& kv) {
  cfg.epochs = kv_int(kv, "train.epochs", cfg.epochs);
  cfg.batch_size = kv_int(kv, "train.batch_size", cfg.batch_size);
  cfg.patience = kv_int(kv, "train.patience", cfg.patience);
  cfg.seed = kv_u64(kv, "train.seed", cfg.seed);
  cfg.use_pointer = kv_bool(kv, "model.pointer", cfg.use_pointer);
  cfg.max_len = kv_int(kv, "train.max_len", cfg.max_len);
  cfg.log_every = kv_int(kv, "train.log_every", cfg.log_every);
  cfg.optim.lr = kv_double(kv, "optim.lr", cfg.optim.lr);
  cfg.optim.warmup_steps = kv_int(kv, "optim.warmup_steps", cfg.optim.warmup_steps);
  cfg.optim.weight_decay =
      kv_double(kv, "optim.weight_decay", cfg.optim.weight_decay);
  cfg.optim.clip_norm = kv_double(kv, "optim.clip_norm", cfg.optim.clip_norm);
}

void apply_noise_config(NoiseConfig& cfg, const KvMap& kv) {
  cfg.p_drop = kv_double(kv, "noise.p_drop", cfg.p_drop);
  cfg.p_add = kv_double(kv, "noise.p_add", cfg.p_add);
  cfg.p_shuffle = kv_double(kv, "noise.p_shuffle", cfg.p_shuffle);
  cfg.p_swap = kv_double(kv, "noise.p_swap", cfg.p_swap);
  cfg.erosion_enabled = kv_bool(kv, "noise.erosion", cfg.erosion_enabled);
  cfg.shuffle_enabled = kv_bool(kv, "noise.shuffle", cfg.shuffle_enabled);
  cfg.infilling_enabled = kv_bool(kv, "noise.infilling", cfg.infilling_enabled);
  cfg.infill_rate = kv_double(kv, "noise.infill_rate", cfg.infill_rate);
  cfg.infill_mean_span =
      kv_double(kv, "noise.infill_mean_span", cfg.infill_mean_span);
}

void apply_eg_config(EgConfig& cfg, const KvMap& kv) {
  cfg.beam_k = kv_int(kv, "eg.beam_k", cfg.beam_k);
  cfg.release_select = kv_bool(kv, "eg.release_select", cfg.release_select);
  cfg.max_candidates = kv_int(kv, "eg.max_candidates", cfg.max_candidates);
}

std::vector<std::string> unknown_keys(const KvMap& kv) {
  static const std::set<std::string> known = {
      "model.layers",        "model.hidden",
      "model.heads",         "model.ffn",
      "model.dropout",       "model.max_positions",
      "model.pointer",       "train.epochs",
      "train.batch_size",    "train.patience",
      "train.seed",          "train.max_len",
      "train.log_every",     "optim.lr",
      "optim.warmup_steps",  "optim.weight_decay",
      "optim.clip_norm",     "noise.p_drop",
      "noise.p_add",         "noise.p_shuffle",
      "noise.p_swap",        "noise.erosion",
      "noise.shuffle",       "noise.infilling",
      "noise.infill_rate",   "noise.infill_mean_span",
      "eg.beam_k",           "eg.release_select",
      "eg.max_candidates",
  };
  std::vector<std::string> out;
  for (const auto& [key, _] : kv)
    if (!known.count(key)) out.push_back(key);
  return out;
}

}  // namespace sead
