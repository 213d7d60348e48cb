#pragma once

#include <map>
#include <string>

#include "sead/decode.hpp"
#include "sead/noising.hpp"
#include "sead/train.hpp"
#include "sead/transformer.hpp"

namespace sead {

using KvMap = std::map<std::string, std::string>;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// `key = value` lines; '#' starts a comment; blank lines ignored.
KvMap load_kv_file(const std::string& path);
KvMap parse_kv_text(const std::string& text);

// Typed lookups; a malformed value raises ConfigError naming the key.
int kv_int(const KvMap& kv, const std::string& key, int def);
double kv_double(const KvMap& kv, const std::string& key, double def);
bool kv_bool(const KvMap& kv, const std::string& key, bool def);
uint64_t kv_u64(const KvMap& kv, const std::string& key, uint64_t def);
std::string kv_str(const KvMap& kv, const std::string& key,
                   const std::string& def);

// Overlay recognized keys onto the defaults (model.*, train.*, optim.*,
// noise.*, eg.*).
void apply_model_config(ModelConfig& cfg, const KvMap& kv);
void apply_train_config(TrainConfig& cfg, const KvMap& kv);
void apply_noise_config(NoiseConfig& cfg, const KvMap& kv);
void apply_eg_config(EgConfig& cfg, const KvMap& kv);

// Keys outside the recognized set, ordered; callers reject typos with these.
std::vector<std::string> unknown_keys(const KvMap& kv);

}  // namespace sead
