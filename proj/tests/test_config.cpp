#include <fstream>

#include "doctest.h"
#include "sead/config.hpp"

using namespace sead;

TEST_CASE("kv text parses comments, blanks, and spacing") {
  KvMap kv = parse_kv_text(
      "# full line comment\n"
      "model.hidden = 64\n"
      "\n"
      "  train.epochs=3   # trailing comment\n"
      "noise.p_drop =0.25\n");
  CHECK(kv.size() == 3);
  CHECK(kv.at("model.hidden") == "64");
  CHECK(kv.at("train.epochs") == "3");
  CHECK(kv.at("noise.p_drop") == "0.25");
}

TEST_CASE("malformed lines raise with their line number") {
  CHECK_THROWS_WITH_AS(parse_kv_text("a = 1\nnot a pair\n"),
                       doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS(parse_kv_text("= value\n"), ConfigError);
}

TEST_CASE("typed getters validate their values") {
  KvMap kv = {{"i", "42"}, {"d", "2.5"}, {"b", "true"}, {"s", "name"},
              {"bad", "4x2"}};
  CHECK(kv_int(kv, "i", 0) == 42);
  CHECK(kv_int(kv, "missing", 7) == 7);
  CHECK(kv_double(kv, "d", 0) == 2.5);
  CHECK(kv_bool(kv, "b", false));
  CHECK(kv_bool(kv, "missing", true));
  CHECK(kv_str(kv, "s", "") == "name");
  CHECK(kv_u64(kv, "i", 0) == 42);
  CHECK_THROWS_AS(kv_int(kv, "bad", 0), ConfigError);
  CHECK_THROWS_AS(kv_double(kv, "s", 0), ConfigError);
  CHECK_THROWS_AS(kv_bool(kv, "i", false), ConfigError);
}

TEST_CASE("overlays only touch recognized keys") {
  KvMap kv = parse_kv_text(
      "model.layers = 3\n"
      "model.pointer = false\n"
      "train.epochs = 9\n"
      "optim.lr = 0.001\n"
      "noise.p_shuffle = 0.45\n"
      "eg.beam_k = 7\n");

  ModelConfig mc;
  apply_model_config(mc, kv);
  CHECK(mc.layers == 3);
  CHECK_FALSE(mc.pointer_enabled);
  CHECK(mc.hidden == 128);  // untouched default

  TrainConfig tc;
  apply_train_config(tc, kv);
  CHECK(tc.epochs == 9);
  CHECK(tc.optim.lr == 0.001);
  CHECK_FALSE(tc.use_pointer);  // follows model.pointer

  NoiseConfig nc;
  apply_noise_config(nc, kv);
  CHECK(nc.p_shuffle == 0.45);
  CHECK(nc.p_drop == 0.1);

  EgConfig eg;
  apply_eg_config(eg, kv);
  CHECK(eg.beam_k == 7);

  CHECK(unknown_keys(kv).empty());
}

TEST_CASE("unknown keys are reported for typo detection") {
  KvMap kv = {{"model.hiden", "64"}, {"train.epochs", "2"}};
  auto unknown = unknown_keys(kv);
  REQUIRE(unknown.size() == 1);
  CHECK(unknown[0] == "model.hiden");
}

TEST_CASE("kv files load from disk") {
  std::string path =
      "/tmp/sead_cfg_" + std::to_string(std::random_device{}()) + ".kv";
  {
    std::ofstream out(path);
    out << "train.seed = 99\n";
  }
  KvMap kv = load_kv_file(path);
  CHECK(kv_u64(kv, "train.seed", 0) == 99);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_kv_file(path), ConfigError);
}
