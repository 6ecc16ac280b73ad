// SPDX-License-Identifier: Apache-2.0
#include "blicer/config.hpp"
#include "blicer/error.hpp"

#include <doctest.h>

#include <filesystem>

using namespace blicer;

TEST_SUITE("config") {

TEST_CASE("mode defaults") {
  const auto sup = mode_defaults(Mode::Supervised);
  CHECK(sup.rerank.lambda == 0.31);
  CHECK(sup.rerank.n_cand == 28);
  CHECK(sup.mining.n_neg == 28);
  CHECK(sup.mining.n_aug == 0);
  CHECK(sup.n_rep == 8);
  CHECK(sup.polarisation.alpha == 0.7);
  CHECK(sup.csls.k == 10);
  CHECK(sup.train.batch_size == 256);
  CHECK(sup.template_id == 15);
  const auto semi = mode_defaults(Mode::SemiSupervised);
  CHECK(semi.rerank.lambda == 0.5);
  CHECK(semi.mining.n_aug == 4000);
  CHECK(semi.n_rep == 4);
  CHECK(semi.polarisation.alpha == 1.0);
  CHECK(semi.mining.delta == 0.2);
  for (auto m : {Mode::Supervised, Mode::SemiSupervised, Mode::ZeroShot}) CHECK(parse_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_mode("unsupervised"), ConfigError);
}

TEST_CASE("flags override the file which overrides the mode") {
  const auto file = parse_key_values("# run\nmode=semi-supervised\nrerank.lambda=0.4\nmining.n_neg=10\n");
  const KeyValues flags{{"rerank.lambda", "0.2"}};
  const auto r = resolve_config(file, flags);
  CHECK(r.config.mode == Mode::SemiSupervised);
  CHECK(r.config.rerank.lambda == 0.2);
  CHECK(r.config.mining.n_neg == 10);
  CHECK(r.config.n_rep == 4);
  const auto flag_mode = resolve_config(file, {{"mode", "supervised"}});
  CHECK(flag_mode.config.n_rep == 8);
  CHECK(flag_mode.config.rerank.lambda == 0.4);
}

TEST_CASE("every key can be set by a flag") {
  const auto base = resolve_config({}, {{"model.seed", "1"}, {"train.shuffle_seed", "1"}, {"synth.seed", "1"}});
  const auto defaults = to_key_values(base.config);
  for (const auto& key : config_keys()) {
    CHECK(defaults.count(key) == 1);
  }
  const KeyValues changed{{"csls.k", "7"}, {"mining.n_rep", "3"}, {"train.epochs", "9"}, {"model.width", "32"},
                          {"model.heads", "2"}, {"scorer.cmd", "cat"}, {"lang.tgt", "fr"}};
  auto flags = changed;
  flags["model.seed"] = "1";
  flags["train.shuffle_seed"] = "1";
  flags["synth.seed"] = "1";
  const auto kv = to_key_values(resolve_config({}, flags).config);
  for (const auto& [k, v] : changed) CHECK(kv.at(k) == v);
}

TEST_CASE("unknown keys and bad values name the key") {
  try {
    resolve_config({{"rerank.lamda", "0.3"}}, {});
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("rerank.lamda") != std::string::npos);
  }
  try {
    resolve_config({}, {{"rerank.lambda", "1.5"}});
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("rerank.lambda") != std::string::npos);
  }
  CHECK_THROWS_AS(resolve_config({}, {{"csls.k", "ten"}}), ConfigError);
  CHECK_THROWS_AS(resolve_config({}, {{"csls.k", "-3"}}), ConfigError);
  CHECK_THROWS_AS(resolve_config({}, {{"model.heads", "3"}}), ConfigError);
  CHECK_THROWS_AS(parse_key_values("just a line\n"), ConfigError);
}

TEST_CASE("absent seeds are drawn and recorded") {
  const auto r = resolve_config({}, {});
  CHECK(r.drawn_seeds.size() == 3);
  const auto kv = to_key_values(r.config);
  CHECK(kv.at("model.seed") == std::to_string(r.config.model.seed));
  const auto fixed = resolve_config({}, {{"model.seed", "5"}, {"train.shuffle_seed", "6"}, {"synth.seed", "7"}});
  CHECK(fixed.drawn_seeds.empty());
  CHECK(fixed.config.model.seed == 5);
}

TEST_CASE("external scorer switches the learning-rate default") {
  const auto r = resolve_config({}, {{"scorer.cmd", "cat"}});
  CHECK(r.config.train.learning_rate == 1.2e-5);
  const auto explicit_lr = resolve_config({}, {{"scorer.cmd", "cat"}, {"train.learning_rate", "0.001"}});
  CHECK(explicit_lr.config.train.learning_rate == 0.001);
}

TEST_CASE("manifest round-trip is byte identical") {
  const auto first = resolve_config(parse_key_values("mode=semi-supervised\nmining.alpha=0.85\n"),
                                    {{"rerank.lambda", "0.3333333333333333"}});
  const auto text = format_manifest(first.config);
  const auto path = std::filesystem::temp_directory_path() / "blicer_manifest.conf";
  write_manifest(first.config, path);
  const auto second = resolve_config(read_key_values(path), {});
  std::filesystem::remove(path);
  CHECK(second.drawn_seeds.empty());
  CHECK(format_manifest(second.config) == text);
  CHECK(second.config.rerank.lambda == 0.3333333333333333);
}

}
