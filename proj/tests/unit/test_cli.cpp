// SPDX-License-Identifier: Apache-2.0
#include "blicer/lexicon.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BLICER_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workdir {
  fs::path path;
  Workdir() : path(fs::temp_directory_path() / "blicer_cli_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Workdir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const std::string kSmallSynth =
    "--synth.src_vocab 60 --synth.tgt_vocab 60 --synth.dim 8 --synth.n_train 20 --synth.n_dev 5 --synth.n_test 10 "
    "--synth.seed 3 --model.seed 1 --train.shuffle_seed 1";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage and configuration errors exit with 1") {
  CHECK(run_cli("") == 1);
  CHECK(run_cli("frobnicate") == 1);
  Workdir w;
  CHECK(run_cli("synth " + w / "s" + " --rerank.lambda 2") == 1);
  CHECK(run_cli("synth " + w / "s" + " --csls.k zero") == 1);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("missing inputs exit with 2") {
  Workdir w;
  CHECK(run_cli("eval " + w / "none.tsv " + w / "gold.tsv") == 2);
  CHECK(run_cli("train " + w / "none.tsv " + w / "m.ckpt") == 2);
}

TEST_CASE("synth, map, augment and rerank without a scorer") {
  Workdir w;
  REQUIRE(run_cli("synth " + w / "s " + kSmallSynth) == 0);
  for (auto f : {"src.vec", "tgt.vec", "train.tsv", "dev.tsv", "test.tsv", "manifest.conf"}) {
    CHECK(fs::exists(w.path / "s" / f));
  }
  REQUIRE(run_cli("map " + w / "s/src.vec " + w / "s/tgt.vec " + w / "m --train-dict " + w / "s/train.tsv") == 0);
  CHECK(run_cli("map " + w / "s/src.vec " + w / "s/tgt.vec " + w / "m2") == 1);

  // semi-supervised without a seed: silver pairs only
  REQUIRE(run_cli("augment " + w / "m/src.vec " + w / "m/tgt.vec " + w / "silver.tsv --mode semi-supervised "
                  "--mining.n_freq 60 --mining.n_aug 15") == 0);
  const auto silver = blicer::parse_lexicon(w / "silver.tsv", "en", "de").lexicon;
  CHECK(silver.size() == 15);

  // lambda 0 must not start the scorer, which would fail
  REQUIRE(run_cli("rerank " + w / "m/src.vec " + w / "m/tgt.vec " + w / "s/test.tsv " + w / "pred.tsv --lambda 0 "
                  "--scorer-cmd false") == 0);
  CHECK(run_cli("rerank " + w / "m/src.vec " + w / "m/tgt.vec " + w / "s/test.tsv " + w / "pred2.tsv --lambda 0.5 "
                "--scorer-cmd false") == 2);
  REQUIRE(run_cli("eval " + w / "pred.tsv " + w / "s/test.tsv " + w / "eval.tsv") == 0);
  CHECK(slurp(w / "eval.tsv").rfind("en-de\t", 0) == 0);
  CHECK(fs::exists(w / "pred.tsv.manifest.conf"));
}

TEST_CASE("rerank through an external scorer") {
  Workdir w;
  REQUIRE(run_cli("synth " + w / "s " + kSmallSynth) == 0);
  const std::string stub = "--scorer-cmd 'while read -r l; do echo 0.25; done'";
  REQUIRE(run_cli("rerank " + w / "s/src.vec " + w / "s/tgt.vec " + w / "s/test.tsv " + w / "p.tsv --lambda 1 " +
                  stub) == 0);
  const auto text = slurp(w / "p.tsv");
  CHECK(text.find("\t0.25000000\t0.25000000\n") != std::string::npos);
}

}
