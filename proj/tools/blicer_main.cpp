// SPDX-License-Identifier: Apache-2.0
//
// blicer: command-line front end for the BLI reranking pipeline.
#include "blicer/config.hpp"
#include "blicer/error.hpp"
#include "blicer/mining.hpp"
#include "blicer/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_set>

namespace {

using namespace blicer;
namespace fs = std::filesystem;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Per-subcommand state: the config flags plus an optional config file.
struct Common {
  std::string config_file;
  std::string manifest;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void add_config_flags(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_file, "Flat key=value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--manifest", common.manifest, "Where to write the resolved run manifest");
  for (const auto& key : config_keys()) {
    common.options[key] = cmd->add_option("--" + key, common.values[key], "Override " + key);
  }
  common.options["alias:lambda"] = cmd->add_option("--lambda", common.values["alias:lambda"], "Alias of --rerank.lambda");
  common.options["alias:scorer"] =
      cmd->add_option("--scorer-cmd", common.values["alias:scorer"], "External scorer command (alias of --scorer.cmd)");
}

ResolvedConfig resolve(const Common& common) {
  KeyValues file;
  if (!common.config_file.empty()) file = read_key_values(common.config_file);
  KeyValues flags;
  for (const auto& [key, opt] : common.options) {
    if (opt->count() == 0) continue;
    const std::string& v = common.values.at(key);
    if (key == "alias:lambda") {
      flags["rerank.lambda"] = v;
    } else if (key == "alias:scorer") {
      flags["scorer.cmd"] = v;
    } else {
      flags[key] = v;
    }
  }
  auto resolved = resolve_config(file, flags);
  for (const auto& key : resolved.drawn_seeds) {
    fmt::print(stderr, "note: {} was not set; drew {}\n", key, to_key_values(resolved.config).at(key));
  }
  return resolved;
}

void record(const RunConfig& cfg, const Common& common, const fs::path& fallback) {
  const fs::path path = common.manifest.empty() ? fallback : fs::path(common.manifest);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_manifest(cfg, path);
}

void require_file(const std::string& path, std::string_view what) {
  if (!fs::is_regular_file(path)) throw DataError(fmt::format("{} '{}' does not exist", what, path));
}

EmbeddingSpace load_space(const std::string& path, const RunConfig& cfg, const std::string& tag) {
  require_file(path, "word-vector file");
  return load_word_vectors(path, cfg.max_vocab, tag);
}

Lexicon load_lexicon(const std::string& path, const std::string& src, const std::string& tgt) {
  require_file(path, "lexicon file");
  auto parsed = parse_lexicon(path, src, tgt);
  if (parsed.duplicates_dropped > 0) {
    fmt::print(stderr, "note: {}: dropped {} duplicate pairs\n", path, parsed.duplicates_dropped);
  }
  return std::move(parsed.lexicon);
}

Lexicon optional_lexicon(const std::string& path, const RunConfig& cfg) {
  if (path.empty()) return Lexicon({cfg.langs.src, cfg.langs.tgt});
  return load_lexicon(path, cfg.langs.src, cfg.langs.tgt);
}

// Query words: the first field of every non-empty line, first occurrence only.
std::vector<std::string> load_queries(const std::string& path) {
  require_file(path, "query file");
  std::ifstream in(path);
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string word;
    if (fields >> word && seen.insert(word).second) out.push_back(word);
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

std::string read_file(const std::string& path) {
  require_file(path, "input file");
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CslsIndex load_aligned_index(const std::string& src_path, const std::string& tgt_path, const RunConfig& cfg) {
  auto src = unit_normalize(load_space(src_path, cfg, cfg.langs.src));
  auto tgt = unit_normalize(load_space(tgt_path, cfg, cfg.langs.tgt));
  return CslsIndex(std::move(src), std::move(tgt), cfg.csls);
}

SyntheticBenchmark synth_from(const RunConfig& cfg) {
  SynthSpec spec = cfg.synth;
  spec.src_lang = cfg.langs.src;
  spec.tgt_lang = cfg.langs.tgt;
  return generate_synthetic(spec);
}

int run(int argc, char** argv) {
  CLI::App app{"Bilingual lexicon induction with cross-encoder reranking"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::map<std::string, Common> common;
  auto sub = [&](const std::string& name, const std::string& help) {
    auto* cmd = app.add_subcommand(name, help);
    add_config_flags(cmd, common[name]);
    return cmd;
  };

  std::string src_vec, tgt_vec, out, train_dict, dev_dict, test_dict, positives, training_set, checkpoint,
      queries, predictions, gold, pivot_vec, pivot_src_dict, pivot_tgt_dict;
  bool use_synth = false;

  auto* synth = sub("synth", "Write a seeded synthetic benchmark (vectors and lexicons)");
  synth->add_option("out_dir", out, "Output directory")->required();

  auto* map = sub("map", "Align the source space onto the target space with Procrustes");
  map->add_option("src_vec", src_vec, "Source word vectors")->required();
  map->add_option("tgt_vec", tgt_vec, "Target word vectors")->required();
  map->add_option("out_dir", out, "Output directory for src.vec and tgt.vec")->required();
  map->add_option("--train-dict", train_dict, "Seed lexicon (omit for pre-aligned spaces)");

  auto* augment = sub("augment", "Extract silver pairs from aligned spaces");
  augment->add_option("src_vec", src_vec, "Aligned source vectors")->required();
  augment->add_option("tgt_vec", tgt_vec, "Target vectors")->required();
  augment->add_option("out_dict", out, "Silver lexicon output")->required();
  augment->add_option("--train-dict", train_dict, "Seed lexicon");

  auto* mine = sub("mine", "Mine negatives and assemble the training set");
  mine->add_option("src_vec", src_vec, "Aligned source vectors")->required();
  mine->add_option("tgt_vec", tgt_vec, "Target vectors")->required();
  mine->add_option("positives", positives, "Positive lexicon (seed plus silver)")->required();
  mine->add_option("out_dir", out, "Output directory for negatives.tsv and training_set.tsv")->required();

  auto* train = sub("train", "Train the built-in cross-encoder");
  train->add_option("training_set", training_set, "Training-set TSV")->required();
  train->add_option("checkpoint", out, "Model checkpoint output")->required();

  auto* rerank = sub("rerank", "Retrieve CSLS candidates and rerank them");
  rerank->add_option("src_vec", src_vec, "Aligned source vectors")->required();
  rerank->add_option("tgt_vec", tgt_vec, "Target vectors")->required();
  rerank->add_option("queries", queries, "Query words (first field of each line)")->required();
  rerank->add_option("out_predictions", out, "Prediction TSV output")->required();
  rerank->add_option("--model", checkpoint, "Model checkpoint");
  rerank->add_option("--dev-dict", dev_dict, "Lexicon for lambda tuning (with --rerank.tune_lambda true)");

  auto* eval = sub("eval", "Score predictions against a gold lexicon");
  eval->add_option("predictions", predictions, "Prediction TSV")->required();
  eval->add_option("gold", gold, "Gold lexicon")->required();
  eval->add_option("out_tsv", out, "Optional TSV output");

  auto* pipeline = sub("pipeline", "Run map, augment, mine, train, rerank and eval");
  pipeline->add_option("out_dir", out, "Output directory")->required();
  pipeline->add_flag("--synth", use_synth, "Use the synthetic benchmark described by synth.*");
  pipeline->add_option("--src-vec", src_vec, "Source word vectors");
  pipeline->add_option("--tgt-vec", tgt_vec, "Target word vectors");
  pipeline->add_option("--train-dict", train_dict, "Seed lexicon");
  pipeline->add_option("--dev-dict", dev_dict, "Development lexicon for lambda tuning");
  pipeline->add_option("--test-dict", test_dict, "Test lexicon");
  pipeline->add_option("--pivot-vec", pivot_vec, "Pivot word vectors (zero-shot)");
  pipeline->add_option("--pivot-src-dict", pivot_src_dict, "Pivot-to-source lexicon (zero-shot)");
  pipeline->add_option("--pivot-tgt-dict", pivot_tgt_dict, "Pivot-to-target lexicon (zero-shot)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const RunConfig cfg = resolve(common.at(name)).config;
  const Common& flags = common.at(name);

  if (name == "synth") {
    const auto bench = synth_from(cfg);
    const fs::path dir(out);
    fs::create_directories(dir);
    save_word_vectors(bench.src, dir / "src.vec");
    save_word_vectors(bench.tgt, dir / "tgt.vec");
    write_lexicon(bench.train, dir / "train.tsv");
    write_lexicon(bench.dev, dir / "dev.tsv");
    write_lexicon(bench.test, dir / "test.tsv");
    record(cfg, flags, dir / "manifest.conf");
    fmt::print("wrote {} source and {} target words, {} / {} / {} train / dev / test pairs to {}\n", bench.src.size(),
               bench.tgt.size(), bench.train.size(), bench.dev.size(), bench.test.size(), out);
  } else if (name == "map") {
    const auto seed = optional_lexicon(train_dict, cfg);
    if (seed.empty() && cfg.mode == Mode::Supervised) {
      throw ConfigError("mode: supervised mapping needs --train-dict");
    }
    const auto aligned = align_spaces(load_space(src_vec, cfg, cfg.langs.src),
                                      load_space(tgt_vec, cfg, cfg.langs.tgt), seed);
    const fs::path dir(out);
    fs::create_directories(dir);
    save_word_vectors(aligned.src, dir / "src.vec");
    save_word_vectors(aligned.tgt, dir / "tgt.vec");
    record(cfg, flags, dir / "manifest.conf");
    if (aligned.procrustes && aligned.procrustes->underdetermined) {
      fmt::print(stderr, "warning: seed lexicon has fewer pairs than dimensions\n");
    }
    fmt::print("mapped {} source words onto {} target words\n", aligned.src.size(), aligned.tgt.size());
  } else if (name == "augment") {
    const auto index = load_aligned_index(src_vec, tgt_vec, cfg);
    const auto seed = optional_lexicon(train_dict, cfg);
    const auto silver = augment_silver(index, seed, cfg.mining);
    write_lexicon(silver, out);
    record(cfg, flags, out + ".manifest.conf");
    fmt::print("{} silver pairs\n", silver.size());
  } else if (name == "mine") {
    const auto index = load_aligned_index(src_vec, tgt_vec, cfg);
    const auto pos = load_lexicon(positives, cfg.langs.src, cfg.langs.tgt);
    const auto mined = build_training_set(pos, index, cfg);
    const fs::path dir(out);
    fs::create_directories(dir);
    write_lexicon(mined.negatives, dir / "negatives.tsv");
    write_training_set(mined.training, dir / "training_set.tsv");
    record(cfg, flags, dir / "manifest.conf");
    fmt::print("{} positives, {} negatives, {} training examples\n", pos.size(), mined.negatives.size(),
               mined.training.size());
  } else if (name == "train") {
    require_file(training_set, "training-set file");
    const auto set = read_training_set(training_set, cfg.langs);
    crossenc::TrainReport report;
    const auto model = train_toy_scorer(set, cfg, &report);
    crossenc::save_checkpoint(model, out);
    record(cfg, flags, out + ".manifest.conf");
    for (std::size_t e = 0; e < report.epoch_losses.size(); ++e) {
      fmt::print("epoch {}: mean loss {:.6f}\n", e + 1, report.epoch_losses[e]);
    }
  } else if (name == "rerank") {
    const auto index = load_aligned_index(src_vec, tgt_vec, cfg);
    const auto words = load_queries(queries);
    std::unique_ptr<crossenc::PairScorer> scorer;
    const bool needs_scorer = cfg.rerank.lambda > 0.0 || cfg.tune_lambda;
    if (needs_scorer) {
      scorer = make_scorer(cfg, checkpoint.empty() ? std::nullopt : std::optional<fs::path>(checkpoint));
    }
    double lambda = cfg.rerank.lambda;
    if (cfg.tune_lambda) {
      if (dev_dict.empty()) throw ConfigError("rerank.tune_lambda needs --dev-dict");
      const auto dev = load_lexicon(dev_dict, cfg.langs.src, cfg.langs.tgt);
      const auto dev_scored = score_candidates(dev.source_words(), index, scorer.get(), cfg.rerank.n_cand);
      lambda = tune_lambda(dev_scored, dev, cfg.lambda_step).lambda;
      fmt::print("tuned lambda = {}\n", lambda);
    }
    RerankConfig rc = cfg.rerank;
    rc.lambda = lambda;
    const auto preds = translate(words, index, lambda == 0.0 ? nullptr : scorer.get(), rc);
    write_file(out, format_predictions(preds));
    record(cfg, flags, out + ".manifest.conf");
    fmt::print("{} queries reranked with lambda = {}\n", preds.size(), lambda);
  } else if (name == "eval") {
    const auto preds = parse_predictions(read_file(predictions), predictions);
    const auto g = load_lexicon(gold, cfg.langs.src, cfg.langs.tgt);
    const auto result = evaluate(preds, g);
    fmt::print("{}", format_eval_table({result}));
    if (!out.empty()) {
      write_file(out, format_eval_tsv({result}));
      record(cfg, flags, out + ".manifest.conf");
    } else if (!flags.manifest.empty()) {
      record(cfg, flags, flags.manifest);
    }
  } else if (name == "pipeline") {
    PipelineInputs in;
    if (use_synth) {
      auto bench = synth_from(cfg);
      in.src = std::move(bench.src);
      in.tgt = std::move(bench.tgt);
      in.train = std::move(bench.train);
      in.dev = std::move(bench.dev);
      in.test = std::move(bench.test);
    } else {
      if (src_vec.empty() || tgt_vec.empty() || test_dict.empty()) {
        throw ConfigError("pipeline needs --src-vec, --tgt-vec and --test-dict (or --synth)");
      }
      in.src = load_space(src_vec, cfg, cfg.langs.src);
      in.tgt = load_space(tgt_vec, cfg, cfg.langs.tgt);
      in.train = optional_lexicon(train_dict, cfg);
      in.dev = optional_lexicon(dev_dict, cfg);
      in.test = load_lexicon(test_dict, cfg.langs.src, cfg.langs.tgt);
      if (cfg.mode == Mode::ZeroShot) {
        if (pivot_vec.empty() || pivot_src_dict.empty() || pivot_tgt_dict.empty()) {
          throw ConfigError("mode: zero-shot needs --pivot-vec, --pivot-src-dict and --pivot-tgt-dict");
        }
        in.pivot = load_space(pivot_vec, cfg, cfg.pivot_lang);
        in.pivot_src = load_lexicon(pivot_src_dict, cfg.pivot_lang, cfg.langs.src);
        in.pivot_tgt = load_lexicon(pivot_tgt_dict, cfg.pivot_lang, cfg.langs.tgt);
      }
    }
    if (cfg.mode == Mode::SemiSupervised && in.train.empty()) {
      fmt::print(stderr, "note: no seed lexicon; training on silver pairs only\n");
    }
    const auto result = run_pipeline(in, cfg, out);
    if (!flags.manifest.empty()) record(cfg, flags, flags.manifest);
    fmt::print("positives {}, negatives {}, training examples {}\n", result.positives, result.negatives,
               result.training_examples);
    for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
      fmt::print("epoch {}: mean loss {:.6f}\n", e + 1, result.epoch_losses[e]);
    }
    fmt::print("lambda = {}\n", result.lambda);
    auto baseline = result.baseline;
    baseline.direction += " csls";
    auto reranked = result.reranked;
    reranked.direction += " mix";
    fmt::print("{}", format_eval_table({baseline, reranked}));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const blicer::ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitData;
  }
}
