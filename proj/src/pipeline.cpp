// SPDX-License-Identifier: Apache-2.0
#include "blicer/pipeline.hpp"

#include "blicer/error.hpp"
#include "blicer/mining.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

namespace blicer {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw DataError(fmt::format("error writing '{}'", path.string()));
}

EmbeddingSpace map_onto(const EmbeddingSpace& space, const EmbeddingSpace& pivot, const Lexicon& pivot_to_space) {
  const auto fit = fit_procrustes(space, pivot, reverse_lexicon(pivot_to_space));
  return apply_map(space, fit.map);
}

ZeroShotDictionary zero_shot_dictionary(const Lexicon& positives, const CslsIndex& index, const RunConfig& cfg) {
  ZeroShotDictionary d;
  d.positives = positives;
  d.negatives = mine_negatives(positives, index, cfg.mining);
  d.scores = scaled_pair_scores(d.positives, d.negatives, index, cfg.csls.scaling);
  return d;
}

}  // namespace

AlignedSpaces align_spaces(EmbeddingSpace src, EmbeddingSpace tgt, const Lexicon& seed) {
  AlignedSpaces out;
  out.tgt = unit_normalize(std::move(tgt));
  src = unit_normalize(std::move(src));
  if (seed.empty()) {
    if (src.dim() != out.tgt.dim()) {
      throw DataError(fmt::format("source dimension {} differs from target dimension {}", src.dim(), out.tgt.dim()));
    }
    out.src = std::move(src);
    return out;
  }
  out.procrustes = fit_procrustes(src, out.tgt, seed);
  out.src = apply_map(src, out.procrustes->map);
  return out;
}

CslsIndex make_index(const AlignedSpaces& spaces, const CslsConfig& cfg) {
  return CslsIndex(spaces.src, spaces.tgt, cfg);
}

Lexicon merge_positives(const Lexicon& seed, const Lexicon& silver) {
  Lexicon out(seed.empty() ? silver.direction() : seed.direction());
  for (const auto& p : seed) out.insert(p);
  for (const auto& p : silver) out.insert(p);
  return out;
}

MinedSet build_training_set(const Lexicon& positives, const CslsIndex& index, const RunConfig& cfg) {
  if (positives.empty()) throw DataError("no positive pairs to train on");
  MinedSet out;
  out.negatives = mine_negatives(positives, index, cfg.mining);
  const auto scores = scaled_pair_scores(positives, out.negatives, index, cfg.csls.scaling);
  out.training = assemble_training_set(positives, out.negatives, scores, cfg.polarisation, cfg.n_rep);
  return out;
}

crossenc::ModelScorer train_toy_scorer(const TrainingSet& set, const RunConfig& cfg, crossenc::TrainReport* report) {
  auto encoder = crossenc::PairEncoder::for_training_set(set, crossenc::template_by_id(cfg.template_id),
                                                         crossenc::LanguageNameTable::builtin(), cfg.model.max_len);
  crossenc::ModelConfig mc = cfg.model;
  mc.vocab_size = encoder.tokenizer().vocab_size();
  crossenc::CrossEncoder model(mc);
  const auto examples = encoder.encode(set);
  auto r = crossenc::train(model, examples, cfg.train);
  if (report != nullptr) *report = std::move(r);
  return crossenc::ModelScorer(std::move(encoder), std::move(model));
}

std::vector<double> lambda_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ConfigError(fmt::format("rerank.lambda_step={} outside (0, 1]", step));
  std::vector<double> grid;
  const double inv = 1.0 / step;
  const double whole = std::round(inv);
  const auto n = static_cast<std::size_t>(std::floor(inv + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i);
    grid.push_back(std::min(1.0, std::abs(inv - whole) < 1e-9 ? x / whole : x * step));
  }
  if (grid.back() < 1.0) grid.push_back(1.0);
  return grid;
}

LambdaChoice tune_lambda(const ScoredCandidates& scored, const Lexicon& gold, double step) {
  std::optional<LambdaChoice> best;
  for (const double lambda : lambda_grid(step)) {
    const EvalResult r = evaluate(rank(scored, lambda), gold);
    if (!best || r.p_at_1 > best->result.p_at_1 || (r.p_at_1 == best->result.p_at_1 && r.mrr > best->result.mrr)) {
      best = LambdaChoice{lambda, r};
    }
  }
  return *best;
}

std::unique_ptr<crossenc::PairScorer> make_scorer(const RunConfig& cfg,
                                                  const std::optional<std::filesystem::path>& checkpoint) {
  if (!cfg.scorer_cmd.empty()) return std::make_unique<crossenc::ExternalScorer>(cfg.scorer_cmd);
  if (!checkpoint) throw ConfigError("a model checkpoint or scorer.cmd is required when rerank.lambda > 0");
  return std::make_unique<crossenc::ModelScorer>(crossenc::load_checkpoint(*checkpoint));
}

PipelineResult run_pipeline(const PipelineInputs& inputs, const RunConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  write_manifest(cfg, out_dir / "manifest.conf");
  if (inputs.test.empty()) throw DataError("the test lexicon is empty");

  PipelineResult result;
  EmbeddingSpace src = inputs.src;
  EmbeddingSpace tgt = inputs.tgt;
  src.vocab.set_language_tag(cfg.langs.src);
  tgt.vocab.set_language_tag(cfg.langs.tgt);

  TrainingSet training;
  std::optional<CslsIndex> index;
  Lexicon positives;
  Lexicon negatives;

  if (cfg.mode == Mode::ZeroShot) {
    if (!inputs.pivot) throw ConfigError("mode: zero-shot needs a pivot space and two pivot lexicons");
    if (cfg.pivot_lang == cfg.langs.src || cfg.pivot_lang == cfg.langs.tgt) {
      throw ConfigError(fmt::format("lang.pivot: '{}' must differ from lang.src and lang.tgt", cfg.pivot_lang));
    }
    if (inputs.pivot_src.empty() || inputs.pivot_tgt.empty()) {
      throw DataError("zero-shot pivot lexicons must not be empty");
    }
    auto pivot = std::make_shared<EmbeddingSpace>(unit_normalize(*inputs.pivot));
    pivot->vocab.set_language_tag(cfg.pivot_lang);
    auto x = std::make_shared<EmbeddingSpace>(map_onto(unit_normalize(src), *pivot, inputs.pivot_src));
    auto y = std::make_shared<EmbeddingSpace>(map_onto(unit_normalize(tgt), *pivot, inputs.pivot_tgt));
    const CslsIndex px(pivot, x, cfg.csls);
    const CslsIndex py(pivot, y, cfg.csls);
    const auto first = zero_shot_dictionary(inputs.pivot_src, px, cfg);
    const auto second = zero_shot_dictionary(inputs.pivot_tgt, py, cfg);
    training = assemble_zero_shot(first, second, cfg.polarisation, cfg.n_rep);
    positives = merge_positives(first.positives, second.positives);
    negatives = first.negatives;
    for (const auto& p : second.negatives) negatives.insert(p);
    index.emplace(x, y, cfg.csls);
  } else {
    if (cfg.mode == Mode::Supervised && inputs.train.empty()) {
      throw ConfigError("mode: supervised needs a non-empty training lexicon");
    }
    const auto aligned = align_spaces(std::move(src), std::move(tgt), inputs.train);
    index.emplace(make_index(aligned, cfg.csls));
    Lexicon silver(LanguagePair{cfg.langs.src, cfg.langs.tgt});
    if (cfg.mining.n_aug > 0) silver = augment_silver(*index, inputs.train, cfg.mining);
    positives = merge_positives(inputs.train, silver);
    auto mined = build_training_set(positives, *index, cfg);
    negatives = std::move(mined.negatives);
    training = std::move(mined.training);
  }
  write_lexicon(positives, out_dir / "positives.tsv");
  write_lexicon(negatives, out_dir / "negatives.tsv");
  write_training_set(training, out_dir / "training_set.tsv");
  result.positives = positives.size();
  result.negatives = negatives.size();
  result.training_examples = training.size();

  std::unique_ptr<crossenc::PairScorer> scorer;
  if (!cfg.scorer_cmd.empty()) {
    scorer = std::make_unique<crossenc::ExternalScorer>(cfg.scorer_cmd);
  } else {
    crossenc::TrainReport report;
    auto model = train_toy_scorer(training, cfg, &report);
    result.epoch_losses = report.epoch_losses;
    crossenc::save_checkpoint(model, out_dir / "model.ckpt");
    scorer = std::make_unique<crossenc::ModelScorer>(std::move(model));
  }

  result.lambda = cfg.rerank.lambda;
  if (cfg.tune_lambda && !inputs.dev.empty()) {
    const auto dev_queries = inputs.dev.source_words();
    const auto dev_scored = score_candidates(dev_queries, *index, scorer.get(), cfg.rerank.n_cand);
    result.lambda = tune_lambda(dev_scored, inputs.dev, cfg.lambda_step).lambda;
  }

  const auto queries = inputs.test.source_words();
  const auto scored = score_candidates(queries, *index, scorer.get(), cfg.rerank.n_cand);
  const auto baseline = rank(scored, 0.0);
  result.predictions = rank(scored, result.lambda);
  result.baseline = evaluate(baseline, inputs.test);
  result.reranked = evaluate(result.predictions, inputs.test);

  write_text(out_dir / "baseline_predictions.tsv", format_predictions(baseline));
  write_text(out_dir / "predictions.tsv", format_predictions(result.predictions));
  write_text(out_dir / "baseline_eval.tsv", format_eval_tsv({result.baseline}));
  write_text(out_dir / "eval.tsv", format_eval_tsv({result.reranked}));
  write_text(out_dir / "lambda.txt", fmt::format("{}\n", result.lambda));
  return result;
}

}  // namespace blicer
