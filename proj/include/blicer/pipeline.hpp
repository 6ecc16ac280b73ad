// SPDX-License-Identifier: Apache-2.0
//
// End-to-end stages shared by the command-line tool and the tests:
// map -> augment -> mine -> train -> rerank -> eval.
#pragma once

#include "blicer/clwe.hpp"
#include "blicer/config.hpp"
#include "blicer/crossenc/scorer.hpp"
#include "blicer/eval.hpp"
#include "blicer/lexicon.hpp"
#include "blicer/rerank.hpp"
#include "blicer/training_set.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace blicer {

struct AlignedSpaces {
  EmbeddingSpace src;  // mapped into the target space
  EmbeddingSpace tgt;
  /// Absent when no seed lexicon was given and the inputs were taken as
  /// already aligned.
  std::optional<ProcrustesResult> procrustes;
};

/// Unit-normalizes both spaces and maps the source side with Procrustes on
/// `seed`. An empty seed keeps the inputs as they are (pre-aligned spaces).
AlignedSpaces align_spaces(EmbeddingSpace src, EmbeddingSpace tgt, const Lexicon& seed);

CslsIndex make_index(const AlignedSpaces& spaces, const CslsConfig& cfg);

/// Seed pairs followed by the silver pairs.
Lexicon merge_positives(const Lexicon& seed, const Lexicon& silver);

struct MinedSet {
  Lexicon negatives;
  TrainingSet training;
};

/// Negative mining plus polarised training-set assembly for one index.
MinedSet build_training_set(const Lexicon& positives, const CslsIndex& index, const RunConfig& cfg);

/// Character vocabulary is drawn from `set`; the model is freshly
/// initialized from cfg.model and trained with cfg.train.
crossenc::ModelScorer train_toy_scorer(const TrainingSet& set, const RunConfig& cfg,
                                       crossenc::TrainReport* report = nullptr);

/// Lambda grid {0, step, 2*step, ..., 1}.
std::vector<double> lambda_grid(double step);

struct LambdaChoice {
  double lambda = 0.0;
  EvalResult result;
};

/// Best lambda on `gold` by P@1, then MRR, then the smaller lambda.
LambdaChoice tune_lambda(const ScoredCandidates& scored, const Lexicon& gold, double step);

struct PipelineInputs {
  EmbeddingSpace src;
  EmbeddingSpace tgt;
  Lexicon train;  // may be empty in semi-supervised mode
  Lexicon dev;    // may be empty
  Lexicon test;
  /// Zero-shot only: a pivot space and pivot->src / pivot->tgt lexicons.
  std::optional<EmbeddingSpace> pivot;
  Lexicon pivot_src;
  Lexicon pivot_tgt;
};

struct PipelineResult {
  EvalResult baseline;
  EvalResult reranked;
  double lambda = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t training_examples = 0;
  std::vector<double> epoch_losses;
  std::vector<RankedPrediction> predictions;
};

/// Runs every stage and writes the artifacts (manifest.conf, positives.tsv,
/// negatives.tsv, training_set.tsv, model.ckpt, predictions.tsv,
/// baseline_predictions.tsv, eval.tsv, baseline_eval.tsv, lambda.txt) under `out_dir`.
PipelineResult run_pipeline(const PipelineInputs& inputs, const RunConfig& cfg,
                            const std::filesystem::path& out_dir);

/// The scorer selected by the configuration: an external process when
/// cfg.scorer_cmd is set, otherwise the checkpoint at `checkpoint`.
std::unique_ptr<crossenc::PairScorer> make_scorer(const RunConfig& cfg,
                                                  const std::optional<std::filesystem::path>& checkpoint);

}  // namespace blicer
