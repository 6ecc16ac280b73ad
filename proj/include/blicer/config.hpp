// SPDX-License-Identifier: Apache-2.0
//
// Flat `dotted.key=value` run configuration. Resolution order: mode
// defaults, then the config file, then command-line overrides. The resolved
// configuration is written back as a manifest that reloads to the same
// bytes.
#pragma once

#include "blicer/clwe.hpp"
#include "blicer/crossenc/model.hpp"
#include "blicer/crossenc/trainer.hpp"
#include "blicer/eval.hpp"
#include "blicer/mining.hpp"
#include "blicer/rerank.hpp"
#include "blicer/training_set.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace blicer {

enum class Mode { Supervised, SemiSupervised, ZeroShot };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

struct RunConfig {
  Mode mode = Mode::Supervised;
  LanguagePair langs{"en", "de"};
  std::string pivot_lang = "en";  // zero-shot only
  std::size_t max_vocab = 200000;
  CslsConfig csls;
  MiningConfig mining;
  std::size_t n_rep = 8;
  PolarisationParams polarisation;
  crossenc::TrainConfig train;
  crossenc::ModelConfig model;  // vocab_size is filled in from the data
  int template_id = 15;
  RerankConfig rerank;
  bool tune_lambda = false;
  double lambda_step = 0.05;
  SynthSpec synth;
  std::string scorer_cmd;

  void validate() const;
};

using KeyValues = std::map<std::string, std::string>;

/// Parses `key=value` lines; `#` starts a comment line. Throws ConfigError
/// for malformed lines (naming the line).
KeyValues parse_key_values(std::string_view text, std::string_view source_name = "<memory>");

/// Every recognised key, sorted.
const std::vector<std::string>& config_keys();

/// Defaults for `mode` (hyperparameters of the supervised or semi-supervised
/// setup), before any file or flag.
RunConfig mode_defaults(Mode mode);

struct ResolvedConfig {
  RunConfig config;
  /// Seed keys that were absent and freshly drawn.
  std::vector<std::string> drawn_seeds;
};

/// Applies `file` then `flags` on top of the mode defaults. Unknown keys and
/// invalid values raise ConfigError naming the key. Absent seeds are drawn.
ResolvedConfig resolve_config(const KeyValues& file, const KeyValues& flags);

KeyValues to_key_values(const RunConfig& cfg);
std::string format_manifest(const RunConfig& cfg);
void write_manifest(const RunConfig& cfg, const std::filesystem::path& path);
KeyValues read_key_values(const std::filesystem::path& path);

}  // namespace blicer
