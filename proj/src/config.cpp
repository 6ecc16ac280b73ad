// SPDX-License-Identifier: Apache-2.0
#include "blicer/config.hpp"

#include "blicer/crossenc/templates.hpp"
#include "blicer/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace blicer {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Supervised: return "supervised";
    case Mode::SemiSupervised: return "semi-supervised";
    case Mode::ZeroShot: return "zero-shot";
  }
  return "?";
}

Mode parse_mode(std::string_view s) {
  if (s == "supervised") return Mode::Supervised;
  if (s == "semi-supervised") return Mode::SemiSupervised;
  if (s == "zero-shot") return Mode::ZeroShot;
  throw ConfigError(fmt::format("mode: unknown value '{}' (supervised | semi-supervised | zero-shot)", s));
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not a valid {}", key, value,
                                  std::is_floating_point_v<T> ? "number" : "non-negative integer"));
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) throw ConfigError(fmt::format("{}: '{}' is not finite", key, value));
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError(fmt::format("{}: '{}' is not true or false", key, value));
}

void require(bool ok, const std::string& key, std::string_view what) {
  if (!ok) throw ConfigError(fmt::format("{}: {}", key, what));
}

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
};

template <typename Get>
Field count_field(Get ref, std::size_t min) {
  return {[ref](const RunConfig& c) { return fmt::format("{}", ref(c)); },
          [ref, min](RunConfig& c, const std::string& k, const std::string& v) {
            const auto n = parse_number<std::size_t>(k, v);
            require(n >= min, k, fmt::format("must be >= {}", min));
            ref(c) = n;
          }};
}

template <typename Get>
Field seed_field(Get ref) {
  return {[ref](const RunConfig& c) { return fmt::format("{}", ref(c)); },
          [ref](RunConfig& c, const std::string& k, const std::string& v) {
            ref(c) = parse_number<std::uint64_t>(k, v);
          }};
}

template <typename Get>
Field real_field(Get ref, double lo, double hi, bool lo_open = false) {
  return {[ref](const RunConfig& c) { return fmt::format("{}", ref(c)); },
          [ref, lo, hi, lo_open](RunConfig& c, const std::string& k, const std::string& v) {
            const auto x = parse_number<double>(k, v);
            const bool ok = (lo_open ? x > lo : x >= lo) && x <= hi;
            require(ok, k, fmt::format("{} outside {}{}, {}]", v, lo_open ? "(" : "[", lo, hi));
            ref(c) = x;
          }};
}

template <typename Get>
Field lang_field(Get ref) {
  return {[ref](const RunConfig& c) { return ref(c); },
          [ref](RunConfig& c, const std::string& k, const std::string& v) {
            require(!v.empty() && v.find_first_of(" \t") == std::string::npos, k, "must be a non-empty tag");
            ref(c) = v;
          }};
}

constexpr double kInf = std::numeric_limits<double>::max();

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["mode"] = {[](const RunConfig& c) { return std::string(to_string(c.mode)); },
                 [](RunConfig& c, const std::string&, const std::string& v) { c.mode = parse_mode(v); }};
    t["lang.src"] = lang_field([](auto& c) -> auto& { return c.langs.src; });
    t["lang.tgt"] = lang_field([](auto& c) -> auto& { return c.langs.tgt; });
    t["lang.pivot"] = lang_field([](auto& c) -> auto& { return c.pivot_lang; });
    t["data.max_vocab"] = count_field([](auto& c) -> auto& { return c.max_vocab; }, 1);

    t["csls.k"] = count_field([](auto& c) -> auto& { return c.csls.k; }, 1);
    t["csls.scaling"] = {[](const RunConfig& c) { return std::string(to_string(c.csls.scaling)); },
                         [](RunConfig& c, const std::string& k, const std::string& v) {
                           try {
                             c.csls.scaling = parse_score_scaling(v);
                           } catch (const Error& e) {
                             throw ConfigError(fmt::format("{}: {}", k, e.what()));
                           }
                         }};

    t["mining.delta"] = real_field([](auto& c) -> auto& { return c.mining.delta; }, 0.0, 2.0);
    t["mining.n_neg"] = count_field([](auto& c) -> auto& { return c.mining.n_neg; }, 1);
    t["mining.n_freq"] = count_field([](auto& c) -> auto& { return c.mining.n_freq; }, 1);
    t["mining.n_aug"] = count_field([](auto& c) -> auto& { return c.mining.n_aug; }, 0);
    t["mining.n_rep"] = count_field([](auto& c) -> auto& { return c.n_rep; }, 1);
    t["mining.neg_cap"] = {[](const RunConfig& c) { return std::string(to_string(c.mining.cap)); },
                           [](RunConfig& c, const std::string& k, const std::string& v) {
                             try {
                               c.mining.cap = parse_negative_cap(v);
                             } catch (const Error& e) {
                               throw ConfigError(fmt::format("{}: {}", k, e.what()));
                             }
                           }};
    t["mining.alpha"] = real_field([](auto& c) -> auto& { return c.polarisation.alpha; }, 0.0, 1.0);

    t["train.epochs"] = count_field([](auto& c) -> auto& { return c.train.epochs; }, 0);
    t["train.batch_size"] = count_field([](auto& c) -> auto& { return c.train.batch_size; }, 1);
    t["train.learning_rate"] =
        real_field([](auto& c) -> auto& { return c.train.learning_rate; }, 0.0, kInf, true);
    t["train.weight_decay"] = real_field([](auto& c) -> auto& { return c.train.weight_decay; }, 0.0, kInf);
    t["train.shuffle_seed"] = seed_field([](auto& c) -> auto& { return c.train.shuffle_seed; });

    t["model.max_len"] = count_field([](auto& c) -> auto& { return c.model.max_len; },
                                     crossenc::CharTokenizer::kMinLength);
    t["model.width"] = count_field([](auto& c) -> auto& { return c.model.width; }, 1);
    t["model.layers"] = count_field([](auto& c) -> auto& { return c.model.layers; }, 0);
    t["model.heads"] = count_field([](auto& c) -> auto& { return c.model.heads; }, 1);
    t["model.ff"] = count_field([](auto& c) -> auto& { return c.model.ff; }, 1);
    t["model.seed"] = seed_field([](auto& c) -> auto& { return c.model.seed; });
    t["model.template"] = {[](const RunConfig& c) { return fmt::format("{}", c.template_id); },
                           [](RunConfig& c, const std::string& k, const std::string& v) {
                             const auto id = parse_number<int>(k, v);
                             require(id >= 1 && id <= 16, k, "must be a template id in 1..16");
                             c.template_id = id;
                           }};

    t["rerank.lambda"] = real_field([](auto& c) -> auto& { return c.rerank.lambda; }, 0.0, 1.0);
    t["rerank.n_cand"] = count_field([](auto& c) -> auto& { return c.rerank.n_cand; }, 1);
    t["rerank.tune_lambda"] = {[](const RunConfig& c) { return std::string(c.tune_lambda ? "true" : "false"); },
                               [](RunConfig& c, const std::string& k, const std::string& v) {
                                 c.tune_lambda = parse_bool(k, v);
                               }};
    t["rerank.lambda_step"] = real_field([](auto& c) -> auto& { return c.lambda_step; }, 0.0, 1.0, true);

    t["synth.src_vocab"] = count_field([](auto& c) -> auto& { return c.synth.src_vocab; }, 1);
    t["synth.tgt_vocab"] = count_field([](auto& c) -> auto& { return c.synth.tgt_vocab; }, 1);
    t["synth.dim"] = count_field([](auto& c) -> auto& { return c.synth.dim; }, 1);
    t["synth.noise"] = real_field([](auto& c) -> auto& { return c.synth.noise; }, 0.0, kInf);
    t["synth.n_train"] = count_field([](auto& c) -> auto& { return c.synth.n_train; }, 0);
    t["synth.n_dev"] = count_field([](auto& c) -> auto& { return c.synth.n_dev; }, 0);
    t["synth.n_test"] = count_field([](auto& c) -> auto& { return c.synth.n_test; }, 0);
    t["synth.seed"] = seed_field([](auto& c) -> auto& { return c.synth.seed; });

    t["scorer.cmd"] = {[](const RunConfig& c) { return c.scorer_cmd; },
                       [](RunConfig& c, const std::string&, const std::string& v) { c.scorer_cmd = v; }};
    return t;
  }();
  return table;
}

const std::vector<std::string> kSeedKeys = {"model.seed", "synth.seed", "train.shuffle_seed"};

}  // namespace

void RunConfig::validate() const {
  if (model.width % model.heads != 0) {
    throw ConfigError(fmt::format("model.heads: {} does not divide model.width={}", model.heads, model.width));
  }
  if (langs.src == langs.tgt) throw ConfigError(fmt::format("lang.tgt: same tag as lang.src ('{}')", langs.src));
  if (synth.n_train + synth.n_dev + synth.n_test > std::min(synth.src_vocab, synth.tgt_vocab)) {
    throw ConfigError(fmt::format("synth.n_test: train {} + dev {} + test {} exceeds the {} gold pairs",
                                  synth.n_train, synth.n_dev, synth.n_test,
                                  std::min(synth.src_vocab, synth.tgt_vocab)));
  }
}

KeyValues parse_key_values(std::string_view text, std::string_view source_name) {
  KeyValues out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected key=value, found '{}'", source_name, line_no, t));
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", source_name, line_no));
    out[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : fields()) k.push_back(name);
    return k;
  }();
  return keys;
}

RunConfig mode_defaults(Mode mode) {
  RunConfig c;
  c.mode = mode;
  c.csls.k = 10;
  c.mining.n_freq = 20000;
  c.mining.n_neg = 28;
  c.rerank.n_cand = 28;
  c.train.batch_size = 256;
  c.train.weight_decay = 0.01;
  c.train.learning_rate = crossenc::kToyLearningRate;
  c.template_id = crossenc::kDefaultTemplate;
  if (mode == Mode::SemiSupervised) {
    c.train.epochs = 5;
    c.mining.n_aug = 4000;
    c.n_rep = 4;
    c.mining.delta = 0.2;
    c.polarisation.alpha = 1.0;
    c.rerank.lambda = kSemiSupervisedLambda;
  } else {
    c.train.epochs = 3;
    c.mining.n_aug = 0;
    c.n_rep = 8;
    c.mining.delta = 0.1;
    c.polarisation.alpha = 0.7;
    c.rerank.lambda = kSupervisedLambda;
  }
  return c;
}

ResolvedConfig resolve_config(const KeyValues& file, const KeyValues& flags) {
  KeyValues merged = file;
  for (const auto& [k, v] : flags) merged[k] = v;

  for (const auto& [k, _] : merged) {
    if (!fields().contains(k)) throw ConfigError(fmt::format("{}: unknown configuration key", k));
  }

  ResolvedConfig out;
  const auto mode_it = merged.find("mode");
  out.config = mode_defaults(mode_it == merged.end() ? Mode::Supervised : parse_mode(mode_it->second));
  for (const auto& [k, v] : merged) fields().at(k).set(out.config, k, v);

  if (!out.config.scorer_cmd.empty() && !merged.contains("train.learning_rate")) {
    out.config.train.learning_rate = crossenc::kPretrainedLearningRate;
  }

  std::random_device rd;
  for (const auto& key : kSeedKeys) {
    if (merged.contains(key)) continue;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    fields().at(key).set(out.config, key, fmt::format("{}", seed));
    out.drawn_seeds.push_back(key);
  }

  out.config.validate();
  return out;
}

KeyValues to_key_values(const RunConfig& cfg) {
  KeyValues out;
  for (const auto& [k, f] : fields()) out[k] = f.get(cfg);
  return out;
}

std::string format_manifest(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : to_key_values(cfg)) out += fmt::format("{}={}\n", k, v);
  return out;
}

void write_manifest(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write manifest '{}'", path.string()));
  out << format_manifest(cfg);
  if (!out) throw DataError(fmt::format("error writing manifest '{}'", path.string()));
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

}  // namespace blicer
