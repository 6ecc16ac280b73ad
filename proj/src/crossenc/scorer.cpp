// SPDX-License-Identifier: Apache-2.0
#include "blicer/crossenc/scorer.hpp"

#include "blicer/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <csignal>
#include <cstring>
#include <fstream>
#include <set>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace blicer::crossenc {

PairEncoder::PairEncoder(Template tmpl, LanguageNameTable names, CharTokenizer tokenizer)
    : template_(std::move(tmpl)), names_(std::move(names)), tokenizer_(std::move(tokenizer)) {}

PairEncoder PairEncoder::for_training_set(const TrainingSet& examples, const Template& tmpl,
                                          const LanguageNameTable& names, std::size_t max_len) {
  std::set<std::string> texts;
  for (const auto& e : examples) {
    texts.insert(render_template(e.pair.src, e.langs.src, tmpl, names));
    texts.insert(render_template(e.pair.tgt, e.langs.tgt, tmpl, names));
  }
  std::vector<std::string> corpus(texts.begin(), texts.end());
  return PairEncoder(tmpl, names, CharTokenizer(corpus, max_len));
}

std::vector<TokenId> PairEncoder::encode(const WordPair& pair, const LanguagePair& langs) const {
  return tokenizer_.encode_pair(render_template(pair.src, langs.src, template_, names_),
                                render_template(pair.tgt, langs.tgt, template_, names_));
}

std::vector<EncodedExample> PairEncoder::encode(const TrainingSet& examples) const {
  std::vector<EncodedExample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    out.push_back({encode(e.pair, e.langs), e.target, e.pair.src + "\t" + e.pair.tgt});
  }
  return out;
}

std::vector<double> symmetric_scores(PairScorer& scorer, std::span<const WordPair> pairs, const LanguagePair& langs) {
  std::vector<WordPair> reversed;
  reversed.reserve(pairs.size());
  for (const auto& p : pairs) reversed.push_back(p.reversed());
  const auto forward = scorer.score(pairs, langs);
  const auto backward = scorer.score(reversed, langs.reversed());
  std::vector<double> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) out[i] = (forward[i] + backward[i]) / 2.0;
  return out;
}

ModelScorer::ModelScorer(PairEncoder encoder, CrossEncoder model)
    : encoder_(std::move(encoder)), model_(std::move(model)) {
  if (model_.config().vocab_size != encoder_.tokenizer().vocab_size() ||
      model_.config().max_len != encoder_.tokenizer().max_len()) {
    throw DataError("model and tokenizer disagree on vocabulary size or max_len");
  }
}

double ModelScorer::score_one(const WordPair& pair, const LanguagePair& langs) const {
  return sigmoid(model_.logit(encoder_.encode(pair, langs)));
}

double ModelScorer::symmetric_score(const WordPair& pair, const LanguagePair& langs) const {
  return (score_one(pair, langs) + score_one(pair.reversed(), langs.reversed())) / 2.0;
}

std::vector<double> ModelScorer::score(std::span<const WordPair> pairs, const LanguagePair& langs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(score_one(p, langs));
  return out;
}

std::vector<double> ExternalScorer::score(std::span<const WordPair> pairs, const LanguagePair&) {
  return external_score(command_, pairs);
}

namespace {

using Kind = ScorerProtocolError::Kind;

// Restores the previous SIGPIPE disposition on scope exit; a scorer that
// exits early must surface as a protocol error, not kill this process.
class IgnoreSigpipe {
 public:
  IgnoreSigpipe() {
    struct sigaction ignore {};
    ignore.sa_handler = SIG_IGN;
    sigemptyset(&ignore.sa_mask);
    sigaction(SIGPIPE, &ignore, &saved_);
  }
  ~IgnoreSigpipe() { sigaction(SIGPIPE, &saved_, nullptr); }
  IgnoreSigpipe(const IgnoreSigpipe&) = delete;
  IgnoreSigpipe& operator=(const IgnoreSigpipe&) = delete;

 private:
  struct sigaction saved_ {};
};

struct ProcessResult {
  std::string output;
  int status = 0;
};

ProcessResult run_process(const std::string& command, const std::string& input) {
  int to_child[2];
  int from_child[2];
  if (pipe(to_child) != 0) throw ScorerProtocolError(Kind::ProcessFailed, "pipe() failed");
  if (pipe(from_child) != 0) {
    close(to_child[0]);
    close(to_child[1]);
    throw ScorerProtocolError(Kind::ProcessFailed, "pipe() failed");
  }
  IgnoreSigpipe guard;
  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) close(fd);
    throw ScorerProtocolError(Kind::ProcessFailed, "fork() failed");
  }
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) close(fd);
    signal(SIGPIPE, SIG_DFL);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  int write_fd = to_child[1];
  const int read_fd = from_child[0];
  fcntl(write_fd, F_SETFL, fcntl(write_fd, F_GETFL) | O_NONBLOCK);

  ProcessResult result;
  std::size_t written = 0;
  if (input.empty()) {
    close(write_fd);
    write_fd = -1;
  }
  char buf[65536];
  for (;;) {
    pollfd fds[2];
    nfds_t nfds = 0;
    fds[nfds++] = {read_fd, POLLIN, 0};
    if (write_fd >= 0) fds[nfds++] = {write_fd, POLLOUT, 0};
    if (poll(fds, nfds, -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (write_fd >= 0 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t n = write(write_fd, input.data() + written, input.size() - written);
      if (n > 0) written += static_cast<std::size_t>(n);
      if ((n < 0 && errno != EAGAIN && errno != EINTR) || written == input.size()) {
        close(write_fd);
        write_fd = -1;
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      const ssize_t n = read(read_fd, buf, sizeof buf);
      if (n > 0) {
        result.output.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
        break;
      }
    }
  }
  if (write_fd >= 0) close(write_fd);
  close(read_fd);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.status = status;
  return result;
}

}  // namespace

std::vector<double> external_score(const std::string& command, std::span<const WordPair> pairs) {
  std::string input;
  for (const auto& p : pairs) {
    input += p.src;
    input += '\t';
    input += p.tgt;
    input += '\n';
  }
  const auto result = run_process(command, input);
  if (!WIFEXITED(result.status) || WEXITSTATUS(result.status) != 0) {
    throw ScorerProtocolError(Kind::ProcessFailed,
                              fmt::format("scorer '{}' failed (wait status {})", command, result.status));
  }

  std::vector<double> scores;
  scores.reserve(pairs.size());
  std::size_t start = 0;
  std::size_t line_no = 0;
  const std::string& out = result.output;
  while (start < out.size()) {
    std::size_t end = out.find('\n', start);
    if (end == std::string::npos) end = out.size();
    std::string_view line(out.data() + start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (line.empty() || ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(value)) {
      throw ScorerProtocolError(Kind::MalformedScore,
                                fmt::format("scorer output line {}: '{}' is not a decimal float", line_no, line));
    }
    if (value < 0.0 || value > 1.0) {
      throw ScorerProtocolError(Kind::OutOfRange,
                                fmt::format("scorer output line {}: score {} outside [0, 1]", line_no, line));
    }
    scores.push_back(value);
  }
  if (scores.size() != pairs.size()) {
    throw ScorerProtocolError(Kind::CountMismatch, fmt::format("scorer returned {} scores for {} pairs",
                                                               scores.size(), pairs.size()));
  }
  return scores;
}

namespace {

constexpr std::string_view kMagic = "BLICER-CROSSENC 1\n";

}  // namespace

void save_checkpoint(const ModelScorer& scorer, const std::filesystem::path& path) {
  const auto& cfg = scorer.model().config();
  const auto& enc = scorer.encoder();
  nlohmann::json header;
  header["model"] = {{"vocab_size", cfg.vocab_size}, {"max_len", cfg.max_len}, {"width", cfg.width},
                     {"layers", cfg.layers},         {"heads", cfg.heads},     {"ff", cfg.ff},
                     {"seed", cfg.seed}};
  std::vector<std::uint32_t> chars;
  for (char32_t c : enc.tokenizer().chars()) chars.push_back(static_cast<std::uint32_t>(c));
  header["tokenizer"] = {{"chars", chars}, {"max_len", enc.tokenizer().max_len()}};
  header["template"] = enc.templ().id;
  header["languages"] = enc.names().entries();
  header["parameters"] = scorer.model().parameter_count();
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write checkpoint '{}'", path.string()));
  out << kMagic << text.size() << '\n' << text;
  const auto params = scorer.model().parameters();
  out.write(reinterpret_cast<const char*>(params.data()), static_cast<std::streamsize>(params.size_bytes()));
  if (!out) throw DataError(fmt::format("write failed for checkpoint '{}'", path.string()));
}

ModelScorer load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open checkpoint '{}'", path.string()));
  std::string magic(kMagic.size(), '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (magic != kMagic) throw ParseError(fmt::format("'{}' is not a cross-encoder checkpoint", path.string()));
  std::size_t header_size = 0;
  in >> header_size;
  in.get();
  std::string text(header_size, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_size));
  if (!in) throw ParseError(fmt::format("'{}': truncated checkpoint header", path.string()));

  try {
    const auto header = nlohmann::json::parse(text);
    ModelConfig cfg;
    const auto& m = header.at("model");
    cfg.vocab_size = m.at("vocab_size");
    cfg.max_len = m.at("max_len");
    cfg.width = m.at("width");
    cfg.layers = m.at("layers");
    cfg.heads = m.at("heads");
    cfg.ff = m.at("ff");
    cfg.seed = m.at("seed");
    std::vector<char32_t> chars;
    for (std::uint32_t c : header.at("tokenizer").at("chars").get<std::vector<std::uint32_t>>()) {
      chars.push_back(static_cast<char32_t>(c));
    }
    CharTokenizer tokenizer(std::move(chars), header.at("tokenizer").at("max_len").get<std::size_t>());
    LanguageNameTable names;
    for (const auto& [tag, name] : header.at("languages").get<std::map<std::string, std::string>>()) {
      names.set(tag, name);
    }
    const std::size_t n_params = header.at("parameters");
    std::vector<double> params(n_params);
    in.read(reinterpret_cast<char*>(params.data()), static_cast<std::streamsize>(n_params * sizeof(double)));
    if (!in) throw ParseError(fmt::format("'{}': truncated parameter block", path.string()));
    return ModelScorer(PairEncoder(template_by_id(header.at("template").get<int>()), std::move(names),
                                   std::move(tokenizer)),
                       CrossEncoder(cfg, std::move(params)));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("'{}': bad checkpoint header: {}", path.string(), e.what()));
  }
}

}  // namespace blicer::crossenc
