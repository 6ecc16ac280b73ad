// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <string_view>

namespace blicer::crossenc {

/// Text template with a `[w]` slot and an optional `[L_w]` slot.
struct Template {
  int id = 15;
  std::string pattern;

  bool uses_language() const { return pattern.find("[L_w]") != std::string::npos; }
};

/// T1..T16. Throws ConfigError for any other id.
const Template& template_by_id(int id);
inline constexpr int kDefaultTemplate = 15;
inline constexpr int kTemplateCount = 16;

/// Language tag -> the language's own name for itself.
class LanguageNameTable {
 public:
  /// The 14 languages of the XLING and PanLex-BLI benchmarks.
  static LanguageNameTable builtin();

  void set(std::string tag, std::string name) { names_[std::move(tag)] = std::move(name); }
  bool contains(std::string_view tag) const { return names_.find(std::string(tag)) != names_.end(); }
  /// Throws DataError when the tag is unknown.
  const std::string& name(std::string_view tag) const;
  const std::map<std::string, std::string>& entries() const noexcept { return names_; }

 private:
  std::map<std::string, std::string> names_;
};

/// Plain slot substitution; no case folding or other normalization.
std::string render_template(std::string_view word, std::string_view language_tag, const Template& tmpl,
                            const LanguageNameTable& table);

}  // namespace blicer::crossenc
