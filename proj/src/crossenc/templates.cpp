// SPDX-License-Identifier: Apache-2.0
#include "blicer/crossenc/templates.hpp"

#include "blicer/error.hpp"

#include <fmt/format.h>

#include <array>

namespace blicer::crossenc {

namespace {

// T1-T4 basic, T5-T8 quoted word, T9-T12 trailing full stop, T13-T16
// trailing exclamation mark.
const std::array<Template, kTemplateCount> kTemplates = {{
    {1, "[w]"},
    {2, "the word [w]"},
    {3, "[w] ([L_w])"},
    {4, "the word [w] in [L_w]"},
    {5, "'[w]'"},
    {6, "the word '[w]'"},
    {7, "'[w]' ([L_w])"},
    {8, "the word '[w]' in [L_w]"},
    {9, "[w]."},
    {10, "the word [w]."},
    {11, "[w] ([L_w])."},
    {12, "the word [w] in [L_w]."},
    {13, "[w]!"},
    {14, "the word [w]!"},
    {15, "[w] ([L_w])!"},
    {16, "the word [w] in [L_w]!"},
}};

void replace_once(std::string& s, std::string_view slot, std::string_view value) {
  if (auto pos = s.find(slot); pos != std::string::npos) s.replace(pos, slot.size(), value);
}

}  // namespace

const Template& template_by_id(int id) {
  if (id < 1 || id > kTemplateCount) throw ConfigError(fmt::format("template.id={} outside T1..T16", id));
  return kTemplates[static_cast<std::size_t>(id - 1)];
}

LanguageNameTable LanguageNameTable::builtin() {
  LanguageNameTable t;
  t.set("bg", "български");
  t.set("ca", "català");
  t.set("de", "deutsch");
  t.set("en", "english");
  t.set("et", "eesti");
  t.set("fi", "suomi");
  t.set("fr", "français");
  t.set("he", "עברית");
  t.set("hr", "hrvatski");
  t.set("hu", "magyar");
  t.set("it", "italiano");
  t.set("ka", "ქართული");
  t.set("ru", "русский");
  t.set("tr", "türkçe");
  return t;
}

const std::string& LanguageNameTable::name(std::string_view tag) const {
  auto it = names_.find(std::string(tag));
  if (it == names_.end()) throw DataError(fmt::format("no language name for tag '{}'", tag));
  return it->second;
}

std::string render_template(std::string_view word, std::string_view language_tag, const Template& tmpl,
                            const LanguageNameTable& table) {
  std::string out = tmpl.pattern;
  // Fill [L_w] first so a word that itself contains "[L_w]" is left alone.
  if (tmpl.uses_language()) replace_once(out, "[L_w]", table.name(language_tag));
  replace_once(out, "[w]", word);
  return out;
}

}  // namespace blicer::crossenc
