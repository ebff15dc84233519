// Copyright 2026 The NormBridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "normbridge/backends/stubs.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "normbridge/core/error.hpp"
#include "normbridge/ensemble/stacking.hpp"

namespace nb::backends {

namespace {

std::string fold(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3
                                   : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += len;
  }
  return true;
}

std::size_t utf8_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

template <class OnLine>
void read_tsv(std::istream& in, std::string_view origin, OnLine on_line) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!valid_utf8(line)) {
      throw ParseError(fmt::format("{}:{}: invalid UTF-8", origin, lineno));
    }
    const auto tab = line.find('\t');
    std::string first = line.substr(0, tab);
    std::string second = tab == std::string::npos ? std::string{} : line.substr(tab + 1);
    on_line(lineno, std::move(first), std::move(second));
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  return in;
}

std::string collapse_ws(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string strip_trailing_punct(std::string s) {
  static const std::vector<std::string> marks = {".", "!", "?", ",", ";",
                                                 "\xE3\x80\x82",   // 。
                                                 "\xEF\xBC\x81",   // ！
                                                 "\xEF\xBC\x9F",   // ？
                                                 "\xEF\xBC\x8C"};  // ，
  bool changed = true;
  while (changed && !s.empty()) {
    changed = false;
    for (const auto& m : marks) {
      if (s.size() >= m.size() && s.compare(s.size() - m.size(), m.size(), m) == 0) {
        s.erase(s.size() - m.size());
        while (!s.empty() && s.back() == ' ') s.pop_back();
        changed = true;
      }
    }
  }
  return s;
}

const std::string& pick_template(const std::map<std::string, std::string>& t,
                                 const std::string& lang) {
  if (auto it = t.find(lang); it != t.end()) return it->second;
  if (auto it = t.find("*"); it != t.end()) return it->second;
  return t.begin()->second;
}

}  // namespace

std::string fill_template(std::string_view tmpl,
                          const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

// ---- Lexicon ---------------------------------------------------------------

Lexicon::Lexicon(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.pattern.empty()) throw ParseError("empty lexicon pattern");
    folded_.push_back(fold(e.pattern));
  }
}

Lexicon Lexicon::parse(std::istream& in, std::string_view origin) {
  std::vector<Entry> entries;
  read_tsv(in, origin, [&](std::size_t lineno, std::string pattern, std::string label) {
    if (pattern.empty()) {
      throw ParseError(fmt::format("{}:{}: empty pattern", origin, lineno));
    }
    entries.push_back({std::move(pattern), std::move(label)});
  });
  return Lexicon(std::move(entries));
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse(in, path.string());
}

std::optional<std::string> Lexicon::first_match(std::string_view text) const {
  const std::string folded = fold(text);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (folded.find(folded_[i]) != std::string::npos) return entries_[i].label;
  }
  return std::nullopt;
}

std::map<std::string, std::size_t> Lexicon::hits(std::string_view text) const {
  const std::string folded = fold(text);
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (folded.find(folded_[i]) != std::string::npos) ++out[entries_[i].label];
  }
  return out;
}

std::string Lexicon::strip(std::string_view text) const {
  std::string out(text);
  for (const auto& pat : folded_) {
    std::string folded = fold(out);
    std::size_t pos;
    while ((pos = folded.find(pat)) != std::string::npos) {
      out.erase(pos, pat.size());
      folded.erase(pos, pat.size());
    }
  }
  return out;
}

// ---- Dictionary ------------------------------------------------------------

Dictionary Dictionary::parse(std::istream& in, std::string_view origin) {
  Dictionary d;
  read_tsv(in, origin, [&](std::size_t lineno, std::string src, std::string tgt) {
    if (src.empty() || tgt.empty()) {
      throw ParseError(fmt::format("{}:{}: expected source<TAB>target", origin, lineno));
    }
    d.add(std::move(src), std::move(tgt));
  });
  return d;
}

Dictionary Dictionary::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse(in, path.string());
}

void Dictionary::add(std::string source, std::string target) {
  backward_.emplace(fold(target), source);
  forward_.emplace(fold(source), std::move(target));
}

std::string Dictionary::translate(std::string_view text, bool forward) const {
  const auto& table = forward ? forward_ : backward_;
  const std::string folded = fold(text);
  std::string out;
  bool replaced = false;
  // Replacements adjacent to Latin words get a separating space.
  auto append = [&](std::string_view piece, bool is_replacement) {
    if (!out.empty() && !piece.empty() && (is_replacement || replaced) &&
        ascii_alnum(out.back()) && ascii_alnum(piece.front())) {
      out += ' ';
    }
    out.append(piece);
    replaced = is_replacement;
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const bool at_boundary = i == 0 || !ascii_alnum(text[i - 1]);
    const std::string* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& [key, value] : table) {
      if (key.size() <= best_len || folded.compare(i, key.size(), key) != 0) continue;
      if (ascii_alnum(key.front()) && !at_boundary) continue;
      const std::size_t end = i + key.size();
      if (ascii_alnum(key.back()) && end < text.size() && ascii_alnum(text[end])) continue;
      best = &value;
      best_len = key.size();
    }
    if (best) {
      append(*best, true);
      i += best_len;
    } else {
      const std::size_t n = std::min(utf8_len(static_cast<unsigned char>(text[i])),
                                     text.size() - i);
      append(text.substr(i, n), false);
      i += n;
    }
  }
  return out;
}

// ---- Adapters --------------------------------------------------------------

Outcome IdentityAsr::compute(const BackendRequest& request) const {
  if (request.current.source_text.empty()) {
    return Outcome::fail(request.current.audio_ref
                             ? "identity ASR cannot decode audio references"
                             : "empty speech payload");
  }
  BackendReply r;
  r.text = request.current.source_text;
  return Outcome::ok(std::move(r));
}

DictionaryTranslator::DictionaryTranslator(Dictionary dict, std::string from,
                                           std::string to)
    : dict_(std::move(dict)), from_(std::move(from)), to_(std::move(to)) {}

Outcome DictionaryTranslator::compute(const BackendRequest& request) const {
  const auto& u = request.current;
  BackendReply r;
  if (u.source_lang == u.target_lang) {
    r.text = u.source_text;
  } else if (u.source_lang == from_ && u.target_lang == to_) {
    r.text = dict_.translate(u.source_text, true);
  } else if (u.source_lang == to_ && u.target_lang == from_) {
    r.text = dict_.translate(u.source_text, false);
  } else {
    return Outcome::fail("no dictionary for " + u.source_lang + "->" + u.target_lang);
  }
  return Outcome::ok(std::move(r));
}

LexiconClassifier::LexiconClassifier(Lexicon lexicon, Options options)
    : lexicon_(std::move(lexicon)), opt_(std::move(options)) {
  auto known = [&](const std::string& l) {
    return std::find(opt_.labels.begin(), opt_.labels.end(), l) != opt_.labels.end();
  };
  if (!known(opt_.default_label)) {
    throw ConfigError("default label '" + opt_.default_label + "' is not a class");
  }
  if (opt_.hit_label.empty()) opt_.hit_label = opt_.default_label;
  if (!known(opt_.hit_label)) {
    throw ConfigError("hit label '" + opt_.hit_label + "' is not a class");
  }
  for (const auto& e : lexicon_.entries()) {
    if (!e.label.empty() && !known(e.label)) {
      throw ConfigError("lexicon label '" + e.label + "' is not a class");
    }
  }
}

std::string LexiconClassifier::describe() const {
  return std::string(config_key(opt_.task)) +
         (opt_.mode == Mode::Discrete ? ":rule_based" : ":probabilistic");
}

std::string LexiconClassifier::text_of(const BackendRequest& request) const {
  if (!opt_.use_window) return analysed_text(request.current);
  std::string joined;
  for (const auto& u : request.context) {
    joined += analysed_text(u);
    joined += '\n';
  }
  joined += analysed_text(request.current);
  return joined;
}

Outcome LexiconClassifier::compute(const BackendRequest& request) const {
  const std::string text = text_of(request);
  const auto index_of = [&](const std::string& l) {
    return static_cast<std::size_t>(
        std::find(opt_.labels.begin(), opt_.labels.end(), l) - opt_.labels.begin());
  };
  BackendReply r;
  if (opt_.mode == Mode::Discrete) {
    auto hit = lexicon_.first_match(text);
    std::string label = hit ? (hit->empty() ? opt_.hit_label : *hit) : opt_.default_label;
    r.probs = ensemble::one_hot(index_of(label), opt_.labels.size());
    r.label = std::move(label);
    return Outcome::ok(std::move(r));
  }
  std::vector<double> scores(opt_.labels.size(), opt_.smoothing);
  scores[index_of(opt_.default_label)] += opt_.default_prior;
  for (const auto& [label, n] : lexicon_.hits(text)) {
    scores[index_of(label.empty() ? opt_.hit_label : label)] += static_cast<double>(n);
  }
  double total = 0.0;
  for (double s : scores) total += s;
  for (double& s : scores) s /= total;
  r.label = opt_.labels[ensemble::argmax(scores)];
  r.probs = std::move(scores);
  return Outcome::ok(std::move(r));
}

TemplateRemediator::TemplateRemediator(std::map<std::string, std::string> templates,
                                       Lexicon offending)
    : templates_(std::move(templates)), offending_(std::move(offending)) {
  if (templates_.empty()) templates_ = default_templates();
}

std::map<std::string, std::string> TemplateRemediator::default_templates() {
  return {{"*", "Could you please {clause}?"},
          {"en", "Could you please {clause}?"},
          {"zh", "\xE8\x83\xBD\xE5\x90\xA6\xE8\xAF\xB7\xE6\x82\xA8{clause}\xEF\xBC\x9F"}};
}

Outcome TemplateRemediator::compute(const BackendRequest& request) const {
  const auto& u = request.current;
  std::string clause = strip_trailing_punct(collapse_ws(offending_.strip(analysed_text(u))));
  if (!clause.empty() && clause.front() >= 'A' && clause.front() <= 'Z' &&
      !(clause.size() > 1 && clause[1] >= 'A' && clause[1] <= 'Z')) {
    clause.front() = static_cast<char>(clause.front() - 'A' + 'a');
  }
  if (clause.empty()) clause = "say that differently";
  BackendReply r;
  r.text = fill_template(pick_template(templates_, u.target_lang), {{"clause", clause}});
  return Outcome::ok(std::move(r));
}

TemplateJustifier::TemplateJustifier(std::map<std::string, std::string> templates)
    : templates_(std::move(templates)) {
  if (templates_.empty()) templates_ = default_templates();
}

std::map<std::string, std::string> TemplateJustifier::default_templates() {
  const std::string en =
      "The original wording may break the {category} norm; the remediation keeps "
      "the intent in a more polite form.";
  return {{"*", en}, {"en", en}};
}

Outcome TemplateJustifier::compute(const BackendRequest& request) const {
  if (!request.remediation || request.remediation->empty()) {
    return Outcome::fail("justification requested without a remediation");
  }
  const auto& u = request.current;
  BackendReply r;
  r.text = fill_template(pick_template(templates_, u.source_lang),
                         {{"category", request.category.value_or("Other")},
                          {"remediation", *request.remediation},
                          {"original", analysed_text(u)}});
  return Outcome::ok(std::move(r));
}

}  // namespace nb::backends
