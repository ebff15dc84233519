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

#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "normbridge/backends/backend.hpp"

namespace nb::backends {

/// `pattern<TAB>label` rules. Patterns match as case-insensitive substrings
/// (ASCII case folding); the first matching rule wins.
class Lexicon {
 public:
  struct Entry {
    std::string pattern;
    std::string label;  // empty when the line had no label column
  };

  Lexicon() = default;
  explicit Lexicon(std::vector<Entry> entries);

  /// Blank lines and lines starting with `#` are skipped. Throws ParseError
  /// naming the line on an empty pattern or invalid UTF-8.
  static Lexicon parse(std::istream& in, std::string_view origin = "<lexicon>");
  static Lexicon load(const std::filesystem::path& path);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  std::optional<std::string> first_match(std::string_view text) const;
  /// Matching rules per label, in rule order.
  std::map<std::string, std::size_t> hits(std::string_view text) const;
  /// Removes every occurrence of every pattern.
  std::string strip(std::string_view text) const;

 private:
  std::vector<Entry> entries_;
  std::vector<std::string> folded_;
};

/// Bilingual phrase table, `source<TAB>target` per line.
class Dictionary {
 public:
  Dictionary() = default;
  static Dictionary parse(std::istream& in, std::string_view origin = "<dictionary>");
  static Dictionary load(const std::filesystem::path& path);

  void add(std::string source, std::string target);

  /// Greedy longest-match replacement. Alphabetic entries only match on word
  /// boundaries; text with no entry passes through unchanged. `forward`
  /// maps source to target, otherwise target to source.
  std::string translate(std::string_view text, bool forward) const;

 private:
  std::map<std::string, std::string> forward_;
  std::map<std::string, std::string> backward_;
};

/// ASR stand-in: the speech payload already is text.
class IdentityAsr final : public StubBackend {
 public:
  std::string describe() const override { return "asr:identity"; }

 protected:
  Outcome compute(const BackendRequest& request) const override;
};

class DictionaryTranslator final : public StubBackend {
 public:
  /// `from`/`to` name the dictionary's column languages.
  DictionaryTranslator(Dictionary dict, std::string from, std::string to);
  std::string describe() const override { return "mt:dictionary"; }

 protected:
  Outcome compute(const BackendRequest& request) const override;

 private:
  Dictionary dict_;
  std::string from_;
  std::string to_;
};

/// Classifier over a fixed label space. Matches the lexicon against the
/// current utterance, or against the whole context window for impact.
class LexiconClassifier final : public StubBackend {
 public:
  enum class Mode {
    /// First matching rule decides; the distribution is one-hot.
    Discrete,
    /// Distribution proportional to smoothed per-label hit counts.
    Probabilistic,
  };

  struct Options {
    Task task = Task::CategoryCls;
    std::vector<std::string> labels;
    std::string default_label;
    /// Label for rules without a label column.
    std::string hit_label;
    Mode mode = Mode::Discrete;
    double smoothing = 0.5;
    double default_prior = 1.0;
    bool use_window = false;
  };

  LexiconClassifier(Lexicon lexicon, Options options);
  std::string describe() const override;

 protected:
  Outcome compute(const BackendRequest& request) const override;

 private:
  std::string text_of(const BackendRequest& request) const;

  Lexicon lexicon_;
  Options opt_;
};

/// Template rewrite: per-language template with `{clause}` replaced by the
/// utterance with offending patterns removed.
class TemplateRemediator final : public StubBackend {
 public:
  TemplateRemediator(std::map<std::string, std::string> templates,
                     Lexicon offending);
  std::string describe() const override { return "remediation:template"; }

  static std::map<std::string, std::string> default_templates();

 protected:
  Outcome compute(const BackendRequest& request) const override;

 private:
  std::map<std::string, std::string> templates_;
  Lexicon offending_;
};

/// Template explanation with `{category}`, `{remediation}` and `{original}`
/// placeholders.
class TemplateJustifier final : public StubBackend {
 public:
  explicit TemplateJustifier(std::map<std::string, std::string> templates);
  std::string describe() const override { return "justification:template"; }

  static std::map<std::string, std::string> default_templates();

 protected:
  Outcome compute(const BackendRequest& request) const override;

 private:
  std::map<std::string, std::string> templates_;
};

/// Replaces every `{key}` in `tmpl` by the mapped value.
std::string fill_template(std::string_view tmpl,
                          const std::map<std::string, std::string>& values);

}  // namespace nb::backends
