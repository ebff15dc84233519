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

#include "normbridge/eval/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "normbridge/core/error.hpp"

namespace nb::eval {

namespace {

bool is_cjk(UChar32 c) {
  const UBlockCode block = ublock_getCode(c);
  switch (block) {
    case UBLOCK_CJK_UNIFIED_IDEOGRAPHS:
    case UBLOCK_CJK_UNIFIED_IDEOGRAPHS_EXTENSION_A:
    case UBLOCK_CJK_UNIFIED_IDEOGRAPHS_EXTENSION_B:
    case UBLOCK_CJK_COMPATIBILITY_IDEOGRAPHS:
    case UBLOCK_CJK_SYMBOLS_AND_PUNCTUATION:
    case UBLOCK_HIRAGANA:
    case UBLOCK_KATAKANA:
    case UBLOCK_HANGUL_SYLLABLES:
    case UBLOCK_HALFWIDTH_AND_FULLWIDTH_FORMS:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normaliser unavailable");
  // fromUTF8 silently substitutes U+FFFD, so validate first.
  for (int32_t i = 0; i < static_cast<int32_t>(text.size());) {
    UChar32 c;
    U8_NEXT(text.data(), i, static_cast<int32_t>(text.size()), c);
    if (c < 0) throw PreconditionError("invalid UTF-8 in metric input");
  }
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString out = norm->normalize(src, status);
  if (U_FAILURE(status)) throw Error("NFC normalisation failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

std::vector<std::string> tokenize(std::string_view text) {
  const std::string normalized = nfc(text);
  const auto* data = normalized.data();
  const auto len = static_cast<int32_t>(normalized.size());

  bool has_space = false;
  bool has_cjk = false;
  for (int32_t i = 0; i < len;) {
    UChar32 c;
    U8_NEXT(data, i, len, c);
    if (u_isUWhiteSpace(c)) has_space = true;
    if (is_cjk(c)) has_cjk = true;
  }

  std::vector<std::string> tokens;
  if (!has_space && has_cjk) {
    for (int32_t i = 0; i < len;) {
      const int32_t start = i;
      UChar32 c;
      U8_NEXT(data, i, len, c);
      tokens.emplace_back(data + start, data + i);
    }
    return tokens;
  }

  std::string current;
  for (int32_t i = 0; i < len;) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(data, i, len, c);
    if (u_isUWhiteSpace(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.append(data + start, data + i);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace nb::eval
