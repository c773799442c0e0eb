// Copyright 2026 The detoxcorp Authors
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

#include <array>
#include <string>
#include <string_view>

#include "detox/ingest.hpp"
#include "detox/text_util.hpp"

namespace detox {
namespace {

constexpr int kMaxNormalizePasses = 16;
constexpr std::size_t kMaxPunctRun = 3;

bool is_url_token(std::string_view token) {
  return starts_with_icase(token, "http://") || starts_with_icase(token, "https://") ||
         starts_with_icase(token, "www.");
}

std::string remove_urls(std::string_view text) {
  std::string out;
  for (const auto& token : split_whitespace(text)) {
    if (is_url_token(token)) continue;
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

std::string replace_all_icase(std::string_view text, std::string_view needle,
                              std::string_view replacement) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (starts_with_icase(text.substr(i), needle)) {
      out += replacement;
      i += needle.size();
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

// @handle -> @USER. A handle starts at '@' not preceded by a word character
// (so e-mail addresses stay intact). @USER and @NUMBER are our own tags.
std::string replace_handles(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const bool at_boundary = i == 0 || !is_word_char(text[i - 1]);
    if (text[i] == '@' && at_boundary) {
      std::size_t j = i + 1;
      while (j < text.size() && is_word_char(text[j])) ++j;
      if (j > i + 1) {
        const std::string_view handle = text.substr(i + 1, j - i - 1);
        if (handle == "NUMBER") {
          out += "@NUMBER";
        } else {
          out += "@USER";
        }
        i = j;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

// "@USER" followed by whitespace and another "@USER" becomes one "@USER".
std::string collapse_user_runs(std::string_view text) {
  constexpr std::string_view kUser = "@USER";
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.substr(i, kUser.size()) != kUser) {
      out.push_back(text[i++]);
      continue;
    }
    out += kUser;
    i += kUser.size();
    for (;;) {
      std::size_t j = i;
      while (j < text.size() && is_ascii_space(text[j])) ++j;
      if (j == i || text.substr(j, kUser.size()) != kUser) break;
      i = j + kUser.size();
    }
  }
  return out;
}

std::string normalize_users(std::string_view text) {
  std::string s = replace_all_icase(text, "<user>", "@USER");
  s = replace_all_icase(s, "<number>", "@NUMBER");
  s = replace_handles(s);
  return collapse_user_runs(s);
}

std::string strip_control_chars(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_ascii_space(text[i])) {
      out.push_back(' ');
    } else if (c < 0x20 || c == 0x7F) {
      continue;
    } else if (c == 0xC2 && i + 1 < text.size() &&
               static_cast<unsigned char>(text[i + 1]) >= 0x80 &&
               static_cast<unsigned char>(text[i + 1]) <= 0x9F) {
      ++i;  // C1 control, two bytes in UTF-8
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

std::string limit_punct_runs(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t run = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    run = (i > 0 && text[i - 1] == c) ? run + 1 : 1;
    if (is_ascii_punct(c) && run > kMaxPunctRun) continue;
    out.push_back(c);
  }
  return out;
}

std::string clean_characters(std::string_view text) {
  std::string s = decode_html_entities(text);
  s = strip_control_chars(s);
  s = limit_punct_runs(s);
  return collapse_whitespace(s);
}

std::string normalize_pass(std::string_view text) {
  return clean_characters(normalize_users(remove_urls(text)));
}

}  // namespace

std::string decode_html_entities(std::string_view text) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 7> kNamed{{
      {"amp", "&"},
      {"lt", "<"},
      {"gt", ">"},
      {"quot", "\""},
      {"apos", "'"},
      {"nbsp", " "},
      {"#39", "'"},
  }};
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    const std::size_t semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back(text[i++]);
      continue;
    }
    const std::string_view name = text.substr(i + 1, semi - i - 1);
    bool decoded = false;
    for (const auto& [entity, value] : kNamed) {
      if (name == entity) {
        out += value;
        decoded = true;
        break;
      }
    }
    if (!decoded && name.size() >= 2 && name[0] == '#') {
      const bool hex = name[1] == 'x' || name[1] == 'X';
      const std::string_view digits = name.substr(hex ? 2 : 1);
      std::uint32_t cp = 0;
      bool valid = !digits.empty() && digits.size() <= 7;
      for (char d : digits) {
        if (!valid) break;
        int v = -1;
        if (d >= '0' && d <= '9') {
          v = d - '0';
        } else if (hex && d >= 'a' && d <= 'f') {
          v = d - 'a' + 10;
        } else if (hex && d >= 'A' && d <= 'F') {
          v = d - 'A' + 10;
        }
        if (v < 0) {
          valid = false;
        } else {
          cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
        }
      }
      if (valid && cp != 0) decoded = append_utf8(out, cp);
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

std::string normalize(std::string_view text) {
  std::string current = normalize_pass(text);
  for (int pass = 1; pass < kMaxNormalizePasses; ++pass) {
    std::string next = normalize_pass(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

}  // namespace detox
