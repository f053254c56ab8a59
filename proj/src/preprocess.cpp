#include "ohseg/preprocess.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <sstream>

#include "ohseg/corpus.hpp"
#include "ohseg/hash.hpp"

#ifndef OHSEG_DATA_DIR
#define OHSEG_DATA_DIR "data"
#endif

namespace ohseg {

namespace {

// Decodes one UTF-8 code point starting at s[i]; advances i. Invalid bytes
// decode as U+FFFD and consume a single byte.
char32_t next_code_point(std::string_view s, std::size_t& i, std::size_t& len) {
  const auto lead = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t at) {
    return at < s.size() && (static_cast<unsigned char>(s[at]) & 0xC0) == 0x80;
  };
  char32_t cp = 0xFFFD;
  len = 1;
  if (lead < 0x80) {
    cp = lead;
  } else if ((lead & 0xE0) == 0xC0 && cont(i + 1)) {
    cp = ((lead & 0x1F) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3F);
    len = 2;
  } else if ((lead & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2)) {
    cp = ((lead & 0x0F) << 12) | ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6) |
         (static_cast<unsigned char>(s[i + 2]) & 0x3F);
    len = 3;
  } else if ((lead & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
    cp = ((lead & 0x07) << 18) | ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12) |
         ((static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6) |
         (static_cast<unsigned char>(s[i + 3]) & 0x3F);
    len = 4;
  }
  i += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

enum class CharClass { kWord, kApostrophe, kSeparator };

CharClass classify(char32_t cp) {
  if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9')) {
    return CharClass::kWord;
  }
  if (cp == '\'' || cp == 0x2019 || cp == 0x2018) return CharClass::kApostrophe;
  if (cp < 0xC0) return CharClass::kSeparator;  // ASCII and Latin-1 punctuation
  if (cp == 0xD7 || cp == 0xF7) return CharClass::kSeparator;
  if (cp >= 0x2000 && cp <= 0x206F) return CharClass::kSeparator;  // general punctuation
  if (cp >= 0x3000 && cp <= 0x303F) return CharClass::kSeparator;
  if (cp == 0xFEFF || cp == 0xFFFD) return CharClass::kSeparator;
  return CharClass::kWord;
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  return cp;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::string current;
  bool pending_apostrophe = false;
  std::size_t i = 0;
  while (i < sentence.size()) {
    std::size_t len = 0;
    const char32_t cp = next_code_point(sentence, i, len);
    switch (classify(cp)) {
      case CharClass::kWord:
        if (pending_apostrophe) current.push_back('\'');
        pending_apostrophe = false;
        append_utf8(current, to_lower(cp));
        break;
      case CharClass::kApostrophe:
        // Kept only if a word character follows.
        if (!current.empty() && !pending_apostrophe) {
          pending_apostrophe = true;
          break;
        }
        [[fallthrough]];
      case CharClass::kSeparator:
        pending_apostrophe = false;
        if (!current.empty()) tokens.push_back(std::move(current));
        current.clear();
        break;
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

StopwordList::StopwordList(std::vector<std::string> words) {
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  std::string canonical;
  for (const auto& w : words) {
    canonical += w;
    canonical += '\n';
  }
  hash_ = sha256_hex(canonical);
  words_.insert(words.begin(), words.end());
}

StopwordList StopwordList::parse(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    words.push_back(line.substr(first, last - first + 1));
  }
  return StopwordList(std::move(words));
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError("stopword list not found: " + path.string());
  }
  return parse(read_file(path));
}

bool StopwordList::contains(std::string_view word) const {
  return words_.count(std::string(word)) != 0;
}

std::vector<std::string> remove_stopwords(std::span<const std::string> tokens,
                                          const StopwordList& stopwords) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!stopwords.contains(t)) out.push_back(t);
  }
  return out;
}

std::vector<std::string> filter_nouns(std::span<const std::string> tokens,
                                      const std::vector<std::string>* tags) {
  if (!tags) throw PreprocessError("noun filter requires POS tags, none supplied");
  if (tags->size() != tokens.size()) {
    throw PreprocessError("noun filter: " + std::to_string(tags->size()) + " tags for " +
                          std::to_string(tokens.size()) + " tokens");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if ((*tags)[i].rfind("NN", 0) == 0) out.push_back(tokens[i]);
  }
  return out;
}

const char* pipeline_name(Pipeline p) {
  switch (p) {
    case Pipeline::kTextTiling: return "tokenize+stopwords+stem";
    case Pipeline::kBayesSeg: return "tokenize+stopwords+stem+nouns";
  }
  return "unknown";
}

std::vector<TokenizedSentence> preprocess_transcript(const Transcript& t,
                                                     const StopwordList& stopwords,
                                                     Pipeline pipeline) {
  const bool nouns = pipeline == Pipeline::kBayesSeg;
  const auto sentences = t.sentences();
  std::optional<std::vector<std::vector<std::string>>> tags;
  if (nouns) {
    tags = t.sentence_tags();
    if (!tags) {
      throw PreprocessError("transcript " + t.id +
                            ": noun filtering needs POS tags on every turn");
    }
  }
  std::vector<TokenizedSentence> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    TokenizedSentence ts;
    ts.sentence_index = i;
    ts.stopwords_removed = true;
    ts.stemmed = true;
    ts.nouns_only = nouns;
    const auto raw = tokenize(sentences[i]);
    if (nouns && (*tags)[i].size() != raw.size()) {
      throw PreprocessError("transcript " + t.id + " sentence " + std::to_string(i) + ": " +
                            std::to_string((*tags)[i].size()) + " tags for " +
                            std::to_string(raw.size()) + " tokens");
    }
    // Tags stay aligned with tokens through stopword removal and stemming.
    std::vector<std::string> kept;
    std::vector<std::string> kept_tags;
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (stopwords.contains(raw[k])) continue;
      kept.push_back(stem(raw[k]));
      if (nouns) kept_tags.push_back((*tags)[i][k]);
    }
    ts.tokens = nouns ? filter_nouns(kept, &kept_tags) : std::move(kept);
    out.push_back(std::move(ts));
  }
  return out;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("OHSEG_DATA_DIR"); env && *env) return env;
  return OHSEG_DATA_DIR;
}

std::filesystem::path default_stopword_path() { return default_data_dir() / "stopwords-choi.txt"; }

}  // namespace ohseg
