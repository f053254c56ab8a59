// Text normalization: tokenization, stopword removal, Porter stemming and
// noun filtering from supplied POS tags.
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace ohseg {

struct Transcript;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreprocessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lowercase alphanumeric tokens. Punctuation separates tokens, except an
/// apostrophe between two word characters, which stays inside the token.
/// Non-ASCII letters are kept as word characters; Unicode punctuation
/// (dashes, curly quotes, ellipsis) separates.
std::vector<std::string> tokenize(std::string_view sentence);

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::vector<std::string> words);

  /// One lowercase word per line; '#' starts a comment.
  static StopwordList load(const std::filesystem::path& path);
  static StopwordList parse(std::string_view text);

  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }
  /// SHA-256 of the canonical (sorted, newline-joined) word list.
  const std::string& content_hash() const { return hash_; }

 private:
  std::unordered_set<std::string> words_;
  std::string hash_;
};

std::vector<std::string> remove_stopwords(std::span<const std::string> tokens,
                                          const StopwordList& stopwords);

/// Porter (1980) stemmer, as in the author's reference implementation.
std::string stem(std::string_view token);

/// Keeps tokens whose tag starts with "NN". Throws PreprocessError if the
/// tag list is missing or its length differs from the token list.
std::vector<std::string> filter_nouns(std::span<const std::string> tokens,
                                      const std::vector<std::string>* tags);

enum class Pipeline {
  kTextTiling,  // tokenize, stopwords, stem
  kBayesSeg,    // tokenize, stopwords, stem, nouns
};

const char* pipeline_name(Pipeline p);

struct TokenizedSentence {
  std::size_t sentence_index = 0;
  std::vector<std::string> tokens;
  bool stopwords_removed = false;
  bool stemmed = false;
  bool nouns_only = false;
};

/// Runs the full pipeline over every sentence of a transcript. Stopwords are
/// removed before stemming. The noun filter needs tags on every turn.
std::vector<TokenizedSentence> preprocess_transcript(const Transcript& t,
                                                     const StopwordList& stopwords,
                                                     Pipeline pipeline);

/// Default data directory (stopword list, instructions page).
std::filesystem::path default_data_dir();
std::filesystem::path default_stopword_path();

}  // namespace ohseg
