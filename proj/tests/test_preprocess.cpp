#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ohseg/corpus.hpp"
#include "ohseg/preprocess.hpp"
#include "test_util.hpp"

using namespace ohseg;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenize") {
  CHECK(tokenize("The mill closed in 1954.") == Tokens{"the", "mill", "closed", "in", "1954"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("I didn't—really.") == Tokens{"i", "didn't", "really"});
  CHECK(tokenize("I didn’t go") == Tokens{"i", "didn't", "go"});
  CHECK(tokenize("'Tis the workers' union...") == Tokens{"tis", "the", "workers", "union"});
  CHECK(tokenize("  spaced\tout\n") == Tokens{"spaced", "out"});
  CHECK(tokenize("CafÉ naïve") == Tokens{"café", "naïve"});
  CHECK(tokenize("“Quoted” … end") == Tokens{"quoted", "end"});
}

TEST_CASE("tokens never contain whitespace and are deterministic") {
  std::mt19937_64 rng(3);
  const std::string alphabet = "abcXYZ09 '.,-\t\n!?";
  for (int trial = 0; trial < 300; ++trial) {
    std::string s;
    for (std::size_t i = 0; i < rng() % 40; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
    const auto tokens = tokenize(s);
    CHECK(tokens == tokenize(s));
    for (const auto& t : tokens) {
      CHECK(!t.empty());
      CHECK(t.find_first_of(" \t\n") == std::string::npos);
      CHECK(t.front() != '\'');
      CHECK(t.back() != '\'');
    }
  }
}

TEST_CASE("stopword removal") {
  const StopwordList list = StopwordList::parse("# comment\nthe\nof  # trailing comment\n\nand\n");
  CHECK(list.size() == 3);
  CHECK(remove_stopwords(Tokens{"the", "mill", "closed"}, list) == Tokens{"mill", "closed"});
  CHECK(remove_stopwords(Tokens{}, list).empty());
  CHECK(remove_stopwords(Tokens{"the", "of", "and"}, list).empty());
}

TEST_CASE("stopword list hash is order independent") {
  CHECK(StopwordList::parse("a\nb\n").content_hash() == StopwordList::parse("b\na\n").content_hash());
  CHECK(StopwordList::parse("a\nb\n").content_hash() != StopwordList::parse("a\nc\n").content_hash());
}

TEST_CASE("missing stopword file is a configuration error") {
  CHECK_THROWS_AS(StopwordList::load("/nonexistent/stopwords.txt"), ConfigError);
}

TEST_CASE("bundled stopword list loads") {
  const auto list = StopwordList::load(default_stopword_path());
  CHECK(list.size() > 100);
  CHECK(list.contains("the"));
  CHECK(!list.contains("factory"));
  CHECK(list.content_hash().size() == 64);
}

TEST_CASE("porter stemmer examples") {
  CHECK(stem("caresses") == "caress");
  CHECK(stem("ponies") == "poni");
  CHECK(stem("mill") == "mill");
  CHECK(stem("relational") == "relat");
  CHECK(stem("generalizations") == "gener");
  CHECK(stem("a") == "a");
  CHECK(stem("is") == "is");
}

TEST_CASE("porter stemmer matches the reference vocabulary") {
  std::ifstream in(std::string(OHSEG_TEST_DATA) + "/porter_vectors.tsv");
  REQUIRE(in);
  std::string line;
  std::size_t checked = 0, failures = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    const std::string word = line.substr(0, tab);
    const std::string expected = line.substr(tab + 1);
    const std::string got = stem(word);
    if (got != expected) {
      ++failures;
      if (failures <= 10) MESSAGE(word << ": got " << got << ", expected " << expected);
    }
    ++checked;
  }
  CHECK(checked > 10000);
  CHECK(failures == 0);
}

TEST_CASE("noun filter") {
  const Tokens tags{"NN", "VBD"};
  CHECK(filter_nouns(Tokens{"mill", "closed"}, &tags) == Tokens{"mill"});
  CHECK_THROWS_AS(filter_nouns(Tokens{"mill"}, nullptr), PreprocessError);
  const Tokens short_tags{"NN"};
  CHECK_THROWS_AS(filter_nouns(Tokens{"mill", "closed"}, &short_tags), PreprocessError);
  const Tokens none;
  CHECK(filter_nouns(Tokens{}, &none).empty());
  const Tokens plural{"NNS", "NNP", "NNPS", "JJ"};
  CHECK(filter_nouns(Tokens{"a", "b", "c", "d"}, &plural) == Tokens{"a", "b", "c"});
}

TEST_CASE("filters are order-preserving subsequence selections") {
  std::mt19937_64 rng(5);
  const StopwordList list(Tokens{"w0", "w3", "w7"});
  for (int trial = 0; trial < 200; ++trial) {
    Tokens tokens, tags;
    for (std::size_t i = 0; i < rng() % 30; ++i) {
      tokens.push_back("w" + std::to_string(rng() % 10));
      tags.push_back(rng() % 2 ? "NN" : "VB");
    }
    for (const Tokens& out : {remove_stopwords(tokens, list), filter_nouns(tokens, &tags)}) {
      std::size_t pos = 0;
      for (const auto& t : out) {
        while (pos < tokens.size() && tokens[pos] != t) ++pos;
        CHECK(pos < tokens.size());
        ++pos;
      }
    }
  }
}

TEST_CASE("transcript pipelines") {
  Transcript t;
  t.id = "t";
  Turn turn;
  turn.speaker = "A";
  turn.sentences = {"The mills were closing.", "Workers protested."};
  turn.tags = std::vector<std::vector<std::string>>{{"DT", "NNS", "VBD", "VBG"}, {"NNS", "VBD"}};
  t.turns.push_back(turn);
  const StopwordList list(Tokens{"the", "were"});

  const auto tiling = preprocess_transcript(t, list, Pipeline::kTextTiling);
  REQUIRE(tiling.size() == 2);
  CHECK(tiling[0].tokens == Tokens{"mill", "close"});
  CHECK(tiling[1].tokens == Tokens{"worker", "protest"});
  CHECK(!tiling[0].nouns_only);

  const auto nouns = preprocess_transcript(t, list, Pipeline::kBayesSeg);
  CHECK(nouns[0].tokens == Tokens{"mill"});
  CHECK(nouns[1].tokens == Tokens{"worker"});
  CHECK(nouns[0].nouns_only);

  // Same input, same output.
  const auto again = preprocess_transcript(t, list, Pipeline::kBayesSeg);
  CHECK(again[0].tokens == nouns[0].tokens);

  t.turns[0].tags.reset();
  CHECK_THROWS_AS(preprocess_transcript(t, list, Pipeline::kBayesSeg), PreprocessError);
  CHECK_NOTHROW(preprocess_transcript(t, list, Pipeline::kTextTiling));
}
