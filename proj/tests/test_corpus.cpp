#include <random>

#include "doctest.h"
#include "ohseg/corpus.hpp"
#include "test_util.hpp"

using namespace ohseg;
using testutil::make_segmentation;
using testutil::make_transcript;
using testutil::TempDir;

namespace {

bool has_rule(const std::vector<Finding>& findings, const std::string& rule) {
  for (const auto& f : findings) {
    if (f.rule == rule) return true;
  }
  return false;
}

void write(const std::filesystem::path& p, const std::string& text) { write_file_atomic(p, text); }

}  // namespace

TEST_CASE("minimal well-formed corpus loads") {
  TempDir dir;
  Corpus c;
  c.transcripts.push_back(make_transcript("t1", 5));
  c.segmentations.push_back(make_segmentation("t1", "original", {2}));
  save_corpus(c, dir.path());

  const Corpus loaded = load_corpus(dir.path());
  CHECK(loaded.transcripts.size() == 1);
  CHECK(loaded.segmentations.size() == 1);
  CHECK(loaded.transcripts[0].sentence_count() == 5);
  CHECK(loaded.segmentations[0].boundaries == std::vector<std::size_t>{2});
}

TEST_CASE("boundary validation rules") {
  const Transcript t = make_transcript("t1", 5);
  SUBCASE("duplicate boundaries") {
    auto f = validate_segmentation(make_segmentation("t1", "a", {3, 3}), t);
    CHECK(has_rule(f, "boundary_duplicate"));
  }
  SUBCASE("boundary zero precedes sentence zero") {
    auto f = validate_segmentation(make_segmentation("t1", "a", {0}), t);
    CHECK(has_rule(f, "boundary_range"));
  }
  SUBCASE("boundary equal to sentence count") {
    auto f = validate_segmentation(make_segmentation("t1", "a", {5}), t);
    CHECK(has_rule(f, "boundary_range"));
  }
  SUBCASE("decreasing") {
    auto f = validate_segmentation(make_segmentation("t1", "a", {3, 2}), t);
    CHECK(has_rule(f, "boundary_order"));
  }
  SUBCASE("valid extremes") {
    CHECK(validate_segmentation(make_segmentation("t1", "a", {1, 4}), t).empty());
  }
}

TEST_CASE("selected extracts must align with boundaries and not overlap") {
  const Transcript t = make_transcript("t1", 20);
  Segmentation s = make_segmentation("t1", "a", {3, 10});
  s.selected = std::vector<SentenceRange>{{0, 3}, {10, 20}};
  CHECK(validate_segmentation(s, t).empty());

  s.selected = std::vector<SentenceRange>{{0, 10}, {3, 10}};
  CHECK(has_rule(validate_segmentation(s, t), "extracts_overlap"));

  s.selected = std::vector<SentenceRange>{{0, 4}};
  CHECK(has_rule(validate_segmentation(s, t), "extract_alignment"));

  s.selected = std::vector<SentenceRange>{{10, 25}};
  CHECK(has_rule(validate_segmentation(s, t), "extract_range"));
}

TEST_CASE("transcript invariants") {
  Transcript t = make_transcript("t1", 3);
  CHECK(validate_transcript(t).empty());

  Transcript empty;
  empty.id = "e";
  CHECK(has_rule(validate_transcript(empty), "no_turns"));

  t.turns[0].sentences.push_back("");
  CHECK(has_rule(validate_transcript(t), "empty_sentence"));

  Transcript tagged = make_transcript("t2", 1);
  tagged.turns[0].sentences = {"The mill closed."};
  tagged.turns[0].tags = std::vector<std::vector<std::string>>{{"DT", "NN", "VBD"}};
  CHECK(validate_transcript(tagged).empty());
  tagged.turns[0].tags = std::vector<std::vector<std::string>>{{"DT", "NN"}};
  CHECK(has_rule(validate_transcript(tagged), "tag_count"));
}

TEST_CASE("load_corpus reports parse errors with file and byte offset") {
  TempDir dir;
  write(dir.path() / "transcripts" / "t1.json", "{\"id\": \"t1\", \"turns\": [ }\n");
  try {
    load_corpus(dir.path());
    FAIL("expected CorpusError");
  } catch (const CorpusError& e) {
    REQUIRE(e.findings().size() == 1);
    CHECK(e.findings()[0].rule == "json_parse");
    CHECK(e.findings()[0].where.find("t1.json") != std::string::npos);
    CHECK(e.findings()[0].message.find("byte") != std::string::npos);
  }
}

TEST_CASE("load_corpus names the annotator and rule on validation errors") {
  TempDir dir;
  Corpus c;
  c.transcripts.push_back(make_transcript("t1", 5));
  save_corpus(c, dir.path());
  write(dir.path() / "segmentations" / "bob" / "t1.json",
        R"({"transcript_id": "t1", "annotator": "bob", "boundaries": [3, 3]})"
        "\n");
  try {
    load_corpus(dir.path());
    FAIL("expected CorpusError");
  } catch (const CorpusError& e) {
    CHECK(has_rule(e.findings(), "boundary_duplicate"));
    CHECK(std::string(e.what()).find("bob") != std::string::npos);
  }
}

TEST_CASE("segmentations must reference known transcripts") {
  TempDir dir;
  Corpus c;
  c.transcripts.push_back(make_transcript("t1", 5));
  c.segmentations.push_back(make_segmentation("t2", "a", {1}));
  save_corpus(c, dir.path());
  auto [loaded, findings] = scan_corpus(dir.path());
  CHECK(has_rule(findings, "unknown_transcript"));
}

TEST_CASE("empty directory has no transcripts") {
  TempDir dir;
  auto [loaded, findings] = scan_corpus(dir.path());
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].message == "no transcripts found");
}

TEST_CASE("unknown fields survive a save/load round trip") {
  TempDir dir;
  const std::string text = R"({
  "id": "t1",
  "title": "Mill town",
  "turns": [
    {"speaker": "A", "sentences": ["One.", "Two."], "timestamp": 12.5},
    {"speaker": "B", "sentences": ["Three."]}
  ],
  "collection": {"box": 4}
})";
  write(dir.path() / "transcripts" / "t1.json", text + "\n");
  write(dir.path() / "segmentations" / "a" / "t1.json",
        R"({"transcript_id": "t1", "annotator": "a", "boundaries": [2], "note": "x"})"
        "\n");
  const Corpus c1 = load_corpus(dir.path());
  TempDir out;
  save_corpus(c1, out.path());
  const Corpus c2 = load_corpus(out.path());
  CHECK(to_json(c2.transcripts[0]) == to_json(c1.transcripts[0]));
  CHECK(c2.transcripts[0].extra["collection"]["box"] == 4);
  CHECK(c2.transcripts[0].turns[0].extra["timestamp"] == 12.5);
  CHECK(c2.segmentations[0].extra["note"] == "x");
  CHECK(to_json(c2.segmentations[0]) == to_json(c1.segmentations[0]));
}

TEST_CASE("round-trip property on random corpora") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    Corpus c;
    const std::size_t transcripts = 1 + rng() % 3;
    for (std::size_t ti = 0; ti < transcripts; ++ti) {
      const std::string id = "t" + std::to_string(ti);
      const std::size_t n = 1 + rng() % 30;
      c.transcripts.push_back(make_transcript(id, n, 1 + rng() % 6));
      for (const char* annotator : {"a", "b"}) {
        std::vector<std::size_t> bounds;
        for (std::size_t g = 1; g < n; ++g) {
          if (rng() % 5 == 0) bounds.push_back(g);
        }
        c.segmentations.push_back(make_segmentation(id, annotator, bounds));
      }
    }
    TempDir dir;
    save_corpus(c, dir.path());
    const Corpus loaded = load_corpus(dir.path());
    REQUIRE(loaded.transcripts.size() == c.transcripts.size());
    REQUIRE(loaded.segmentations.size() == c.segmentations.size());
    for (const auto& t : c.transcripts) CHECK(to_json(*loaded.find_transcript(t.id)) == to_json(t));
    for (const auto& s : c.segmentations) {
      CHECK(to_json(*loaded.find_segmentation(s.annotator, s.transcript_id)) == to_json(s));
    }
  }
}

TEST_CASE("segment masses") {
  CHECK(segment_masses({2}, 5) == std::vector<std::size_t>{2, 3});
  CHECK(segment_masses({}, 10) == std::vector<std::size_t>{10});
  CHECK_THROWS_AS(segment_masses({5}, 5), CorpusError);

  const Transcript t = make_transcript("t1", 5);
  CHECK_THROWS_AS(segment_masses(make_segmentation("other", "a", {1}), t), CorpusError);
}

TEST_CASE("segment masses property: sum and count") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    std::vector<std::size_t> bounds;
    for (std::size_t g = 1; g < n; ++g) {
      if (rng() % 7 == 0) bounds.push_back(g);
    }
    const auto masses = segment_masses(bounds, n);
    std::size_t sum = 0;
    for (auto m : masses) {
      CHECK(m >= 1);
      sum += m;
    }
    CHECK(sum == n);
    CHECK(masses.size() == bounds.size() + 1);
  }
}

TEST_CASE("length statistics") {
  Corpus c;
  c.transcripts.push_back(make_transcript("t1", 5));
  c.segmentations.push_back(make_segmentation("t1", "a", {2}));
  auto st = length_statistics(c);
  CHECK(st.mean == doctest::Approx(2.5));
  CHECK(st.min == 2);
  CHECK(st.max == 3);
  CHECK(st.median == 2);  // lower median of {2, 3}
  CHECK(st.potential_boundaries == 4);
  CHECK(st.placement_rate == doctest::Approx(0.25));
  CHECK(st.segment_count == st.boundary_count + st.segmentation_count);

  CHECK_THROWS(length_statistics(Corpus{}));
}

TEST_CASE("lower median") {
  CHECK(lower_median({5}) == 5);
  CHECK(lower_median({4, 1, 3, 2}) == 2);
  CHECK(lower_median({3, 1, 2}) == 2);
}
