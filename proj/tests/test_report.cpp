#include <cstdlib>
#include <random>

#include "doctest.h"
#include "ohseg/report.hpp"
#include "test_util.hpp"

using namespace ohseg;
using testutil::make_segmentation;
using testutil::make_transcript;
using testutil::TempDir;

TEST_CASE("csv quoting round trip") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  const auto rows = parse_csv("x,\"a,b\",\"q\"\"\"\r\n\n1,,3\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"x", "a,b", "q\""});
  CHECK(rows[1] == std::vector<std::string>{"1", "", "3"});
}

TEST_CASE("observation csv round trip preserves every field") {
  std::mt19937_64 rng(2);
  std::vector<PairObservation> obs;
  const char* categories[] = {"match", "near_miss", "miss_hypothesis", "miss_reference"};
  for (int i = 0; i < 200; ++i) {
    obs.push_back({"algo," + std::to_string(rng() % 3), "ann\"" + std::to_string(rng() % 4), "t" + std::to_string(i),
                   categories[rng() % 4], static_cast<std::size_t>(rng() % 9),
                   std::uniform_real_distribution<double>(0, 1)(rng)});
  }
  const std::string csv = observations_csv(obs);
  CHECK(csv.rfind(std::string(kObservationHeader) + "\n", 0) == 0);
  const auto back = parse_observations_csv(csv);
  REQUIRE(back.size() == obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    CHECK(back[i].algorithm == obs[i].algorithm);
    CHECK(back[i].annotator == obs[i].annotator);
    CHECK(back[i].category == obs[i].category);
    CHECK(back[i].offset == obs[i].offset);
    CHECK(back[i].score == obs[i].score);  // shortest round-trip formatting is exact
  }
  CHECK(observations_csv(back) == csv);
  CHECK_THROWS_AS(parse_observations_csv("a,b\n"), MetricError);
  CHECK_THROWS_AS(parse_observations_csv(std::string(kObservationHeader) + "\na,b,c,match,x,1\n"), MetricError);
}

TEST_CASE("segment length rows follow the masses") {
  Corpus c;
  c.transcripts.push_back(make_transcript("t1", 10));
  c.segmentations.push_back(make_segmentation("t1", "a", {4}));
  c.segmentations.push_back(make_segmentation("t1", "b", {}));
  const auto rows = segment_length_rows(c);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].length == 4);
  CHECK(rows[1].length == 6);
  CHECK(rows[2].length == 10);
  CHECK(segment_length_rows(c, {"b"}).size() == 1);
  const auto back = parse_segment_lengths_csv(segment_lengths_csv(rows));
  REQUIRE(back.size() == 3);
  CHECK(back[1].annotator == "a");
  CHECK(back[1].segment == 1);
}

TEST_CASE("svg figures") {
  std::vector<SegmentLengthRow> rows{{"t", "a", 0, 3}, {"t", "a", 1, 3}, {"t", "a", 2, 100}};
  const std::string svg = segment_length_svg(rows, "2020-01-01T00:00:00Z", 10);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<!-- generated 2020-01-01T00:00:00Z -->") != std::string::npos);
  CHECK(svg.find("length 3: 2") != std::string::npos);
  CHECK(svg.find("length 10: 1") != std::string::npos);  // overflow bin

  std::vector<PairObservation> obs{{"x<y", "a", "t", "match", 0, 1.0}, {"z", "a", "t", "miss_reference", 0, 0.0}};
  const std::string groups = group_scores_svg(obs, "ts");
  CHECK(groups.find("x&lt;y") != std::string::npos);
  CHECK(groups.find("n=1") != std::string::npos);
}

TEST_CASE("manifest timestamp honours SOURCE_DATE_EPOCH") {
  ::setenv("SOURCE_DATE_EPOCH", "86400", 1);
  CHECK(manifest_timestamp() == "1970-01-02T00:00:00Z");
  ::unsetenv("SOURCE_DATE_EPOCH");
  CHECK(manifest_timestamp().size() == 20);

  RunManifest m;
  m.command = "x";
  m.timestamp = "t";
  CHECK(m.to_json()["seed"].is_null());
  m.seed = 5;
  CHECK(m.to_json()["seed"] == 5);
  CHECK(m.to_json()["version"] == tool_version());
}

TEST_CASE("directory hashes track content") {
  TempDir dir;
  const std::string empty = hash_directory(dir.path());
  write_file_atomic(dir.path() / "a" / "x.json", "1");
  const std::string one = hash_directory(dir.path());
  CHECK(one != empty);
  write_file_atomic(dir.path() / "a" / "x.json", "2");
  CHECK(hash_directory(dir.path()) != one);
  write_file_atomic(dir.path() / "a" / "x.json", "1");
  CHECK(hash_directory(dir.path()) == one);
}

TEST_CASE("group tests need two groups") {
  auto t = run_group_tests({{"a", {1, 2, 3}}}, 0.05);
  CHECK(!t.kruskal_wallis);
  CHECK(!t.notes.empty());
  t = run_group_tests({{"a", {1, 2, 3}}, {"b", {4, 5, 6}}}, 0.05);
  REQUIRE(t.kruskal_wallis);
  REQUIRE(t.dscf);
  CHECK(t.dscf->pairs.size() == 1);
}
