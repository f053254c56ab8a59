#include <httplib.h>

#include <future>
#include <set>
#include <thread>

#include "doctest.h"
#include "ohseg/service.hpp"
#include "test_util.hpp"

using namespace ohseg;
using testutil::make_segmentation;
using testutil::make_transcript;
using testutil::TempDir;

namespace {

std::filesystem::path instructions_path() { return std::filesystem::path(OHSEG_SOURCE_DIR) / "data/instructions.html"; }

struct Fixture {
  TempDir dir;
  std::unique_ptr<AnnotationService> service;

  explicit Fixture(std::size_t transcripts = 2) {
    Corpus c;
    for (std::size_t i = 0; i < transcripts; ++i) {
      auto t = make_transcript("t" + std::to_string(i + 1), 20);
      t.title = "Interview " + std::to_string(i + 1);
      t.turns[0].tags = std::vector<std::vector<std::string>>(5, std::vector<std::string>{"NN", "NN", "NN", "IN", "DT", "NN"});
      c.transcripts.push_back(t);
    }
    save_corpus(c, dir.path());
    service = std::make_unique<AnnotationService>(dir.path(), instructions_path());
  }
};

std::set<std::string> rules_of(const HttpResponse& r) {
  std::set<std::string> out;
  const Json doc = Json::parse(r.body);
  for (const auto& v : doc["violations"]) out.insert(v["rule"].get<std::string>());
  return out;
}

}  // namespace

TEST_CASE("transcript index") {
  Fixture f;
  const auto r = f.service->handle("GET", "/api/transcripts", "");
  CHECK(r.status == 200);
  const Json index = Json::parse(r.body);
  REQUIRE(index.size() == 2);
  CHECK(index[0]["id"] == "t1");
  CHECK(index[0]["title"] == "Interview 1");
  CHECK(index[0]["sentence_count"] == 20);
  CHECK(index[0]["turns_count"] == 4);
}

TEST_CASE("empty corpus lists no transcripts") {
  TempDir dir;
  AnnotationService service(dir.path(), instructions_path());
  const auto r = service.handle("GET", "/api/transcripts", "");
  CHECK(r.status == 200);
  CHECK(Json::parse(r.body) == Json::array());
}

TEST_CASE("transcript documents omit tags and stay valid") {
  Fixture f;
  const auto r = f.service->handle("GET", "/api/transcripts/t1", "");
  REQUIRE(r.status == 200);
  const Json doc = Json::parse(r.body);
  for (const auto& turn : doc["turns"]) CHECK(!turn.contains("tags"));
  CHECK(validate_transcript(transcript_from_json(doc)).empty());
  CHECK(f.service->handle("GET", "/api/transcripts/nope", "").status == 404);
}

TEST_CASE("put then get returns the stored body and a rising revision") {
  Fixture f;
  const std::string body = R"({"boundaries": [3, 10], "selected": [[3, 10]]})";
  auto put = f.service->handle("PUT", "/api/segmentations/alice/t1", body);
  REQUIRE(put.status == 200);
  CHECK(Json::parse(put.body)["revision"] == 1);

  auto get = f.service->handle("GET", "/api/segmentations/alice/t1", "");
  REQUIRE(get.status == 200);
  CHECK(get.headers.at("X-Revision") == "1");
  const Segmentation stored = segmentation_from_json(Json::parse(get.body));
  CHECK(stored.annotator == "alice");
  CHECK(stored.boundaries == std::vector<std::size_t>{3, 10});
  CHECK(get.body == read_file(f.dir.path() / "segmentations/alice/t1.json"));

  // Re-sending the stored document is byte-stable.
  put = f.service->handle("PUT", "/api/segmentations/alice/t1", get.body);
  CHECK(Json::parse(put.body)["revision"] == 2);
  CHECK(f.service->handle("GET", "/api/segmentations/alice/t1", "").body == get.body);

  // The stored state is a loadable corpus.
  CHECK_NOTHROW(load_corpus(f.dir.path()));
}

TEST_CASE("put errors") {
  Fixture f;
  CHECK(f.service->handle("PUT", "/api/segmentations/alice/unknown", R"({"boundaries": []})").status == 404);

  auto r = f.service->handle("PUT", "/api/segmentations/alice/t1", R"({"boundaries": [20]})");
  CHECK(r.status == 400);
  CHECK(rules_of(r) == std::set<std::string>{"boundary_range"});

  r = f.service->handle("PUT", "/api/segmentations/alice/t1",
                        R"({"boundaries": [3, 10], "selected": [[0, 10], [3, 10]]})");
  CHECK(r.status == 400);
  CHECK(Json::parse(r.body)["violations"][0]["message"] == "extracts overlap");

  r = f.service->handle("PUT", "/api/segmentations/alice/t1", "{not json");
  CHECK(r.status == 400);
  CHECK(rules_of(r) == std::set<std::string>{"json_parse"});

  r = f.service->handle("PUT", "/api/segmentations/alice/t1", R"({"annotator": "bob", "boundaries": []})");
  CHECK(rules_of(r) == std::set<std::string>{"path_mismatch"});

  r = f.service->handle("PUT", "/api/segmentations/../t1", R"({"boundaries": []})");
  CHECK(r.status != 200);
  CHECK(f.service->handle("PUT", "/api/segmentations/a%2Fb/t1", R"({"boundaries": []})").status == 400);
  CHECK(!std::filesystem::exists(f.dir.path() / "segmentations" / "t1.json"));

  CHECK(f.service->handle("GET", "/api/segmentations/alice/t2", "").status == 404);
  CHECK(f.service->handle("DELETE", "/api/transcripts", "").status == 405);
  CHECK(f.service->handle("GET", "/nowhere", "").status == 404);
}

TEST_CASE("shared validation vectors") {
  const Json vectors = Json::parse(read_file(std::filesystem::path(OHSEG_TEST_VECTORS) / "segmentation_validation.json"));
  REQUIRE(vectors["cases"].size() >= 10);
  for (const auto& c : vectors["cases"]) {
    Corpus corpus;
    corpus.transcripts.push_back(make_transcript("t1", c["sentence_count"].get<std::size_t>()));
    TempDir dir;
    save_corpus(corpus, dir.path());
    AnnotationService service(dir.path(), instructions_path());
    const auto r = service.handle("PUT", "/api/segmentations/tester/t1", c["segmentation"].dump());
    std::set<std::string> expected;
    for (const auto& v : c["violations"]) expected.insert(v.get<std::string>());
    INFO(c["name"].get<std::string>());
    if (expected.empty()) {
      CHECK(r.status == 200);
    } else {
      CHECK(r.status == 400);
      CHECK(rules_of(r) == expected);
    }
  }
}

TEST_CASE("concurrent saves to one key are serialized") {
  Fixture f;
  std::vector<std::future<int>> saves;
  for (int i = 0; i < 16; ++i) {
    saves.push_back(std::async(std::launch::async, [&, i] {
      const std::string body = "{\"boundaries\": [" + std::to_string(1 + i) + "]}";
      return Json::parse(f.service->handle("PUT", "/api/segmentations/alice/t1", body).body)["revision"].get<int>();
    }));
  }
  std::set<int> revisions;
  for (auto& s : saves) revisions.insert(s.get());
  CHECK(revisions.size() == 16);
  CHECK(*revisions.rbegin() == 16);
  const auto seg = segmentation_from_json(Json::parse(read_file(f.dir.path() / "segmentations/alice/t1.json")));
  CHECK(seg.boundaries.size() == 1);
}

TEST_CASE("instructions page") {
  Fixture f;
  const auto r = f.service->handle("GET", "/instructions", "");
  CHECK(r.status == 200);
  CHECK(r.content_type.find("text/html") == 0);
  CHECK(r.body.find("30 to 50 sentences") != std::string::npos);
}

TEST_CASE("real socket round trip") {
  Fixture f;
  std::promise<int> bound;
  std::thread server([&] { f.service->listen("127.0.0.1", 0, [&](int port) { bound.set_value(port); }); });
  const int port = bound.get_future().get();
  {
    httplib::Client client("127.0.0.1", port);
    auto list = client.Get("/api/transcripts");
    REQUIRE(list);
    CHECK(list->status == 200);
    CHECK(Json::parse(list->body).size() == 2);

    auto put = client.Put("/api/segmentations/alice/t2", R"({"boundaries": [5]})", "application/json");
    REQUIRE(put);
    CHECK(put->status == 200);
    auto get = client.Get("/api/segmentations/alice/t2");
    REQUIRE(get);
    CHECK(get->get_header_value("X-Revision") == "1");
    CHECK(segmentation_from_json(Json::parse(get->body)).boundaries == std::vector<std::size_t>{5});

    auto bad = client.Put("/api/segmentations/alice/t2", R"({"boundaries": [20]})", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
  }
  f.service->stop();
  server.join();
}
