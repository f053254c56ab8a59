#include "ohseg/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>

namespace fs = std::filesystem;

namespace ohseg {

namespace {

HttpResponse json_response(int status, const Json& body) {
  HttpResponse r;
  r.status = status;
  r.body = dump_document(body);
  return r;
}

HttpResponse error_response(int status, const std::string& message) {
  return json_response(status, Json{{"error", message}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : path.substr(0, path.find('?'))) {
    if (c == '/') {
      if (!current.empty()) parts.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  return parts;
}

}  // namespace

bool valid_annotator_id(const std::string& id) {
  if (id.empty() || id.size() > 64 || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '.' || c == '_' || c == '-';
  });
}

Json violations_json(const std::vector<Finding>& findings) {
  Json list = Json::array();
  for (const auto& f : findings) list.push_back(Json{{"where", f.where}, {"rule", f.rule}, {"message", f.message}});
  return Json{{"violations", list}};
}

AnnotationService::AnnotationService(fs::path corpus_dir, fs::path instructions_path)
    : corpus_dir_(std::move(corpus_dir)), instructions_path_(std::move(instructions_path)) {
  auto [corpus, findings] = scan_corpus(corpus_dir_);
  findings.erase(std::remove_if(findings.begin(), findings.end(),
                                [](const Finding& f) { return f.rule == "no_transcripts"; }),
                 findings.end());
  if (!findings.empty()) throw CorpusError(findings);
  corpus_ = std::move(corpus);
}

AnnotationService::~AnnotationService() { stop(); }

fs::path AnnotationService::segmentation_path(const std::string& annotator, const std::string& id) const {
  return corpus_dir_ / "segmentations" / annotator / (id + ".json");
}

AnnotationService::KeyState& AnnotationService::key_state(const std::string& annotator, const std::string& id) {
  std::lock_guard lock(keys_mutex_);
  auto& slot = keys_[annotator + '\0' + id];
  if (!slot) slot = std::make_unique<KeyState>();
  return *slot;
}

HttpResponse AnnotationService::handle(const std::string& method, const std::string& path, const std::string& body) {
  const auto parts = split_path(path);
  const bool api = !parts.empty() && parts[0] == "api";
  if (parts.size() == 1 && parts[0] == "instructions") {
    if (method != "GET") return error_response(405, "method not allowed");
    return get_instructions();
  }
  if (api && parts.size() >= 2 && parts[1] == "transcripts") {
    if (method != "GET") return error_response(405, "method not allowed");
    if (parts.size() == 2) return list_transcripts();
    if (parts.size() == 3) return get_transcript(parts[2]);
  }
  if (api && parts.size() == 4 && parts[1] == "segmentations") {
    if (method == "PUT") return put_segmentation(parts[2], parts[3], body);
    if (method == "GET") return get_segmentation(parts[2], parts[3]);
    return error_response(405, "method not allowed");
  }
  return error_response(404, "no route for " + method + " " + path);
}

HttpResponse AnnotationService::list_transcripts() const {
  Json list = Json::array();
  for (const auto& t : corpus_.transcripts) {
    Json e = Json::object();
    e["id"] = t.id;
    if (t.title) e["title"] = *t.title;
    e["sentence_count"] = t.sentence_count();
    e["turns_count"] = t.turn_count();
    list.push_back(e);
  }
  return json_response(200, list);
}

HttpResponse AnnotationService::get_transcript(const std::string& id) const {
  const Transcript* t = corpus_.find_transcript(id);
  if (!t) return error_response(404, "unknown transcript " + id);
  return json_response(200, to_json(*t, /*include_tags=*/false));
}

HttpResponse AnnotationService::put_segmentation(const std::string& annotator, const std::string& id,
                                                 const std::string& body) {
  if (!valid_annotator_id(annotator)) {
    return json_response(400, violations_json({{"annotator " + annotator, "annotator_name",
                                                "annotator ids use 1-64 of [A-Za-z0-9._-]"}}));
  }
  const Transcript* t = corpus_.find_transcript(id);
  if (!t) return error_response(404, "unknown transcript " + id);

  Json doc;
  try {
    doc = Json::parse(body);
  } catch (const Json::parse_error& e) {
    return json_response(400, violations_json({{"request body", "json_parse",
                                                "invalid JSON at byte " + std::to_string(e.byte)}}));
  }
  std::vector<Finding> findings;
  if (doc.is_object()) {
    if (!doc.contains("transcript_id")) doc["transcript_id"] = id;
    if (!doc.contains("annotator")) doc["annotator"] = annotator;
    if (doc["transcript_id"] != id || doc["annotator"] != annotator) {
      findings.push_back({"request body", "path_mismatch", "transcript_id and annotator must match the URL"});
    }
  }
  Segmentation seg;
  if (findings.empty()) {
    try {
      seg = segmentation_from_json(doc);
    } catch (const CorpusError& e) {
      findings = e.findings();
    }
  }
  if (findings.empty()) findings = validate_segmentation(seg, *t);
  if (!findings.empty()) return json_response(400, violations_json(findings));

  KeyState& key = key_state(annotator, id);
  std::lock_guard lock(key.mutex);
  if (!key.initialised) {
    key.revision = fs::exists(segmentation_path(annotator, id)) ? 1 : 0;
    key.initialised = true;
  }
  save_segmentation(seg, corpus_dir_ / "segmentations");
  ++key.revision;
  HttpResponse r = json_response(200, Json{{"revision", key.revision}});
  r.headers["X-Revision"] = std::to_string(key.revision);
  return r;
}

HttpResponse AnnotationService::get_segmentation(const std::string& annotator, const std::string& id) {
  if (!valid_annotator_id(annotator)) return error_response(404, "no segmentation for " + annotator);
  if (!corpus_.find_transcript(id)) return error_response(404, "unknown transcript " + id);
  KeyState& key = key_state(annotator, id);
  std::lock_guard lock(key.mutex);
  const fs::path path = segmentation_path(annotator, id);
  if (!fs::exists(path)) return error_response(404, "no segmentation for " + annotator + "/" + id);
  if (!key.initialised) {
    key.revision = 1;
    key.initialised = true;
  }
  HttpResponse r;
  r.body = read_file(path);
  r.headers["X-Revision"] = std::to_string(key.revision);
  return r;
}

HttpResponse AnnotationService::get_instructions() const {
  HttpResponse r;
  r.content_type = "text/html; charset=utf-8";
  try {
    r.body = read_file(instructions_path_);
  } catch (const std::exception& e) {
    return error_response(500, std::string("instructions unavailable: ") + e.what());
  }
  return r;
}

void AnnotationService::listen(const std::string& host, int port, const std::function<void(int)>& on_bound) {
  {
    std::lock_guard lock(server_mutex_);
    server_ = std::make_unique<httplib::Server>();
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      const HttpResponse r = handle(req.method, req.path, req.body);
      res.status = r.status;
      for (const auto& [k, v] : r.headers) res.set_header(k, v);
      res.set_content(r.body, r.content_type);
    };
    server_->Get(".*", route);
    server_->Put(".*", route);
    server_->Post(".*", route);
    server_->Delete(".*", route);
  }
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  if (on_bound) on_bound(bound);
  server_->listen_after_bind();
}

void AnnotationService::stop() {
  std::lock_guard lock(server_mutex_);
  if (server_) server_->stop();
}

}  // namespace ohseg
