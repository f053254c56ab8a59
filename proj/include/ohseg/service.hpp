// HTTP service for collecting human segmentations. Handlers are plain
// functions of (method, path, body) so they can be exercised without sockets.
//
// There is no authentication: the annotator id is a path segment.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ohseg/corpus.hpp"

namespace httplib {
class Server;
}

namespace ohseg {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

class AnnotationService {
 public:
  /// Transcripts are read once and treated as immutable; segmentations are
  /// read from and written to `<corpus_dir>/segmentations/`.
  AnnotationService(std::filesystem::path corpus_dir, std::filesystem::path instructions_path);
  ~AnnotationService();

  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

  HttpResponse list_transcripts() const;
  HttpResponse get_transcript(const std::string& id) const;
  HttpResponse put_segmentation(const std::string& annotator, const std::string& id, const std::string& body);
  HttpResponse get_segmentation(const std::string& annotator, const std::string& id);
  HttpResponse get_instructions() const;

  const Corpus& corpus() const { return corpus_; }

  /// Blocks serving HTTP until stop() is called. Port 0 picks a free port;
  /// `on_bound` receives the actual port once listening.
  void listen(const std::string& host, int port, const std::function<void(int)>& on_bound = {});
  void stop();

 private:
  struct KeyState {
    std::mutex mutex;
    std::uint64_t revision = 0;
    bool initialised = false;
  };
  KeyState& key_state(const std::string& annotator, const std::string& id);
  std::filesystem::path segmentation_path(const std::string& annotator, const std::string& id) const;

  std::filesystem::path corpus_dir_;
  std::filesystem::path instructions_path_;
  Corpus corpus_;
  std::mutex keys_mutex_;
  std::map<std::string, std::unique_ptr<KeyState>> keys_;
  std::unique_ptr<httplib::Server> server_;
  std::mutex server_mutex_;
};

/// Annotator ids become directory names: 1-64 of [A-Za-z0-9._-], not "." or "..".
bool valid_annotator_id(const std::string& id);

/// Violations as returned in a 400 body: {"violations": [{where, rule, message}]}.
Json violations_json(const std::vector<Finding>& findings);

}  // namespace ohseg
