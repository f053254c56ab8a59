#include "ohseg/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <system_error>

#include "ohseg/preprocess.hpp"

namespace fs = std::filesystem;

namespace ohseg {

namespace {

std::string join_findings(const std::vector<Finding>& findings) {
  std::ostringstream os;
  for (std::size_t i = 0; i < findings.size(); ++i) {
    if (i) os << "\n";
    os << findings[i].where << ": " << findings[i].message << " [" << findings[i].rule << "]";
  }
  return os.str();
}

[[noreturn]] void schema_error(const std::string& where, const std::string& message) {
  throw CorpusError({{where, "schema", message}});
}

const Json& require(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) schema_error(where, std::string("missing field \"") + key + "\"");
  return *it;
}

std::string require_string(const Json& j, const char* key, const std::string& where) {
  const Json& v = require(j, key, where);
  if (!v.is_string()) schema_error(where, std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::vector<std::string> string_array(const Json& v, const std::string& where, const char* what) {
  if (!v.is_array()) schema_error(where, std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_string()) schema_error(where, std::string(what) + " must contain only strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::size_t non_negative_int(const Json& v, const std::string& where, const char* what) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    schema_error(where, std::string(what) + " must be non-negative integers");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

Json collect_extra(const Json& j, std::initializer_list<const char*> known) {
  Json extra = Json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool is_known = std::any_of(known.begin(), known.end(),
                                [&](const char* k) { return it.key() == k; });
    if (!is_known) extra[it.key()] = it.value();
  }
  return extra;
}

void append_extra(Json& out, const Json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it) out[it.key()] = it.value();
}

Json parse_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw CorpusError({{path.string(), "json_parse",
                        "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what()}});
  }
}

std::vector<fs::path> sorted_json_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<fs::path> sorted_subdirs(const fs::path& dir) {
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace

CorpusError::CorpusError(std::vector<Finding> findings)
    : std::runtime_error(join_findings(findings)), findings_(std::move(findings)) {}

std::size_t Transcript::sentence_count() const {
  std::size_t n = 0;
  for (const auto& turn : turns) n += turn.sentences.size();
  return n;
}

std::vector<std::string> Transcript::sentences() const {
  std::vector<std::string> out;
  out.reserve(sentence_count());
  for (const auto& turn : turns) {
    out.insert(out.end(), turn.sentences.begin(), turn.sentences.end());
  }
  return out;
}

std::optional<std::vector<std::vector<std::string>>> Transcript::sentence_tags() const {
  std::vector<std::vector<std::string>> out;
  for (const auto& turn : turns) {
    if (!turn.tags) return std::nullopt;
    out.insert(out.end(), turn.tags->begin(), turn.tags->end());
  }
  return out;
}

const Transcript* Corpus::find_transcript(const std::string& id) const {
  for (const auto& t : transcripts) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const Segmentation* Corpus::find_segmentation(const std::string& annotator,
                                              const std::string& transcript_id) const {
  for (const auto& s : segmentations) {
    if (s.annotator == annotator && s.transcript_id == transcript_id) return &s;
  }
  return nullptr;
}

std::vector<std::string> Corpus::annotators() const {
  std::set<std::string> names;
  for (const auto& s : segmentations) names.insert(s.annotator);
  return {names.begin(), names.end()};
}

Transcript transcript_from_json(const Json& j) {
  if (!j.is_object()) schema_error("transcript", "document must be a JSON object");
  Transcript t;
  t.id = require_string(j, "id", "transcript");
  const std::string where = "transcript " + t.id;
  if (auto it = j.find("title"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) schema_error(where, "field \"title\" must be a string");
    t.title = it->get<std::string>();
  }
  const Json& turns = require(j, "turns", where);
  if (!turns.is_array()) schema_error(where, "field \"turns\" must be an array");
  for (const auto& tj : turns) {
    if (!tj.is_object()) schema_error(where, "each turn must be an object");
    Turn turn;
    turn.speaker = require_string(tj, "speaker", where);
    turn.sentences = string_array(require(tj, "sentences", where), where, "sentences");
    if (auto it = tj.find("tags"); it != tj.end() && !it->is_null()) {
      if (!it->is_array()) schema_error(where, "tags must be an array of arrays");
      std::vector<std::vector<std::string>> tags;
      for (const auto& per_sentence : *it) tags.push_back(string_array(per_sentence, where, "tags"));
      turn.tags = std::move(tags);
    }
    turn.extra = collect_extra(tj, {"speaker", "sentences", "tags"});
    t.turns.push_back(std::move(turn));
  }
  t.extra = collect_extra(j, {"id", "title", "turns"});
  return t;
}

Json to_json(const Transcript& t, bool include_tags) {
  Json j = Json::object();
  j["id"] = t.id;
  if (t.title) j["title"] = *t.title;
  Json turns = Json::array();
  for (const auto& turn : t.turns) {
    Json tj = Json::object();
    tj["speaker"] = turn.speaker;
    tj["sentences"] = turn.sentences;
    if (include_tags && turn.tags) tj["tags"] = *turn.tags;
    append_extra(tj, turn.extra);
    turns.push_back(std::move(tj));
  }
  j["turns"] = std::move(turns);
  append_extra(j, t.extra);
  return j;
}

Segmentation segmentation_from_json(const Json& j) {
  if (!j.is_object()) schema_error("segmentation", "document must be a JSON object");
  Segmentation s;
  s.transcript_id = require_string(j, "transcript_id", "segmentation");
  s.annotator = require_string(j, "annotator", "segmentation");
  const std::string where = "segmentation " + s.annotator + "/" + s.transcript_id;
  const Json& b = require(j, "boundaries", where);
  if (!b.is_array()) schema_error(where, "field \"boundaries\" must be an array");
  for (const auto& v : b) s.boundaries.push_back(non_negative_int(v, where, "boundaries"));
  if (auto it = j.find("selected"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) schema_error(where, "field \"selected\" must be an array of [start,end]");
    std::vector<SentenceRange> ranges;
    for (const auto& r : *it) {
      if (!r.is_array() || r.size() != 2) {
        schema_error(where, "each selected range must be a [start, end] pair");
      }
      ranges.push_back({non_negative_int(r[0], where, "selected"),
                        non_negative_int(r[1], where, "selected")});
    }
    s.selected = std::move(ranges);
  }
  s.extra = collect_extra(j, {"transcript_id", "annotator", "boundaries", "selected"});
  return s;
}

Json to_json(const Segmentation& s) {
  Json j = Json::object();
  j["transcript_id"] = s.transcript_id;
  j["annotator"] = s.annotator;
  j["boundaries"] = s.boundaries;
  if (s.selected) {
    Json ranges = Json::array();
    for (const auto& r : *s.selected) ranges.push_back({r.start, r.end});
    j["selected"] = std::move(ranges);
  }
  append_extra(j, s.extra);
  return j;
}

std::vector<Finding> validate_transcript(const Transcript& t) {
  std::vector<Finding> out;
  const std::string where = "transcript " + t.id;
  if (t.id.empty()) out.push_back({where, "transcript_id", "transcript id is empty"});
  if (t.turns.empty()) out.push_back({where, "no_turns", "transcript has no turns"});
  std::size_t sentence_index = 0;
  for (std::size_t ti = 0; ti < t.turns.size(); ++ti) {
    const Turn& turn = t.turns[ti];
    const std::string turn_where = where + " turn " + std::to_string(ti);
    if (turn.sentences.empty()) {
      out.push_back({turn_where, "empty_turn", "turn has no sentences"});
    }
    if (turn.tags && turn.tags->size() != turn.sentences.size()) {
      out.push_back({turn_where, "tag_count",
                     "tags list has " + std::to_string(turn.tags->size()) +
                         " entries for " + std::to_string(turn.sentences.size()) +
                         " sentences"});
    }
    for (std::size_t si = 0; si < turn.sentences.size(); ++si, ++sentence_index) {
      const std::string& sentence = turn.sentences[si];
      if (sentence.empty()) {
        out.push_back({turn_where, "empty_sentence",
                       "sentence " + std::to_string(sentence_index) + " is empty"});
      }
      if (turn.tags && si < turn.tags->size()) {
        const std::size_t tokens = tokenize(sentence).size();
        if ((*turn.tags)[si].size() != tokens) {
          out.push_back({turn_where, "tag_count",
                         "sentence " + std::to_string(sentence_index) + " has " +
                             std::to_string((*turn.tags)[si].size()) + " tags for " +
                             std::to_string(tokens) + " tokens"});
        }
      }
    }
  }
  return out;
}

std::vector<Finding> validate_boundaries(const std::vector<std::size_t>& boundaries,
                                         std::size_t sentence_count, const std::string& where) {
  std::vector<Finding> out;
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    const std::size_t b = boundaries[i];
    if (b < 1 || b + 1 > sentence_count) {
      out.push_back({where, "boundary_range",
                     "boundary " + std::to_string(b) + " outside [1, " +
                         std::to_string(sentence_count == 0 ? 0 : sentence_count - 1) + "]"});
    }
    if (i > 0) {
      if (boundaries[i - 1] == b) {
        out.push_back({where, "boundary_duplicate", "duplicate boundary " + std::to_string(b)});
      } else if (boundaries[i - 1] > b) {
        out.push_back({where, "boundary_order",
                       "boundaries not strictly increasing at " + std::to_string(b)});
      }
    }
  }
  return out;
}

std::vector<Finding> validate_segmentation(const Segmentation& s, const Transcript& t) {
  const std::string where = s.annotator + "/" + s.transcript_id;
  std::vector<Finding> out;
  if (s.transcript_id != t.id) {
    out.push_back({where, "transcript_mismatch",
                   "segmentation refers to " + s.transcript_id + ", not " + t.id});
  }
  const std::size_t n = t.sentence_count();
  auto boundary_findings = validate_boundaries(s.boundaries, n, where);
  out.insert(out.end(), boundary_findings.begin(), boundary_findings.end());
  if (!s.selected) return out;

  std::set<std::size_t> edges(s.boundaries.begin(), s.boundaries.end());
  edges.insert(0);
  edges.insert(n);
  std::vector<SentenceRange> ranges = *s.selected;
  for (const auto& r : ranges) {
    const std::string range = "[" + std::to_string(r.start) + ", " + std::to_string(r.end) + ")";
    if (r.start >= r.end || r.end > n) {
      out.push_back({where, "extract_range", "selected range " + range + " is empty or out of range"});
    } else if (!edges.count(r.start) || !edges.count(r.end)) {
      out.push_back({where, "extract_alignment",
                     "selected range " + range + " does not start and end on boundaries"});
    }
  }
  std::sort(ranges.begin(), ranges.end(),
            [](const SentenceRange& a, const SentenceRange& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i].start < ranges[i - 1].end) {
      out.push_back({where, "extracts_overlap", "extracts overlap"});
      break;
    }
  }
  return out;
}

std::pair<Corpus, std::vector<Finding>> scan_corpus(const fs::path& dir) {
  Corpus corpus;
  std::vector<Finding> findings;
  const fs::path transcripts_dir = dir / "transcripts";
  if (!fs::is_directory(transcripts_dir) || sorted_json_files(transcripts_dir).empty()) {
    findings.push_back({dir.string(), "no_transcripts", "no transcripts found"});
    return {std::move(corpus), std::move(findings)};
  }

  std::set<std::string> ids;
  for (const auto& path : sorted_json_files(transcripts_dir)) {
    try {
      Transcript t = transcript_from_json(parse_file(path));
      auto f = validate_transcript(t);
      if (t.id != path.stem().string()) {
        f.push_back({path.string(), "file_name", "transcript id " + t.id + " does not match file name"});
      }
      if (!ids.insert(t.id).second) {
        f.push_back({path.string(), "transcript_duplicate", "duplicate transcript id " + t.id});
      }
      if (f.empty()) {
        corpus.transcripts.push_back(std::move(t));
      } else {
        findings.insert(findings.end(), f.begin(), f.end());
      }
    } catch (const CorpusError& e) {
      for (auto f : e.findings()) {
        if (f.where != path.string()) f.where = path.string() + " (" + f.where + ")";
        findings.push_back(std::move(f));
      }
    }
  }

  const fs::path seg_dir = dir / "segmentations";
  if (!fs::is_directory(seg_dir)) return {std::move(corpus), std::move(findings)};
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& annotator_dir : sorted_subdirs(seg_dir)) {
    for (const auto& path : sorted_json_files(annotator_dir)) {
      try {
        Segmentation s = segmentation_from_json(parse_file(path));
        std::vector<Finding> f;
        const std::string where = path.string();
        if (s.annotator != annotator_dir.filename().string()) {
          f.push_back({where, "file_name", "annotator " + s.annotator + " does not match directory"});
        }
        if (s.transcript_id != path.stem().string()) {
          f.push_back({where, "file_name",
                       "transcript_id " + s.transcript_id + " does not match file name"});
        }
        if (!keys.insert({s.annotator, s.transcript_id}).second) {
          f.push_back({where, "segmentation_duplicate", "duplicate (annotator, transcript) pair"});
        }
        const Transcript* t = corpus.find_transcript(s.transcript_id);
        if (!t) {
          if (!ids.count(s.transcript_id)) {
            f.push_back({where, "unknown_transcript", "unknown transcript " + s.transcript_id});
          }
        } else {
          for (auto v : validate_segmentation(s, *t)) {
            v.where = where;
            f.push_back(std::move(v));
          }
        }
        if (f.empty() && t) {
          corpus.segmentations.push_back(std::move(s));
        } else {
          findings.insert(findings.end(), f.begin(), f.end());
        }
      } catch (const CorpusError& e) {
        for (auto f : e.findings()) {
          if (f.where != path.string()) f.where = path.string() + " (" + f.where + ")";
          findings.push_back(std::move(f));
        }
      }
    }
  }
  return {std::move(corpus), std::move(findings)};
}

Corpus load_corpus(const fs::path& dir) {
  auto [corpus, findings] = scan_corpus(dir);
  if (!findings.empty()) throw CorpusError(std::move(findings));
  return std::move(corpus);
}

std::vector<Segmentation> load_segmentations(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw CorpusError({{dir.string(), "missing_directory", "segmentation directory not found"}});
  }
  std::vector<Segmentation> out;
  std::vector<Finding> findings;
  for (const auto& annotator_dir : sorted_subdirs(dir)) {
    for (const auto& path : sorted_json_files(annotator_dir)) {
      try {
        out.push_back(segmentation_from_json(parse_file(path)));
      } catch (const CorpusError& e) {
        for (auto f : e.findings()) {
          f.where = path.string();
          findings.push_back(std::move(f));
        }
      }
    }
  }
  if (!findings.empty()) throw CorpusError(std::move(findings));
  return out;
}

std::string dump_document(const Json& j) { return j.dump(2) + "\n"; }

void save_segmentation(const Segmentation& s, const fs::path& segmentations_dir) {
  write_file_atomic(segmentations_dir / s.annotator / (s.transcript_id + ".json"),
                    dump_document(to_json(s)));
}

void save_corpus(const Corpus& corpus, const fs::path& dir) {
  for (const auto& t : corpus.transcripts) {
    write_file_atomic(dir / "transcripts" / (t.id + ".json"), dump_document(to_json(t)));
  }
  for (const auto& s : corpus.segmentations) save_segmentation(s, dir / "segmentations");
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::size_t> segment_masses(const std::vector<std::size_t>& boundaries,
                                        std::size_t sentence_count) {
  auto findings = validate_boundaries(boundaries, sentence_count, "segment_masses");
  if (!findings.empty()) throw CorpusError(std::move(findings));
  std::vector<std::size_t> masses;
  masses.reserve(boundaries.size() + 1);
  std::size_t prev = 0;
  for (std::size_t b : boundaries) {
    masses.push_back(b - prev);
    prev = b;
  }
  masses.push_back(sentence_count - prev);
  return masses;
}

std::vector<std::size_t> segment_masses(const Segmentation& seg, const Transcript& t) {
  if (seg.transcript_id != t.id) {
    throw CorpusError({{seg.annotator + "/" + seg.transcript_id, "transcript_mismatch",
                        "segmentation does not belong to transcript " + t.id}});
  }
  return segment_masses(seg.boundaries, t.sentence_count());
}

std::size_t lower_median(std::vector<std::size_t> values) {
  if (values.empty()) throw std::invalid_argument("median of empty list");
  const std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  return values[mid];
}

LengthStatistics length_statistics(const Corpus& corpus, const std::vector<std::string>& annotators) {
  auto wanted = [&](const std::string& a) {
    return annotators.empty() || std::find(annotators.begin(), annotators.end(), a) != annotators.end();
  };
  LengthStatistics st;
  std::vector<std::size_t> all;
  std::map<std::string, std::vector<std::size_t>> per_transcript;
  for (const auto& seg : corpus.segmentations) {
    if (!wanted(seg.annotator)) continue;
    const Transcript* t = corpus.find_transcript(seg.transcript_id);
    if (!t) throw CorpusError({{seg.transcript_id, "unknown_transcript", "unknown transcript"}});
    auto masses = segment_masses(seg, *t);
    ++st.segmentation_count;
    st.boundary_count += seg.boundaries.size();
    st.potential_boundaries += t->sentence_count() - 1;
    auto& bucket = per_transcript[t->id];
    bucket.insert(bucket.end(), masses.begin(), masses.end());
    all.insert(all.end(), masses.begin(), masses.end());
  }
  if (all.empty()) throw std::invalid_argument("length statistics need at least one segmentation");

  st.segment_count = all.size();
  const double n = static_cast<double>(all.size());
  st.mean = std::accumulate(all.begin(), all.end(), 0.0) / n;
  double ss = 0;
  for (std::size_t m : all) ss += (static_cast<double>(m) - st.mean) * (static_cast<double>(m) - st.mean);
  st.stddev = all.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  auto [lo, hi] = std::minmax_element(all.begin(), all.end());
  st.min = *lo;
  st.max = *hi;
  st.median = lower_median(all);
  st.placement_rate = st.potential_boundaries
                          ? static_cast<double>(st.boundary_count) / static_cast<double>(st.potential_boundaries)
                          : 0.0;
  for (auto& [id, masses] : per_transcript) st.per_transcript_median.emplace_back(id, lower_median(masses));
  return st;
}

}  // namespace ohseg
