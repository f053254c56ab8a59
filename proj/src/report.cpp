#include "ohseg/report.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <sstream>

#include "ohseg/hash.hpp"

#ifndef OHSEG_VERSION
#define OHSEG_VERSION "0.0.0"
#endif

namespace ohseg {

const char* tool_version() { return OHSEG_VERSION; }

Json RunManifest::to_json() const {
  Json j = Json::object();
  j["command"] = command;
  j["params"] = params;
  Json hashes = Json::object();
  for (const auto& [label, h] : input_hashes) hashes[label] = h;
  j["input_hashes"] = hashes;
  if (!stopword_hash.empty()) j["stopword_hash"] = stopword_hash;
  j["version"] = version;
  j["timestamp"] = timestamp;
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  return j;
}

std::string manifest_timestamp() {
  std::time_t t = 0;
  const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
  if (epoch && *epoch) {
    long long v = 0;
    const char* end = epoch + std::char_traits<char>::length(epoch);
    if (std::from_chars(epoch, end, v).ec == std::errc{}) t = static_cast<std::time_t>(v);
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hash_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<std::pair<std::string, fs::path>> files;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (e.is_regular_file()) files.emplace_back(fs::relative(e.path(), dir).generic_string(), e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& [rel, path] : files) listing += rel + '\0' + sha256_hex(read_file(path)) + '\n';
  return sha256_hex(listing);
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// ---------------------------------------------------------------------------

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::size_t parse_size(const std::string& s, const std::string& what) {
  std::size_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw MetricError("bad " + what + ": '" + s + "'");
  return v;
}

double parse_real(const std::string& s, const std::string& what) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw MetricError("bad " + what + ": '" + s + "'");
  return v;
}

std::string join_header(const std::vector<std::string>& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
  return out;
}

}  // namespace

std::string observations_csv(const std::vector<PairObservation>& observations) {
  std::string out = std::string(kObservationHeader) + "\n";
  for (const auto& o : observations) {
    out += csv_escape(o.algorithm) + ',' + csv_escape(o.annotator) + ',' + csv_escape(o.transcript) + ',' +
           o.category + ',' + std::to_string(o.offset) + ',' + format_double(o.score) + '\n';
  }
  return out;
}

std::vector<PairObservation> parse_observations_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || join_header(rows[0]) != kObservationHeader) {
    throw MetricError(std::string("observation CSV must start with header: ") + kObservationHeader);
  }
  std::vector<PairObservation> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = "row " + std::to_string(i + 1);
    if (r.size() != 6) throw MetricError(where + ": expected 6 fields, got " + std::to_string(r.size()));
    PairObservation o{r[0], r[1], r[2], r[3], parse_size(r[4], where + " offset"), parse_real(r[5], where + " score")};
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<SegmentLengthRow> segment_length_rows(const Corpus& corpus, const std::vector<std::string>& annotators) {
  std::vector<SegmentLengthRow> rows;
  for (const auto& s : corpus.segmentations) {
    if (!annotators.empty() && std::find(annotators.begin(), annotators.end(), s.annotator) == annotators.end()) {
      continue;
    }
    const Transcript* t = corpus.find_transcript(s.transcript_id);
    if (!t) continue;
    const auto masses = segment_masses(s, *t);
    for (std::size_t i = 0; i < masses.size(); ++i) rows.push_back({s.transcript_id, s.annotator, i, masses[i]});
  }
  return rows;
}

std::string segment_lengths_csv(const std::vector<SegmentLengthRow>& rows) {
  std::string out = std::string(kSegmentLengthHeader) + "\n";
  for (const auto& r : rows) {
    out += csv_escape(r.transcript) + ',' + csv_escape(r.annotator) + ',' + std::to_string(r.segment) + ',' +
           std::to_string(r.length) + '\n';
  }
  return out;
}

std::vector<SegmentLengthRow> parse_segment_lengths_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || join_header(rows[0]) != kSegmentLengthHeader) {
    throw MetricError(std::string("segment length CSV must start with header: ") + kSegmentLengthHeader);
  }
  std::vector<SegmentLengthRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string where = "row " + std::to_string(i + 1);
    if (r.size() != 4) throw MetricError(where + ": expected 4 fields");
    out.push_back({r[0], r[1], parse_size(r[2], where + " segment"), parse_size(r[3], where + " length")});
  }
  return out;
}

// ---------------------------------------------------------------------------

Json to_json(const MicroAverage& m) {
  return Json{{"mean", m.mean}, {"ci95_half_width", m.ci95_half_width}, {"n", m.n}};
}

Json to_json(const ErrorCounts& e) {
  return Json{{"matches", e.matches},
              {"near_misses", e.near_misses},
              {"false_positives", e.false_positives},
              {"false_negatives", e.false_negatives}};
}

Json to_json(const stats::KruskalWallisResult& r) {
  return Json{{"h", r.h},
              {"h_uncorrected", r.h_uncorrected},
              {"tie_correction", r.tie_correction},
              {"df", r.df},
              {"p_value", r.p_value}};
}

Json to_json(const stats::DscfResult& r) {
  Json j = Json::object();
  j["mode"] = r.mode == stats::DscfMode::kAsymptotic ? "asymptotic" : "permutation";
  j["alpha"] = r.alpha;
  if (r.mode == stats::DscfMode::kPermutation) {
    j["permutations"] = r.permutations;
    j["seed"] = r.seed;
  }
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    Json pj = Json::object();
    pj["first"] = p.first;
    pj["second"] = p.second;
    pj["w_star"] = p.w_star;
    pj["w"] = p.w;
    pj["expected"] = p.expected;
    pj["variance"] = p.variance;
    if (p.critical_value) pj["critical_value"] = *p.critical_value;
    if (p.p_value) pj["p_value"] = *p.p_value;
    pj["significant"] = p.significant;
    pairs.push_back(pj);
  }
  j["pairs"] = pairs;
  return j;
}

Json to_json(const AgreementReport& r) {
  Json j = Json::object();
  j["measure"] = "boundary similarity (1 = perfect agreement)";
  j["near_miss_scaling"] = kNearMissScaling;
  j["n_t"] = r.n_t;
  j["pairwise"] = to_json(r.actual);
  j["actual_agreement"] = r.actual_agreement;
  j["expected_agreement"] = r.expected_agreement;
  j["expected_mode"] = r.expected_mode == ExpectedAgreement::kPooled ? "pooled" : "per-annotator";
  j["pi_star"] = r.pi_star;
  j["annotators"] = r.annotator_count;
  j["transcripts"] = r.transcript_count;
  return j;
}

stats::GroupedScores groups_from_observations(const std::vector<PairObservation>& observations) {
  stats::GroupedScores groups;
  for (const auto& o : observations) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const stats::Group& g) { return g.name == o.algorithm; });
    if (it == groups.end()) {
      groups.push_back({o.algorithm, {}});
      it = groups.end() - 1;
    }
    it->values.push_back(o.score);
  }
  return groups;
}

GroupTests run_group_tests(const stats::GroupedScores& groups, double alpha) {
  GroupTests t;
  if (groups.size() < 2) {
    t.notes.push_back("fewer than two groups; no group tests");
    return t;
  }
  try {
    t.kruskal_wallis = stats::kruskal_wallis(groups);
  } catch (const stats::StatsError& e) {
    t.notes.push_back(std::string("kruskal-wallis: ") + e.what());
  }
  try {
    t.dscf = stats::dscf_pairwise(groups, alpha, stats::DscfMode::kAsymptotic);
  } catch (const stats::StatsError& e) {
    t.notes.push_back(std::string("dscf: ") + e.what());
  }
  return t;
}

Json evaluation_summary(const EvalReport& report, const GroupTests& tests, const RunManifest& manifest) {
  Json j = Json::object();
  j["manifest"] = manifest.to_json();
  j["measure"] = "boundary similarity (1 = perfect agreement), micro-averaged over boundary pairs";
  j["near_miss_scaling"] = kNearMissScaling;
  j["empty_vs_empty"] = "a comparison with no boundaries on either side scores 1 and adds no observations";
  j["n_t"] = report.n_t;
  Json groups = Json::object();
  for (const auto& [name, g] : report.groups) {
    Json gj = Json::object();
    gj["pooled"] = to_json(g.pooled);
    gj["errors"] = to_json(g.errors);
    Json per_annotator = Json::object();
    for (const auto& [a, m] : g.per_annotator) per_annotator[a] = to_json(m);
    gj["per_annotator"] = per_annotator;
    Json per_transcript = Json::object();
    for (const auto& [t, m] : g.per_transcript) per_transcript[t] = to_json(m);
    gj["per_transcript"] = per_transcript;
    groups[name] = gj;
  }
  j["groups"] = groups;
  Json tj = Json::object();
  tj["kruskal_wallis"] = tests.kruskal_wallis ? to_json(*tests.kruskal_wallis) : Json(nullptr);
  tj["dscf"] = tests.dscf ? to_json(*tests.dscf) : Json(nullptr);
  tj["notes"] = tests.notes;
  j["tests"] = tj;
  return j;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string svg_open(const std::string& title, const std::string& timestamp) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<!-- generated " + xml_escape(timestamp) + " -->\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
       "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(title) +
       "</text>\n";
  return s;
}

std::string axes(const std::string& x_label, const std::string& y_label, double y_max, int y_ticks) {
  const double x0 = kLeft, y0 = kHeight - kBottom, x1 = kWidth - kRight, y1 = kTop;
  std::string s;
  s += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x1) + "\" y2=\"" + fmt(y0) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x0) + "\" y2=\"" + fmt(y1) +
       "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= y_ticks; ++i) {
    const double v = y_max * i / y_ticks;
    const double y = y0 - (y0 - y1) * i / y_ticks;
    char label[32];
    std::snprintf(label, sizeof label, y_max >= 10 ? "%.0f" : "%.2f", v);
    s += "<text x=\"" + fmt(x0 - 6) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\">" + label + "</text>\n";
  }
  s += "<text x=\"" + fmt((x0 + x1) / 2) + "\" y=\"" + fmt(kHeight - 12) + "\" text-anchor=\"middle\">" +
       xml_escape(x_label) + "</text>\n";
  s += "<text x=\"14\" y=\"" + fmt((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       fmt((y0 + y1) / 2) + ")\">" + xml_escape(y_label) + "</text>\n";
  return s;
}

}  // namespace

std::string segment_length_svg(const std::vector<SegmentLengthRow>& rows, const std::string& timestamp,
                               std::size_t max_bins) {
  std::size_t longest = 0;
  for (const auto& r : rows) longest = std::max(longest, r.length);
  const std::size_t bins = std::max<std::size_t>(1, std::min(max_bins, longest));
  std::vector<std::size_t> counts(bins, 0);
  for (const auto& r : rows) {
    if (r.length == 0) continue;
    ++counts[std::min(r.length, bins) - 1];
  }
  const std::size_t peak = std::max<std::size_t>(1, *std::max_element(counts.begin(), counts.end()));
  std::string s = svg_open("Segment lengths (" + std::to_string(rows.size()) + " segments)", timestamp);
  s += axes("segment length (sentences)" + std::string(longest > bins ? "; last bin includes longer" : ""),
            "segments", static_cast<double>(peak), 5);
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  const double bar_w = plot_w / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double h = plot_h * static_cast<double>(counts[b]) / static_cast<double>(peak);
    const double x = kLeft + bar_w * static_cast<double>(b);
    s += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(kHeight - kBottom - h) + "\" width=\"" + fmt(bar_w * 0.9) +
         "\" height=\"" + fmt(h) + "\" fill=\"#4a78a8\"><title>length " + std::to_string(b + 1) + ": " +
         std::to_string(counts[b]) + "</title></rect>\n";
    if (bins <= 20 || (b + 1) % 5 == 0) {
      s += "<text x=\"" + fmt(x + bar_w / 2) + "\" y=\"" + fmt(kHeight - kBottom + 14) + "\" text-anchor=\"middle\">" +
           std::to_string(b + 1) + "</text>\n";
    }
  }
  return s + "</svg>\n";
}

std::string group_scores_svg(const std::vector<PairObservation>& observations, const std::string& timestamp) {
  const auto groups = groups_from_observations(observations);
  std::string s = svg_open("Mean boundary similarity per group (95% CI)", timestamp);
  s += axes("group", "boundary similarity", 1.0, 4);
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  const double slot = plot_w / static_cast<double>(std::max<std::size_t>(1, groups.size()));
  const double y0 = kHeight - kBottom;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto m = micro_average(groups[i].values);
    const double x = kLeft + slot * static_cast<double>(i);
    const double h = plot_h * m.mean;
    s += "<rect x=\"" + fmt(x + slot * 0.2) + "\" y=\"" + fmt(y0 - h) + "\" width=\"" + fmt(slot * 0.6) +
         "\" height=\"" + fmt(h) + "\" fill=\"#4a78a8\"><title>" + xml_escape(groups[i].name) + ": " +
         format_double(m.mean) + " (n=" + std::to_string(m.n) + ")</title></rect>\n";
    const double lo = std::max(0.0, m.mean - m.ci95_half_width), hi = std::min(1.0, m.mean + m.ci95_half_width);
    const double cx = x + slot / 2;
    s += "<line x1=\"" + fmt(cx) + "\" y1=\"" + fmt(y0 - plot_h * lo) + "\" x2=\"" + fmt(cx) + "\" y2=\"" +
         fmt(y0 - plot_h * hi) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt(cx) + "\" y=\"" + fmt(y0 + 14) + "\" text-anchor=\"middle\">" +
         xml_escape(groups[i].name) + "</text>\n";
    s += "<text x=\"" + fmt(cx) + "\" y=\"" + fmt(y0 + 28) + "\" text-anchor=\"middle\">n=" + std::to_string(m.n) +
         "</text>\n";
  }
  return s + "</svg>\n";
}

}  // namespace ohseg
