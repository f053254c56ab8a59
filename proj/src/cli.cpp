#include "ohseg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <csignal>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "ohseg/corpus.hpp"
#include "ohseg/hash.hpp"
#include "ohseg/metrics.hpp"
#include "ohseg/preprocess.hpp"
#include "ohseg/report.hpp"
#include "ohseg/segcore.hpp"
#include "ohseg/service.hpp"
#include "ohseg/stats.hpp"

namespace fs = std::filesystem;

namespace ohseg {

namespace {

struct Globals {
  std::string corpus = ".";
  std::string out = "ohseg-out";
  std::size_t nt = 9;
  std::size_t jobs = 0;  // 0 = hardware concurrency
  std::optional<std::uint64_t> seed;
};

struct SegmentOptions {
  std::string algo;
  std::optional<std::size_t> length;
  std::string median_policy = "corpus";
  std::vector<std::string> median_annotators;
  std::size_t w = 20;
  std::optional<std::size_t> k;
  std::size_t smooth_rounds = 1;
  std::size_t smooth_width = 2;
  std::string threshold = "liberal";
  std::string k_from_reference;
  double alpha = 0.2;
  bool estimate_alpha = false;
  std::string stopwords;
};

struct EvaluateOptions {
  std::vector<std::string> hyp_dirs;
  std::vector<std::string> as_hypothesis;
  std::vector<std::string> references;
  double alpha = 0.05;
};

struct AgreementOptions {
  std::vector<std::string> annotators;
  std::vector<std::string> exclude{"original"};
  std::string expected = "pooled";
};

struct StatsOptions {
  std::string groups;
  double alpha = 0.05;
  std::string mode = "asymptotic";
  std::size_t permutations = 10000;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string instructions;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::size_t worker_count(std::size_t jobs, std::size_t tasks) {
  std::size_t n = jobs ? jobs : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, tasks));
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  const std::size_t workers = worker_count(jobs, n);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

void print_findings(std::ostream& err, const std::vector<Finding>& findings) {
  for (const auto& f : findings) err << f.where << ": " << f.rule << ": " << f.message << "\n";
}

Json string_list(const std::vector<std::string>& v) {
  Json j = Json::array();
  for (const auto& s : v) j.push_back(s);
  return j;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

StopwordList load_stopwords(const std::string& path) {
  return StopwordList::load(path.empty() ? default_stopword_path() : fs::path(path));
}

// ---------------------------------------------------------------------------

int cmd_validate(const Globals& g, std::ostream& out, std::ostream& err) {
  auto [corpus, findings] = scan_corpus(g.corpus);
  if (!findings.empty()) {
    print_findings(err, findings);
    err << findings.size() << " problem(s) found\n";
    return kExitDataError;
  }
  const auto st = length_statistics(corpus);
  out << corpus.transcripts.size() << " transcripts, " << st.segmentation_count << " segmentations, "
      << st.boundary_count << " boundaries, " << st.segment_count << " segments\n";
  out << "segment length: mean " << fixed(st.mean, 2) << ", sd " << fixed(st.stddev, 2) << ", median "
      << st.median << ", range " << st.min << "-" << st.max << "\n";
  out << "ok\n";
  return kExitOk;
}

int cmd_segment(const Globals& g, const SegmentOptions& o, const std::vector<std::string>& argv, std::ostream& out,
                std::ostream& err) {
  const Corpus corpus = load_corpus(g.corpus);
  RunManifest manifest;
  manifest.command = "segment";
  manifest.timestamp = manifest_timestamp();
  manifest.input_hashes["transcripts"] = hash_directory(fs::path(g.corpus) / "transcripts");
  manifest.input_hashes["segmentations"] = hash_directory(fs::path(g.corpus) / "segmentations");

  SegmenterParams base;
  Json extra = Json::object();
  std::optional<StopwordList> stopwords;
  if (o.algo == "texttiling") {
    TextTilingParams p;
    p.w = o.w;
    p.k = o.k.value_or(10);
    p.smoothing_rounds = o.smooth_rounds;
    p.smoothing_width = o.smooth_width;
    if (o.threshold != "liberal") {
      double v = 0;
      const auto r = std::from_chars(o.threshold.data(), o.threshold.data() + o.threshold.size(), v);
      if (r.ec != std::errc{} || r.ptr != o.threshold.data() + o.threshold.size()) {
        throw UsageError("--threshold must be 'liberal' or a number");
      }
      p.threshold = ThresholdPolicy::kCustom;
      p.custom_cutoff = v;
    }
    p.validate();
    base = p;
  } else if (o.algo == "bayesseg") {
    BayesSegParams p;
    p.alpha = o.alpha;
    p.estimate_alpha = o.estimate_alpha;
    if (o.k && !o.k_from_reference.empty()) throw UsageError("use either --k or --k-from-reference");
    if (!o.k && o.k_from_reference.empty()) throw UsageError("bayesseg needs --k or --k-from-reference");
    p.k = o.k.value_or(1);
    p.validate();
    extra["k_source"] = o.k ? Json("fixed") : Json("reference:" + o.k_from_reference);
    base = p;
  } else {
    UniformParams p;
    if (o.length) {
      p.length = *o.length;
      extra["length_source"] = "fixed";
    } else {
      if (o.median_policy != "corpus" && o.median_policy != "per-transcript") {
        throw UsageError("--median-policy must be 'corpus' or 'per-transcript'");
      }
      extra["length_source"] = "median";
      extra["median_policy"] = o.median_policy;
      extra["median_annotators"] = o.median_annotators.empty() ? Json("all") : string_list(o.median_annotators);
      if (o.median_policy == "corpus") {
        p.length = median_segment_length(corpus, MedianPolicy::kCorpusGlobal, {}, o.median_annotators);
      }
    }
    base = p;
  }
  if (o.algo != "uniform") {
    stopwords = load_stopwords(o.stopwords);
    manifest.stopword_hash = stopwords->content_hash();
  }

  const std::string annotator = algorithm_annotator(base);
  manifest.params = params_to_json(base);
  manifest.params["settings"] = extra;
  manifest.params["n_t"] = g.nt;
  manifest.params["jobs"] = g.jobs;
  Json args = Json::array();
  for (const auto& a : argv) args.push_back(a);
  manifest.params["argv"] = args;

  const fs::path seg_dir = fs::path(g.out) / "segmentations";
  const std::size_t n = corpus.transcripts.size();
  std::vector<std::string> errors(n);
  std::vector<Json> details(n);
  parallel_for(n, g.jobs, [&](std::size_t i) {
    const Transcript& t = corpus.transcripts[i];
    try {
      SegmenterParams params = base;
      if (auto* b = std::get_if<BayesSegParams>(&params); b && !o.k_from_reference.empty()) {
        b->k = reference_segment_count(corpus, t.id, o.k_from_reference);
      }
      if (auto* u = std::get_if<UniformParams>(&params); u && !o.length && o.median_policy == "per-transcript") {
        u->length = median_segment_length(corpus, MedianPolicy::kPerTranscript, t.id, o.median_annotators);
      }
      const auto result = run_segmenter({&t, params}, stopwords ? *stopwords : StopwordList{});
      Segmentation s;
      s.transcript_id = t.id;
      s.annotator = annotator;
      s.boundaries = result.boundaries;
      const auto findings = validate_segmentation(s, t);
      if (!findings.empty()) throw SegmenterError("produced invalid output: " + findings[0].message);
      save_segmentation(s, seg_dir);
      details[i] = result.details;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  Json per_transcript = Json::object();
  Json failures = Json::object();
  std::size_t written = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = corpus.transcripts[i].id;
    if (errors[i].empty()) {
      per_transcript[id] = details[i];
      ++written;
    } else {
      failures[id] = errors[i];
    }
  }
  Json doc = Json::object();
  doc["manifest"] = manifest.to_json();
  doc["annotator"] = annotator;
  doc["transcripts"] = per_transcript;
  doc["failures"] = failures;
  write_file_atomic(fs::path(g.out) / "manifests" / ("segment-" + annotator + ".json"), dump_document(doc));

  out << "wrote " << written << " segmentation(s) as " << annotator << " to " << (seg_dir / annotator).string()
      << "\n";
  if (!failures.empty()) {
    err << failures.size() << " transcript(s) failed:\n";
    for (const auto& [id, msg] : failures.items()) err << "  " << id << ": " << msg.get<std::string>() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

fs::path hypothesis_root(const fs::path& dir) {
  const fs::path nested = dir / "segmentations";
  return fs::is_directory(nested) ? nested : dir;
}

int cmd_evaluate(const Globals& g, const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  if (o.hyp_dirs.empty() && o.as_hypothesis.empty()) throw UsageError("give --hyp and/or --as-hypothesis");
  const Corpus corpus = load_corpus(g.corpus);
  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.timestamp = manifest_timestamp();
  manifest.input_hashes["transcripts"] = hash_directory(fs::path(g.corpus) / "transcripts");
  manifest.input_hashes["segmentations"] = hash_directory(fs::path(g.corpus) / "segmentations");

  std::vector<Segmentation> hypotheses;
  std::vector<Finding> findings;
  for (std::size_t i = 0; i < o.hyp_dirs.size(); ++i) {
    const fs::path root = hypothesis_root(o.hyp_dirs[i]);
    manifest.input_hashes["hypotheses[" + std::to_string(i) + "]"] = hash_directory(root);
    for (auto& s : load_segmentations(root)) {
      const Transcript* t = corpus.find_transcript(s.transcript_id);
      if (!t) {
        findings.push_back({o.hyp_dirs[i], "unknown_transcript", "no transcript " + s.transcript_id});
        continue;
      }
      auto f = validate_segmentation(s, *t);
      findings.insert(findings.end(), f.begin(), f.end());
      hypotheses.push_back(std::move(s));
    }
  }
  if (!findings.empty()) {
    print_findings(err, findings);
    return kExitDataError;
  }
  for (const auto& a : o.as_hypothesis) {
    std::size_t found = 0;
    for (const auto& s : corpus.segmentations) {
      if (s.annotator == a) {
        hypotheses.push_back(s);
        ++found;
      }
    }
    if (!found) throw MetricError("no segmentations by '" + a + "' in the corpus");
  }

  std::vector<std::string> reference_names = o.references;
  if (reference_names.empty()) {
    for (const auto& a : corpus.annotators()) {
      if (std::find(o.as_hypothesis.begin(), o.as_hypothesis.end(), a) == o.as_hypothesis.end()) {
        reference_names.push_back(a);
      }
    }
  }
  std::vector<Segmentation> references;
  for (const auto& s : corpus.segmentations) {
    if (std::find(reference_names.begin(), reference_names.end(), s.annotator) != reference_names.end()) {
      references.push_back(s);
    }
  }
  if (references.empty()) throw MetricError("no reference segmentations selected");

  const EvalReport report = evaluate_segmenters(hypotheses, references, g.nt);

  manifest.params = Json::object();
  manifest.params["n_t"] = g.nt;
  manifest.params["near_miss_scaling"] = kNearMissScaling;
  manifest.params["alpha"] = o.alpha;
  manifest.params["hypothesis_dirs"] = o.hyp_dirs.size();
  manifest.params["as_hypothesis"] = string_list(o.as_hypothesis);
  manifest.params["references"] = string_list(reference_names);

  const fs::path dir = g.out;
  const std::string csv = observations_csv(report.observations);
  write_file_atomic(dir / "observations.csv", csv);

  // Figures and group tests are computed from the CSV just written.
  const auto observations = parse_observations_csv(csv);
  const auto groups = groups_from_observations(observations);
  const GroupTests tests = run_group_tests(groups, o.alpha);
  write_file_atomic(dir / "summary.json", dump_document(evaluation_summary(report, tests, manifest)));
  write_file_atomic(dir / "group-scores.svg", group_scores_svg(observations, manifest.timestamp));

  Corpus reference_corpus;
  reference_corpus.transcripts = corpus.transcripts;
  reference_corpus.segmentations = references;
  const std::string lengths = segment_lengths_csv(segment_length_rows(reference_corpus));
  write_file_atomic(dir / "segment-lengths.csv", lengths);
  write_file_atomic(dir / "segment-lengths.svg",
                    segment_length_svg(parse_segment_lengths_csv(lengths), manifest.timestamp));

  out << "boundary similarity (1 = perfect), n_t = " << g.nt << ", near misses " << kNearMissScaling << "\n";
  for (const auto& [name, grp] : report.groups) {
    out << "  " << name << ": " << fixed(grp.pooled.mean) << " +/- " << fixed(grp.pooled.ci95_half_width)
        << " (n=" << grp.pooled.n << ")  matches " << grp.errors.matches << ", near misses "
        << grp.errors.near_misses << ", FP " << grp.errors.false_positives << ", FN "
        << grp.errors.false_negatives << "\n";
  }
  if (tests.kruskal_wallis) {
    out << "Kruskal-Wallis H = " << fixed(tests.kruskal_wallis->h) << ", df = " << tests.kruskal_wallis->df
        << ", p = " << format_double(tests.kruskal_wallis->p_value) << "\n";
  }
  if (tests.dscf) {
    for (const auto& p : tests.dscf->pairs) {
      out << "  DSCF " << p.first << " vs " << p.second << ": W* = " << fixed(p.w_star) << " (q = "
          << fixed(*p.critical_value, 3) << ")" << (p.significant ? " significant" : "") << "\n";
    }
  }
  for (const auto& note : tests.notes) out << "  note: " << note << "\n";
  out << "wrote " << (dir / "observations.csv").string() << ", summary.json, segment-lengths.csv/.svg, "
      << "group-scores.svg\n";
  return kExitOk;
}

int cmd_agreement(const Globals& g, const AgreementOptions& o, std::ostream& out) {
  const Corpus corpus = load_corpus(g.corpus);
  std::vector<std::string> annotators = o.annotators;
  if (annotators.empty()) {
    for (const auto& a : corpus.annotators()) {
      if (std::find(o.exclude.begin(), o.exclude.end(), a) == o.exclude.end()) annotators.push_back(a);
    }
  }
  if (o.expected != "pooled" && o.expected != "per-annotator") {
    throw UsageError("--expected must be 'pooled' or 'per-annotator'");
  }
  const auto mode = o.expected == "pooled" ? ExpectedAgreement::kPooled : ExpectedAgreement::kPerAnnotator;
  const AgreementReport r = fleiss_pi_star(corpus, g.nt, annotators, mode);

  out << "annotators: " << r.annotator_count << ", transcripts: " << r.transcript_count << ", n_t = " << r.n_t
      << "\n";
  out << "pairwise boundary similarity: " << fixed(r.actual.mean) << " +/- " << fixed(r.actual.ci95_half_width)
      << " (95% CI, n=" << r.actual.n << ")\n";
  out << "A_a = " << fixed(r.actual_agreement) << ", A_e = " << format_double(r.expected_agreement) << " ("
      << o.expected << "), pi* = " << fixed(r.pi_star) << "\n";

  RunManifest manifest;
  manifest.command = "agreement";
  manifest.timestamp = manifest_timestamp();
  manifest.input_hashes["transcripts"] = hash_directory(fs::path(g.corpus) / "transcripts");
  manifest.input_hashes["segmentations"] = hash_directory(fs::path(g.corpus) / "segmentations");
  manifest.params = Json{{"n_t", g.nt}, {"annotators", string_list(annotators)}, {"expected", o.expected}};
  Json doc = to_json(r);
  doc["manifest"] = manifest.to_json();
  write_file_atomic(fs::path(g.out) / "agreement.json", dump_document(doc));
  return kExitOk;
}

int cmd_stats_compare(const Globals& g, const StatsOptions& o, std::ostream& out) {
  if (o.mode != "asymptotic" && o.mode != "permutation") {
    throw UsageError("--mode must be 'asymptotic' or 'permutation'");
  }
  const std::string text = read_file(o.groups);
  const auto groups = groups_from_observations(parse_observations_csv(text));
  const auto kw = stats::kruskal_wallis(groups);
  const auto mode = o.mode == "asymptotic" ? stats::DscfMode::kAsymptotic : stats::DscfMode::kPermutation;
  const std::uint64_t seed = g.seed.value_or(0);
  const auto dscf = stats::dscf_pairwise(groups, o.alpha, mode, o.permutations, seed);

  out << "groups:";
  for (const auto& grp : groups) out << " " << grp.name << " (n=" << grp.values.size() << ")";
  out << "\nKruskal-Wallis H = " << fixed(kw.h) << " (uncorrected " << fixed(kw.h_uncorrected) << "), df = "
      << kw.df << ", p = " << format_double(kw.p_value) << (kw.p_value < o.alpha ? " significant" : "") << "\n";
  for (const auto& p : dscf.pairs) {
    out << "DSCF " << p.first << " vs " << p.second << ": W* = " << fixed(p.w_star);
    if (p.critical_value) out << ", q = " << fixed(*p.critical_value, 3);
    if (p.p_value) out << ", p = " << format_double(*p.p_value);
    out << (p.significant ? " significant" : " not significant") << "\n";
  }

  RunManifest manifest;
  manifest.command = "stats compare";
  manifest.timestamp = manifest_timestamp();
  manifest.input_hashes["groups"] = sha256_hex(text);
  manifest.params = Json{{"alpha", o.alpha}, {"mode", o.mode}, {"permutations", o.permutations}};
  if (mode == stats::DscfMode::kPermutation) manifest.seed = seed;
  Json doc = Json::object();
  doc["manifest"] = manifest.to_json();
  doc["kruskal_wallis"] = to_json(kw);
  doc["dscf"] = to_json(dscf);
  write_file_atomic(fs::path(g.out) / "stats.json", dump_document(doc));
  return kExitOk;
}

AnnotationService* g_service = nullptr;

extern "C" void stop_service(int) {
  if (g_service) g_service->stop();
}

int cmd_serve(const Globals& g, const ServeOptions& o, std::ostream& out) {
  const fs::path instructions = o.instructions.empty() ? default_data_dir() / "instructions.html"
                                                       : fs::path(o.instructions);
  AnnotationService service(g.corpus, instructions);
  RunManifest manifest;
  manifest.command = "serve";
  manifest.timestamp = manifest_timestamp();
  manifest.input_hashes["transcripts"] = hash_directory(fs::path(g.corpus) / "transcripts");
  manifest.input_hashes["instructions"] = sha256_hex(read_file(instructions));
  manifest.params = Json{{"host", o.host}, {"port", o.port}};
  out << manifest.to_json().dump() << "\n";
  g_service = &service;
  std::signal(SIGINT, stop_service);
  std::signal(SIGTERM, stop_service);
  service.listen(o.host, o.port, [&](int port) {
    out << "serving " << service.corpus().transcripts.size() << " transcript(s) on http://" << o.host << ":" << port
        << "/ (no authentication)\n"
        << std::flush;
  });
  g_service = nullptr;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Topic segmentation toolkit for oral history transcripts", "ohseg"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--corpus", g.corpus, "Corpus directory (transcripts/, segmentations/)");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--nt", g.nt, "Transposition spanning distance n_t")->check(CLI::PositiveNumber);
  app.add_option("--jobs", g.jobs, "Worker threads (0 = all cores)");
  app.add_option("--seed", g.seed, "Random seed");
  app.set_version_flag("--version", std::string(tool_version()));

  auto* validate = app.add_subcommand("validate", "Check a corpus against the schema and invariants");

  SegmentOptions so;
  auto* segment = app.add_subcommand("segment", "Segment every transcript with one algorithm");
  segment->add_option("--algo", so.algo, "Algorithm")
      ->required()
      ->check(CLI::IsMember({"texttiling", "bayesseg", "uniform"}));
  segment->add_option("--length", so.length, "Uniform: fixed segment length")->check(CLI::PositiveNumber);
  segment->add_option("--median-policy", so.median_policy, "Uniform: corpus | per-transcript median length");
  segment->add_option("--median-annotators", so.median_annotators, "Uniform: annotators for the median")
      ->delimiter(',');
  segment->add_option("--w", so.w, "TextTiling: token-sequence size");
  segment->add_option("--k", so.k, "TextTiling: block size; BayesSeg: number of segments");
  segment->add_option("--smooth-rounds", so.smooth_rounds, "TextTiling: smoothing rounds");
  segment->add_option("--smooth-width", so.smooth_width, "TextTiling: smoothing width");
  segment->add_option("--threshold", so.threshold, "TextTiling: liberal or a numeric depth cutoff");
  segment->add_option("--k-from-reference", so.k_from_reference, "BayesSeg: take K from this annotator");
  segment->add_option("--alpha", so.alpha, "BayesSeg: Dirichlet prior");
  segment->add_flag("--estimate-alpha", so.estimate_alpha, "BayesSeg: estimate alpha per transcript");
  segment->add_option("--stopwords", so.stopwords, "Stopword list (default: bundled)");

  EvaluateOptions eo;
  auto* evaluate = app.add_subcommand("evaluate", "Score hypotheses against reference segmentations");
  evaluate->add_option("--hyp", eo.hyp_dirs, "Hypothesis segmentation directory (repeatable)");
  evaluate->add_option("--as-hypothesis", eo.as_hypothesis, "Treat this corpus annotator as a hypothesis")
      ->delimiter(',');
  evaluate->add_option("--references", eo.references, "Reference annotators (default: the rest)")
      ->delimiter(',');
  evaluate->add_option("--alpha", eo.alpha, "Significance level for group tests");

  AgreementOptions ao;
  auto* agreement = app.add_subcommand("agreement", "Inter-annotator agreement");
  agreement->add_option("--annotators", ao.annotators, "Annotators to include (default: all but --exclude)")
      ->delimiter(',');
  agreement->add_option("--exclude", ao.exclude, "Annotators to leave out")->delimiter(',')->capture_default_str();
  agreement->add_option("--expected", ao.expected, "Expected agreement: pooled | per-annotator");

  StatsOptions sto;
  auto* stats_cmd = app.add_subcommand("stats", "Statistical tests");
  stats_cmd->require_subcommand(1);
  auto* compare = stats_cmd->add_subcommand("compare", "Kruskal-Wallis and DSCF over a report CSV");
  compare->add_option("--groups", sto.groups, "Observation CSV from evaluate")->required();
  compare->add_option("--alpha", sto.alpha, "Significance level");
  compare->add_option("--mode", sto.mode, "asymptotic | permutation");
  compare->add_option("--permutations", sto.permutations, "Relabelings in permutation mode");

  ServeOptions sv;
  auto* serve = app.add_subcommand("serve", "Run the annotation HTTP service");
  serve->add_option("--port", sv.port, "Port (0 = any free port)");
  serve->add_option("--host", sv.host, "Bind address");
  serve->add_option("--instructions", sv.instructions, "Instructions HTML (default: bundled)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << "run 'ohseg " << sub->get_name() << " --help' for usage\n";
    } else {
      err << "run 'ohseg --help' for usage\n";
    }
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(g, out, err);
    if (segment->parsed()) return cmd_segment(g, so, args, out, err);
    if (evaluate->parsed()) return cmd_evaluate(g, eo, out, err);
    if (agreement->parsed()) return cmd_agreement(g, ao, out);
    if (compare->parsed()) return cmd_stats_compare(g, sto, out);
    if (serve->parsed()) return cmd_serve(g, sv, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParamError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CorpusError& e) {
    print_findings(err, e.findings());
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace ohseg
