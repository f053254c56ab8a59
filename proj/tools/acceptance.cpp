// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//
// Exit status is 0 when the set of failing criteria equals the set given with
// --expect-fail, so a known, documented failure does not break ctest while an
// unexpected failure, or an expected one that starts passing, does.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "ohseg/bayesseg.hpp"
#include "ohseg/corpus.hpp"
#include "ohseg/metrics.hpp"
#include "ohseg/report.hpp"
#include "ohseg/segcore.hpp"
#include "ohseg/stats.hpp"
#include "ohseg/texttiling.hpp"
#include "oracles.hpp"

using namespace ohseg;
namespace fs = std::filesystem;

namespace {

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::kFail, std::move(d)}; }

std::string join(const std::vector<std::size_t>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

BoundarySet random_set(std::mt19937_64& rng, std::size_t n, double rate) {
  std::bernoulli_distribution keep(rate);
  BoundarySet out;
  for (std::size_t g = 1; g < n; ++g) {
    if (keep(rng)) out.push_back(g);
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome metric_oracle() {
  std::vector<BoundarySet> sets;
  for (std::uint32_t mask = 0; mask < (1u << 12); ++mask) {
    if (__builtin_popcount(mask) > 3) continue;
    BoundarySet s;
    for (std::size_t i = 0; i < 12; ++i) {
      if (mask & (1u << i)) s.push_back(i + 1);
    }
    sets.push_back(s);
  }
  std::size_t cases = 0;
  for (std::size_t n_t : {1, 2, 3, 5, 9, 13}) {
    for (const auto& a : sets) {
      for (const auto& b : sets) {
        const auto got = compare_boundaries(a, b, n_t);
        const auto want = oracle::brute_force_pairing(a, b, n_t);
        if (got.matches.size() != want.matches || got.near_misses.size() != want.near_misses ||
            got.misses_a_only.size() != want.misses_a || got.misses_b_only.size() != want.misses_b ||
            got.total_transposition_distance() != want.distance) {
          return fail("mismatch for " + join(a) + " vs " + join(b) + " at n_t=" + std::to_string(n_t));
        }
        ++cases;
      }
    }
  }
  return pass(std::to_string(cases) + " pairs over 12 positions, n_t in {1,2,3,5,9,13}");
}

Outcome metric_endpoints() {
  std::mt19937_64 rng(20240611);
  std::size_t identity_bad = 0, zero_bad = 0, monotone_bad = 0;
  std::string first_counterexample;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 80;
    const auto a = random_set(rng, n, 0.05 + 0.1 * static_cast<double>(rng() % 3));
    const auto b = trial % 5 == 0 ? a : random_set(rng, n, 0.1);
    const std::size_t n_t = 1 + rng() % 10;
    const double s = boundary_similarity(compare_boundaries(a, b, n_t));
    if (!a.empty() || !b.empty()) {
      if ((s == 1.0) != (a == b)) ++identity_bad;
      bool any_close = false;
      for (auto x : a) {
        for (auto y : b) any_close = any_close || (x > y ? x - y : y - x) < n_t;
      }
      if ((s == 0.0) != !any_close) ++zero_bad;
    }
    const double wider = boundary_similarity(compare_boundaries(a, b, n_t + 1));
    if (wider < s - 1e-12) {
      if (monotone_bad++ == 0) {
        std::ostringstream os;
        os << join(a) << " vs " << join(b) << ": " << s << " at n_t=" << n_t << ", " << wider << " at n_t=" << n_t + 1;
        first_counterexample = os.str();
      }
    }
  }
  std::ostringstream d;
  d << "identity violations " << identity_bad << ", zero violations " << zero_bad
    << ", monotonicity violations " << monotone_bad << "/1000";
  if (monotone_bad) d << " (first: " << first_counterexample << ")";
  return identity_bad || zero_bad || monotone_bad ? fail(d.str()) : pass(d.str());
}

Outcome bayesseg_dp() {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 11;
    const std::size_t vocab = 1 + rng() % 8;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(4, n);
    const double alpha = std::vector<double>{0.05, 0.2, 1.0, 3.0}[rng() % 4];
    std::vector<std::vector<std::uint32_t>> sentences;
    std::vector<std::vector<bayesseg::WordId>> ids;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::uint32_t> words;
      const std::size_t len = 1 + rng() % 4;
      for (std::size_t j = 0; j < len; ++j) words.push_back(static_cast<std::uint32_t>(rng() % vocab));
      sentences.push_back(words);
      ids.emplace_back(words.begin(), words.end());
    }
    const auto dp = bayesseg::map_segmentation(bayesseg::SentenceBags::from_ids(ids, vocab), k, alpha);
    const auto brute = oracle::enumerate_segmentations(sentences, vocab, k, alpha);
    if (std::abs(dp.log_likelihood - brute.objective) > 1e-9 || dp.boundaries != brute.boundaries) {
      return fail("trial " + std::to_string(trial) + ": dp " + join(dp.boundaries) + " vs enumeration " +
                  join(brute.boundaries));
    }
  }
  return pass("100 random transcripts match exhaustive enumeration");
}

Outcome dcm_closed_forms() {
  using bayesseg::dcm_log_likelihood;
  if (dcm_log_likelihood({0, 0, 0}, 0.2, 3) != 0.0) return fail("N=0 is not exactly 0");
  for (std::size_t v : {1, 2, 5, 50}) {
    std::vector<std::uint32_t> counts(v, 0);
    counts[0] = 1;
    const double err = std::abs(dcm_log_likelihood(counts, 0.2, v) + std::log(static_cast<double>(v)));
    if (err > 1e-12) return fail("single token, V=" + std::to_string(v));
  }
  const double two = dcm_log_likelihood({2, 0}, 1.0, 2);
  if (std::abs(two - std::log(1.0 / 3.0)) > 1e-12) return fail("two-token case gave " + std::to_string(two));
  return pass("N=0, single token and two-token cases");
}

AlignedTokens stream_of(const std::vector<std::string>& tokens, std::size_t per_sentence) {
  std::vector<TokenizedSentence> sentences;
  for (std::size_t i = 0; i < tokens.size(); i += per_sentence) {
    TokenizedSentence s;
    s.sentence_index = sentences.size();
    s.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                    tokens.begin() + static_cast<std::ptrdiff_t>(std::min(tokens.size(), i + per_sentence)));
    sentences.push_back(std::move(s));
  }
  return align_tokens(sentences);
}

Outcome texttiling_planted() {
  std::vector<std::string> doc;
  for (int i = 0; i < 600; ++i) doc.push_back("alpha" + std::to_string(i % 20));
  for (int i = 0; i < 600; ++i) doc.push_back("beta" + std::to_string(i % 20));
  const auto stream = stream_of(doc, 10);
  const TextTilingParams params;
  const auto r = texttiling::segment(stream, params);
  if (r.boundaries.size() != 1) return fail(std::to_string(r.boundaries.size()) + " boundaries on planted document");
  const std::size_t token = stream.first_token[r.boundaries[0]];
  const std::size_t off = token > 600 ? token - 600 : 600 - token;
  if (off > params.w) return fail("boundary at token " + std::to_string(token));

  const auto flat = texttiling::segment(stream_of(std::vector<std::string>(1200, "same"), 10), params);
  if (!flat.boundaries.empty()) return fail("constant document produced boundaries");
  return pass("one boundary at token " + std::to_string(token) + " (midpoint 600); constant document: none");
}

stats::GroupedScores shifted_groups(std::uint64_t seed, std::size_t per_group, const std::vector<double>& shifts) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  stats::GroupedScores groups;
  for (std::size_t g = 0; g < shifts.size(); ++g) {
    stats::Group grp{"g" + std::to_string(g), {}};
    for (std::size_t i = 0; i < per_group; ++i) grp.values.push_back(normal(rng) + shifts[g]);
    groups.push_back(grp);
  }
  return groups;
}

Outcome kruskal_wallis() {
  const auto kw = stats::kruskal_wallis({{"a", {1, 2, 3}}, {"b", {4, 5, 6}}, {"c", {7, 8, 9}}});
  if (std::abs(kw.h - 7.2) > 1e-9 || kw.df != 2) return fail("H=" + std::to_string(kw.h));
  const auto same = stats::kruskal_wallis({{"a", {1, 2, 3}}, {"b", {1, 2, 3}}});
  if (same.h != 0.0) return fail("identical groups gave H=" + std::to_string(same.h));

  const auto groups = shifted_groups(42, 200, {0.0, 0.2, 0.2});
  const auto asym = stats::dscf_pairwise(groups, 0.05, stats::DscfMode::kAsymptotic);
  const auto perm = stats::dscf_pairwise(groups, 0.05, stats::DscfMode::kPermutation, 10000, 42);
  std::size_t significant = 0;
  for (std::size_t i = 0; i < asym.pairs.size(); ++i) {
    if (asym.pairs[i].significant != perm.pairs[i].significant) {
      return fail("DSCF decision differs for " + asym.pairs[i].first + " vs " + asym.pairs[i].second);
    }
    significant += asym.pairs[i].significant;
  }
  return pass("H=7.2, df=2; identical H=0; DSCF decisions agree on " + std::to_string(asym.pairs.size()) +
              " pairs (" + std::to_string(significant) + " significant)");
}

Outcome corpus_accounting() {
  std::mt19937_64 rng(886);
  const fs::path root = fs::temp_directory_path() / ("ohseg-acceptance-" + std::to_string(rng()));
  std::size_t checked = 0;
  auto check = [&](const Corpus& c) -> std::optional<std::string> {
    const auto st = length_statistics(c);
    std::size_t segments = 0, boundaries = 0;
    for (const auto& s : c.segmentations) {
      segments += segment_masses(s, *c.find_transcript(s.transcript_id)).size();
      boundaries += s.boundaries.size();
    }
    if (st.segment_count != segments || st.boundary_count != boundaries ||
        st.segmentation_count != c.segmentations.size() || segments != boundaries + c.segmentations.size()) {
      return "identity broken: " + std::to_string(st.segment_count) + " segments, " +
             std::to_string(st.boundary_count) + " boundaries, " + std::to_string(st.segmentation_count) +
             " segmentations";
    }
    ++checked;
    return std::nullopt;
  };

  for (int trial = 0; trial < 20; ++trial) {
    Corpus c;
    const std::size_t transcripts = 1 + rng() % 4;
    for (std::size_t t = 0; t < transcripts; ++t) {
      Transcript tr;
      tr.id = "t" + std::to_string(t);
      const std::size_t n = 1 + rng() % 60;
      Turn turn;
      turn.speaker = "Narrator";
      for (std::size_t i = 0; i < n; ++i) turn.sentences.push_back("Sentence " + std::to_string(i) + ".");
      tr.turns.push_back(turn);
      c.transcripts.push_back(tr);
      for (std::size_t a = 0; a < 1 + rng() % 4; ++a) {
        Segmentation s;
        s.transcript_id = tr.id;
        s.annotator = "a" + std::to_string(a);
        s.boundaries = random_set(rng, n, 0.1);
        c.segmentations.push_back(s);
      }
    }
    const fs::path dir = root / std::to_string(trial);
    save_corpus(c, dir);
    if (auto err = check(load_corpus(dir))) {
      fs::remove_all(root);
      return fail(*err);
    }
  }
  fs::remove_all(root);

  // 57 segmentations holding 829 boundaries in total give 886 segments.
  Corpus c;
  Transcript tr;
  tr.id = "long";
  Turn turn;
  turn.speaker = "Narrator";
  for (int i = 0; i < 40; ++i) turn.sentences.push_back("Sentence " + std::to_string(i) + ".");
  tr.turns.push_back(turn);
  c.transcripts.push_back(tr);
  std::size_t remaining = 829;
  for (int i = 0; i < 57; ++i) {
    Segmentation s;
    s.transcript_id = "long";
    s.annotator = "a" + std::to_string(i);
    const std::size_t take = std::min<std::size_t>(remaining, i < 56 ? 15 : remaining);
    for (std::size_t b = 1; b <= take; ++b) s.boundaries.push_back(b * 2);
    remaining -= take;
    c.segmentations.push_back(s);
  }
  if (auto err = check(c)) return fail(*err);
  if (length_statistics(c).segment_count != 886) return fail("829 boundaries in 57 segmentations != 886 segments");

  const fs::path sample = default_data_dir() / "sample-corpus";
  if (fs::is_directory(sample)) {
    if (auto err = check(load_corpus(sample))) return fail("sample corpus: " + *err);
  }
  return pass(std::to_string(checked) + " corpora; 829 + 57 = 886");
}

// Needs the published corpus laid out as transcripts/ and segmentations/,
// with the transcript authors' boundaries under the annotator "original".
Outcome data_dependent() {
  const char* env = std::getenv("OHSEG_PUBLISHED_CORPUS");
  if (!env || !*env) return {Status::kSkip, "set OHSEG_PUBLISHED_CORPUS to the published corpus directory"};
  const Corpus corpus = load_corpus(env);
  std::vector<std::string> humans;
  for (const auto& a : corpus.annotators()) {
    if (a != "original") humans.push_back(a);
  }
  const auto agreement = fleiss_pi_star(corpus, 9, humans);
  std::vector<std::string> problems;
  if (std::abs(agreement.actual.mean - 0.27) > 0.02) problems.push_back("pairwise human similarity off");
  if (std::abs(agreement.pi_star - agreement.actual_agreement) > 0.02) problems.push_back("pi* far from A_a");

  const auto stopwords = StopwordList::load(default_stopword_path());
  UniformParams uniform;
  uniform.length = median_segment_length(corpus, MedianPolicy::kCorpusGlobal, {}, humans);
  std::vector<Segmentation> hypotheses;
  std::vector<Segmentation> references;
  for (const auto& s : corpus.segmentations) {
    (s.annotator == "original" ? hypotheses : references).push_back(s);
  }
  std::map<std::string, std::string> label;
  label["original"] = "original";
  for (const SegmenterParams& base : {SegmenterParams{uniform}, SegmenterParams{TextTilingParams{}},
                                      SegmenterParams{BayesSegParams{}}}) {
    label[algorithm_annotator(base)] = algorithm_name(base);
    for (const auto& t : corpus.transcripts) {
      SegmenterParams params = base;
      if (auto* b = std::get_if<BayesSegParams>(&params)) b->k = reference_segment_count(corpus, t.id, "original");
      Segmentation s;
      s.transcript_id = t.id;
      s.annotator = algorithm_annotator(base);
      try {
        s.boundaries = run_segmenter({&t, params}, stopwords).boundaries;
      } catch (const SegmenterError&) {
        continue;  // reported as missing in the evaluation
      }
      hypotheses.push_back(s);
    }
  }
  const auto report = evaluate_segmenters(hypotheses, references, 9);
  std::map<std::string, double> mean;
  for (const auto& [name, g] : report.groups) mean[label[name]] = g.pooled.mean;
  if (!(mean["original"] > mean["bayesseg"] && mean["bayesseg"] > mean["texttiling"] &&
        mean["bayesseg"] > mean["uniform"])) {
    problems.push_back("group ranking differs");
  }
  auto groups = groups_from_observations(report.observations);
  for (auto& g : groups) g.name = label[g.name];
  const auto kw = stats::kruskal_wallis(groups);
  if (kw.p_value >= 0.05) problems.push_back("Kruskal-Wallis not significant");
  const auto dscf = stats::dscf_pairwise(groups, 0.05, stats::DscfMode::kAsymptotic);
  for (const auto& p : dscf.pairs) {
    const std::set<std::string> names{p.first, p.second};
    if (names == std::set<std::string>{"texttiling", "uniform"} && p.significant) {
      problems.push_back("TextTiling vs uniform significant");
    }
  }
  std::ostringstream d;
  d << "human similarity " << agreement.actual.mean << ", pi* " << agreement.pi_star << ", A_a "
    << agreement.actual_agreement << "; original " << mean["original"] << ", bayesseg " << mean["bayesseg"]
    << ", texttiling " << mean["texttiling"] << ", uniform " << mean["uniform"] << "; H " << kw.h;
  for (const auto& p : problems) d << "; " << p;
  return problems.empty() ? pass(d.str()) : fail(d.str());
}

struct Criterion {
  std::string id;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ohseg acceptance suite"};
  std::vector<std::string> expected_fail, only;
  app.add_option("--expect-fail", expected_fail, "Criterion expected to fail (repeatable)");
  app.add_option("--only", only, "Run only these criteria (repeatable)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {"metric-oracle", metric_oracle},         {"metric-endpoints", metric_endpoints},
      {"bayesseg-dp", bayesseg_dp},             {"dcm-closed-forms", dcm_closed_forms},
      {"texttiling-planted", texttiling_planted}, {"kruskal-wallis", kruskal_wallis},
      {"corpus-accounting", corpus_accounting}, {"data-dependent", data_dependent},
  };
  std::set<std::string> known;
  for (const auto& c : criteria) known.insert(c.id);
  for (const auto& id : expected_fail) {
    if (!known.count(id)) {
      std::cerr << "unknown criterion: " << id << "\n";
      return 2;
    }
  }

  std::set<std::string> failed;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = o.status == Status::kPass ? "PASS" : o.status == Status::kFail ? "FAIL" : "SKIP";
    std::cout << tag << " " << c.id << ": " << o.detail;
    std::printf(" [%.2fs]\n", secs);
    std::cout.flush();
    if (o.status == Status::kFail) failed.insert(c.id);
  }

  std::set<std::string> expected;
  for (const auto& id : expected_fail) {
    if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) expected.insert(id);
  }
  if (failed != expected) {
    for (const auto& id : failed) {
      if (!expected.count(id)) std::cout << "unexpected failure: " << id << "\n";
    }
    for (const auto& id : expected) {
      if (!failed.count(id)) std::cout << "expected failure did not occur: " << id << "\n";
    }
    return 1;
  }
  if (!failed.empty()) std::cout << failed.size() << " known failure(s), as expected\n";
  return 0;
}
