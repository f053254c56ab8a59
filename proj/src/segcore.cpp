#include "ohseg/segcore.hpp"

#include "ohseg/bayesseg.hpp"
#include "ohseg/hash.hpp"
#include "ohseg/texttiling.hpp"

namespace ohseg {

void TextTilingParams::validate() const {
  if (w < 1) throw ParamError("texttiling: w must be >= 1");
  if (k < 1) throw ParamError("texttiling: k must be >= 1");
  if (smoothing_width < 1) throw ParamError("texttiling: smoothing width must be >= 1");
}

void BayesSegParams::validate() const {
  if (k < 1) throw ParamError("bayesseg: K must be >= 1");
  if (!(alpha > 0)) throw ParamError("bayesseg: alpha must be > 0");
}

void UniformParams::validate() const {
  if (length < 1) throw ParamError("uniform: segment length must be >= 1");
}

const char* algorithm_name(const SegmenterParams& params) {
  struct Visitor {
    const char* operator()(const TextTilingParams&) const { return "texttiling"; }
    const char* operator()(const BayesSegParams&) const { return "bayesseg"; }
    const char* operator()(const UniformParams&) const { return "uniform"; }
  };
  return std::visit(Visitor{}, params);
}

Pipeline pipeline_for(const SegmenterParams& params) {
  return std::holds_alternative<BayesSegParams>(params) ? Pipeline::kBayesSeg : Pipeline::kTextTiling;
}

Json params_to_json(const SegmenterParams& params) {
  struct Visitor {
    Json operator()(const TextTilingParams& p) const {
      Json j = Json::object();
      j["w"] = p.w;
      j["k"] = p.k;
      j["smoothing_rounds"] = p.smoothing_rounds;
      j["smoothing_width"] = p.smoothing_width;
      if (p.threshold == ThresholdPolicy::kLiberal) {
        j["threshold"] = "liberal";
      } else {
        j["threshold"] = p.custom_cutoff;
      }
      return j;
    }
    Json operator()(const BayesSegParams& p) const {
      Json j = Json::object();
      j["alpha"] = p.alpha;
      j["estimate_alpha"] = p.estimate_alpha;
      return j;
    }
    Json operator()(const UniformParams& p) const {
      Json j = Json::object();
      j["length"] = p.length;
      return j;
    }
  };
  Json j = Json::object();
  j["algorithm"] = algorithm_name(params);
  j["params"] = std::visit(Visitor{}, params);
  return j;
}

std::string algorithm_annotator(const SegmenterParams& params) {
  return std::string(algorithm_name(params)) + "-" +
         sha256_hex(params_to_json(params).dump()).substr(0, 8);
}

AlignedTokens align_tokens(const std::vector<TokenizedSentence>& sentences) {
  AlignedTokens out;
  out.sentence_count = sentences.size();
  out.first_token.reserve(sentences.size() + 1);
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    out.first_token.push_back(out.tokens.size());
    for (const auto& tok : sentences[s].tokens) {
      out.tokens.push_back(tok);
      out.sentence_of.push_back(s);
    }
  }
  out.first_token.push_back(out.tokens.size());
  return out;
}

std::vector<std::size_t> uniform_segment(std::size_t n_sentences, std::size_t length) {
  if (n_sentences < 1) throw ParamError("uniform: need at least one sentence");
  if (length < 1) throw ParamError("uniform: segment length must be >= 1");
  std::vector<std::size_t> out;
  for (std::size_t b = length; b < n_sentences; b += length) out.push_back(b);
  return out;
}

std::size_t reference_segment_count(const Corpus& corpus, const std::string& transcript_id,
                                    const std::string& annotator) {
  const Segmentation* s = corpus.find_segmentation(annotator, transcript_id);
  if (!s) {
    throw SegmenterError("no segmentation by '" + annotator + "' for transcript " + transcript_id);
  }
  return s->segment_count();
}

std::size_t median_segment_length(const Corpus& corpus, MedianPolicy policy,
                                  const std::string& transcript_id,
                                  const std::vector<std::string>& annotators) {
  if (policy == MedianPolicy::kCorpusGlobal) return length_statistics(corpus, annotators).median;
  Corpus subset;
  const Transcript* t = corpus.find_transcript(transcript_id);
  if (!t) throw SegmenterError("unknown transcript " + transcript_id);
  subset.transcripts.push_back(*t);
  for (const auto& s : corpus.segmentations) {
    if (s.transcript_id == transcript_id) subset.segmentations.push_back(s);
  }
  if (subset.segmentations.empty()) {
    throw SegmenterError("no manual segmentations for transcript " + transcript_id);
  }
  return length_statistics(subset, annotators).median;
}

SegmenterResult run_segmenter(const SegmenterRequest& request, const StopwordList& stopwords) {
  if (!request.transcript) throw ParamError("segmenter request has no transcript");
  const Transcript& t = *request.transcript;
  SegmenterResult result;

  if (const auto* p = std::get_if<UniformParams>(&request.params)) {
    p->validate();
    result.boundaries = uniform_segment(t.sentence_count(), p->length);
    result.details["length"] = p->length;
    return result;
  }

  const auto sentences = preprocess_transcript(t, stopwords, pipeline_for(request.params));
  if (const auto* p = std::get_if<TextTilingParams>(&request.params)) {
    auto tiled = texttiling::segment(align_tokens(sentences), *p);
    result.boundaries = std::move(tiled.boundaries);
    result.details["cutoff"] = tiled.cutoff;
    result.details["gaps"] = tiled.series.depth.size();
    return result;
  }

  const auto& p = std::get<BayesSegParams>(request.params);
  p.validate();
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(sentences.size());
  for (const auto& s : sentences) tokens.push_back(s.tokens);
  const auto bags = bayesseg::SentenceBags::from_tokens(tokens);
  if (p.estimate_alpha) {
    auto est = bayesseg::estimate_alpha(bags, p.k, p.alpha);
    result.boundaries = est.segmentation.boundaries;
    result.details["alpha"] = est.alpha;
    result.details["log_likelihood"] = est.segmentation.log_likelihood;
    result.details["alpha_converged"] = est.converged;
  } else {
    auto map = bayesseg::map_segmentation(bags, p.k, p.alpha);
    result.boundaries = std::move(map.boundaries);
    result.details["alpha"] = p.alpha;
    result.details["log_likelihood"] = map.log_likelihood;
  }
  result.details["K"] = p.k;
  result.details["vocabulary"] = bags.vocabulary_size();
  return result;
}

}  // namespace ohseg
