#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "crosswise/config.h"
#include "crosswise/corpus.h"
#include "crosswise/crf.h"
#include "crosswise/encoder.h"
#include "crosswise/lexicon.h"
#include "crosswise/memory.h"
#include "crosswise/switcher.h"

namespace crosswise {

// Encoder, per-era memories, switcher, fusion and CRF with their parameters,
// plus the vocabulary and lexicons the parameters are indexed by.
class Model {
 public:
  Model(ModelConfig config, Vocab vocab, std::vector<EraLexicon> lexicons, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }
  const std::vector<EraLexicon>& lexicons() const { return lexicons_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  const EncoderParams& encoder() const { return encoder_; }
  const MemoryParams& memory() const { return memory_; }
  const DiscriminatorParams& discriminator() const { return disc_; }
  const FusionParams& fusion() const { return fusion_; }
  const CrfParams& crf() const { return crf_; }

 private:
  ModelConfig config_;
  Vocab vocab_;
  std::vector<EraLexicon> lexicons_;
  ParamSet params_;
  EncoderParams encoder_;
  MemoryParams memory_;
  DiscriminatorParams disc_;
  FusionParams fusion_;
  CrfParams crf_;
};

// Sentence with everything the graph needs precomputed.
struct PreparedSentence {
  std::vector<int> ids;  // sentinel first
  std::vector<Tag> tags;
  std::optional<int> era;
  std::vector<CandidateSet> candidates;  // per era; empty when memory is off
};

PreparedSentence prepare(const Model& model, const LabeledSentence& sentence);

struct SentenceGraph {
  Var emissions;
  Var era_probs;
  Var nll;        // set when tags are present
  Var disc_loss;  // set when the era is present
  Var loss;       // alpha * nll + (1 - alpha) * disc_loss when both are set
};

// Training graphs route the hard switch by the gold era; inference graphs
// by the discriminator's argmax.
SentenceGraph build_sentence_graph(Graph& g, const Model& model, const PreparedSentence& s, double alpha,
                                   bool training);

// alpha * cws + (1 - alpha) * disc
double joint_loss(double cws, double disc, double alpha);

struct Prediction {
  std::vector<Tag> tags;
  int era = 0;
  std::vector<double> era_probs;
};

Prediction predict(const Model& model, std::u32string_view chars);

}  // namespace crosswise
