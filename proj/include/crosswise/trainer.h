#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crosswise/config.h"
#include "crosswise/metrics.h"
#include "crosswise/model.h"

namespace crosswise {

struct DevMetrics {
  double f1 = 0.0;
  double era_acc = 0.0;
};

struct Checkpoint {
  Model model;
  TrainConfig config;
  int epoch = 0;
  DevMetrics dev;
  // Word types seen in training, per era (OOV reference for evaluation).
  std::vector<std::vector<Text>> train_words;
};

class Adam {
 public:
  Adam(const ParamSet& params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(ParamSet& params, const GradBuffer& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::vector<Matrix> m_, v_;
};

struct StepStats {
  double loss = 0.0;  // mean joint loss over the batch
  double cws = 0.0;
  double disc = 0.0;
  double grad_norm = 0.0;  // before clipping
};

// One optimizer update from a batch: per-sentence graphs accumulate into a
// shared gradient buffer, which is averaged, clipped and applied.
class Trainer {
 public:
  Trainer(Model& model, const TrainConfig& config);
  StepStats step(std::span<const PreparedSentence> batch);

 private:
  Model& model_;
  TrainConfig config_;
  GradBuffer grads_;
  Adam adam_;
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double mean_cws = 0.0;
  double mean_disc = 0.0;
  std::optional<DevMetrics> dev;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochLog> log;
};

struct TrainInputs {
  // Sentences of all eras; each sentence carries its era id.
  std::vector<RawCorpus> corpora;
  // Used as given; otherwise a dev_fraction holdout of the training data.
  std::optional<RawCorpus> dev;
  // Used as given; otherwise built from the training split.
  std::optional<std::vector<EraLexicon>> lexicons;
};

using EpochCallback = std::function<void(const EpochLog&)>;

TrainResult train(const TrainInputs& inputs, const TrainConfig& config, const EpochCallback& on_epoch = {});

DevMetrics evaluate(const Model& model, const RawCorpus& gold);

struct SegmentResult {
  std::vector<std::string> words;  // UTF-8, original characters
  int era = 0;
  std::vector<double> era_probs;
};

// Preprocesses one line of raw text and segments it. Lines longer than
// max_len are decoded in pieces; era probabilities are averaged over the
// pieces weighted by length.
SegmentResult segment(const Model& model, std::string_view utf8_line, std::size_t max_len);

}  // namespace crosswise
