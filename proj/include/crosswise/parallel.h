#pragma once

#include <span>
#include <vector>

#include "crosswise/model.h"

// Sentence-parallel inference kernels. Each sentence gets its own graph over
// the shared read-only parameters and results land at the sentence's index,
// so output is identical to the serial versions for any thread count.
namespace crosswise::parallel {

std::vector<Prediction> predict_batch(const Model& model, std::span<const Text> sentences);
std::vector<Prediction> predict_batch_serial(const Model& model, std::span<const Text> sentences);

// Per-sentence joint loss (inference routing for the hard switch is not
// used: labelled sentences are routed by their gold era).
std::vector<double> sentence_losses(const Model& model, std::span<const PreparedSentence> sentences, double alpha);
std::vector<double> sentence_losses_serial(const Model& model, std::span<const PreparedSentence> sentences,
                                           double alpha);

int max_threads();

}  // namespace crosswise::parallel
