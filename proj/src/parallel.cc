#include "crosswise/parallel.h"

#include <exception>

#include <omp.h>

namespace crosswise::parallel {

namespace {

double one_loss(const Model& model, const PreparedSentence& s, double alpha) {
  Graph g(model.params());
  return build_sentence_graph(g, model, s, alpha, true).loss.scalar();
}

// Runs body(i) for every i in parallel; the first exception by index is
// rethrown after the loop.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<Prediction> predict_batch(const Model& model, std::span<const Text> sentences) {
  std::vector<Prediction> out(sentences.size());
  parallel_for(sentences.size(), [&](std::size_t i) { out[i] = predict(model, sentences[i]); });
  return out;
}

std::vector<Prediction> predict_batch_serial(const Model& model, std::span<const Text> sentences) {
  std::vector<Prediction> out;
  out.reserve(sentences.size());
  for (const Text& s : sentences) out.push_back(predict(model, s));
  return out;
}

std::vector<double> sentence_losses(const Model& model, std::span<const PreparedSentence> sentences, double alpha) {
  std::vector<double> out(sentences.size());
  parallel_for(sentences.size(), [&](std::size_t i) { out[i] = one_loss(model, sentences[i], alpha); });
  return out;
}

std::vector<double> sentence_losses_serial(const Model& model, std::span<const PreparedSentence> sentences,
                                           double alpha) {
  std::vector<double> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(one_loss(model, s, alpha));
  return out;
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace crosswise::parallel
