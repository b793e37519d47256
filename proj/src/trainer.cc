#include "crosswise/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "crosswise/error.h"
#include "crosswise/parallel.h"

namespace crosswise {

Adam::Adam(const ParamSet& params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params.all()) {
    m_.emplace_back(p.value.rows, p.value.cols);
    v_.emplace_back(p.value.rows, p.value.cols);
  }
}

void Adam::step(ParamSet& params, const GradBuffer& grads) {
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& value = params.all()[k].value.data;
    const auto& g = grads.all()[k].data;
    auto& m = m_[k].data;
    auto& v = v_[k].data;
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      value[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

Trainer::Trainer(Model& model, const TrainConfig& config)
    : model_(model), config_(config), grads_(model.params()), adam_(model.params(), config.lr) {
  config_.validate();
}

StepStats Trainer::step(std::span<const PreparedSentence> batch) {
  StepStats stats;
  if (batch.empty()) return stats;
  grads_.zero();
  for (const auto& s : batch) {
    if (!s.era) throw DataError("training sentence without era id");
    if (s.tags.empty()) throw DataError("training sentence without tags");
    Graph g(model_.params(), &grads_);
    const SentenceGraph sg = build_sentence_graph(g, model_, s, config_.alpha, true);
    const double loss = sg.loss.scalar();
    if (!std::isfinite(loss)) throw NumericError("loss is not finite");
    stats.loss += loss;
    stats.cws += sg.nll.scalar();
    stats.disc += sg.disc_loss.scalar();
    g.backward(sg.loss);
  }
  const double n = static_cast<double>(batch.size());
  stats.loss /= n;
  stats.cws /= n;
  stats.disc /= n;
  grads_.scale(1.0 / n);
  stats.grad_norm = grads_.global_norm();
  if (!std::isfinite(stats.grad_norm)) throw NumericError("gradient is not finite");
  if (stats.grad_norm > config_.clip) grads_.scale(config_.clip / stats.grad_norm);
  adam_.step(model_.params(), grads_);
  return stats;
}

namespace {

std::vector<std::vector<Text>> sorted_word_types(const RawCorpus& corpus, int eras) {
  std::vector<std::vector<Text>> out(eras);
  for (int d = 0; d < eras; ++d) {
    const WordSet types = word_types(corpus, d);
    out[d].assign(types.begin(), types.end());
    std::sort(out[d].begin(), out[d].end());
  }
  return out;
}

}  // namespace

DevMetrics evaluate(const Model& model, const RawCorpus& gold) {
  std::vector<Text> chars;
  std::vector<WordSeq> gold_words;
  std::vector<int> gold_eras;
  for (const auto& s : gold.sentences) {
    chars.push_back(joined_chars(s));
    gold_words.push_back(s.words);
    gold_eras.push_back(s.era);
  }
  const auto preds = parallel::predict_batch(model, chars);
  std::vector<WordSeq> pred_words;
  std::vector<int> pred_eras;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    pred_words.push_back(bmes_to_words(chars[i], preds[i].tags));
    pred_eras.push_back(preds[i].era);
  }
  return DevMetrics{score_segmentation(gold_words, pred_words).f1, era_accuracy(gold_eras, pred_eras)};
}

TrainResult train(const TrainInputs& inputs, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  const int eras = config.model.eras;
  std::mt19937_64 rng(config.seed);

  RawCorpus train_split{{}, "train"};
  for (const auto& c : inputs.corpora)
    for (const auto& s : c.sentences) {
      if (s.era < 0 || s.era >= eras)
        throw DataError("era id " + std::to_string(s.era) + " outside [0, " + std::to_string(eras) + ")");
      train_split.sentences.push_back(s);
    }
  RawCorpus dev_split{{}, "dev"};
  if (inputs.dev) {
    dev_split = *inputs.dev;
  } else if (config.dev_fraction > 0.0) {
    std::vector<std::size_t> order(train_split.sentences.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_dev = static_cast<std::size_t>(config.dev_fraction * static_cast<double>(order.size()));
    std::vector<bool> is_dev(order.size(), false);
    for (std::size_t k = 0; k < n_dev; ++k) is_dev[order[k]] = true;
    RawCorpus kept{{}, "train"};
    for (std::size_t i = 0; i < order.size(); ++i)
      (is_dev[i] ? dev_split : kept).sentences.push_back(std::move(train_split.sentences[i]));
    train_split = std::move(kept);
  }
  std::vector<std::size_t> per_era(eras, 0);
  for (const auto& s : train_split.sentences) ++per_era[s.era];
  for (int d = 0; d < eras; ++d)
    if (per_era[d] == 0) throw DataError("no training sentences for era " + std::to_string(d));

  std::vector<EraLexicon> lexicons;
  if (inputs.lexicons) {
    lexicons = *inputs.lexicons;
  } else {
    for (int d = 0; d < eras; ++d)
      lexicons.push_back(build_lexicon(train_split, d, config.ngram_min_count, config.model.max_ngram));
  }
  const RawCorpus vocab_source[] = {train_split};
  Model model(config.model, Vocab::build(vocab_source), std::move(lexicons), config.seed);

  std::vector<PreparedSentence> prepared;
  prepared.reserve(train_split.sentences.size());
  for (const auto& s : train_split.sentences) prepared.push_back(prepare(model, to_labeled(s)));

  Trainer trainer(model, config);
  TrainResult result{Checkpoint{model, config, 0, {}, sorted_word_types(train_split, eras)}, {}};
  bool have_best = false;
  std::vector<std::size_t> order(prepared.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<PreparedSentence> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog log;
    log.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(prepared[order[k]]);
      StepStats st;
      try {
        st = trainer.step(batch);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", sentence " +
                           std::to_string(start) + ": " + e.what());
      }
      const double n = static_cast<double>(end - start);
      log.mean_loss += st.loss * n;
      log.mean_cws += st.cws * n;
      log.mean_disc += st.disc * n;
    }
    const double total = static_cast<double>(order.size());
    log.mean_loss /= total;
    log.mean_cws /= total;
    log.mean_disc /= total;
    if (!dev_split.sentences.empty()) log.dev = evaluate(model, dev_split);
    const bool better = !have_best || (log.dev && log.dev->f1 > result.best.dev.f1) || !log.dev;
    if (better) {
      result.best.model = model;
      result.best.epoch = epoch;
      result.best.dev = log.dev.value_or(DevMetrics{});
      have_best = true;
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return result;
}

SegmentResult segment(const Model& model, std::string_view utf8_line, std::size_t max_len) {
  const Text source = decode_utf8(utf8_line);
  const PreprocessedText pre = preprocess_aligned(source);
  if (pre.chars.empty()) throw DataError("nothing to segment after preprocessing");
  SegmentResult out;
  out.era_probs.assign(static_cast<std::size_t>(model.config().eras), 0.0);
  for (const auto& [begin, end] : split_text(pre.chars, max_len)) {
    const std::u32string_view piece = std::u32string_view(pre.chars).substr(begin, end - begin);
    const Prediction p = predict(model, piece);
    const double w = static_cast<double>(end - begin) / static_cast<double>(pre.chars.size());
    for (std::size_t d = 0; d < out.era_probs.size(); ++d) out.era_probs[d] += w * p.era_probs[d];
    std::size_t pos = begin;
    for (const Text& word : bmes_to_words(piece, p.tags)) {
      const std::size_t first = pre.source_spans[pos].first;
      const std::size_t last = pre.source_spans[pos + word.size() - 1].second;
      Text original;
      for (std::size_t k = first; k < last; ++k)
        if (!is_space_char(source[k])) original.push_back(source[k]);
      out.words.push_back(encode_utf8(original));
      pos += word.size();
    }
  }
  out.era = argmax_era(out.era_probs);
  return out;
}

}  // namespace crosswise
