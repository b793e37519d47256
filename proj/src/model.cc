#include "crosswise/model.h"

#include <random>

#include "crosswise/error.h"

namespace crosswise {

Model::Model(ModelConfig config, Vocab vocab, std::vector<EraLexicon> lexicons, std::uint64_t seed)
    : config_(config), vocab_(std::move(vocab)), lexicons_(std::move(lexicons)) {
  config_.validate();
  if (lexicons_.size() != static_cast<std::size_t>(config_.eras))
    throw UsageError("expected " + std::to_string(config_.eras) + " lexicons, got " +
                     std::to_string(lexicons_.size()));
  std::mt19937_64 rng(seed);
  encoder_ = EncoderParams::init(params_, vocab_.size(), config_.d_e, config_.d_a, rng);
  std::vector<std::size_t> sizes;
  for (const auto& lex : lexicons_) sizes.push_back(lex.size());
  memory_ = MemoryParams::init(params_, sizes, config_.d_a, rng);
  disc_ = DiscriminatorParams::init(params_, config_.d_a, config_.eras, rng);
  fusion_ = FusionParams::init(params_, config_.d_a, config_.fusion, rng);
  crf_ = CrfParams::init(params_, config_.d_a, rng);
}

PreparedSentence prepare(const Model& model, const LabeledSentence& sentence) {
  if (sentence.chars.empty()) throw DataError("empty sentence");
  PreparedSentence p;
  p.ids = model.vocab().encode(sentence.chars);
  p.tags = sentence.tags;
  p.era = sentence.era;
  if (p.era && (*p.era < 0 || *p.era >= model.config().eras))
    throw DataError("era id " + std::to_string(*p.era) + " outside [0, " + std::to_string(model.config().eras) + ")");
  if (model.config().memory)
    for (const auto& lex : model.lexicons())
      p.candidates.push_back(extract_candidates(sentence.chars, lex, model.config().max_ngram));
  return p;
}

double joint_loss(double cws, double disc, double alpha) { return alpha * cws + (1.0 - alpha) * disc; }

SentenceGraph build_sentence_graph(Graph& g, const Model& model, const PreparedSentence& s, double alpha,
                                   bool training) {
  const ModelConfig& cfg = model.config();
  SentenceGraph out;
  const Encoded enc = encode(g, s.ids, model.encoder());
  out.era_probs = classify_era(enc.sentence, model.discriminator());

  Var memory;
  if (!cfg.memory) {
    memory = g.constant(Matrix(enc.chars.rows(), static_cast<std::size_t>(cfg.d_a)));
  } else {
    Var values = g.param(model.memory().values);
    auto cell = [&](int era) {
      return memory_cell(enc.chars, g.param(model.memory().keys[era]), values, s.candidates[era]);
    };
    if (cfg.switch_mode == SwitchMode::Hard) {
      // Only the routed cell is built; equal to switch_cells on all cells.
      memory = cell(hard_route(out.era_probs.value().data, s.era, training));
    } else {
      std::vector<Var> cells;
      for (int d = 0; d < cfg.eras; ++d) cells.push_back(cell(d));
      memory = switch_cells(cells, out.era_probs, SwitchMode::Soft, s.era, training);
    }
  }

  Var reps = fuse(memory, enc.chars, model.fusion());
  out.emissions = emissions(reps, model.crf());
  if (!s.tags.empty()) out.nll = crf_nll(out.emissions, g.param(model.crf().transitions), s.tags);
  if (s.era) out.disc_loss = discriminator_loss(enc.sentence, model.discriminator(), *s.era);
  if (out.nll.graph && out.disc_loss.graph)
    out.loss = ops::add(ops::scale(out.nll, alpha), ops::scale(out.disc_loss, 1.0 - alpha));
  return out;
}

Prediction predict(const Model& model, std::u32string_view chars) {
  LabeledSentence sentence{Text(chars), {}, std::nullopt};
  const PreparedSentence prepared = prepare(model, sentence);
  Graph g(model.params());
  const SentenceGraph sg = build_sentence_graph(g, model, prepared, 1.0, false);
  Prediction out;
  out.era_probs = sg.era_probs.value().data;
  out.era = argmax_era(out.era_probs);
  out.tags = viterbi(sg.emissions.value(), model.params()[model.crf().transitions].value).tags;
  return out;
}

}  // namespace crosswise
