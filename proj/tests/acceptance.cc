// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "crosswise/checkpoint.h"
#include "crosswise/cli.h"
#include "crosswise/metrics.h"
#include "crosswise/switcher.h"
#include "crosswise/trainer.h"
#include "support.h"

using namespace crosswise;
using namespace crosswise::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << o.detail << std::endl;
}

std::string num(double x, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

Outcome crf_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int viterbi_mismatch = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix em = random_matrix(5, 4, rng, 2.0);
    const Matrix tr = random_matrix(5, 4, rng, 2.0);
    const BruteForceCrf bf = brute_force_crf(em, tr);
    worst = std::max(worst, std::abs(log_partition(em, tr) - bf.log_z));
    if (viterbi(em, tr).tags != bf.best) ++viterbi_mismatch;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && viterbi_mismatch == 0 && secs < 5.0,
          "max |logZ - brute| " + num(worst) + ", viterbi mismatches " + std::to_string(viterbi_mismatch) + ", " +
              num(secs) + " s"};
}

Outcome gradient_integrity() {
  double worst_model = 0.0;
  bool all = true;
  for (SwitchMode sw : {SwitchMode::Hard, SwitchMode::Soft})
    for (FusionMode fu : {FusionMode::Sum, FusionMode::Concat})
      for (int era : {0, 1}) {
        Model model = toy_model(sw, fu);
        const PreparedSentence s = toy_sentence(model, U"ab", {Tag::B, Tag::E}, era);
        const GradCheckReport r = full_model_grad_check(model, s, 0.7);
        all = all && r.passed;
        worst_model = std::max(worst_model, r.max_rel_error);
      }
  double worst_op = 0.0;
  std::string failed_ops;
  const auto ops = op_grad_checks();
  for (const auto& [name, r] : ops) {
    worst_op = std::max(worst_op, r.max_rel_error);
    if (!r.passed) failed_ops += " " + name;
  }
  all = all && failed_ops.empty();
  return {all, "full model max rel error " + num(worst_model) + " over 4 mode pairs x 2 eras; " +
                   std::to_string(ops.size()) + " ops, max rel error " + num(worst_op) +
                   (failed_ops.empty() ? "" : ", failing:" + failed_ops)};
}

Outcome switch_equivalences() {
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    ParamSet ps;
    Graph g(ps);
    std::vector<Var> cells;
    for (int d = 0; d < 3; ++d) cells.push_back(g.constant(random_matrix(4, 6, rng)));
    Matrix onehot(1, 3);
    onehot.at(0, static_cast<std::size_t>(trial % 3)) = 1.0;
    const Var p = g.constant(onehot);
    const Matrix soft = switch_cells(cells, p, SwitchMode::Soft, std::nullopt, false).value();
    const Matrix hard = switch_cells(cells, p, SwitchMode::Hard, std::nullopt, false).value();
    for (std::size_t k = 0; k < soft.size(); ++k) worst = std::max(worst, std::abs(soft.data[k] - hard.data[k]));
  }

  Model model = toy_model(SwitchMode::Hard, FusionMode::Concat);
  GradBuffer grads(model.params());
  {
    Graph g(model.params(), &grads);
    const PreparedSentence s = toy_sentence(model, U"abcd", {Tag::B, Tag::E, Tag::B, Tag::E}, 1);
    g.backward(build_sentence_graph(g, model, s, 1.0, true).loss);
  }
  double disc_grad = 0.0;
  for (ParamId id : {model.discriminator().weight, model.discriminator().bias})
    for (double v : grads[id].data) disc_grad = std::max(disc_grad, std::abs(v));
  return {worst <= 1e-12 && disc_grad == 0.0,
          "max |soft - hard| " + num(worst) + " over 50 one-hot instances; max |disc grad| at alpha=1 " +
              num(disc_grad)};
}

Outcome loss_and_soft_example() {
  Model model = toy_model(SwitchMode::Soft, FusionMode::Concat);
  const PreparedSentence s = toy_sentence(model, U"abca", {Tag::B, Tag::E, Tag::S, Tag::S}, 0);
  Graph g(model.params());
  const SentenceGraph sg = build_sentence_graph(g, model, s, 0.7, true);
  const double composed = 0.7 * sg.nll.scalar() + 0.3 * sg.disc_loss.scalar();
  const double loss_err = std::abs(sg.loss.scalar() - composed);

  std::mt19937_64 rng(104);
  ParamSet ps;
  Graph g2(ps);
  std::vector<Matrix> raw;
  std::vector<Var> cells;
  for (int d = 0; d < 4; ++d) {
    raw.push_back(random_matrix(3, 5, rng));
    cells.push_back(g2.constant(raw.back()));
  }
  const double probs[] = {0.1, 0.2, 0.1, 0.6};
  const Matrix out = switch_cells(cells, g2.constant(Matrix::row(probs)), SwitchMode::Soft, std::nullopt, false).value();
  double switch_err = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double expected = 0.1 * raw[0].data[k] + 0.2 * raw[1].data[k] + 0.1 * raw[2].data[k] + 0.6 * raw[3].data[k];
    switch_err = std::max(switch_err, std::abs(out.data[k] - expected));
  }
  return {loss_err <= 1e-12 && switch_err <= 1e-12,
          "|loss - (0.7 nll + 0.3 disc)| " + num(loss_err) + "; soft switch max error " + num(switch_err)};
}

Outcome ablation() {
  const SyntheticCorpus data = make_synthetic_corpus(1, 2000, 400);
  TrainConfig full;
  full.epochs = 20;
  full.ngram_min_count = 2;
  full.seed = 1;
  TrainConfig plain = full;
  plain.model.memory = false;
  plain.alpha = 1.0;

  TrainInputs inputs;
  inputs.corpora.push_back(data.train);
  const auto t0 = Clock::now();
  const TrainResult a = train(inputs, full);
  const double full_secs = seconds_since(t0);
  const auto t1 = Clock::now();
  const TrainResult b = train(inputs, plain);
  const double plain_secs = seconds_since(t1);

  const DevMetrics with = evaluate(a.best.model, data.test);
  const DevMetrics without = evaluate(b.best.model, data.test);
  const double gap = 100.0 * (with.f1 - without.f1);
  const bool pass = with.era_acc >= 0.95 && gap >= 5.0 && full_secs + plain_secs < 300.0;
  return {pass, "test F1 " + num(with.f1) + " (memory) vs " + num(without.f1) + " (no memory, alpha=1), gap " +
                    num(gap, 3) + " points (need >= 5); era accuracy " + num(with.era_acc) + " (need >= 0.95); train " +
                    num(full_secs, 3) + " s + " + num(plain_secs, 3) + " s"};
}

Outcome metrics_fixtures() {
  const std::vector<WordSeq> gold{{U"ab", U"c"}}, pred{{U"a", U"b", U"c"}};
  const SegScore s = score_segmentation(gold, pred);
  const bool seg_ok = s.precision == 1.0 / 3.0 && s.recall == 0.5 && std::abs(s.f1 - 0.4) < 1e-15;
  const WordSet train{U"ab", U"c"};
  const std::vector<WordSeq> g2{{U"ab", U"d"}}, hit{{U"ab", U"d"}}, miss{{U"a", U"bd"}};
  const auto r_hit = oov_recall(g2, hit, train).recall();
  const auto r_miss = oov_recall(g2, miss, train).recall();
  const bool oov_ok = r_hit && *r_hit == 1.0 && r_miss && *r_miss == 0.0;
  return {seg_ok && oov_ok, "P=" + num(s.precision) + " R=" + num(s.recall) + " F1=" + num(s.f1) +
                                "; R_oov " + format_ratio(r_hit) + " / " + format_ratio(r_miss)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome determinism() {
  const SyntheticCorpus data = make_synthetic_corpus(2, 300, 60);
  TrainConfig cfg;
  cfg.model.d_e = 16;
  cfg.model.d_a = 16;
  cfg.epochs = 2;
  cfg.ngram_min_count = 2;
  TrainInputs inputs;
  inputs.corpora.push_back(data.train);
  const std::string a = serialize_checkpoint(train(inputs, cfg).best);
  const std::string b = serialize_checkpoint(train(inputs, cfg).best);

  const fs::path dir = fs::temp_directory_path() / "xws_acceptance";
  fs::create_directories(dir);
  const fs::path ckpt = dir / "m.ckpt", text = dir / "input.txt";
  {
    std::ofstream out(ckpt, std::ios::binary);
    out << a;
  }
  {
    std::ofstream out(text, std::ios::binary);
    for (const auto& s : data.test.sentences) out << encode_utf8(joined_chars(s)) << '\n';
  }
  std::string runs[2];
  bool ok = true;
  for (auto& r : runs) {
    std::istringstream in;
    std::ostringstream out, err;
    ok = ok && run_cli({"segment", "--checkpoint", ckpt.string(), text.string()}, in, out, err) == kExitOk;
    r = out.str();
  }
  fs::remove_all(dir);
  const bool same_ckpt = a == b, same_seg = ok && !runs[0].empty() && runs[0] == runs[1];
  return {same_ckpt && same_seg, std::string("checkpoints ") + (same_ckpt ? "identical" : "differ") + " (" +
                                     std::to_string(a.size()) + " bytes); segment output " +
                                     (same_seg ? "identical" : "differs")};
}

template <typename F>
void run(int id, const std::string& name, F&& f) {
  try {
    report(id, name, f());
  } catch (const std::exception& e) {
    report(id, name, {false, std::string("exception: ") + e.what()});
  }
}

}  // namespace

int main() {
  run(1, "crf oracle", crf_oracle);
  run(2, "gradient integrity", gradient_integrity);
  run(3, "switch equivalences", switch_equivalences);
  run(4, "loss composition and soft switch", loss_and_soft_example);
  run(5, "memory ablation", ablation);
  run(6, "metrics fixtures", metrics_fixtures);
  run(7, "determinism", determinism);
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
