#include "crosswise/cli.h"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>

#include "crosswise/checkpoint.h"
#include "crosswise/error.h"
#include "crosswise/parallel.h"
#include "crosswise/trainer.h"

namespace fs = std::filesystem;

namespace crosswise {

namespace {

struct ConfigFlags {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::string> mode;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file");
    cmd->add_option("--set", overrides, "override one config key (key=value), repeatable");
    cmd->add_option("--mode", mode, "switch+fusion, e.g. hard+concat");
    cmd->add_option("--alpha", alpha, "joint loss weight");
    cmd->add_option("--seed", seed, "random seed");
  }

  TrainConfig resolve() const {
    TrainConfig config;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot read config file " + config_path);
      std::ostringstream buf;
      buf << in.rdbuf();
      config.apply_text(buf.str());
    }
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (mode) apply_mode(config, *mode);
    if (alpha) config.alpha = *alpha;
    if (seed) config.seed = *seed;
    config.validate();
    return config;
  }

  static void apply_mode(TrainConfig& config, std::string_view mode) {
    const auto plus = mode.find('+');
    if (plus == std::string_view::npos) throw UsageError("--mode expects switch+fusion, got '" + std::string(mode) + "'");
    config.model.switch_mode = parse_switch_mode(mode.substr(0, plus));
    config.model.fusion = parse_fusion_mode(mode.substr(plus + 1));
  }
};

void log_config(std::ostream& err, const TrainConfig& config) {
  err << "# resolved config\n";
  std::istringstream lines(config.to_text());
  std::string line;
  while (std::getline(lines, line)) err << "#   " << line << '\n';
}

// Positional files take eras from --era in order; without --era the i-th
// file is era i.
std::vector<int> pair_eras(const std::vector<std::string>& files, const std::vector<int>& eras, const char* what) {
  if (eras.empty()) {
    std::vector<int> out(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) out[i] = static_cast<int>(i);
    return out;
  }
  if (eras.size() != files.size())
    throw UsageError(std::string(what) + ": " + std::to_string(files.size()) + " files but " +
                     std::to_string(eras.size()) + " --era values");
  return eras;
}

std::vector<RawCorpus> load_all(const std::vector<std::string>& files, const std::vector<int>& eras,
                                const TrainConfig& config, const char* what) {
  const auto paired = pair_eras(files, eras, what);
  std::vector<RawCorpus> out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (paired[i] < 0 || paired[i] >= config.model.eras)
      throw UsageError("era " + std::to_string(paired[i]) + " outside [0, " + std::to_string(config.model.eras) + ")");
    out.push_back(load_corpus(files[i], paired[i], config.max_len));
  }
  return out;
}

RawCorpus pooled(const std::vector<RawCorpus>& corpora, std::string name) {
  RawCorpus out{{}, std::move(name)};
  for (const auto& c : corpora) out.sentences.insert(out.sentences.end(), c.sentences.begin(), c.sentences.end());
  return out;
}

std::vector<EraLexicon> load_lexicons(const fs::path& dir, const TrainConfig& config) {
  std::vector<EraLexicon> out;
  for (int d = 0; d < config.model.eras; ++d)
    out.push_back(EraLexicon::load(dir / lexicon_file_name(d), d, config.model.max_ngram));
  return out;
}

TrainInputs make_inputs(const std::vector<RawCorpus>& corpora, const std::vector<RawCorpus>& dev,
                        const std::string& dict_dir, const TrainConfig& config) {
  TrainInputs inputs;
  inputs.corpora = corpora;
  if (!dev.empty()) inputs.dev = pooled(dev, "dev");
  if (!dict_dir.empty()) inputs.lexicons = load_lexicons(dict_dir, config);
  return inputs;
}

std::string fixed4(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << x;
  return os.str();
}

void log_epoch(std::ostream& err, const EpochLog& log) {
  err << "epoch " << log.epoch << " loss=" << fixed4(log.mean_loss) << " cws=" << fixed4(log.mean_cws)
      << " disc=" << fixed4(log.mean_disc);
  if (log.dev) err << " dev_f1=" << fixed4(log.dev->f1) << " dev_era_acc=" << fixed4(log.dev->era_acc);
  err << '\n';
}

int cmd_build_dict(const std::vector<std::string>& files, const std::vector<int>& eras, const std::string& out_dir,
                   const TrainConfig& config, std::ostream& err) {
  const auto corpora = load_all(files, eras, config, "build-dict");
  const RawCorpus all = pooled(corpora, "all");
  fs::create_directories(out_dir);
  for (int d = 0; d < config.model.eras; ++d) {
    const EraLexicon lex = build_lexicon(all, d, config.ngram_min_count, config.model.max_ngram);
    const fs::path path = fs::path(out_dir) / lexicon_file_name(d);
    lex.save(path);
    err << "era " << d << ": " << lex.size() << " words -> " << path.string() << '\n';
  }
  return kExitOk;
}

int cmd_train(const std::vector<RawCorpus>& corpora, const std::vector<RawCorpus>& dev, const std::string& dict_dir,
              const std::string& out_path, const TrainConfig& config, std::ostream& out, std::ostream& err) {
  const TrainResult result =
      train(make_inputs(corpora, dev, dict_dir, config), config, [&](const EpochLog& log) { log_epoch(err, log); });
  save_checkpoint(result.best, out_path);
  err << "kept epoch " << result.best.epoch << " -> " << out_path << '\n';
  out << "epoch=" << result.best.epoch << " dev_f1=" << fixed4(result.best.dev.f1)
      << " dev_era_acc=" << fixed4(result.best.dev.era_acc) << '\n';
  return kExitOk;
}

int cmd_segment(const Checkpoint& ckpt, std::istream& in, std::ostream& out) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    try {
      Text decoded = decode_utf8(line);
      bool blank = true;
      for (Char c : decoded) blank = blank && is_space_char(c);
      if (blank) {
        out << '\n';
        continue;
      }
      const SegmentResult r = segment(ckpt.model, line, ckpt.config.max_len);
      for (std::size_t k = 0; k < r.words.size(); ++k) out << (k ? " " : "") << r.words[k];
      out << "\tera=" << r.era << '\n';
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return kExitOk;
}

int cmd_eval(const Checkpoint& ckpt, const std::vector<RawCorpus>& gold, std::ostream& out) {
  const int eras = ckpt.config.model.eras;
  std::vector<WordSet> train_words(static_cast<std::size_t>(eras));
  for (int d = 0; d < eras && d < static_cast<int>(ckpt.train_words.size()); ++d)
    train_words[d].insert(ckpt.train_words[d].begin(), ckpt.train_words[d].end());

  std::vector<EraReportRow> rows(static_cast<std::size_t>(eras) + 1);
  std::vector<std::size_t> era_hits(rows.size(), 0);
  for (int d = 0; d < eras; ++d) rows[d].label = std::to_string(d);
  rows.back().label = "all";
  for (const RawCorpus& corpus : gold) {
    std::vector<Text> chars;
    std::vector<WordSeq> gold_words;
    for (const auto& s : corpus.sentences) {
      chars.push_back(joined_chars(s));
      gold_words.push_back(s.words);
    }
    const auto preds = parallel::predict_batch(ckpt.model, chars);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const int era = corpus.sentences[i].era;
      const WordSeq pred_words = bmes_to_words(chars[i], preds[i].tags);
      const std::span<const WordSeq> g(&gold_words[i], 1), p(&pred_words, 1);
      SegScore seg;
      try {
        seg = score_segmentation(g, p);
      } catch (const DataError& e) {
        throw DataError(corpus.source_name + ": sentence " + std::to_string(i + 1) + ": " + e.what());
      }
      const OovScore oov = oov_recall(g, p, train_words[era]);
      for (EraReportRow* row : {&rows[era], &rows.back()}) {
        ++row->sentences;
        row->seg += seg;
        row->oov.oov_tokens += oov.oov_tokens;
        row->oov.recovered += oov.recovered;
      }
      if (preds[i].era == era) {
        ++era_hits[era];
        ++era_hits.back();
      }
    }
  }
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].sentences > 0)
      rows[r].era_acc = static_cast<double>(era_hits[r]) / static_cast<double>(rows[r].sentences);
  out << format_report(rows);
  return kExitOk;
}

int cmd_sweep(const std::vector<RawCorpus>& corpora, const std::vector<RawCorpus>& dev, const std::string& dict_dir,
              const std::string& grid, const TrainConfig& base, std::ostream& out, std::ostream& err) {
  std::vector<TrainConfig> cells;
  if (grid == "alpha") {
    for (int k = 0; k <= 10; ++k) {
      TrainConfig c = base;
      c.alpha = k / 10.0;
      cells.push_back(c);
    }
  } else if (grid == "modes") {
    for (SwitchMode s : {SwitchMode::Hard, SwitchMode::Soft})
      for (FusionMode f : {FusionMode::Sum, FusionMode::Concat}) {
        TrainConfig c = base;
        c.model.switch_mode = s;
        c.model.fusion = f;
        cells.push_back(c);
      }
  } else {
    throw UsageError("--grid must be 'alpha' or 'modes', got '" + grid + "'");
  }
  out << "alpha\tswitch\tfusion\tepoch\tdev_f1\tdev_era_acc\n";
  for (const TrainConfig& c : cells) {
    err << "# cell alpha=" << c.alpha << " mode=" << to_string(c.model.switch_mode) << '+'
        << to_string(c.model.fusion) << '\n';
    const TrainResult r =
        train(make_inputs(corpora, dev, dict_dir, c), c, [&](const EpochLog& log) { log_epoch(err, log); });
    std::ostringstream alpha;
    alpha << std::fixed << std::setprecision(1) << c.alpha;
    out << alpha.str() << '\t' << to_string(c.model.switch_mode) << '\t' << to_string(c.model.fusion) << '\t'
        << r.best.epoch << '\t' << fixed4(r.best.dev.f1) << '\t' << fixed4(r.best.dev.era_acc) << '\n';
  }
  return kExitOk;
}

int cmd_synth(std::uint64_t seed, std::size_t n_train, std::size_t n_test, const std::string& out_dir,
              std::ostream& err) {
  const SyntheticCorpus corpus = make_synthetic_corpus(seed, n_train, n_test);
  fs::create_directories(out_dir);
  for (const auto& [split, data] : {std::pair{"train", &corpus.train}, std::pair{"test", &corpus.test}}) {
    for (int d = 0; d < 2; ++d) {
      RawCorpus part{{}, {}};
      for (const auto& s : data->sentences)
        if (s.era == d) part.sentences.push_back(s);
      const fs::path path = fs::path(out_dir) / (std::string(split) + ".era" + std::to_string(d) + ".txt");
      write_corpus(part, path);
      err << path.string() << ": " << part.sentences.size() << " sentences\n";
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"xws: cross-era Chinese word segmentation with switch-memory"};
  app.require_subcommand(1);

  ConfigFlags flags;
  std::vector<std::string> files, dev_files;
  std::vector<int> eras, dev_eras;
  std::string out_path, dict_dir, checkpoint, grid;

  auto* build = app.add_subcommand("build-dict", "build one dictionary file per era");
  build->add_option("files", files, "corpus files")->required();
  build->add_option("--era", eras, "era id of each corpus file, in order");
  build->add_option("--out,--dict-dir", out_path, "output directory")->required();
  flags.attach(build);

  auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
  train_cmd->add_option("files", files, "training corpus files")->required();
  train_cmd->add_option("--era", eras, "era id of each corpus file, in order");
  train_cmd->add_option("--dev", dev_files, "dev corpus files (default: holdout of the training data)");
  train_cmd->add_option("--dev-era", dev_eras, "era id of each dev file, in order");
  train_cmd->add_option("--dict-dir", dict_dir, "directory with era<d>.dict files (default: built from training data)");
  train_cmd->add_option("--out", out_path, "checkpoint path")->required();
  flags.attach(train_cmd);

  std::string input_path;
  auto* seg = app.add_subcommand("segment", "segment raw text, one sentence per line");
  seg->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  seg->add_option("input", input_path, "input file (default: stdin)");

  auto* eval = app.add_subcommand("eval", "score a checkpoint against gold corpora");
  eval->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  eval->add_option("files", files, "gold corpus files")->required();
  eval->add_option("--era", eras, "era id of each gold file, in order");

  auto* sweep = app.add_subcommand("sweep", "train one model per grid cell and report dev F1");
  sweep->add_option("files", files, "training corpus files")->required();
  sweep->add_option("--era", eras, "era id of each corpus file, in order");
  sweep->add_option("--dev", dev_files, "dev corpus files (default: holdout of the training data)");
  sweep->add_option("--dev-era", dev_eras, "era id of each dev file, in order");
  sweep->add_option("--dict-dir", dict_dir, "directory with era<d>.dict files");
  sweep->add_option("--grid", grid, "alpha (0.0..1.0 step 0.1) or modes (switch x fusion)")->required();
  flags.attach(sweep);

  std::uint64_t synth_seed = 1;
  std::size_t n_train = 2000, n_test = 400;
  auto* synth = app.add_subcommand("synth", "write the synthetic two-era corpus");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--train", n_train, "training sentences");
  synth->add_option("--test", n_test, "test sentences");
  synth->add_option("--out", out_path, "output directory")->required();

  std::vector<const char*> argv{"xws"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) {
      const TrainConfig config = flags.resolve();
      log_config(err, config);
      return cmd_build_dict(files, eras, out_path, config, err);
    }
    if (*train_cmd || *sweep) {
      const TrainConfig config = flags.resolve();
      log_config(err, config);
      const auto corpora = load_all(files, eras, config, "train");
      const auto dev = load_all(dev_files, dev_eras, config, "dev");
      if (*train_cmd) return cmd_train(corpora, dev, dict_dir, out_path, config, out, err);
      return cmd_sweep(corpora, dev, dict_dir, grid, config, out, err);
    }
    if (*seg || *eval) {
      const Checkpoint ckpt = load_checkpoint(checkpoint);
      log_config(err, ckpt.config);
      if (*seg) {
        if (input_path.empty()) return cmd_segment(ckpt, in, out);
        std::ifstream file(input_path, std::ios::binary);
        if (!file) throw DataError("cannot read " + input_path);
        return cmd_segment(ckpt, file, out);
      }
      return cmd_eval(ckpt, load_all(files, eras, ckpt.config, "eval"), out);
    }
    if (*synth) return cmd_synth(synth_seed, n_train, n_test, out_path, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace crosswise
