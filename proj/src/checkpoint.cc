#include "crosswise/checkpoint.h"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "crosswise/error.h"

namespace crosswise {

namespace {

enum SectionKind : std::uint32_t { kText = 1, kTensor = 2 };

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out_.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out_.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
  }
  void f64(double x) { u64(std::bit_cast<std::uint64_t>(x)); }
  void bytes(std::string_view s) { out_.append(s); }

  void text_section(const std::string& name, std::string_view text) {
    u32(kText);
    u32(static_cast<std::uint32_t>(name.size()));
    bytes(name);
    u64(text.size());
    bytes(text);
    ++sections_;
  }
  void tensor_section(const std::string& name, const Matrix& m) {
    u32(kTensor);
    u32(static_cast<std::uint32_t>(name.size()));
    bytes(name);
    u64(16 + 8 * m.size());
    u64(m.rows);
    u64(m.cols);
    for (double x : m.data) f64(x);
    ++sections_;
  }
  std::string finish() {
    Writer head;
    head.bytes("XWSM");
    head.u32(kCheckpointVersion);
    head.u32(sections_);
    return head.out_ + out_;
  }

 private:
  std::string out_;
  std::uint32_t sections_ = 0;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + k])) << (8 * k);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + k])) << (8 * k);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view bytes(std::uint64_t n) {
    need(n);
    const auto out = in_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (in_.size() - pos_ < n) throw DataError("checkpoint truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string words_text(const std::vector<Text>& words) {
  std::string out;
  for (const Text& w : words) out += encode_utf8(w) + '\n';
  return out;
}

std::vector<Text> parse_words(std::string_view text) {
  std::vector<Text> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    if (nl > pos) out.push_back(decode_utf8(text.substr(pos, nl - pos)));
    pos = nl + 1;
  }
  return out;
}

std::map<std::string, std::string> parse_meta(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const Model& model = ckpt.model;
  Writer w;
  w.text_section("config", ckpt.config.to_text());
  std::ostringstream meta;
  meta << "epoch=" << ckpt.epoch << '\n'
       << "dev_f1=" << format_double(ckpt.dev.f1) << '\n'
       << "dev_era_acc=" << format_double(ckpt.dev.era_acc) << '\n'
       << "vocab_hash=" << hex64(fnv1a64(model.vocab().serialize())) << '\n';
  for (std::size_t d = 0; d < model.lexicons().size(); ++d)
    meta << "lexicon_hash." << d << '=' << hex64(model.lexicons()[d].hash()) << '\n';
  w.text_section("meta", meta.str());
  w.text_section("vocab", model.vocab().serialize());
  for (std::size_t d = 0; d < model.lexicons().size(); ++d)
    w.text_section("lexicon." + std::to_string(d), model.lexicons()[d].serialize());
  for (std::size_t d = 0; d < ckpt.train_words.size(); ++d)
    w.text_section("train_words." + std::to_string(d), words_text(ckpt.train_words[d]));
  for (const auto& p : model.params().all()) w.tensor_section(p.name, p.value);
  return w.finish();
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(4) != "XWSM") throw DataError("not a checkpoint (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t count = r.u32();
  std::map<std::string, std::string> texts;
  std::vector<std::pair<std::string, Matrix>> tensors;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t kind = r.u32();
    std::string name(r.bytes(r.u32()));
    const std::uint64_t len = r.u64();
    if (kind == kText) {
      texts[name] = std::string(r.bytes(len));
    } else if (kind == kTensor) {
      const std::uint64_t rows = r.u64(), cols = r.u64();
      if (len != 16 + 8 * rows * cols) throw DataError("tensor '" + name + "' has inconsistent length");
      Matrix m(rows, cols);
      for (double& x : m.data) x = r.f64();
      tensors.emplace_back(std::move(name), std::move(m));
    } else {
      throw DataError("unknown checkpoint section kind " + std::to_string(kind));
    }
  }
  if (!r.done()) throw DataError("trailing bytes after checkpoint sections");
  for (const char* required : {"config", "meta", "vocab"})
    if (!texts.count(required)) throw DataError(std::string("checkpoint lacks section '") + required + "'");

  const TrainConfig config = TrainConfig::parse(texts["config"]);
  const auto meta = parse_meta(texts["meta"]);
  Vocab vocab = Vocab::deserialize(texts["vocab"]);
  if (meta.count("vocab_hash") && meta.at("vocab_hash") != hex64(fnv1a64(vocab.serialize())))
    throw DataError("vocabulary hash mismatch");
  std::vector<EraLexicon> lexicons;
  std::vector<std::vector<Text>> train_words;
  for (int d = 0; d < config.model.eras; ++d) {
    const std::string key = "lexicon." + std::to_string(d);
    if (!texts.count(key)) throw DataError("checkpoint lacks section '" + key + "'");
    lexicons.push_back(EraLexicon::deserialize(d, texts[key], config.model.max_ngram));
    const std::string hash_key = "lexicon_hash." + std::to_string(d);
    if (meta.count(hash_key) && meta.at(hash_key) != hex64(lexicons.back().hash()))
      throw DataError("lexicon " + std::to_string(d) + " hash mismatch");
    const std::string words_key = "train_words." + std::to_string(d);
    train_words.push_back(texts.count(words_key) ? parse_words(texts[words_key]) : std::vector<Text>{});
  }

  Model model(config.model, std::move(vocab), std::move(lexicons), config.seed);
  auto& params = model.params().all();
  if (tensors.size() != params.size())
    throw DataError("checkpoint has " + std::to_string(tensors.size()) + " tensors, model expects " +
                    std::to_string(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (tensors[k].first != params[k].name)
      throw DataError("tensor '" + tensors[k].first + "' where '" + params[k].name + "' was expected");
    if (!tensors[k].second.same_shape(params[k].value))
      throw DataError("tensor '" + params[k].name + "' has shape " + shape_str(tensors[k].second) + ", expected " +
                      shape_str(params[k].value));
    params[k].value = std::move(tensors[k].second);
  }
  Checkpoint ckpt{std::move(model), config, 0, {}, std::move(train_words)};
  if (meta.count("epoch")) ckpt.epoch = std::stoi(meta.at("epoch"));
  if (meta.count("dev_f1")) ckpt.dev.f1 = std::stod(meta.at("dev_f1"));
  if (meta.count("dev_era_acc")) ckpt.dev.era_acc = std::stod(meta.at("dev_era_acc"));
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace crosswise
