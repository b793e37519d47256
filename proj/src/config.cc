#include "crosswise/config.h"

#include <charconv>
#include <sstream>

#include "crosswise/error.h"

namespace crosswise {

std::string to_string(SwitchMode m) { return m == SwitchMode::Hard ? "hard" : "soft"; }
std::string to_string(FusionMode m) { return m == FusionMode::Sum ? "sum" : "concat"; }

SwitchMode parse_switch_mode(std::string_view s) {
  if (s == "hard") return SwitchMode::Hard;
  if (s == "soft") return SwitchMode::Soft;
  throw UsageError("switch_mode must be hard or soft, got '" + std::string(s) + "'");
}

FusionMode parse_fusion_mode(std::string_view s) {
  if (s == "sum") return FusionMode::Sum;
  if (s == "concat") return FusionMode::Concat;
  throw UsageError("fusion must be sum or concat, got '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  if (d_e <= 0) throw UsageError("d_e must be positive");
  if (d_a <= 0 || d_a % 2 != 0) throw UsageError("d_a must be positive and even");
  if (eras < 2) throw UsageError("eras must be >= 2");
  if (max_ngram == 0) throw UsageError("max_ngram must be >= 1");
}

void TrainConfig::validate() const {
  model.validate();
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw UsageError("alpha must lie in [0, 1]");
  if (!(lr > 0.0)) throw UsageError("lr must be positive");
  if (!(clip > 0.0)) throw UsageError("clip must be positive");
  if (epochs <= 0) throw UsageError("epochs must be positive");
  if (batch <= 0) throw UsageError("batch must be positive");
  if (ngram_min_count == 0) throw UsageError("ngram_min_count must be >= 1");
  if (max_len == 0) throw UsageError("max_len must be >= 1");
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) throw UsageError("dev_fraction must lie in [0, 1)");
}

namespace {

// Shortest form that parses back to the same double.
std::string format_double(double x) {
  char buf[40];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw UsageError("bad value '" + std::string(v) + "' for key '" + std::string(key) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw UsageError("bad value '" + std::string(v) + "' for key '" + std::string(key) + "'");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  os << "alpha=" << format_double(alpha) << '\n'
     << "batch=" << batch << '\n'
     << "clip=" << format_double(clip) << '\n'
     << "d_a=" << model.d_a << '\n'
     << "d_e=" << model.d_e << '\n'
     << "dev_fraction=" << format_double(dev_fraction) << '\n'
     << "epochs=" << epochs << '\n'
     << "eras=" << model.eras << '\n'
     << "fusion=" << to_string(model.fusion) << '\n'
     << "lr=" << format_double(lr) << '\n'
     << "max_len=" << max_len << '\n'
     << "max_ngram=" << model.max_ngram << '\n'
     << "memory=" << (model.memory ? "on" : "off") << '\n'
     << "ngram_min_count=" << ngram_min_count << '\n'
     << "seed=" << seed << '\n'
     << "switch_mode=" << to_string(model.switch_mode) << '\n';
  return os.str();
}

void TrainConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "alpha") alpha = parse_number<double>(key, value);
  else if (key == "batch") batch = parse_number<int>(key, value);
  else if (key == "clip") clip = parse_number<double>(key, value);
  else if (key == "d_a") model.d_a = parse_number<int>(key, value);
  else if (key == "d_e") model.d_e = parse_number<int>(key, value);
  else if (key == "dev_fraction") dev_fraction = parse_number<double>(key, value);
  else if (key == "epochs") epochs = parse_number<int>(key, value);
  else if (key == "eras") model.eras = parse_number<int>(key, value);
  else if (key == "fusion") model.fusion = parse_fusion_mode(value);
  else if (key == "lr") lr = parse_number<double>(key, value);
  else if (key == "max_len") max_len = parse_number<std::size_t>(key, value);
  else if (key == "max_ngram") model.max_ngram = parse_number<std::size_t>(key, value);
  else if (key == "memory") model.memory = parse_bool(key, value);
  else if (key == "ngram_min_count") ngram_min_count = parse_number<std::size_t>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "switch_mode") model.switch_mode = parse_switch_mode(value);
  else throw UsageError("unknown config key '" + std::string(key) + "'");
}

void TrainConfig::apply_text(std::string_view text) {
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

TrainConfig TrainConfig::parse(std::string_view text) {
  TrainConfig c;
  c.apply_text(text);
  return c;
}

}  // namespace crosswise
