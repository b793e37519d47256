#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace crosswise {

enum class SwitchMode { Hard, Soft };
enum class FusionMode { Sum, Concat };

std::string to_string(SwitchMode m);
std::string to_string(FusionMode m);
SwitchMode parse_switch_mode(std::string_view s);
FusionMode parse_fusion_mode(std::string_view s);

struct ModelConfig {
  int d_e = 64;
  int d_a = 64;
  int eras = 2;
  SwitchMode switch_mode = SwitchMode::Hard;
  FusionMode fusion = FusionMode::Concat;
  std::size_t max_ngram = 5;
  // false zeroes every memory output (the no-memory ablation)
  bool memory = true;

  void validate() const;
};

struct TrainConfig {
  ModelConfig model;
  double alpha = 0.7;
  double lr = 1e-3;
  double clip = 5.0;
  int epochs = 10;
  int batch = 8;
  std::uint64_t seed = 1;
  std::size_t ngram_min_count = 10;
  std::size_t max_len = 126;
  double dev_fraction = 0.1;

  void validate() const;

  // Resolved key=value lines in fixed key order; parse(to_text()) is exact.
  std::string to_text() const;
  // Applies key=value assignments (one per line, '#' comments). Unknown keys
  // and malformed values throw UsageError.
  void apply_text(std::string_view text);
  void set(std::string_view key, std::string_view value);
  static TrainConfig parse(std::string_view text);
};

}  // namespace crosswise
