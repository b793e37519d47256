#pragma once

#include <filesystem>
#include <string>

#include "crosswise/trainer.h"

namespace crosswise {

// Binary checkpoint layout (all integers little-endian):
//
//   "XWSM"  u32 version  u32 section_count
//   section*: u32 kind  u32 name_len  name  u64 payload_len  payload
//
// kind 1 is UTF-8 text, kind 2 a tensor whose payload is u64 rows, u64 cols
// and rows*cols IEEE-754 doubles. Text sections: "config" (key=value lines),
// "meta", "vocab", "lexicon.<d>", "train_words.<d>". Tensor sections carry
// the parameter names, in parameter order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace crosswise
