#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "bpeps/isopeps.hpp"

namespace bpeps {

inline constexpr std::uint32_t kSnapshotVersion = 1;

// Layout: magic "BPEPSNAP", u32 version, u64 header length, JSON header, tensors (u32 rank, u64 dims,
// interleaved re/im doubles, all little endian), u32 crc32 of everything before it.
std::string encode_state(const BlockIsoPeps& s);
BlockIsoPeps decode_state(std::string_view bytes);

// Checkpoint: magic "BPEPSCKP", u32 version, u64 metadata length, metadata (JSON text),
// u64 snapshot length, snapshot bytes, u32 crc32.
struct Checkpoint {
  std::string metadata;
  BlockIsoPeps state;
};

std::string encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
// Written to a temporary sibling and renamed into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace bpeps
