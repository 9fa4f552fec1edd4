#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "snnse/engine/tensor.hpp"

namespace snnse::model {

// Self-describing binary container shared by checkpoints and feature caches:
//
//   "SNNSECK\0" | u32 version | u32 meta_len | meta (key=value text)
//   | u32 n | n x (u16 name_len, name, u8 dtype, u8 rank, u64 dims[rank],
//                  u64 offset, u64 bytes)
//   | u64 data_len | data | u32 CRC-32 of everything before it
//
// All integers and values are little-endian; dtype 0 = f32, 1 = f64.
inline constexpr std::uint32_t kContainerVersion = 1;

enum class DType : std::uint8_t { kF32 = 0, kF64 = 1 };

struct ContainerEntry {
  std::string name;
  DType dtype = DType::kF32;
  engine::Shape shape;
  std::vector<unsigned char> bytes;
};

struct Container {
  std::map<std::string, std::string> metadata;
  std::vector<ContainerEntry> entries;

  void put(const std::string& name, const engine::Tensor<float>& t);
  void put(const std::string& name, const engine::Tensor<double>& t);
  const ContainerEntry* find(const std::string& name) const;
  engine::Tensor<float> get_f32(const std::string& name) const;
  engine::Tensor<double> get_f64(const std::string& name) const;
  const std::string& meta(const std::string& key) const;
};

std::vector<unsigned char> encode_container(const Container& c,
                                            std::uint32_t version = kContainerVersion);
// Throws CheckpointError on bad magic, checksum mismatch, truncation or an
// unsupported version. Nothing is returned unless the whole file verifies.
Container decode_container(const std::vector<unsigned char>& bytes);

void write_container(const Container& c, const std::filesystem::path& path);
Container read_container(const std::filesystem::path& path);

std::uint32_t crc32_of(const unsigned char* data, std::size_t size);

}  // namespace snnse::model
