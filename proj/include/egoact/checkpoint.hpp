// Parameter checkpoint file: magic "EGOACTCK", u32 format version, u64 model
// config hash, u32 tensor count, then per tensor: name (u32 length + bytes),
// u32 rank, u32 dims, raw little-endian 64-bit floats.
#pragma once

#include <filesystem>
#include <fstream>

#include "egoact/binio.hpp"
#include "egoact/nn.hpp"

namespace egoact {

constexpr char kCheckpointMagic[9] = "EGOACTCK";
constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const std::filesystem::path& path, const ParamStore& params,
                            std::uint64_t config_hash) {
  std::ofstream os(path, std::ios::binary);
  require_io(bool(os), "cannot open checkpoint for writing: " + path.string());
  os.write(kCheckpointMagic, 8);
  write_u32(os, kCheckpointVersion);
  write_u64(os, config_hash);
  write_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const std::string& name : params.names()) {
    const Tensor& t = params.get(name);
    write_str(os, name);
    write_u32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) write_u32(os, static_cast<std::uint32_t>(d));
    write_f64s(os, t.data.data(), t.data.size());
  }
  require_io(bool(os), "checkpoint write failed: " + path.string());
}

// Loads tensors in file order. When expected_hash is nonzero a mismatch is a
// usage error: the checkpoint belongs to a different model config.
inline ParamStore load_checkpoint(const std::filesystem::path& path,
                                  std::uint64_t expected_hash = 0) {
  std::ifstream is(path, std::ios::binary);
  require_io(bool(is), "cannot open checkpoint: " + path.string());
  char magic[8];
  is.read(magic, 8);
  require_io(bool(is) && std::string(magic, 8) == kCheckpointMagic,
             "bad checkpoint magic: " + path.string());
  require_io(read_u32(is) == kCheckpointVersion, "unsupported checkpoint version");
  std::uint64_t hash = read_u64(is);
  if (expected_hash != 0)
    require(hash == expected_hash,
            "checkpoint was written for a different model config: " + path.string());
  std::uint32_t count = read_u32(is);
  ParamStore params;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = read_str(is);
    std::uint32_t rank = read_u32(is);
    require_io(rank <= 8, "checkpoint tensor rank too large");
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(read_u32(is));
    Tensor& t = params.create(name, shape);
    read_f64s(is, t.data.data(), t.data.size());
  }
  return params;
}

inline std::uint64_t checkpoint_hash(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require_io(bool(is), "cannot open checkpoint: " + path.string());
  char magic[8];
  is.read(magic, 8);
  require_io(bool(is), "bad checkpoint header");
  read_u32(is);
  return read_u64(is);
}

}  // namespace egoact
