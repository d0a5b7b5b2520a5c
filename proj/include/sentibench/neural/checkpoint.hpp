#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentibench/error.hpp"
#include "sentibench/neural/params.hpp"

namespace sentibench {

// Checkpoint layout (all integers little-endian):
//   bytes 0..7   magic "SBNCKPT1"
//   u32          format version (1)
//   u64          vocabulary FNV-1a hash
//   u32          vocabulary size
//   u32          hyperparameter JSON length, then that many JSON bytes
//   tensors      float32 blocks, row-major, in for_each_tensor order
// Shapes are fully determined by the hyperparameters and vocabulary size,
// so tensors carry no per-block headers; the total size is validated.
static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

inline constexpr char kCheckpointMagic[8] = {'S', 'B', 'N', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  HyperParams hp;
  std::uint64_t vocab_hash = 0;
  std::size_t vocab_size = 0;
  NeuralParams<double> params;
};

namespace detail {

template <typename T>
void write_raw(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T read_raw(const std::string& data, std::size_t& pos) {
  if (pos + sizeof(T) > data.size()) throw InputError("checkpoint truncated");
  T value;
  std::memcpy(&value, data.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const NeuralParams<double>& params,
                            const HyperParams& hp, std::uint64_t vocab_hash,
                            std::size_t vocab_size) {
  std::string out;
  out.append(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::write_raw<std::uint32_t>(out, kCheckpointVersion);
  detail::write_raw<std::uint64_t>(out, vocab_hash);
  detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(vocab_size));
  const std::string hp_json = nlohmann::json(hp).dump();
  detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(hp_json.size()));
  out.append(hp_json);
  for_each_tensor(params, [&out](const std::string&, const Mat<double>& t, DecayKind) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        detail::write_raw<float>(out, static_cast<float>(t(r, c)));
      }
    }
  });

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw InputError("cannot open checkpoint for writing: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("checkpoint write failed: " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot open checkpoint: " + path.string());
  std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  if (data.size() < sizeof(kCheckpointMagic) ||
      std::memcmp(data.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw InputError("not a checkpoint file: " + path.string());
  }
  pos += sizeof(kCheckpointMagic);
  const auto version = detail::read_raw<std::uint32_t>(data, pos);
  if (version != kCheckpointVersion) {
    throw InputError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.vocab_hash = detail::read_raw<std::uint64_t>(data, pos);
  ckpt.vocab_size = detail::read_raw<std::uint32_t>(data, pos);
  const auto hp_len = detail::read_raw<std::uint32_t>(data, pos);
  if (pos + hp_len > data.size()) throw InputError("checkpoint truncated");
  try {
    ckpt.hp = nlohmann::json::parse(data.substr(pos, hp_len)).get<HyperParams>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("checkpoint hyperparameters unreadable: ") + e.what());
  }
  pos += hp_len;

  ckpt.params = zeros_like_params<double>(ckpt.hp, ckpt.vocab_size);
  const std::size_t expected =
      pos + count_params(ckpt.hp, ckpt.vocab_size) * sizeof(float);
  if (data.size() != expected) throw InputError("checkpoint size mismatch");
  for_each_tensor(ckpt.params, [&data, &pos](const std::string&, Mat<double>& t, DecayKind) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        t(r, c) = static_cast<double>(detail::read_raw<float>(data, pos));
      }
    }
  });
  return ckpt;
}

}  // namespace sentibench
