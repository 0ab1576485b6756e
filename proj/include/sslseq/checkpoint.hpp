// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/network.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace sslseq::nn {

inline constexpr char kCheckpointMagic[] = "SSLSEQ01";
inline constexpr int kCheckpointOpVersion = 1;

/// Container: 8 magic bytes, little-endian uint64 header length, JSON header
/// (kind, spec, tensor table, op version, seed, step, extra), then each
/// tensor as row-major little-endian float64 in the table's order.
struct Checkpoint {
  nlohmann::json header;
  std::vector<std::pair<std::string, Mat>> tensors;

  const Mat& tensor(const std::string& name) const;
  bool has(const std::string& name) const;
};

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out);
void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::filesystem::path& path);

Checkpoint to_checkpoint(const Classifier& net, std::uint64_t seed = 0, long step = 0,
                         nlohmann::json extra = nlohmann::json::object());
Classifier classifier_from_checkpoint(const Checkpoint& ckpt);

Checkpoint to_checkpoint(const Autoencoder& ae, std::uint64_t seed = 0, long step = 0,
                         nlohmann::json extra = nlohmann::json::object());
Autoencoder autoencoder_from_checkpoint(const Checkpoint& ckpt);

}  // namespace sslseq::nn
