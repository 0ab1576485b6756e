// SPDX-License-Identifier: Apache-2.0
#include "sslseq/checkpoint.hpp"

#include "sslseq/data_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace sslseq::nn {

const Mat& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return m;
  }
  throw std::out_of_range("checkpoint has no tensor '" + name + "'");
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return true;
  }
  return false;
}

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  nlohmann::json header = ckpt.header;
  header["op_version"] = kCheckpointOpVersion;
  header["tensors"] = nlohmann::json::array();
  for (const auto& [name, m] : ckpt.tensors) {
    header["tensors"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  }
  const std::string text = header.dump();
  out.write(kCheckpointMagic, 8);
  std::uint64_t len = text.size();
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((len >> (8 * i)) & 0xff));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, m] : ckpt.tensors) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) data::write_f64_le(out, m(r, c));
    }
  }
}

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
  write_checkpoint(ckpt, out);
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw std::runtime_error("not an sslseq checkpoint (bad magic)");
  }
  unsigned char lenb[8];
  if (!in.read(reinterpret_cast<char*>(lenb), 8)) throw std::runtime_error("truncated checkpoint header");
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(lenb[i]) << (8 * i);
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw std::runtime_error("truncated checkpoint header");
  Checkpoint ckpt;
  ckpt.header = nlohmann::json::parse(text);
  if (ckpt.header.value("op_version", 0) != kCheckpointOpVersion) {
    throw std::runtime_error("unsupported checkpoint op version");
  }
  for (const auto& t : ckpt.header.at("tensors")) {
    Mat m(t.at("rows").get<Eigen::Index>(), t.at("cols").get<Eigen::Index>());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data::read_f64_le(in);
    }
    ckpt.tensors.emplace_back(t.at("name").get<std::string>(), std::move(m));
  }
  return ckpt;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in);
}

namespace {

template <class Net>
void load_tensors(Net& net, const Checkpoint& ckpt) {
  auto assign = [&](const std::string& name, Mat& m) {
    const Mat& src = ckpt.tensor(name);
    if (src.rows() != m.rows() || src.cols() != m.cols()) {
      throw DimensionError("checkpoint tensor '" + name + "' has the wrong shape");
    }
    m = src;
  };
  if constexpr (requires { net.for_each_tensor(std::declval<ParamVisitor>()); }) {
    net.for_each_tensor(assign);
  } else {
    net.for_each_param(assign);
  }
}

}  // namespace

Checkpoint to_checkpoint(const Classifier& net, std::uint64_t seed, long step, nlohmann::json extra) {
  Checkpoint ckpt;
  ckpt.header["kind"] = "classifier";
  ckpt.header["spec"] = to_json(net.spec);
  ckpt.header["bn_momentum"] = net.bn.momentum;
  ckpt.header["bn_epsilon"] = net.bn.epsilon;
  ckpt.header["seed"] = seed;
  ckpt.header["step"] = step;
  ckpt.header["extra"] = std::move(extra);
  net.for_each_tensor([&](const std::string& n, const Mat& m) { ckpt.tensors.emplace_back(n, m); });
  return ckpt;
}

Classifier classifier_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.header.value("kind", "") != "classifier") throw std::runtime_error("checkpoint is not a classifier");
  Classifier net = Classifier::init(network_spec_from_json(ckpt.header.at("spec")), RngSeed{0});
  net.bn.momentum = ckpt.header.value("bn_momentum", net.bn.momentum);
  net.bn.epsilon = ckpt.header.value("bn_epsilon", net.bn.epsilon);
  load_tensors(net, ckpt);
  return net;
}

Checkpoint to_checkpoint(const Autoencoder& ae, std::uint64_t seed, long step, nlohmann::json extra) {
  Checkpoint ckpt;
  ckpt.header["kind"] = "autoencoder";
  ckpt.header["spec"] = to_json(ae.spec);
  ckpt.header["reverse_decode"] = ae.reverse_decode;
  ckpt.header["seed"] = seed;
  ckpt.header["step"] = step;
  ckpt.header["extra"] = std::move(extra);
  ae.for_each_param([&](const std::string& n, const Mat& m) { ckpt.tensors.emplace_back(n, m); });
  return ckpt;
}

Autoencoder autoencoder_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.header.value("kind", "") != "autoencoder") throw std::runtime_error("checkpoint is not an autoencoder");
  Autoencoder ae = Autoencoder::init(network_spec_from_json(ckpt.header.at("spec")), RngSeed{0});
  ae.reverse_decode = ckpt.header.value("reverse_decode", false);
  load_tensors(ae, ckpt);
  return ae;
}

}  // namespace sslseq::nn
