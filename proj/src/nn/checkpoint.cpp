// SPDX-License-Identifier: Apache-2.0
#include "pnprl/nn/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace pnprl::nn {

namespace {
constexpr char kMagic[] = "PNPRLCKPT1\n";
constexpr std::size_t kMagicLen = sizeof(kMagic) - 1;
}  // namespace

void save_checkpoint(const std::string& path, const ParamList& arrays,
                     const nlohmann::json& meta) {
  nlohmann::json header;
  header["meta"] = meta;
  auto& list = header["arrays"] = nlohmann::json::array();
  for (const auto& [name, tensor] : arrays) {
    nlohmann::json a;
    a["name"] = name;
    a["shape"] = tensor->shape();
    list.push_back(std::move(a));
  }
  const std::string htext = header.dump();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f.write(kMagic, static_cast<std::streamsize>(kMagicLen));
  const std::uint64_t hlen = htext.size();
  f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  f.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const auto& [name, tensor] : arrays)
    f.write(reinterpret_cast<const char*>(tensor->data()),
            static_cast<std::streamsize>(tensor->numel() * sizeof(double)));
  if (!f) throw std::runtime_error("save_checkpoint: write failed " + path);
}

namespace {

nlohmann::json read_header(std::ifstream& f, const std::string& path) {
  char magic[kMagicLen];
  f.read(magic, static_cast<std::streamsize>(kMagicLen));
  if (!f || std::string(magic, kMagicLen) != kMagic)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  std::uint64_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string htext(hlen, '\0');
  f.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!f) throw std::runtime_error("checkpoint: truncated header in " + path);
  return nlohmann::json::parse(htext);
}

}  // namespace

nlohmann::json load_checkpoint(const std::string& path, const ParamList& arrays,
                               bool allow_extra) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  nlohmann::json header = read_header(f, path);

  std::map<std::string, Tensor*> want;
  for (const auto& [name, tensor] : arrays) want[name] = tensor;

  std::size_t matched = 0;
  for (const auto& a : header.at("arrays")) {
    const std::string name = a.at("name");
    const std::vector<int> shape = a.at("shape").get<std::vector<int>>();
    Tensor probe(shape);
    auto it = want.find(name);
    if (it == want.end()) {
      if (!allow_extra)
        throw std::runtime_error("load_checkpoint: unexpected array " + name);
      f.seekg(static_cast<std::streamoff>(probe.numel() * sizeof(double)),
              std::ios::cur);
      continue;
    }
    if (it->second->shape() != shape)
      throw std::runtime_error("load_checkpoint: shape mismatch for " + name);
    f.read(reinterpret_cast<char*>(it->second->data()),
           static_cast<std::streamsize>(it->second->numel() * sizeof(double)));
    ++matched;
  }
  if (!f) throw std::runtime_error("load_checkpoint: truncated data in " + path);
  if (matched != want.size())
    throw std::runtime_error("load_checkpoint: missing arrays in " + path);
  return header.at("meta");
}

nlohmann::json read_checkpoint_meta(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_checkpoint_meta: cannot open " + path);
  return read_header(f, path).at("meta");
}

std::string config_hash(const nlohmann::json& cfg) {
  const std::size_t h = std::hash<std::string>{}(cfg.dump());
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace pnprl::nn
