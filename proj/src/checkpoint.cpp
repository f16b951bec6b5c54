// SPDX-License-Identifier: Apache-2.0
#include "consnet/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace consnet {

namespace {

constexpr char kMagic[4] = {'C', 'N', 'S', 'B'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return value;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  const auto len = read_pod<std::uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw std::runtime_error("checkpoint: truncated string");
  return s;
}

struct TensorCollector : ParamVisitor {
  std::vector<std::pair<std::string, Tensor*>> tensors;
  void visit(const std::string& name, Tensor& tensor, ParamKind) override {
    tensors.emplace_back(name, &tensor);
  }
};

std::ifstream open_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  return in;
}

}  // namespace

void save_checkpoint(Model& model, const std::string& config_json, std::uint64_t seed,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(kMagic, 4);
  write_pod<std::uint32_t>(out, kVersion);
  write_pod<std::uint64_t>(out, seed);
  write_string(out, config_json);

  TensorCollector collector;
  model.visit_params(collector);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(collector.tensors.size()));
  for (const auto& [name, tensor] : collector.tensors) {
    write_string(out, name);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(tensor->rows()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(tensor->cols()));
    out.write(reinterpret_cast<const char*>(tensor->data()),
              static_cast<std::streamsize>(sizeof(real)) * tensor->size());
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

LoadedCheckpoint peek_checkpoint(const std::string& path) {
  std::ifstream in = open_checkpoint(path);
  LoadedCheckpoint loaded;
  loaded.seed = read_pod<std::uint64_t>(in);
  loaded.config_json = read_string(in);
  return loaded;
}

LoadedCheckpoint load_checkpoint(Model& model, const std::string& path) {
  std::ifstream in = open_checkpoint(path);
  LoadedCheckpoint loaded;
  loaded.seed = read_pod<std::uint64_t>(in);
  loaded.config_json = read_string(in);

  TensorCollector collector;
  model.visit_params(collector);
  const auto count = read_pod<std::uint32_t>(in);
  if (count != collector.tensors.size()) {
    throw std::runtime_error("checkpoint: tensor count mismatch");
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = read_string(in);
    const auto& [expected_name, tensor] = collector.tensors[i];
    if (name != expected_name) {
      throw std::runtime_error("checkpoint: tensor '" + name + "' where '" + expected_name +
                               "' expected");
    }
    const auto rows = read_pod<std::uint32_t>(in);
    const auto cols = read_pod<std::uint32_t>(in);
    if (static_cast<int>(rows) != tensor->rows() || static_cast<int>(cols) != tensor->cols()) {
      throw std::runtime_error("checkpoint: shape mismatch for '" + name + "'");
    }
    in.read(reinterpret_cast<char*>(tensor->data()),
            static_cast<std::streamsize>(sizeof(real)) * tensor->size());
    if (!in) throw std::runtime_error("checkpoint: truncated tensor '" + name + "'");
  }
  return loaded;
}

}  // namespace consnet
