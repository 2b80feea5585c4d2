#include "restyle/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "restyle/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace restyle {

namespace {

constexpr char kMagic[8] = {'R', 'S', 'T', 'Y', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is, const std::string& path) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw IoError("checkpoint load: truncated file " + path);
  return value;
}

}  // namespace

const TensorBlob* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, blob] : tensors)
    if (n == name) return &blob;
  return nullptr;
}

void save_checkpoint(const std::string& path,
                     const std::vector<NamedTensor>& params,
                     std::uint64_t vocab_hash, const std::string& config_json) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("checkpoint save: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  write_pod(os, kVersion);
  write_pod(os, vocab_hash);
  write_pod(os, static_cast<std::uint64_t>(config_json.size()));
  os.write(config_json.data(),
           static_cast<std::streamsize>(config_json.size()));
  write_pod(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    write_pod(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    const auto& shape = p.tensor.shape();
    write_pod(os, static_cast<std::uint32_t>(shape.size()));
    for (int d : shape) write_pod(os, static_cast<std::int32_t>(d));
    os.write(reinterpret_cast<const char*>(p.tensor.data().data()),
             static_cast<std::streamsize>(p.tensor.numel() * sizeof(double)));
  }
  if (!os) throw IoError("checkpoint save: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint load: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("checkpoint load: " + path + " is not a checkpoint file");
  const auto version = read_pod<std::uint32_t>(is, path);
  if (version != kVersion)
    throw IoError("checkpoint load: unsupported version " +
                  std::to_string(version) + " in " + path);

  Checkpoint ckpt;
  ckpt.vocab_hash = read_pod<std::uint64_t>(is, path);
  const auto config_len = read_pod<std::uint64_t>(is, path);
  ckpt.config_json.resize(config_len);
  is.read(ckpt.config_json.data(), static_cast<std::streamsize>(config_len));
  if (!is) throw IoError("checkpoint load: truncated file " + path);

  const auto count = read_pod<std::uint32_t>(is, path);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint32_t>(is, path);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const auto ndim = read_pod<std::uint32_t>(is, path);
    TensorBlob blob;
    std::size_t numel = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      int extent = read_pod<std::int32_t>(is, path);
      blob.shape.push_back(extent);
      numel *= static_cast<std::size_t>(extent);
    }
    blob.data.resize(numel);
    is.read(reinterpret_cast<char*>(blob.data.data()),
            static_cast<std::streamsize>(numel * sizeof(double)));
    if (!is) throw IoError("checkpoint load: truncated file " + path);
    ckpt.tensors.emplace_back(std::move(name), std::move(blob));
  }
  return ckpt;
}

void load_params(const Checkpoint& ckpt, std::vector<NamedTensor> params,
                 std::optional<std::uint64_t> expect_vocab_hash) {
  if (expect_vocab_hash && ckpt.vocab_hash != *expect_vocab_hash)
    throw IoError("checkpoint load: vocabulary hash mismatch (file " +
                  std::to_string(ckpt.vocab_hash) + ", expected " +
                  std::to_string(*expect_vocab_hash) + ")");
  for (auto& p : params) {
    const TensorBlob* blob = ckpt.find(p.name);
    if (!blob)
      throw IoError("checkpoint load: missing tensor '" + p.name + "'");
    if (blob->shape != p.tensor.shape())
      throw IoError("checkpoint load: shape mismatch for '" + p.name + "'");
    std::copy(blob->data.begin(), blob->data.end(), p.tensor.data().begin());
  }
}

std::vector<std::vector<double>> snapshot_params(
    const std::vector<NamedTensor>& params) {
  std::vector<std::vector<double>> snap;
  snap.reserve(params.size());
  for (const auto& p : params)
    snap.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
  return snap;
}

void restore_params(std::vector<NamedTensor> params,
                    const std::vector<std::vector<double>>& snapshot) {
  if (params.size() != snapshot.size())
    throw ContractError("restore_params: snapshot size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (snapshot[i].size() != params[i].tensor.numel())
      throw ContractError("restore_params: tensor size mismatch for '" +
                          params[i].name + "'");
    std::copy(snapshot[i].begin(), snapshot[i].end(),
              params[i].tensor.data().begin());
  }
}

std::uint64_t params_hash(const std::vector<NamedTensor>& params) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* bytes, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& p : params) {
    mix(p.name.data(), p.name.size());
    mix(p.tensor.data().data(), p.tensor.numel() * sizeof(double));
  }
  return h;
}

}  // namespace restyle
