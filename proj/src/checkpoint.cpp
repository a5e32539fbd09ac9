#include "echoforge/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "echoforge/errors.hpp"

namespace echoforge::nn {

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IngestError(path.string() + ": truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams<float>& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IngestError("cannot write " + path.string());
  os.write("EFCK", 4);
  put<std::uint16_t>(os, kCheckpointVersion);
  put<std::uint32_t>(os, params.version);
  put<std::uint64_t>(os, params.init_seed);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(params.blocks.size()));
  for (std::size_t i = 0; i < params.blocks.size(); ++i) {
    const auto& name = params.names[i];
    const auto& b = params.blocks[i];
    put<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(b.rows()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(b.cols()));
    os.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size() * sizeof(float)));
  }
  if (!os) throw IngestError("failed writing " + path.string());
}

ModelParams<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IngestError("cannot open checkpoint " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "EFCK", 4) != 0) throw IngestError(path.string() + ": not a checkpoint");
  if (get<std::uint16_t>(is, path) != kCheckpointVersion)
    throw IngestError(path.string() + ": unsupported checkpoint version");
  ModelParams<float> p;
  p.version = get<std::uint32_t>(is, path);
  p.init_seed = get<std::uint64_t>(is, path);
  const auto n = get<std::uint32_t>(is, path);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto len = get<std::uint16_t>(is, path);
    std::string name(len, '\0');
    is.read(name.data(), len);
    const auto rows = get<std::uint32_t>(is, path);
    const auto cols = get<std::uint32_t>(is, path);
    Mat<float> b(rows, cols);
    is.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(b.size() * sizeof(float)));
    if (!is) throw IngestError(path.string() + ": truncated block " + name);
    if (!b.allFinite()) throw NumericError(path.string() + ": non-finite values in block " + name);
    p.names.push_back(std::move(name));
    p.blocks.push_back(std::move(b));
  }
  return p;
}

}  // namespace echoforge::nn
