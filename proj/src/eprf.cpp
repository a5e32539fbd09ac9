#include "echoforge/eprf.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "echoforge/errors.hpp"

namespace echoforge::eprf {

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IngestError("EPRF: truncated record");
  return v;
}

}  // namespace

void write(std::ostream& os, const EchoProfile& ep, std::uint8_t channel_code) {
  os.write("EPRF", 4);
  put<std::uint16_t>(os, kVersion);
  put<std::uint8_t>(os, channel_code);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ep.bins()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ep.frames()));
  using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajorF data = ep.values.cast<float>();
  os.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(float)));
}

std::pair<EchoProfile, std::uint8_t> read(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "EPRF", 4) != 0) throw IngestError("EPRF: bad magic");
  const auto version = get<std::uint16_t>(is);
  if (version != kVersion) throw IngestError("EPRF: unsupported version " + std::to_string(version));
  const auto code = get<std::uint8_t>(is);
  if (code > 7) throw IngestError("EPRF: bad channel code " + std::to_string(code));
  const auto rows = get<std::uint32_t>(is);
  const auto cols = get<std::uint32_t>(is);
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> data(rows, cols);
  is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!is) throw IngestError("EPRF: truncated payload");
  EchoProfile ep;
  ep.channel = static_cast<EchoChannel>(code % 4);
  ep.values = data.cast<double>();
  return {std::move(ep), code};
}

void save(const std::filesystem::path& path, const EchoProfile& ep, std::uint8_t channel_code) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IngestError("cannot write " + path.string());
  write(os, ep, channel_code);
}

std::pair<EchoProfile, std::uint8_t> load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IngestError("cannot open " + path.string());
  return read(is);
}

void save_tensor(const std::filesystem::path& path, const EchoTensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IngestError("cannot write " + path.string());
  const auto planes = unstack_tensor(t);
  for (int c = 0; c < EchoTensor::kChannels; ++c) write(os, planes[c], static_cast<std::uint8_t>(c));
}

EchoTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IngestError("cannot open " + path.string());
  EchoTensor t;
  for (int c = 0; c < EchoTensor::kChannels; ++c) {
    auto [ep, code] = read(is);
    if (code != c) throw IngestError(path.string() + ": channel records out of order");
    t.planes[c] = ep.values.cast<float>();
  }
  if (!t.has_valid_shape()) throw ShapeError(path.string() + ": tensor is not 70 x 155 per channel");
  return t;
}

}  // namespace echoforge::eprf
