#include "echoforge/wav.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "echoforge/errors.hpp"

namespace echoforge::wav {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

WavData read(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IngestError("cannot open WAV file " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  const auto fail = [&](const std::string& why) { throw IngestError(path.string() + ": " + why); };

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    fail("not a RIFF/WAVE file");

  std::uint16_t format_tag = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const auto size = load<std::uint32_t>(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (body + 16 > bytes.size()) fail("truncated fmt chunk");
      format_tag = load<std::uint16_t>(bytes.data() + body);
      channels = load<std::uint16_t>(bytes.data() + body + 2);
      rate = load<std::uint32_t>(bytes.data() + body + 4);
      bits = load<std::uint16_t>(bytes.data() + body + 14);
      if (format_tag == kFormatExtensible && size >= 40)
        format_tag = load<std::uint16_t>(bytes.data() + body + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, bytes.size() - body);
      if (data_size < size) fail("truncated data chunk (" + std::to_string(data_size) + " of " +
                                 std::to_string(size) + " bytes)");
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) fail("missing fmt chunk");
  if (data == nullptr) fail("missing data chunk");
  if (channels < 1 || channels > 2) fail("unsupported channel count " + std::to_string(channels));

  WavData out;
  out.sample_rate = static_cast<int>(rate);
  std::size_t width = 0;
  if (format_tag == kFormatPcm && bits == 16) {
    out.format = SampleFormat::Pcm16;
    width = 2;
  } else if (format_tag == kFormatFloat && bits == 32) {
    out.format = SampleFormat::Float32;
    width = 4;
  } else {
    fail("unsupported sample format (tag " + std::to_string(format_tag) + ", " + std::to_string(bits) + " bits)");
  }

  const std::size_t frame_bytes = width * channels;
  const std::size_t frames = data_size / frame_bytes;
  out.channels.assign(channels, Eigen::VectorXd(static_cast<Eigen::Index>(frames)));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = data + i * frame_bytes + c * width;
      double v = out.format == SampleFormat::Pcm16 ? load<std::int16_t>(p) / 32768.0 : load<float>(p);
      if (!std::isfinite(v)) fail("non-finite sample at frame " + std::to_string(i));
      out.channels[c][static_cast<Eigen::Index>(i)] = v;
    }
  }
  return out;
}

void write(const std::filesystem::path& path, const std::vector<Eigen::VectorXd>& channels, int sample_rate,
           SampleFormat format) {
  if (channels.empty() || channels.size() > 2) throw ConfigError("WAV writer supports 1 or 2 channels");
  const Eigen::Index frames = channels.front().size();
  for (const auto& c : channels)
    if (c.size() != frames) throw ShapeError("WAV channels differ in length");

  const std::uint16_t n_channels = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t width = format == SampleFormat::Pcm16 ? 2 : 4;
  const std::uint32_t data_size = static_cast<std::uint32_t>(frames) * n_channels * width;

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IngestError("cannot write WAV file " + path.string());
  os.write("RIFF", 4);
  put<std::uint32_t>(os, 36 + data_size);
  os.write("WAVEfmt ", 8);
  put<std::uint32_t>(os, 16);
  put<std::uint16_t>(os, format == SampleFormat::Pcm16 ? kFormatPcm : kFormatFloat);
  put<std::uint16_t>(os, n_channels);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(sample_rate));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(sample_rate) * n_channels * width);
  put<std::uint16_t>(os, static_cast<std::uint16_t>(n_channels * width));
  put<std::uint16_t>(os, static_cast<std::uint16_t>(8 * width));
  os.write("data", 4);
  put<std::uint32_t>(os, data_size);
  for (Eigen::Index i = 0; i < frames; ++i) {
    for (const auto& c : channels) {
      if (format == SampleFormat::Pcm16) {
        const double scaled = std::round(std::clamp(c[i], -1.0, 1.0) * 32768.0);
        put<std::int16_t>(os, static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
      } else {
        put<float>(os, static_cast<float>(c[i]));
      }
    }
  }
  if (!os) throw IngestError("failed writing " + path.string());
}

PcmStream read_stream(const std::filesystem::path& path, MicId channel) {
  WavData wav = read(path);
  if (wav.sample_rate != static_cast<int>(kSampleRate))
    throw IngestError(path.string() + ": sample rate " + std::to_string(wav.sample_rate) + " Hz, expected " +
                      std::to_string(static_cast<int>(kSampleRate)) + " Hz");
  if (wav.channels.size() != 1) throw IngestError(path.string() + ": expected a mono file");
  PcmStream s;
  s.samples = std::move(wav.channels.front());
  s.channel_id = channel;
  return s;
}

}  // namespace echoforge::wav
