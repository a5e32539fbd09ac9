#pragma once

#include <filesystem>
#include <vector>

#include "echoforge/signal.hpp"

namespace echoforge::wav {

enum class SampleFormat { Pcm16, Float32 };

struct WavData {
  int sample_rate = 0;
  SampleFormat format = SampleFormat::Pcm16;
  /// De-interleaved channels, normalized to [-1, 1] for 16-bit input.
  std::vector<Eigen::VectorXd> channels;
};

/// Mono or interleaved stereo, 16-bit LE integer or 32-bit IEEE float.
WavData read(const std::filesystem::path& path);

/// All channels must have equal length. 16-bit output is clipped to [-1, 1).
void write(const std::filesystem::path& path, const std::vector<Eigen::VectorXd>& channels, int sample_rate,
           SampleFormat format);

/// Reads a mono file into a PcmStream and checks the pipeline sample rate.
PcmStream read_stream(const std::filesystem::path& path, MicId channel);

}  // namespace echoforge::wav
