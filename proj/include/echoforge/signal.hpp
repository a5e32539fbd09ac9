#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace echoforge {

/// Pipeline-wide sampling rate. With c = 343 m/s and round-trip ranging this
/// gives c / (2 fs) = 3.43 mm per correlation lag.
inline constexpr double kSampleRate = 50000.0;
inline constexpr double kSpeedOfSound = 343.0;
inline constexpr int kSweepSamples = 600;  // 12 ms at 50 kHz

enum class MicId : std::uint8_t { Mic1 = 0, Mic2 = 1 };

/// One speaker's linear up-chirp.
struct SweepConfig {
  double f_start = 18000.0;
  double f_end = 21000.0;
  double duration = 0.012;
  double sample_rate = kSampleRate;
  double amplitude = 1.0;
  /// Fraction of the sweep covered by raised-cosine ramps (Tukey window).
  /// Limits spectral spill past the band edges; 0 gives a rectangular sweep.
  double taper = 0.3;

  /// Number of samples, validated to be integral.
  int length() const;
  /// Throws ConfigError on Nyquist violations, non-integral length, bad taper.
  void validate() const;
};

/// Speaker 1 (18-21 kHz) and speaker 2 (21.5-24.5 kHz).
SweepConfig speaker1_sweep();
SweepConfig speaker2_sweep();

struct PcmStream {
  Eigen::VectorXd samples;
  double sample_rate = kSampleRate;
  MicId channel_id = MicId::Mic1;

  Eigen::Index size() const { return samples.size(); }
};

struct FilterSpec {
  double pass_low = 18000.0;
  double pass_high = 21000.0;
  double transition_width = 500.0;
  double stop_attenuation = 40.0;  // dB
  int tap_count = 255;

  void validate() const;
};

/// Band-pass specs matched to the two speaker bands.
FilterSpec speaker1_filter();
FilterSpec speaker2_filter();

struct FilterKernel {
  Eigen::VectorXd taps;
  /// Worst-case stop-band rejection measured on a dense frequency grid, dB.
  double achieved_attenuation = 0.0;
};

PcmStream generate_sweep(const SweepConfig& cfg);

/// Hamming-windowed sinc band-pass, normalized to unit gain at band centre.
/// Throws DesignError (carrying the achieved rejection) when the measured
/// stop band misses spec.stop_attenuation.
FilterKernel design_bandpass(const FilterSpec& spec, double sample_rate = kSampleRate);

/// Magnitude response |H(f)| of an FIR kernel.
double magnitude_response(const Eigen::VectorXd& taps, double freq, double sample_rate = kSampleRate);

/// Zero-phase FIR filtering: the symmetric kernel is centred on each output
/// sample, so output length equals input length and echo timing is unbiased.
PcmStream apply_filter(const PcmStream& stream, const FilterKernel& kernel);

/// Non-overlapping sweep-aligned frames starting at t0; the trailing partial
/// frame is dropped.
std::vector<Eigen::VectorXd> segment_frames(const PcmStream& stream, int frame_len, int t0 = 0);

}  // namespace echoforge
