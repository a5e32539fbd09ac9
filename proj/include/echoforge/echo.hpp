#pragma once

#include <Eigen/Core>
#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "echoforge/labels.hpp"
#include "echoforge/signal.hpp"

namespace echoforge {

/// Propagation paths: microphone x speaker. SS = same side, DS = different side.
enum class EchoChannel : std::uint8_t { SS1 = 0, DS1 = 1, DS2 = 2, SS2 = 3 };

std::string_view channel_name(EchoChannel c);

inline constexpr double kMetersPerBin = kSpeedOfSound / (2.0 * kSampleRate);  // 3.43 mm
inline constexpr double kSecondsPerFrame = kSweepSamples / kSampleRate;       // 12 ms

/// Correlation strength indexed by (round-trip distance bin, sweep frame).
struct EchoProfile {
  Eigen::MatrixXd values;  // rows = distance bins, cols = time frames
  EchoChannel channel = EchoChannel::SS1;

  static constexpr double meters_per_bin = kMetersPerBin;
  static constexpr double seconds_per_frame = kSecondsPerFrame;

  Eigen::Index bins() const { return values.rows(); }
  Eigen::Index frames() const { return values.cols(); }
};

/// Nearest distance bin for a one-way reflector distance in metres.
int distance_to_bin(double meters);

/// Circular cross-correlation via the frequency domain. Holds the conjugate
/// reference spectrum so repeated frames cost one forward and one inverse FFT.
class Correlator {
 public:
  explicit Correlator(const Eigen::VectorXd& reference);

  /// out[lag] = sum_n frame[n] * reference[(n - lag) mod N]
  Eigen::VectorXd operator()(const Eigen::VectorXd& frame) const;
  Eigen::Index length() const { return length_; }

 private:
  Eigen::Index length_;
  Eigen::VectorXcd reference_conj_;
};

Eigen::VectorXd cross_correlate(const Eigen::VectorXd& frame, const Eigen::VectorXd& reference);

EchoProfile build_echo_profile(std::span<const Eigen::VectorXd> frames, const Eigen::VectorXd& reference,
                               EchoChannel channel);

/// D[:, t] = E[:, t] - E[:, t-1]; column 0 is zero.
EchoProfile differential_profile(const EchoProfile& ep);

EchoProfile crop_window(const EchoProfile& ep, Eigen::Index start_bin, Eigen::Index n_bins, Eigen::Index start_frame,
                        Eigen::Index n_frames);

/// Classifier input: 155 time frames x 70 distance bins x 8 channels.
/// Channels 0-3 are SS1, DS1, DS2, SS2 profiles; 4-7 their differentials.
struct EchoTensor {
  static constexpr int kFrames = 155;
  static constexpr int kBins = 70;
  static constexpr int kChannels = 8;

  /// Each plane is bins x frames, matching EchoProfile orientation.
  std::array<Eigen::MatrixXf, kChannels> planes;
  std::optional<GestureLabel> label;

  static EchoTensor zeros();
  float& at(int frame, int bin, int channel) { return planes[channel](bin, frame); }
  float at(int frame, int bin, int channel) const { return planes[channel](bin, frame); }
  bool has_valid_shape() const;
};

EchoTensor stack_tensor(std::span<const EchoProfile> profiles, std::span<const EchoProfile> diffs);

/// Inverse of stack_tensor (values widened back to double).
std::array<EchoProfile, EchoTensor::kChannels> unstack_tensor(const EchoTensor& t);

/// Band configuration for the two-speaker, two-microphone front end.
struct SensingConfig {
  SweepConfig speaker1 = speaker1_sweep();
  SweepConfig speaker2 = speaker2_sweep();
  FilterSpec filter1 = speaker1_filter();
  FilterSpec filter2 = speaker2_filter();
  int start_bin = 0;
};

/// Mic streams -> four echo profiles -> cropped 8-channel tensors.
class EchoPipeline {
 public:
  explicit EchoPipeline(const SensingConfig& cfg = {});

  /// Full-frame profiles (600 bins) for SS1, DS1, DS2, SS2.
  std::array<EchoProfile, 4> profiles(const PcmStream& mic1, const PcmStream& mic2, int t0 = 0) const;

  /// Crops 70 bins x 155 frames starting at start_frame, differentiates the
  /// crops, and stacks them.
  EchoTensor tensor(const std::array<EchoProfile, 4>& full, Eigen::Index start_frame) const;

  const SensingConfig& config() const { return cfg_; }
  const Eigen::VectorXd& reference(int speaker) const { return speaker == 0 ? ref1_ : ref2_; }
  const FilterKernel& kernel(int speaker) const { return speaker == 0 ? kernel1_ : kernel2_; }

 private:
  SensingConfig cfg_;
  Eigen::VectorXd ref1_, ref2_;
  FilterKernel kernel1_, kernel2_;
};

}  // namespace echoforge
