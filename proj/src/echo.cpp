#include "echoforge/echo.hpp"

#include <cmath>
#include <sstream>
#include <unsupported/Eigen/FFT>

#include "echoforge/errors.hpp"

namespace echoforge {

std::string_view channel_name(EchoChannel c) {
  static constexpr std::array<std::string_view, 4> kNames{"SS1", "DS1", "DS2", "SS2"};
  return kNames[static_cast<int>(c)];
}

int distance_to_bin(double meters) { return static_cast<int>(std::lround(meters / kMetersPerBin)); }

Correlator::Correlator(const Eigen::VectorXd& reference) : length_(reference.size()) {
  if (length_ == 0) throw ShapeError("Correlator: empty reference");
  Eigen::FFT<double> fft;
  fft.fwd(reference_conj_, reference);
  reference_conj_ = reference_conj_.conjugate();
}

Eigen::VectorXd Correlator::operator()(const Eigen::VectorXd& frame) const {
  if (frame.size() != length_) {
    std::ostringstream msg;
    msg << "cross_correlate: frame length " << frame.size() << " != reference length " << length_;
    throw ShapeError(msg.str());
  }
  Eigen::FFT<double> fft;
  Eigen::VectorXcd spectrum;
  fft.fwd(spectrum, frame);
  spectrum = spectrum.cwiseProduct(reference_conj_);
  Eigen::VectorXd out;
  fft.inv(out, spectrum);
  return out;
}

Eigen::VectorXd cross_correlate(const Eigen::VectorXd& frame, const Eigen::VectorXd& reference) {
  if (frame.size() != reference.size())
    throw ShapeError("cross_correlate: frame length " + std::to_string(frame.size()) + " != reference length " +
                     std::to_string(reference.size()));
  return Correlator(reference)(frame);
}

EchoProfile build_echo_profile(std::span<const Eigen::VectorXd> frames, const Eigen::VectorXd& reference,
                               EchoChannel channel) {
  if (frames.empty()) throw ShapeError("build_echo_profile: no frames");
  const Correlator correlate(reference);
  EchoProfile ep;
  ep.channel = channel;
  ep.values.resize(reference.size(), static_cast<Eigen::Index>(frames.size()));
  for (std::size_t t = 0; t < frames.size(); ++t) ep.values.col(static_cast<Eigen::Index>(t)) = correlate(frames[t]);
  return ep;
}

EchoProfile differential_profile(const EchoProfile& ep) {
  if (ep.frames() < 2) throw ShapeError("differential_profile: need at least 2 time frames");
  EchoProfile d;
  d.channel = ep.channel;
  d.values.resize(ep.bins(), ep.frames());
  d.values.col(0).setZero();
  d.values.rightCols(ep.frames() - 1) = ep.values.rightCols(ep.frames() - 1) - ep.values.leftCols(ep.frames() - 1);
  return d;
}

EchoProfile crop_window(const EchoProfile& ep, Eigen::Index start_bin, Eigen::Index n_bins, Eigen::Index start_frame,
                        Eigen::Index n_frames) {
  if (start_bin < 0 || start_frame < 0 || n_bins <= 0 || n_frames <= 0 || start_bin + n_bins > ep.bins() ||
      start_frame + n_frames > ep.frames()) {
    std::ostringstream msg;
    msg << "crop_window: window bins [" << start_bin << ", " << start_bin + n_bins << ") x frames [" << start_frame
        << ", " << start_frame + n_frames << ") exceeds profile " << ep.bins() << " x " << ep.frames();
    const Eigen::Index bin_over = start_bin + n_bins - ep.bins();
    const Eigen::Index frame_over = start_frame + n_frames - ep.frames();
    if (bin_over > 0) msg << "; overhang " << bin_over << " bins";
    if (frame_over > 0) msg << "; overhang " << frame_over << " frames";
    throw ShapeError(msg.str());
  }
  EchoProfile out;
  out.channel = ep.channel;
  out.values = ep.values.block(start_bin, start_frame, n_bins, n_frames);
  return out;
}

EchoTensor EchoTensor::zeros() {
  EchoTensor t;
  for (auto& p : t.planes) p = Eigen::MatrixXf::Zero(kBins, kFrames);
  return t;
}

bool EchoTensor::has_valid_shape() const {
  for (const auto& p : planes)
    if (p.rows() != kBins || p.cols() != kFrames) return false;
  return true;
}

EchoTensor stack_tensor(std::span<const EchoProfile> profiles, std::span<const EchoProfile> diffs) {
  if (profiles.size() != 4 || diffs.size() != 4) throw ShapeError("stack_tensor: need 4 profiles and 4 differentials");
  EchoTensor t;
  for (int c = 0; c < 8; ++c) {
    const EchoProfile& src = c < 4 ? profiles[c] : diffs[c - 4];
    if (src.bins() != EchoTensor::kBins || src.frames() != EchoTensor::kFrames) {
      std::ostringstream msg;
      msg << "stack_tensor: channel " << c << " is " << src.bins() << " x " << src.frames() << ", expected "
          << EchoTensor::kBins << " x " << EchoTensor::kFrames;
      throw ShapeError(msg.str());
    }
    if (static_cast<int>(src.channel) != c % 4)
      throw ShapeError("stack_tensor: channel order must be SS1, DS1, DS2, SS2; got " +
                       std::string(channel_name(src.channel)) + " at slot " + std::to_string(c));
    if (!src.values.allFinite()) throw NumericError("stack_tensor: non-finite profile values");
    t.planes[c] = src.values.cast<float>();
  }
  return t;
}

std::array<EchoProfile, EchoTensor::kChannels> unstack_tensor(const EchoTensor& t) {
  std::array<EchoProfile, EchoTensor::kChannels> out;
  for (int c = 0; c < EchoTensor::kChannels; ++c) {
    out[c].channel = static_cast<EchoChannel>(c % 4);
    out[c].values = t.planes[c].cast<double>();
  }
  return out;
}

EchoPipeline::EchoPipeline(const SensingConfig& cfg)
    : cfg_(cfg),
      ref1_(generate_sweep(cfg.speaker1).samples),
      ref2_(generate_sweep(cfg.speaker2).samples),
      kernel1_(design_bandpass(cfg.filter1)),
      kernel2_(design_bandpass(cfg.filter2)) {
  if (ref1_.size() != ref2_.size()) throw ConfigError("both speakers must use the same sweep length");
}

std::array<EchoProfile, 4> EchoPipeline::profiles(const PcmStream& mic1, const PcmStream& mic2, int t0) const {
  if (mic1.size() != mic2.size()) throw ShapeError("microphone streams differ in length");
  const int frame_len = static_cast<int>(ref1_.size());
  const auto profile = [&](const PcmStream& mic, const FilterKernel& kernel, const Eigen::VectorXd& ref,
                           EchoChannel ch) {
    const auto frames = segment_frames(apply_filter(mic, kernel), frame_len, t0);
    return build_echo_profile(frames, ref, ch);
  };
  return {profile(mic1, kernel1_, ref1_, EchoChannel::SS1), profile(mic1, kernel2_, ref2_, EchoChannel::DS1),
          profile(mic2, kernel1_, ref1_, EchoChannel::DS2), profile(mic2, kernel2_, ref2_, EchoChannel::SS2)};
}

EchoTensor EchoPipeline::tensor(const std::array<EchoProfile, 4>& full, Eigen::Index start_frame) const {
  std::array<EchoProfile, 4> crops;
  std::array<EchoProfile, 4> diffs;
  for (int c = 0; c < 4; ++c) {
    crops[c] = crop_window(full[c], cfg_.start_bin, EchoTensor::kBins, start_frame, EchoTensor::kFrames);
    diffs[c] = differential_profile(crops[c]);
  }
  return stack_tensor(crops, diffs);
}

}  // namespace echoforge
