#include "echoforge/signal.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "echoforge/errors.hpp"

namespace echoforge {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

int SweepConfig::length() const {
  const double n = duration * sample_rate;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-6 || rounded < 1.0) {
    std::ostringstream msg;
    msg << "sweep duration " << duration << " s at " << sample_rate
        << " Hz is not a whole number of samples (" << n << ")";
    throw ConfigError(msg.str());
  }
  return static_cast<int>(rounded);
}

void SweepConfig::validate() const {
  if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be positive");
  const double nyquist = sample_rate / 2.0;
  if (!(f_start > 0.0) || f_start > f_end || !(f_end < nyquist)) {
    std::ostringstream msg;
    msg << "sweep band " << f_start << "-" << f_end << " Hz must satisfy 0 < f_start <= f_end < "
        << nyquist << " Hz (Nyquist)";
    throw ConfigError(msg.str());
  }
  if (!(amplitude > 0.0 && amplitude <= 1.0)) throw ConfigError("sweep amplitude must be in (0, 1]");
  if (!(taper >= 0.0 && taper <= 1.0)) throw ConfigError("sweep taper must be in [0, 1]");
  length();
}

SweepConfig speaker1_sweep() { return SweepConfig{}; }

SweepConfig speaker2_sweep() {
  SweepConfig cfg;
  cfg.f_start = 21500.0;
  cfg.f_end = 24500.0;
  return cfg;
}

void FilterSpec::validate() const {
  if (!(pass_low > 0.0 && pass_low < pass_high))
    throw ConfigError("filter pass band must satisfy 0 < pass_low < pass_high");
  if (!(transition_width > 0.0)) throw ConfigError("filter transition width must be positive");
  if (tap_count <= 0 || tap_count % 2 == 0)
    throw ConfigError("filter tap count must be odd and positive, got " + std::to_string(tap_count));
}

FilterSpec speaker1_filter() { return FilterSpec{}; }

FilterSpec speaker2_filter() {
  FilterSpec spec;
  spec.pass_low = 21500.0;
  spec.pass_high = 24500.0;
  return spec;
}

PcmStream generate_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const int n = cfg.length();
  const double period = n / cfg.sample_rate;
  const double rate = (cfg.f_end - cfg.f_start) / period;
  const int ramp = static_cast<int>(std::floor(cfg.taper * n / 2.0));

  PcmStream out;
  out.sample_rate = cfg.sample_rate;
  out.samples.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = i / cfg.sample_rate;
    const double phase = 2.0 * kPi * (cfg.f_start * t + 0.5 * rate * t * t);
    double envelope = 1.0;
    if (ramp > 0) {
      if (i < ramp)
        envelope = 0.5 * (1.0 - std::cos(kPi * i / ramp));
      else if (i >= n - ramp)
        envelope = 0.5 * (1.0 - std::cos(kPi * (n - 1 - i) / ramp));
    }
    out.samples[i] = cfg.amplitude * envelope * std::sin(phase);
  }
  return out;
}

double magnitude_response(const Eigen::VectorXd& taps, double freq, double sample_rate) {
  const double w = 2.0 * kPi * freq / sample_rate;
  std::complex<double> acc{0.0, 0.0};
  for (Eigen::Index k = 0; k < taps.size(); ++k) acc += taps[k] * std::polar(1.0, -w * static_cast<double>(k));
  return std::abs(acc);
}

FilterKernel design_bandpass(const FilterSpec& spec, double sample_rate) {
  spec.validate();
  const double nyquist = sample_rate / 2.0;
  if (!(spec.pass_high < nyquist)) throw ConfigError("filter pass band exceeds Nyquist");

  const int n = spec.tap_count;
  const double centre = 0.5 * (n - 1);
  const double lo = spec.pass_low / sample_rate;
  const double hi = spec.pass_high / sample_rate;

  FilterKernel kernel;
  kernel.taps.resize(n);
  for (int i = 0; i < n; ++i) {
    const double m = i - centre;
    const double ideal = 2.0 * hi * sinc(2.0 * hi * m) - 2.0 * lo * sinc(2.0 * lo * m);
    const double window = n == 1 ? 1.0 : 0.54 - 0.46 * std::cos(2.0 * kPi * i / (n - 1));
    kernel.taps[i] = ideal * window;
  }
  const double gain = magnitude_response(kernel.taps, 0.5 * (spec.pass_low + spec.pass_high), sample_rate);
  if (!(gain > 0.0)) throw DesignError("filter has zero gain at band centre", 0.0);
  kernel.taps /= gain;

  double worst = 0.0;
  const double step = 5.0;
  const double stop_low = spec.pass_low - spec.transition_width;
  const double stop_high = spec.pass_high + spec.transition_width;
  for (double f = 0.0; f <= stop_low; f += step) worst = std::max(worst, magnitude_response(kernel.taps, f, sample_rate));
  for (double f = stop_high; f <= nyquist; f += step)
    worst = std::max(worst, magnitude_response(kernel.taps, f, sample_rate));
  kernel.achieved_attenuation = worst > 0.0 ? -20.0 * std::log10(worst) : 400.0;

  if (kernel.achieved_attenuation < spec.stop_attenuation) {
    std::ostringstream msg;
    msg << "band-pass " << spec.pass_low << "-" << spec.pass_high << " Hz with " << n
        << " taps reaches only " << kernel.achieved_attenuation << " dB stop-band attenuation (requested "
        << spec.stop_attenuation << " dB)";
    throw DesignError(msg.str(), kernel.achieved_attenuation);
  }
  return kernel;
}

PcmStream apply_filter(const PcmStream& stream, const FilterKernel& kernel) {
  if (stream.size() == 0) throw ShapeError("apply_filter: empty stream");
  const Eigen::Index n = stream.size();
  const Eigen::Index taps = kernel.taps.size();
  const Eigen::Index half = taps / 2;

  PcmStream out;
  out.sample_rate = stream.sample_rate;
  out.channel_id = stream.channel_id;
  out.samples.setZero(n);
  const double* x = stream.samples.data();
  const double* h = kernel.taps.data();
  for (Eigen::Index i = 0; i < n; ++i) {
    // y[i] = sum_k h[k] x[i + half - k]
    const Eigen::Index k_lo = std::max<Eigen::Index>(0, i + half - (n - 1));
    const Eigen::Index k_hi = std::min<Eigen::Index>(taps - 1, i + half);
    double acc = 0.0;
    for (Eigen::Index k = k_lo; k <= k_hi; ++k) acc += h[k] * x[i + half - k];
    out.samples[i] = acc;
  }
  return out;
}

std::vector<Eigen::VectorXd> segment_frames(const PcmStream& stream, int frame_len, int t0) {
  if (frame_len <= 0) throw ConfigError("segment_frames: frame length must be positive");
  if (t0 < 0 || t0 >= frame_len) throw ConfigError("segment_frames: t0 must lie in [0, frame_len)");
  std::vector<Eigen::VectorXd> frames;
  if (stream.size() <= t0) return frames;
  const Eigen::Index count = (stream.size() - t0) / frame_len;
  frames.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index f = 0; f < count; ++f) frames.emplace_back(stream.samples.segment(t0 + f * frame_len, frame_len));
  return frames;
}

}  // namespace echoforge
