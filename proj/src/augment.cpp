#include "echoforge/augment.hpp"

#include <cstdlib>

#include "echoforge/errors.hpp"

namespace echoforge {

void AugmentPolicy::validate() const {
  if (max_shift < 0 || max_shift > EchoTensor::kBins - 1) throw ConfigError("augment: max_shift must be in [0, 69]");
  if (!(jitter_prob >= 0.0 && jitter_prob <= 1.0)) throw ConfigError("augment: jitter_prob must be in [0, 1]");
  if (!(jitter_low > 0.0 && jitter_low <= jitter_high)) throw ConfigError("augment: need 0 < jitter_low <= jitter_high");
}

EchoTensor vertical_shift(const EchoTensor& t, int k, int max_shift) {
  if (std::abs(k) > max_shift)
    throw ConfigError("vertical_shift: |k| = " + std::to_string(std::abs(k)) + " exceeds max_shift " +
                      std::to_string(max_shift));
  EchoTensor out;
  out.label = t.label;
  for (int c = 0; c < EchoTensor::kChannels; ++c) {
    const auto& src = t.planes[c];
    auto& dst = out.planes[c];
    dst = Eigen::MatrixXf::Zero(src.rows(), src.cols());
    const Eigen::Index rows = src.rows() - std::abs(k);
    if (rows <= 0) continue;
    if (k >= 0)
      dst.bottomRows(rows) = src.topRows(rows);
    else
      dst.topRows(rows) = src.bottomRows(rows);
  }
  return out;
}

EchoTensor amplitude_jitter(const EchoTensor& t, const AugmentPolicy& policy, Rng& rng) {
  policy.validate();
  if (!(uniform(rng, 0.0, 1.0) < policy.jitter_prob)) return t;
  EchoTensor out = t;
  for (auto& plane : out.planes)
    for (Eigen::Index i = 0; i < plane.size(); ++i)
      plane.data()[i] *= static_cast<float>(uniform(rng, policy.jitter_low, policy.jitter_high));
  return out;
}

EchoTensor augment(const EchoTensor& t, const AugmentPolicy& policy, Rng& rng) {
  policy.validate();
  const int k = uniform_int(rng, -policy.max_shift, policy.max_shift);
  return amplitude_jitter(vertical_shift(t, k, policy.max_shift), policy, rng);
}

}  // namespace echoforge
