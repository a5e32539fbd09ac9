#pragma once

#include <cstdint>

#include "echoforge/echo.hpp"
#include "echoforge/rng.hpp"

namespace echoforge {

struct AugmentPolicy {
  int max_shift = 6;  // distance bins
  double jitter_prob = 0.8;
  double jitter_low = 0.95;
  double jitter_high = 1.05;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Shifts every channel by k bins along distance (output row r = input row
/// r - k); vacated rows are zero. |k| must not exceed max_shift.
EchoTensor vertical_shift(const EchoTensor& t, int k, int max_shift = 6);

/// With probability jitter_prob multiplies each pixel by an independent
/// uniform factor in [jitter_low, jitter_high]; otherwise returns t unchanged.
EchoTensor amplitude_jitter(const EchoTensor& t, const AugmentPolicy& policy, Rng& rng);

/// One training-time draw: shift k ~ U{-max_shift..max_shift}, then jitter.
EchoTensor augment(const EchoTensor& t, const AugmentPolicy& policy, Rng& rng);

}  // namespace echoforge
