#pragma once

namespace tunnelpairs {

// How a band-limited quantity is reduced to a single number.
enum class BandPolicy {
  center,   // evaluate at the band center
  average,  // mean over the band (16-point Gauss-Legendre)
};

struct DetectionBand {
  double f_center = 0.0;   // Hz
  double bandwidth = 0.0;  // Hz
  BandPolicy policy = BandPolicy::center;

  double lower() const { return f_center - 0.5 * bandwidth; }
  double upper() const { return f_center + 0.5 * bandwidth; }
};

// Throws ConfigurationError unless bandwidth > 0 and the lower edge is > 0.
void validate(const DetectionBand& band);

}  // namespace tunnelpairs
