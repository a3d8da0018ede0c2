#pragma once

namespace tunnelpairs {

// SI 2019 exact values.
struct PhysicalConstants {
  const double e;    // elementary charge, C
  const double h;    // Planck constant, J s
  const double k_B;  // Boltzmann constant, J/K
};

inline constexpr PhysicalConstants kSI{1.602176634e-19, 6.62607015e-34,
                                       1.380649e-23};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace tunnelpairs
