#pragma once

#include <cstdint>
#include <vector>

#include "hsic/cube.hpp"

namespace hsic {

// One spatial sinusoid: amp * sin(2*pi*(fx*n/N + fy*m/M) + phase).
struct BandComponent {
  double fx = 0.0;  // cycles across the image width
  double fy = 0.0;  // cycles across the image height
  double amp = 0.0;
  double phase = 0.0;
};

// Smooth synthetic cube: per band, 0.5 + 0.5 * sum of its components.
// Amplitudes per band must satisfy sum |amp| <= 1 so values stay in [0,1].
struct SyntheticSpec {
  int rows = 32;
  int cols = 32;
  int bands = 8;
  std::uint64_t seed = 0;
  std::vector<std::vector<BandComponent>> band_components;  // one list per band
};

// Default spec: every band shares one low-frequency component (spectral
// redundancy across bands) plus a weaker band-specific one; frequencies are
// capped at 3 cycles per image.
SyntheticSpec make_default_spec(int rows, int cols, int bands, std::uint64_t seed);

HyperCube gen_smooth_cube(const SyntheticSpec& spec);

}  // namespace hsic
