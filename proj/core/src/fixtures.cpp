#include "hsic/fixtures.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace hsic {

SyntheticSpec make_default_spec(int rows, int cols, int bands, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.rows = rows;
  spec.cols = cols;
  spec.bands = bands;
  spec.seed = seed;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> freq(1, 3);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  BandComponent shared;
  shared.fx = freq(rng);
  shared.fy = freq(rng);
  shared.amp = 0.6;
  shared.phase = phase(rng);

  spec.band_components.resize(bands);
  for (int c = 0; c < bands; ++c) {
    BandComponent own;
    own.fx = freq(rng);
    own.fy = freq(rng);
    own.amp = 0.3;
    own.phase = phase(rng);
    spec.band_components[c] = {shared, own};
  }
  return spec;
}

HyperCube gen_smooth_cube(const SyntheticSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1 || spec.bands < 1)
    throw ValidationError("synthetic spec: dimensions must be >= 1");
  if (static_cast<int>(spec.band_components.size()) != spec.bands)
    throw ValidationError("synthetic spec: need one component list per band");
  for (const auto& comps : spec.band_components) {
    double total = 0.0;
    for (const auto& comp : comps) total += std::abs(comp.amp);
    if (total > 1.0)
      throw ValidationError("synthetic spec: band amplitudes exceed 1 in total");
  }

  HyperCube cube;
  cube.header = CubeHeader{spec.rows, spec.cols, spec.bands, Interleave::BSQ,
                           SampleFormat::F32LE};
  cube.samples.resize(cube.header.sample_count());

  const double two_pi = 2.0 * std::numbers::pi;
  std::size_t k = 0;
  for (int c = 0; c < spec.bands; ++c) {
    for (int m = 0; m < spec.rows; ++m) {
      for (int n = 0; n < spec.cols; ++n) {
        double v = 0.0;
        for (const auto& comp : spec.band_components[c])
          v += comp.amp * std::sin(two_pi * (comp.fx * n / spec.cols +
                                             comp.fy * m / spec.rows) +
                                   comp.phase);
        cube.samples[k++] = 0.5 + 0.5 * v;
      }
    }
  }
  return cube;
}

}  // namespace hsic
