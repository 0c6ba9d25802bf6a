#include <doctest.h>

#include <cmath>

#include "hsic/fixtures.hpp"

using namespace hsic;

TEST_CASE("zero-amplitude spec generates a constant 0.5 cube") {
  SyntheticSpec spec;
  spec.rows = 4;
  spec.cols = 4;
  spec.bands = 2;
  spec.band_components = {{}, {}};
  HyperCube cube = gen_smooth_cube(spec);
  for (double v : cube.samples) CHECK(v == 0.5);
}

TEST_CASE("generation is deterministic per seed") {
  HyperCube a = gen_smooth_cube(make_default_spec(8, 8, 3, 42));
  HyperCube b = gen_smooth_cube(make_default_spec(8, 8, 3, 42));
  HyperCube c = gen_smooth_cube(make_default_spec(8, 8, 3, 43));
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
}

TEST_CASE("generated values stay inside [0,1] for 100 seeds") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    HyperCube cube = gen_smooth_cube(make_default_spec(8, 8, 4, seed));
    for (double v : cube.samples) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("amplitude budget above 1 is rejected") {
  SyntheticSpec spec;
  spec.rows = 2;
  spec.cols = 2;
  spec.bands = 1;
  spec.band_components = {{{1, 1, 0.7, 0.0}, {2, 2, 0.6, 0.0}}};
  CHECK_THROWS_AS(gen_smooth_cube(spec), ValidationError);
}

TEST_CASE("adjacent bands of the default spec are spectrally correlated") {
  SyntheticSpec spec = make_default_spec(32, 32, 8, 0);
  HyperCube cube = gen_smooth_cube(spec);
  const std::size_t plane = 32 * 32;
  for (int c = 0; c + 1 < 8; ++c) {
    const double* a = cube.samples.data() + static_cast<std::size_t>(c) * plane;
    const double* b = a + plane;
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < plane; ++i) {
      ma += a[i];
      mb += b[i];
    }
    ma /= plane;
    mb /= plane;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < plane; ++i) {
      cov += (a[i] - ma) * (b[i] - mb);
      va += (a[i] - ma) * (a[i] - ma);
      vb += (b[i] - mb) * (b[i] - mb);
    }
    const double pearson = cov / std::sqrt(va * vb);
    CHECK(pearson > 0.5);
  }
}
