#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsic/errors.hpp"

namespace hsic {

enum class Interleave : std::uint8_t { BSQ = 0, BIL = 1, BIP = 2 };
enum class SampleFormat : std::uint8_t { U8 = 0, U16LE = 1, F32LE = 2, F64LE = 3 };

const char* to_string(Interleave il);
const char* to_string(SampleFormat fmt);
Interleave interleave_from_string(const std::string& s);
SampleFormat sample_format_from_string(const std::string& s);
std::size_t bytes_per_sample(SampleFormat fmt);

struct CubeHeader {
  int height = 0;  // rows M
  int width = 0;   // cols N
  int bands = 0;   // channels C
  Interleave interleave = Interleave::BSQ;
  SampleFormat sample_format = SampleFormat::F32LE;

  void validate() const;
  std::size_t sample_count() const;
  std::size_t file_bytes() const;
};

// Global min/max of the raw samples; normalized v = (raw - lo) / (hi - lo).
struct NormParams {
  double lo = 0.0;
  double hi = 1.0;
};

// Samples are kept in canonical band-sequential order (all of band 0, then
// band 1, ...) with row-major spatial order, regardless of on-disk interleave.
struct HyperCube {
  CubeHeader header;
  std::vector<double> samples;
  std::optional<NormParams> norm;

  double at(int row, int col, int band) const {
    return samples[static_cast<std::size_t>(band) * header.height * header.width +
                   static_cast<std::size_t>(row) * header.width + col];
  }
};

HyperCube read_cube(const std::string& path, const CubeHeader& header);
void write_cube(const HyperCube& cube, const std::string& path, const CubeHeader& header);

HyperCube normalize(const HyperCube& cube);
HyperCube denormalize(const HyperCube& cube, const NormParams& norm);

// JSON sidecar with fields: height, width, bands, interleave, sample_format.
CubeHeader read_header_sidecar(const std::string& path);
void write_header_sidecar(const CubeHeader& header, const std::string& path);

}  // namespace hsic
