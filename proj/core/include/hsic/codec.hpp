#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsic/cube.hpp"
#include "hsic/metrics.hpp"
#include "hsic/siren.hpp"

namespace hsic {

struct GridPoint {
  int row = 0;
  int col = 0;
  float x = 0.0f;  // 2*col/(N-1) - 1, or 0 when N == 1
  float y = 0.0f;  // 2*row/(M-1) - 1, or 0 when M == 1
};

// Row-major coordinate grid covering every pixel once; corners hit +/-1 exactly.
struct CoordGrid {
  int rows = 0;
  int cols = 0;
  std::vector<GridPoint> entries;
};

CoordGrid make_grid(int rows, int cols);

struct TrainSettings {
  int iterations = 50000;
  double lr = 2e-4;
  int batch = 0;  // 0 = full batch; otherwise uniform mini-batch size
  std::uint64_t seed = 0;
  int eval_every = 100;  // PSNR snapshot cadence
};

struct OverfitResult {
  SirenModel best;
  double best_mse = 0.0;
  double best_psnr = 0.0;
  std::int64_t best_iteration = 0;
  std::vector<RdPoint> trace;
};

// Stage 1: Adam-minimize the MSE between forward(grid) and the cube's
// per-pixel spectra; keeps the snapshot with the highest training PSNR
// seen at any evaluated iteration. The cube must be normalized.
OverfitResult overfit(const HyperCube& cube, const SirenConfig& config,
                      const TrainSettings& settings);

// Geometry and normalization carried into the bitstream alongside the weights.
struct StreamInfo {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t bands = 0;
  Interleave interleave_of_origin = Interleave::BSQ;
  double norm_lo = 0.0;
  double norm_hi = 1.0;
};

// Architecture header + reduced-precision weight payload; the transmitted
// model. Payload holds parameters in layer order, weights row-major then
// bias, encoded at bits_per_param (little-endian). At 8 bits each layer is
// prefixed by f32 (scale, zero) for its affine codes.
struct CompressedModel {
  static constexpr char kMagic[4] = {'H', 'S', 'I', 'C'};
  static constexpr std::uint8_t kVersion = 1;
  static constexpr std::size_t kHeaderBytes = 42;

  StreamInfo info;
  std::uint8_t hidden_layers = 0;   // d
  std::uint16_t hidden_width = 0;   // w
  float omega0 = 30.0f;
  std::uint8_t bits_per_param = 32;
  std::vector<std::uint8_t> payload;

  SirenConfig config() const;
  std::size_t expected_payload_bytes() const;
  std::uint64_t total_bits() const { return (kHeaderBytes + payload.size()) * 8; }
};

// Stage 3: 32 keeps raw IEEE binary32; 16 narrows to binary16 (RNE, overflow
// clamps to max finite); 8 stores per-layer affine codes with f32 scale/zero,
// scale = (max-min)/255 over that layer's weights and bias together.
CompressedModel quantize(const SirenModel& model, int bits, const StreamInfo& info);

SirenModel dequantize(const CompressedModel& cm);

// Clamped reconstruction on the training grid in normalized [0,1] scale,
// band-sequential. decompress is this plus denormalization; snapshot PSNRs
// from overfit are computed on exactly this path.
std::vector<float> decode_normalized(const CompressedModel& cm);

// Evaluate at arbitrary coordinates: clamp to [0,1], denormalize with the
// stored range. Returns batch x bands values, row-major by coordinate.
// Off-grid coordinates are accepted (super-resolution sampling).
std::vector<double> decode_partial(const CompressedModel& cm,
                                   const std::vector<std::pair<float, float>>& coords);

// Full reconstruction: decode_partial over make_grid(M, N).
HyperCube decompress(const CompressedModel& cm);

void write_bitstream(const CompressedModel& cm, const std::string& path);
CompressedModel read_bitstream(const std::string& path);

}  // namespace hsic
