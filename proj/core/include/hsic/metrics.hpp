#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsic/cube.hpp"

namespace hsic {

struct RdPoint {
  double bpppb = 0.0;
  double mse = 0.0;
  double psnr = 0.0;  // +inf when mse == 0
  std::int64_t iteration = 0;
  double wall_seconds = 0.0;
};

// Mean squared difference over all M*N*C samples; both cubes must share
// dimensions and scale (normalized vs raw).
double mse(const HyperCube& a, const HyperCube& b);

// 10*log10(R^2 / mse); +inf when mse == 0.
double psnr(double mse_value, double peak_range);

// Parameter-only rate: param_count * bits_per_param / (M*N*C).
double bpppb(std::int64_t n_params, int bits_per_param, int rows, int cols, int bands);

// Header-inclusive rate from a total bit count (e.g. a file size in bits).
double bpppb_from_bits(std::uint64_t total_bits, int rows, int cols, int bands);

// PSNR formatted for CSV; +inf serializes as "inf".
std::string format_psnr(double psnr_value);

std::string rd_csv_header();
std::string rd_csv_row(const RdPoint& p);
void write_rd_csv(const std::vector<RdPoint>& points, const std::string& path);

}  // namespace hsic
