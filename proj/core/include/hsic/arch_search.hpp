#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsic/codec.hpp"
#include "hsic/cube.hpp"
#include "hsic/siren.hpp"

namespace hsic {

struct Budget {
  double target_bpppb = 0.0;
  int bits_per_param = 16;
  int rows = 0;
  int cols = 0;
  int bands = 0;

  void validate() const;
  std::int64_t max_params() const;
};

struct SearchSpace {
  std::vector<int> depths{2, 3, 4, 5};
  int width_min = 8;
  int width_max = 1024;
  std::vector<double> lrs{2e-4};
  int probe_iterations = 1000;
};

// Per depth, the largest width whose parameter count fits the budget.
// Configs using less than half the budget are dropped; result is sorted by
// descending parameter count. Throws ValidationError when nothing fits.
std::vector<SirenConfig> enumerate_candidates(const Budget& budget,
                                              const SearchSpace& space);

struct ProbeResult {
  SirenConfig config;
  double lr = 0.0;
  std::int64_t params = 0;
  double bpppb = 0.0;
  double probe_psnr = 0.0;
};

struct SearchResult {
  SirenConfig best;
  double best_lr = 0.0;
  std::vector<ProbeResult> report;  // canonical (candidate, lr) order
};

// Index of the winning report row: highest probe PSNR, ties broken by fewer
// parameters, then shallower depth, then lower lr.
std::size_t select_best(const std::vector<ProbeResult>& report);

// Stage 2: probe-train every (candidate, lr) pair and pick the highest probe
// PSNR; ties break to fewer parameters, then shallower depth, then lower lr.
// Probes may run in parallel (capped by HSIC_THREADS); the report order is
// canonical regardless.
SearchResult search(const HyperCube& normalized_cube, const Budget& budget,
                    const SearchSpace& space, std::uint64_t seed);

std::string search_csv_header();
std::string search_csv_row(const ProbeResult& r);
void write_search_csv(const std::vector<ProbeResult>& report, const std::string& path);

// HSIC_THREADS env var, default: hardware concurrency.
unsigned max_threads();

}  // namespace hsic
