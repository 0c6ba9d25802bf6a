#include <benchmark/benchmark.h>

#include "hsic/codec.hpp"
#include "hsic/fixtures.hpp"
#include "hsic/siren.hpp"

using namespace hsic;

namespace {

SirenConfig bench_config(int bands) {
  SirenConfig c;
  c.hidden_layers = 3;
  c.hidden_width = 64;
  c.out_dim = bands;
  return c;
}

void BM_ForwardBatch(benchmark::State& state) {
  const auto net = init_siren<float>(bench_config(8), 0);
  const CoordGrid grid = make_grid(32, 32);
  Eigen::MatrixXf coords(grid.entries.size(), 2);
  for (std::size_t i = 0; i < grid.entries.size(); ++i) {
    coords(static_cast<Eigen::Index>(i), 0) = grid.entries[i].x;
    coords(static_cast<Eigen::Index>(i), 1) = grid.entries[i].y;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(net, coords));
  }
}
BENCHMARK(BM_ForwardBatch);

void BM_TrainStep(benchmark::State& state) {
  const SyntheticSpec spec = make_default_spec(32, 32, 8, 0);
  const HyperCube cube = normalize(gen_smooth_cube(spec));
  auto net = init_siren<float>(bench_config(8), 0);
  auto adam = make_adam(net, 2e-4f);
  auto grads = zeros_like(net);

  const CoordGrid grid = make_grid(32, 32);
  Eigen::MatrixXf coords(grid.entries.size(), 2);
  Eigen::MatrixXf targets(grid.entries.size(), 8);
  for (std::size_t i = 0; i < grid.entries.size(); ++i) {
    coords(static_cast<Eigen::Index>(i), 0) = grid.entries[i].x;
    coords(static_cast<Eigen::Index>(i), 1) = grid.entries[i].y;
    for (int c = 0; c < 8; ++c)
      targets(static_cast<Eigen::Index>(i), c) =
          static_cast<float>(cube.samples[static_cast<std::size_t>(c) * 1024 + i]);
  }
  for (auto _ : state) {
    loss_and_grad(net, coords, targets, grads);
    adam_step(net, grads, adam);
  }
}
BENCHMARK(BM_TrainStep);

void BM_DecodeFullGrid(benchmark::State& state) {
  const auto net = init_siren<float>(bench_config(8), 0);
  StreamInfo info;
  info.rows = 32;
  info.cols = 32;
  info.bands = 8;
  const CompressedModel cm = quantize(net, 16, info);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decompress(cm));
  }
}
BENCHMARK(BM_DecodeFullGrid);

}  // namespace

BENCHMARK_MAIN();
