#include <doctest.h>

#include <cmath>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>

#include "hsic/codec.hpp"
#include "hsic/fixtures.hpp"
#include "hsic/half.hpp"
#include "hsic/metrics.hpp"

using namespace hsic;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& tag) {
  static std::atomic<int> counter{0};
  return fs::temp_directory_path() /
         ("hsic_codec_test_" + tag + "_" + std::to_string(counter++) + ".hsic");
}

struct FileGuard {
  fs::path path;
  ~FileGuard() { std::error_code ec; fs::remove(path, ec); }
};

std::vector<float> flatten(const SirenModel& net) {
  std::vector<float> out;
  for (const auto& layer : net.layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        out.push_back(layer.weight(r, c));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out.push_back(layer.bias(r));
  }
  return out;
}

SirenModel random_model(int d, int w, int out, std::uint64_t seed) {
  SirenConfig c;
  c.hidden_layers = d;
  c.hidden_width = w;
  c.out_dim = out;
  return init_siren<float>(c, seed);
}

StreamInfo info_for(int rows, int cols, int bands) {
  StreamInfo info;
  info.rows = rows;
  info.cols = cols;
  info.bands = bands;
  info.norm_lo = 0.0;
  info.norm_hi = 1.0;
  return info;
}

double flat_mse_f(const std::vector<float>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("make_grid corner and center conventions") {
  CoordGrid g = make_grid(2, 2);
  REQUIRE(g.entries.size() == 4);
  CHECK(g.entries[0].x == -1.0f);
  CHECK(g.entries[0].y == -1.0f);
  CHECK(g.entries[1].x == 1.0f);
  CHECK(g.entries[1].y == -1.0f);
  CHECK(g.entries[2].x == -1.0f);
  CHECK(g.entries[2].y == 1.0f);
  CHECK(g.entries[3].x == 1.0f);
  CHECK(g.entries[3].y == 1.0f);

  CoordGrid g3 = make_grid(3, 3);
  CHECK(g3.entries[4].x == 0.0f);
  CHECK(g3.entries[4].y == 0.0f);

  CoordGrid row = make_grid(1, 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(row.entries[i].y == 0.0f);
    CHECK(row.entries[i].x == doctest::Approx(-1.0 + 0.5 * i));
  }
}

TEST_CASE("make_grid covers every pixel once in row-major order") {
  CoordGrid g = make_grid(4, 7);
  std::size_t k = 0;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 7; ++n, ++k) {
      CHECK(g.entries[k].row == m);
      CHECK(g.entries[k].col == n);
      CHECK(g.entries[k].x >= -1.0f);
      CHECK(g.entries[k].x <= 1.0f);
      CHECK(g.entries[k].y >= -1.0f);
      CHECK(g.entries[k].y <= 1.0f);
    }
}

TEST_CASE("32-bit quantization round-trips bit-exactly") {
  SirenModel m = random_model(2, 6, 3, 123);
  CompressedModel cm = quantize(m, 32, info_for(4, 4, 3));
  SirenModel back = dequantize(cm);
  CHECK(flatten(back) == flatten(m));
}

TEST_CASE("16-bit quantization keeps binary16-representable values") {
  SirenModel m = random_model(1, 1, 1, 0);
  m.layers[0].weight << 1.0f, -0.5f;
  m.layers[0].bias << 0.25f;
  m.layers[1].weight << 2.0f;
  m.layers[1].bias << -1.0f;
  CompressedModel cm = quantize(m, 16, info_for(2, 2, 1));
  SirenModel back = dequantize(cm);
  CHECK(flatten(back) == flatten(m));
}

TEST_CASE("8-bit affine codes match the hand-evaluated example") {
  // Layer 0 of a d=1, w=1, out=1 net has exactly three parameters.
  SirenModel m = random_model(1, 1, 1, 0);
  m.layers[0].weight << -1.0f, 0.0f;
  m.layers[0].bias << 1.0f;
  m.layers[1].weight << 0.5f;
  m.layers[1].bias << 0.5f;
  CompressedModel cm = quantize(m, 8, info_for(2, 2, 1));

  // Layer 0 payload: f32 scale, f32 zero, then codes for {-1, 0, 1}.
  const float scale = 2.0f / 255.0f;
  CHECK(cm.payload[8] == 0);
  CHECK(cm.payload[9] == 128);
  CHECK(cm.payload[10] == 255);

  SirenModel back = dequantize(cm);
  CHECK(back.layers[0].weight(0, 0) == doctest::Approx(-1.0));
  CHECK(back.layers[0].weight(0, 1) == doctest::Approx(-1.0f + 128 * scale));
  CHECK(back.layers[0].weight(0, 1) == doctest::Approx(0.00392).epsilon(1e-2));
  CHECK(back.layers[0].bias(0) == doctest::Approx(1.0));
}

TEST_CASE("quantize rejects non-finite parameters and bad bit widths") {
  SirenModel m = random_model(1, 2, 1, 3);
  CHECK_THROWS_AS(quantize(m, 12, info_for(2, 2, 1)), ValidationError);
  m.layers[0].weight(0, 0) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(quantize(m, 32, info_for(2, 2, 1)), ValidationError);
}

TEST_CASE("bitstream round-trips byte-exactly") {
  SirenModel m = random_model(3, 5, 4, 7);
  CompressedModel cm = quantize(m, 16, info_for(6, 5, 4));
  auto p1 = temp_file("rt1");
  auto p2 = temp_file("rt2");
  FileGuard g1{p1}, g2{p2};
  write_bitstream(cm, p1.string());
  CompressedModel back = read_bitstream(p1.string());
  write_bitstream(back, p2.string());

  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::vector<char> b1((std::istreambuf_iterator<char>(f1)), {});
  std::vector<char> b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
  CHECK(b1.size() * 8 == cm.total_bits());
}

TEST_CASE("bitstream size accounting is exact") {
  for (int bits : {32, 16, 8}) {
    SirenModel m = random_model(2, 7, 3, bits);
    CompressedModel cm = quantize(m, bits, info_for(9, 8, 3));
    auto p = temp_file("acct");
    FileGuard g{p};
    write_bitstream(cm, p.string());
    const auto file_bits = static_cast<std::uint64_t>(fs::file_size(p)) * 8;
    std::uint64_t expected = 42ull * 8 + static_cast<std::uint64_t>(param_count(m.config)) * bits;
    if (bits == 8) expected += 64ull * (m.config.hidden_layers + 1);
    CHECK(file_bits == expected);
  }
}

TEST_CASE("corrupted magic is rejected") {
  SirenModel m = random_model(1, 3, 2, 1);
  CompressedModel cm = quantize(m, 32, info_for(3, 3, 2));
  auto p = temp_file("magic");
  FileGuard g{p};
  write_bitstream(cm, p.string());
  {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.put('X');
  }
  CHECK_THROWS_AS(read_bitstream(p.string()), FormatError);
}

TEST_CASE("truncated bitstream is rejected with expected vs actual lengths") {
  SirenModel m = random_model(1, 3, 2, 2);
  CompressedModel cm = quantize(m, 32, info_for(3, 3, 2));
  auto p = temp_file("trunc");
  FileGuard g{p};
  write_bitstream(cm, p.string());
  fs::resize_file(p, fs::file_size(p) - 5);
  try {
    read_bitstream(p.string());
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("expected") != std::string::npos);
    CHECK(msg.find("found") != std::string::npos);
  }
}

TEST_CASE("header/payload disagreement is rejected") {
  CompressedModel cm;
  cm.info = info_for(3, 3, 2);
  cm.hidden_layers = 1;
  cm.hidden_width = 3;
  cm.bits_per_param = 32;
  cm.payload.assign(10, 0);  // wrong length for the declared architecture
  CHECK_THROWS_AS(dequantize(cm), FormatError);
  CHECK_THROWS_AS(write_bitstream(cm, temp_file("bad").string()), ValidationError);
}

TEST_CASE("overfit fits a constant cube nearly exactly") {
  HyperCube cube;
  cube.header = CubeHeader{4, 4, 1, Interleave::BSQ, SampleFormat::F32LE};
  cube.samples.assign(16, 0.5);
  cube.norm = NormParams{0.0, 1.0};

  SirenConfig config;
  config.hidden_layers = 1;
  config.hidden_width = 4;
  config.out_dim = 1;
  TrainSettings ts;
  ts.iterations = 500;
  ts.eval_every = 50;
  ts.lr = 0.01;  // the final bias has to travel 0.5; Adam moves ~lr per step
  OverfitResult r = overfit(cube, config, ts);
  CHECK(r.best_psnr >= 60.0);
}

TEST_CASE("overfit returns zero loss immediately when targets match the model") {
  SirenConfig config;
  config.hidden_layers = 1;
  config.hidden_width = 4;
  config.out_dim = 2;
  SirenModel net = init_siren<float>(config, 31);

  // Targets are the model's own clamped outputs, so the evaluated
  // reconstruction already matches them before any step is taken.
  const CoordGrid grid = make_grid(4, 4);
  HyperCube cube;
  cube.header = CubeHeader{4, 4, 2, Interleave::BSQ, SampleFormat::F32LE};
  cube.samples.resize(32);
  for (std::size_t i = 0; i < grid.entries.size(); ++i) {
    Eigen::VectorXf out = forward_one(net, grid.entries[i].x, grid.entries[i].y);
    for (int c = 0; c < 2; ++c)
      cube.samples[static_cast<std::size_t>(c) * 16 + i] =
          std::clamp(out(c), 0.0f, 1.0f);
  }
  cube.norm = NormParams{0.0, 1.0};

  TrainSettings ts;
  ts.iterations = 1;
  ts.seed = 31;  // same init as the frozen model
  OverfitResult r = overfit(cube, config, ts);
  CHECK(r.best_mse == 0.0);
  CHECK(std::isinf(r.best_psnr));
}

TEST_CASE("overfit validates its inputs") {
  HyperCube cube;
  cube.header = CubeHeader{2, 2, 1, Interleave::BSQ, SampleFormat::F32LE};
  cube.samples.assign(4, 0.5);
  SirenConfig config;
  config.out_dim = 1;

  SUBCASE("missing normalization") {
    CHECK_THROWS_AS(overfit(cube, config, TrainSettings{}), ValidationError);
  }
  SUBCASE("band mismatch") {
    cube.norm = NormParams{0, 1};
    config.out_dim = 3;
    CHECK_THROWS_AS(overfit(cube, config, TrainSettings{}), ValidationError);
  }
  SUBCASE("samples outside [0,1]") {
    cube.norm = NormParams{0, 1};
    cube.samples[0] = 1.5;
    CHECK_THROWS_AS(overfit(cube, config, TrainSettings{}), ValidationError);
  }
}

TEST_CASE("best snapshot dominates every traced iteration") {
  SyntheticSpec spec = make_default_spec(8, 8, 2, 5);
  HyperCube cube = normalize(gen_smooth_cube(spec));
  SirenConfig config;
  config.hidden_layers = 2;
  config.hidden_width = 8;
  config.out_dim = 2;
  TrainSettings ts;
  ts.iterations = 300;
  ts.eval_every = 25;
  OverfitResult r = overfit(cube, config, ts);
  REQUIRE(!r.trace.empty());
  for (const auto& pt : r.trace) CHECK(r.best_psnr >= pt.psnr);
}

TEST_CASE("lossless path: decompress PSNR equals the snapshot PSNR exactly") {
  SyntheticSpec spec = make_default_spec(8, 8, 2, 9);
  HyperCube cube = normalize(gen_smooth_cube(spec));
  SirenConfig config;
  config.hidden_layers = 2;
  config.hidden_width = 8;
  config.out_dim = 2;
  TrainSettings ts;
  ts.iterations = 200;
  ts.eval_every = 50;
  OverfitResult r = overfit(cube, config, ts);

  StreamInfo info = info_for(8, 8, 2);
  info.norm_lo = cube.norm->lo;
  info.norm_hi = cube.norm->hi;
  CompressedModel cm = quantize(r.best, 32, info);
  const std::vector<float> pred = decode_normalized(cm);
  const double m = flat_mse_f(pred, cube.samples);
  CHECK(psnr(m, 1.0) == r.best_psnr);
}

TEST_CASE("decode_partial on grid points matches decompress bit-exactly") {
  SirenModel m = random_model(2, 8, 3, 55);
  StreamInfo info = info_for(5, 6, 3);
  info.norm_lo = 10.0;
  info.norm_hi = 30.0;
  CompressedModel cm = quantize(m, 16, info);

  HyperCube full = decompress(cm);
  CoordGrid grid = make_grid(5, 6);
  std::vector<std::pair<float, float>> coords;
  for (const auto& pt : grid.entries) coords.emplace_back(pt.x, pt.y);
  std::vector<double> spectra = decode_partial(cm, coords);

  const std::size_t plane = 30;
  for (std::size_t i = 0; i < plane; ++i)
    for (int c = 0; c < 3; ++c)
      CHECK(spectra[i * 3 + c] == full.samples[static_cast<std::size_t>(c) * plane + i]);
}

TEST_CASE("decode_partial supports subsampled and off-grid coordinates") {
  SirenModel m = random_model(1, 4, 2, 77);
  CompressedModel cm = quantize(m, 32, info_for(4, 4, 2));

  // Every-other-pixel low-resolution decode.
  CoordGrid grid = make_grid(4, 4);
  std::vector<std::pair<float, float>> coords;
  for (const auto& pt : grid.entries)
    if (pt.row % 2 == 0 && pt.col % 2 == 0) coords.emplace_back(pt.x, pt.y);
  CHECK(coords.size() == 4);  // ceil(4/2) * ceil(4/2)
  std::vector<double> low = decode_partial(cm, coords);
  CHECK(low.size() == 8);

  // Midpoint between two grid points: finite, no error.
  std::vector<double> mid = decode_partial(cm, {{0.125f, -0.375f}});
  for (double v : mid) CHECK(std::isfinite(v));
}

TEST_CASE("quantization PSNR ladder on a quick fixture") {
  SyntheticSpec spec = make_default_spec(16, 16, 4, 2);
  HyperCube cube = normalize(gen_smooth_cube(spec));
  SirenConfig config;
  config.hidden_layers = 2;
  config.hidden_width = 24;
  config.out_dim = 4;
  TrainSettings ts;
  ts.iterations = 2000;
  ts.eval_every = 100;
  OverfitResult r = overfit(cube, config, ts);

  StreamInfo info = info_for(16, 16, 4);
  info.norm_lo = cube.norm->lo;
  info.norm_hi = cube.norm->hi;
  double p[3];
  int idx = 0;
  for (int bits : {32, 16, 8}) {
    CompressedModel cm = quantize(r.best, bits, info);
    p[idx++] = psnr(flat_mse_f(decode_normalized(cm), cube.samples), 1.0);
  }
  CHECK(p[0] >= p[1]);
  CHECK(p[1] >= p[2]);
}
