#include "hsic/codec.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "hsic/half.hpp"

namespace hsic {
namespace {

void put_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f32le(std::vector<std::uint8_t>& out, float v) {
  put_u32le(out, std::bit_cast<std::uint32_t>(v));
}

std::uint16_t get_u16le(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

float get_f32le(const std::uint8_t* p) { return std::bit_cast<float>(get_u32le(p)); }

// Layer parameters in serialization order: weights row-major, then bias.
template <typename Fn>
void for_each_param(const DenseLayer<float>& layer, Fn&& fn) {
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) fn(layer.weight(r, c));
  for (Eigen::Index r = 0; r < layer.bias.size(); ++r) fn(layer.bias(r));
}

// Band-sequential clamped reconstruction of the training grid. Shared by the
// overfit snapshot metric and the decode paths so their PSNRs agree bitwise.
std::vector<float> predict_normalized(const SirenModel& net, int rows, int cols) {
  const CoordGrid grid = make_grid(rows, cols);
  const std::size_t plane = static_cast<std::size_t>(rows) * cols;
  std::vector<float> pred(plane * net.config.out_dim);
  for (std::size_t i = 0; i < grid.entries.size(); ++i) {
    const auto& pt = grid.entries[i];
    Eigen::VectorXf out = forward_one(net, pt.x, pt.y);
    for (int c = 0; c < net.config.out_dim; ++c)
      pred[static_cast<std::size_t>(c) * plane + i] = std::clamp(out(c), 0.0f, 1.0f);
  }
  return pred;
}

double flat_mse(const std::vector<float>& pred, const std::vector<double>& target) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

}  // namespace

CoordGrid make_grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw ValidationError("make_grid: rows and cols must be >= 1");
  CoordGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.entries.reserve(static_cast<std::size_t>(rows) * cols);
  for (int m = 0; m < rows; ++m) {
    const float y = (rows == 1) ? 0.0f : 2.0f * m / (rows - 1) - 1.0f;
    for (int n = 0; n < cols; ++n) {
      const float x = (cols == 1) ? 0.0f : 2.0f * n / (cols - 1) - 1.0f;
      grid.entries.push_back({m, n, x, y});
    }
  }
  return grid;
}

OverfitResult overfit(const HyperCube& cube, const SirenConfig& config,
                      const TrainSettings& settings) {
  config.validate();
  if (!cube.norm) throw ValidationError("overfit: cube must be normalized first");
  if (config.out_dim != cube.header.bands)
    throw ValidationError("overfit: config.out_dim must equal the cube's band count");
  for (double v : cube.samples)
    if (v < 0.0 || v > 1.0) throw ValidationError("overfit: cube samples outside [0,1]");
  if (settings.iterations < 1) throw ValidationError("overfit: iterations must be >= 1");
  if (!(settings.lr > 0.0)) throw ValidationError("overfit: lr must be > 0");

  const int rows = cube.header.height, cols = cube.header.width, bands = cube.header.bands;
  const CoordGrid grid = make_grid(rows, cols);
  const std::size_t n_pixels = grid.entries.size();

  Eigen::MatrixXf coords(n_pixels, 2);
  Eigen::MatrixXf targets(n_pixels, bands);
  for (std::size_t i = 0; i < n_pixels; ++i) {
    coords(static_cast<Eigen::Index>(i), 0) = grid.entries[i].x;
    coords(static_cast<Eigen::Index>(i), 1) = grid.entries[i].y;
    for (int c = 0; c < bands; ++c)
      targets(static_cast<Eigen::Index>(i), c) =
          static_cast<float>(cube.samples[static_cast<std::size_t>(c) * n_pixels + i]);
  }

  SirenModel net = init_siren<float>(config, settings.seed);
  AdamState<float> adam = make_adam(net, static_cast<float>(settings.lr));
  ParamBlocks<float> grads = zeros_like(net);
  std::mt19937_64 batch_rng(settings.seed ^ 0x9e3779b97f4a7c15ull);

  OverfitResult result;
  result.best = net;
  result.best_psnr = -std::numeric_limits<double>::infinity();
  const double rate = bpppb(param_count(config), 32, rows, cols, bands);
  const auto t0 = std::chrono::steady_clock::now();

  auto evaluate = [&](std::int64_t iteration) {
    const std::vector<float> pred = predict_normalized(net, rows, cols);
    const double m = flat_mse(pred, cube.samples);
    const double p = psnr(m, 1.0);
    const double wall = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0).count();
    result.trace.push_back({rate, m, p, iteration, wall});
    if (p > result.best_psnr) {
      result.best = net;
      result.best_mse = m;
      result.best_psnr = p;
      result.best_iteration = iteration;
    }
  };

  evaluate(0);

  const bool full_batch = settings.batch <= 0 ||
                          settings.batch >= static_cast<int>(n_pixels);
  Eigen::MatrixXf mb_coords, mb_targets;
  for (int it = 1; it <= settings.iterations; ++it) {
    if (full_batch) {
      loss_and_grad(net, coords, targets, grads);
    } else {
      mb_coords.resize(settings.batch, 2);
      mb_targets.resize(settings.batch, bands);
      std::uniform_int_distribution<std::size_t> pick(0, n_pixels - 1);
      for (int i = 0; i < settings.batch; ++i) {
        const auto j = static_cast<Eigen::Index>(pick(batch_rng));
        mb_coords.row(i) = coords.row(j);
        mb_targets.row(i) = targets.row(j);
      }
      loss_and_grad(net, mb_coords, mb_targets, grads);
    }
    adam_step(net, grads, adam);
    if (it % settings.eval_every == 0 || it == settings.iterations) evaluate(it);
  }
  return result;
}

SirenConfig CompressedModel::config() const {
  SirenConfig c;
  c.hidden_layers = hidden_layers;
  c.hidden_width = hidden_width;
  c.in_dim = 2;
  c.out_dim = static_cast<int>(info.bands);
  c.omega0 = omega0;
  c.validate();
  return c;
}

std::size_t CompressedModel::expected_payload_bytes() const {
  const auto n = static_cast<std::size_t>(param_count(config()));
  switch (bits_per_param) {
    case 32: return n * 4;
    case 16: return n * 2;
    case 8: return n + static_cast<std::size_t>(hidden_layers + 1) * 8;
    default: throw FormatError("bits_per_param must be 32, 16, or 8");
  }
}

CompressedModel quantize(const SirenModel& model, int bits, const StreamInfo& info) {
  if (bits != 32 && bits != 16 && bits != 8)
    throw ValidationError("quantize: bits must be 32, 16, or 8");
  for (const auto& layer : model.layers) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite())
      throw ValidationError("quantize: model has non-finite parameters");
  }

  CompressedModel cm;
  cm.info = info;
  cm.hidden_layers = static_cast<std::uint8_t>(model.config.hidden_layers);
  cm.hidden_width = static_cast<std::uint16_t>(model.config.hidden_width);
  cm.omega0 = model.config.omega0;
  cm.bits_per_param = static_cast<std::uint8_t>(bits);
  cm.payload.reserve(cm.expected_payload_bytes());

  for (const auto& layer : model.layers) {
    if (bits == 32) {
      for_each_param(layer, [&](float v) { put_f32le(cm.payload, v); });
    } else if (bits == 16) {
      for_each_param(layer, [&](float v) { put_u16le(cm.payload, float_to_half(v)); });
    } else {
      float lo = layer.weight(0, 0), hi = lo;
      for_each_param(layer, [&](float v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      });
      // Codes are chosen in double precision so exact fractions like 2/255
      // round the way the affine formula says; the stored scale is f32.
      const double scale = (static_cast<double>(hi) - lo) / 255.0;
      const double zero = lo;
      put_f32le(cm.payload, static_cast<float>(scale));
      put_f32le(cm.payload, static_cast<float>(zero));
      for_each_param(layer, [&](float v) {
        long q = scale > 0.0 ? std::lround((v - zero) / scale) : 0;
        cm.payload.push_back(static_cast<std::uint8_t>(std::clamp(q, 0L, 255L)));
      });
    }
  }
  return cm;
}

SirenModel dequantize(const CompressedModel& cm) {
  const SirenConfig config = cm.config();
  if (cm.payload.size() != cm.expected_payload_bytes()) {
    throw FormatError("payload length mismatch: expected " +
                      std::to_string(cm.expected_payload_bytes()) + " bytes, found " +
                      std::to_string(cm.payload.size()));
  }

  SirenModel net;
  net.config = config;
  const std::uint8_t* p = cm.payload.data();
  const int n_linear = config.hidden_layers + 1;
  for (int k = 0; k < n_linear; ++k) {
    const int fan_in = (k == 0) ? config.in_dim : config.hidden_width;
    const int fan_out = (k == n_linear - 1) ? config.out_dim : config.hidden_width;
    DenseLayer<float> layer;
    layer.weight.resize(fan_out, fan_in);
    layer.bias.resize(fan_out);

    float scale = 0.0f, zero = 0.0f;
    if (cm.bits_per_param == 8) {
      scale = get_f32le(p);
      zero = get_f32le(p + 4);
      p += 8;
    }
    auto next = [&]() -> float {
      switch (cm.bits_per_param) {
        case 32: {
          const float v = get_f32le(p);
          p += 4;
          return v;
        }
        case 16: {
          const float v = half_to_float(get_u16le(p));
          p += 2;
          return v;
        }
        default: {
          const float v = zero + static_cast<float>(*p) * scale;
          p += 1;
          return v;
        }
      }
    };
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = next();
    for (int r = 0; r < fan_out; ++r) layer.bias(r) = next();
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::vector<float> decode_normalized(const CompressedModel& cm) {
  const SirenModel net = dequantize(cm);
  return predict_normalized(net, static_cast<int>(cm.info.rows),
                            static_cast<int>(cm.info.cols));
}

std::vector<double> decode_partial(const CompressedModel& cm,
                                   const std::vector<std::pair<float, float>>& coords) {
  const SirenModel net = dequantize(cm);
  const double lo = cm.info.norm_lo, hi = cm.info.norm_hi;
  std::vector<double> out(coords.size() * cm.info.bands);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    Eigen::VectorXf spec = forward_one(net, coords[i].first, coords[i].second);
    for (std::uint32_t c = 0; c < cm.info.bands; ++c)
      out[i * cm.info.bands + c] =
          static_cast<double>(std::clamp(spec(static_cast<int>(c)), 0.0f, 1.0f)) *
              (hi - lo) + lo;
  }
  return out;
}

HyperCube decompress(const CompressedModel& cm) {
  const int rows = static_cast<int>(cm.info.rows);
  const int cols = static_cast<int>(cm.info.cols);
  const int bands = static_cast<int>(cm.info.bands);
  const CoordGrid grid = make_grid(rows, cols);
  std::vector<std::pair<float, float>> coords;
  coords.reserve(grid.entries.size());
  for (const auto& pt : grid.entries) coords.emplace_back(pt.x, pt.y);
  const std::vector<double> spectra = decode_partial(cm, coords);

  HyperCube cube;
  cube.header = CubeHeader{rows, cols, bands, Interleave::BSQ, SampleFormat::F32LE};
  cube.samples.resize(spectra.size());
  const std::size_t plane = static_cast<std::size_t>(rows) * cols;
  for (std::size_t i = 0; i < plane; ++i)
    for (int c = 0; c < bands; ++c)
      cube.samples[static_cast<std::size_t>(c) * plane + i] = spectra[i * bands + c];
  return cube;
}

void write_bitstream(const CompressedModel& cm, const std::string& path) {
  if (cm.payload.size() != cm.expected_payload_bytes())
    throw ValidationError("write_bitstream: payload length disagrees with header");
  std::vector<std::uint8_t> bytes;
  bytes.reserve(CompressedModel::kHeaderBytes + cm.payload.size());
  bytes.insert(bytes.end(), std::begin(CompressedModel::kMagic),
               std::end(CompressedModel::kMagic));
  bytes.push_back(CompressedModel::kVersion);
  put_u32le(bytes, cm.info.rows);
  put_u32le(bytes, cm.info.cols);
  put_u32le(bytes, cm.info.bands);
  bytes.push_back(static_cast<std::uint8_t>(cm.info.interleave_of_origin));
  bytes.push_back(cm.hidden_layers);
  put_u16le(bytes, cm.hidden_width);
  put_f32le(bytes, cm.omega0);
  bytes.push_back(cm.bits_per_param);
  put_u64le(bytes, std::bit_cast<std::uint64_t>(cm.info.norm_lo));
  put_u64le(bytes, std::bit_cast<std::uint64_t>(cm.info.norm_hi));
  if (bytes.size() != CompressedModel::kHeaderBytes)
    throw FormatError("internal: bitstream header is not 42 bytes");
  bytes.insert(bytes.end(), cm.payload.begin(), cm.payload.end());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open bitstream for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing bitstream: " + path);
}

CompressedModel read_bitstream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open bitstream: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());

  if (bytes.size() < CompressedModel::kHeaderBytes)
    throw FormatError("truncated bitstream: expected at least " +
                      std::to_string(CompressedModel::kHeaderBytes) + " bytes, found " +
                      std::to_string(bytes.size()));
  if (std::memcmp(bytes.data(), CompressedModel::kMagic, 4) != 0)
    throw FormatError("bad magic in bitstream: " + path);
  if (bytes[4] != CompressedModel::kVersion)
    throw FormatError("unsupported bitstream version " + std::to_string(bytes[4]));

  CompressedModel cm;
  const std::uint8_t* p = bytes.data() + 5;
  cm.info.rows = get_u32le(p); p += 4;
  cm.info.cols = get_u32le(p); p += 4;
  cm.info.bands = get_u32le(p); p += 4;
  if (*p > 2) throw FormatError("bad interleave byte in bitstream");
  cm.info.interleave_of_origin = static_cast<Interleave>(*p); p += 1;
  cm.hidden_layers = *p; p += 1;
  cm.hidden_width = get_u16le(p); p += 2;
  cm.omega0 = get_f32le(p); p += 4;
  cm.bits_per_param = *p; p += 1;
  cm.info.norm_lo = std::bit_cast<double>(get_u64le(p)); p += 8;
  cm.info.norm_hi = std::bit_cast<double>(get_u64le(p)); p += 8;

  if (cm.bits_per_param != 32 && cm.bits_per_param != 16 && cm.bits_per_param != 8)
    throw FormatError("bad bits_per_param in bitstream: " +
                      std::to_string(cm.bits_per_param));
  cm.config();  // validates architecture fields

  const std::size_t expected = cm.expected_payload_bytes();
  const std::size_t actual = bytes.size() - CompressedModel::kHeaderBytes;
  if (actual != expected)
    throw FormatError("bitstream payload length mismatch: expected " +
                      std::to_string(expected) + " bytes, found " +
                      std::to_string(actual));
  cm.payload.assign(bytes.begin() + CompressedModel::kHeaderBytes, bytes.end());
  return cm;
}

}  // namespace hsic
