// hsic: compress hyperspectral cubes by overfitting a sinusoidal MLP to the
// pixel-coordinate -> spectrum mapping and storing the quantized weights.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hsic/arch_search.hpp"
#include "hsic/codec.hpp"
#include "hsic/cube.hpp"
#include "hsic/fixtures.hpp"
#include "hsic/metrics.hpp"
#include "hsic/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hsic;

namespace {

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Every command drops a manifest next to its primary output so a run can be
// reproduced from the resolved settings alone.
struct ManifestWriter {
  json j;
  explicit ManifestWriter(const std::string& command) {
    j["command"] = command;
    j["tool_version"] = kVersion;
    j["started_at"] = timestamp_now();
  }
  void finish(const std::string& out_path) {
    j["finished_at"] = timestamp_now();
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write manifest: " + out_path);
    out << j.dump(2) << '\n';
  }
};

double mse_normalized(const std::vector<float>& pred, const std::vector<double>& target) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

struct CompressOutcome {
  RdPoint point;
  double snapshot_psnr = 0.0;
};

CompressOutcome run_compress(const std::string& cube_path, const std::string& header_path,
                             std::optional<double> target_bpppb, SirenConfig config,
                             TrainSettings train, int bits, int probe_iters,
                             const std::string& out_path, ManifestWriter& manifest) {
  const auto t0 = std::chrono::steady_clock::now();
  const CubeHeader header = read_header_sidecar(header_path);
  const HyperCube raw = read_cube(cube_path, header);
  const HyperCube cube = normalize(raw);
  config.out_dim = header.bands;

  if (target_bpppb) {
    Budget budget;
    budget.target_bpppb = *target_bpppb;
    budget.bits_per_param = bits;
    budget.rows = header.height;
    budget.cols = header.width;
    budget.bands = header.bands;
    SearchSpace space;
    space.probe_iterations = probe_iters;
    space.lrs = {train.lr};
    const SearchResult sr = search(cube, budget, space, train.seed);
    config = sr.best;
    train.lr = sr.best_lr;
    manifest.j["search"] = {{"candidates", sr.report.size()},
                            {"chosen_depth", config.hidden_layers},
                            {"chosen_width", config.hidden_width}};
  }

  const OverfitResult result = overfit(cube, config, train);

  StreamInfo info;
  info.rows = static_cast<std::uint32_t>(header.height);
  info.cols = static_cast<std::uint32_t>(header.width);
  info.bands = static_cast<std::uint32_t>(header.bands);
  info.interleave_of_origin = header.interleave;
  info.norm_lo = cube.norm->lo;
  info.norm_hi = cube.norm->hi;
  const CompressedModel cm = quantize(result.best, bits, info);
  write_bitstream(cm, out_path);
  write_rd_csv(result.trace, out_path + ".trace.csv");

  const double quant_mse = mse_normalized(decode_normalized(cm), cube.samples);
  const double quant_psnr = psnr(quant_mse, 1.0);
  const std::uint64_t file_bits = static_cast<std::uint64_t>(fs::file_size(out_path)) * 8;

  CompressOutcome outcome;
  outcome.point.bpppb =
      bpppb_from_bits(file_bits, header.height, header.width, header.bands);
  outcome.point.mse = quant_mse;
  outcome.point.psnr = quant_psnr;
  outcome.point.iteration = result.best_iteration;
  outcome.point.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  outcome.snapshot_psnr = result.best_psnr;

  manifest.j["config"] = {{"hidden_layers", config.hidden_layers},
                          {"hidden_width", config.hidden_width},
                          {"omega0", config.omega0},
                          {"bits_per_param", bits}};
  manifest.j["train"] = {{"iterations", train.iterations},
                         {"lr", train.lr},
                         {"batch", train.batch},
                         {"seed", train.seed},
                         {"eval_every", train.eval_every}};
  manifest.j["snapshot_psnr"] = format_psnr(result.best_psnr);
  manifest.j["quantized_psnr"] = format_psnr(quant_psnr);
  manifest.j["quantization_delta_db"] =
      (std::isinf(result.best_psnr) || std::isinf(quant_psnr))
          ? 0.0
          : result.best_psnr - quant_psnr;
  manifest.j["bpppb_header_inclusive"] = outcome.point.bpppb;
  manifest.j["bpppb_params_only"] =
      bpppb(param_count(config), bits, header.height, header.width, header.bands);
  return outcome;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperspectral image codec backed by coordinate-network overfitting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // ---- compress ----
  auto* c = app.add_subcommand("compress", "Train a model on a cube and write a .hsic bitstream");
  std::string c_cube, c_header, c_out;
  int c_depth = 3, c_width = 64, c_bits = 16, c_iters = 50000, c_batch = 0;
  int c_eval_every = 100, c_probe_iters = 1000;
  double c_lr = 2e-4, c_omega0 = 30.0;
  std::uint64_t c_seed = 0;
  std::optional<double> c_target;
  c->add_option("cube", c_cube, "Raw cube file")->required();
  c->add_option("--header", c_header, "JSON sidecar header")->required();
  c->add_option("-o,--out", c_out, "Output .hsic path")->required();
  c->add_option("--depth", c_depth, "Hidden layer count");
  c->add_option("--width", c_width, "Hidden layer width");
  c->add_option("--target-bpppb", c_target, "Pick the architecture by rate budget instead");
  c->add_option("--bits", c_bits, "Stored weight precision: 32, 16, or 8");
  c->add_option("--iterations", c_iters, "Training iterations");
  c->add_option("--lr", c_lr, "Adam learning rate");
  c->add_option("--omega0", c_omega0, "Sine frequency scale");
  c->add_option("--seed", c_seed, "RNG seed");
  c->add_option("--batch", c_batch, "Mini-batch size (0 = full batch)");
  c->add_option("--eval-every", c_eval_every, "PSNR snapshot cadence");
  c->add_option("--probe-iters", c_probe_iters, "Probe iterations for the budget search");

  // ---- decompress ----
  auto* d = app.add_subcommand("decompress", "Reconstruct a cube from a .hsic bitstream");
  std::string d_in, d_out;
  int d_scale = 1;
  std::vector<int> d_crop;
  d->add_option("bitstream", d_in, "Input .hsic")->required();
  d->add_option("-o,--out", d_out, "Output cube path (f32le + JSON sidecar)")->required();
  d->add_option("--scale", d_scale, "Decode every k-th pixel: ceil(M/k) x ceil(N/k)");
  d->add_option("--crop", d_crop, "Decode a window: row col height width")->expected(4);

  // ---- eval ----
  auto* e = app.add_subcommand("eval", "PSNR between two cube files");
  std::string e_a, e_ha, e_b, e_hb;
  double e_raw_r = 0.0;
  e->add_option("reference", e_a, "Reference cube")->required();
  e->add_option("--header-a", e_ha, "Reference sidecar")->required();
  e->add_option("test", e_b, "Test cube")->required();
  e->add_option("--header-b", e_hb, "Test sidecar")->required();
  e->add_option("--raw-r", e_raw_r,
                "Compute on raw sample scale with this peak range (default: "
                "normalized scale, R = 1)");

  // ---- search ----
  auto* s = app.add_subcommand("search", "Architecture search under a rate budget");
  std::string s_cube, s_header, s_out;
  double s_target = 0.0;
  int s_bits = 16, s_probe = 1000;
  std::uint64_t s_seed = 0;
  std::vector<int> s_depths{2, 3, 4, 5};
  std::vector<double> s_lrs{2e-4};
  s->add_option("cube", s_cube, "Raw cube file")->required();
  s->add_option("--header", s_header, "JSON sidecar header")->required();
  s->add_option("--target-bpppb", s_target, "Rate budget")->required();
  s->add_option("--bits", s_bits, "Planned weight precision");
  s->add_option("--probe-iters", s_probe, "Probe iterations per candidate");
  s->add_option("--depths", s_depths, "Candidate hidden layer counts");
  s->add_option("--lrs", s_lrs, "Candidate learning rates");
  s->add_option("--seed", s_seed, "RNG seed");
  s->add_option("-o,--out", s_out, "Report CSV path")->required();

  // ---- rd-sweep ----
  auto* r = app.add_subcommand("rd-sweep", "Rate-distortion sweep over bpppb targets");
  std::string r_cube, r_header, r_out, r_keep;
  std::vector<double> r_targets;
  std::vector<int> r_bits{16};
  int r_iters = 50000, r_probe = 1000, r_eval_every = 100;
  double r_lr = 2e-4;
  std::uint64_t r_seed = 0;
  r->add_option("cube", r_cube, "Raw cube file")->required();
  r->add_option("--header", r_header, "JSON sidecar header")->required();
  r->add_option("--targets", r_targets, "Target bpppb values")->required();
  r->add_option("--bits", r_bits, "Weight precisions to sweep");
  r->add_option("--iterations", r_iters, "Full training iterations per point");
  r->add_option("--probe-iters", r_probe, "Probe iterations for the search");
  r->add_option("--eval-every", r_eval_every, "PSNR snapshot cadence");
  r->add_option("--lr", r_lr, "Adam learning rate");
  r->add_option("--seed", r_seed, "RNG seed");
  r->add_option("--keep-dir", r_keep, "Keep per-point .hsic bitstreams in this directory");
  r->add_option("-o,--out", r_out, "Sweep CSV path")->required();

  // ---- fixtures gen ----
  auto* f = app.add_subcommand("fixtures", "Synthetic fixture utilities");
  auto* fg = f->add_subcommand("gen", "Generate a smooth synthetic cube + sidecar");
  int f_rows = 32, f_cols = 32, f_bands = 8;
  std::uint64_t f_seed = 0;
  std::string f_out;
  fg->add_option("--rows", f_rows, "Rows");
  fg->add_option("--cols", f_cols, "Columns");
  fg->add_option("--bands", f_bands, "Bands");
  fg->add_option("--seed", f_seed, "RNG seed");
  fg->add_option("-o,--out", f_out, "Output cube path")->required();
  f->require_subcommand(1);

  try {
    app.parse(argc, argv);

    if (*c) {
      ManifestWriter manifest("compress");
      manifest.j["inputs"] = {{"cube", c_cube}, {"header", c_header}};
      manifest.j["out"] = c_out;
      SirenConfig config;
      config.hidden_layers = c_depth;
      config.hidden_width = c_width;
      config.omega0 = static_cast<float>(c_omega0);
      TrainSettings train;
      train.iterations = c_iters;
      train.lr = c_lr;
      train.batch = c_batch;
      train.seed = c_seed;
      train.eval_every = c_eval_every;
      const CompressOutcome out = run_compress(c_cube, c_header, c_target, config, train,
                                               c_bits, c_probe_iters, c_out, manifest);
      manifest.finish(c_out + ".manifest.json");
      std::cout << rd_csv_header() << '\n' << rd_csv_row(out.point) << '\n';
    } else if (*d) {
      ManifestWriter manifest("decompress");
      manifest.j["inputs"] = {{"bitstream", d_in}};
      manifest.j["out"] = d_out;
      const CompressedModel cm = read_bitstream(d_in);
      const int M = static_cast<int>(cm.info.rows), N = static_cast<int>(cm.info.cols);

      HyperCube cube;
      if (!d_crop.empty()) {
        const int r0 = d_crop[0], c0 = d_crop[1], h = d_crop[2], w = d_crop[3];
        if (r0 < 0 || c0 < 0 || h < 1 || w < 1 || r0 + h > M || c0 + w > N)
          throw ValidationError("--crop window out of bounds");
        const CoordGrid grid = make_grid(M, N);
        std::vector<std::pair<float, float>> coords;
        for (int m = r0; m < r0 + h; ++m)
          for (int n = c0; n < c0 + w; ++n) {
            const auto& pt = grid.entries[static_cast<std::size_t>(m) * N + n];
            coords.emplace_back(pt.x, pt.y);
          }
        const std::vector<double> spectra = decode_partial(cm, coords);
        cube.header = CubeHeader{h, w, static_cast<int>(cm.info.bands), Interleave::BSQ,
                                 SampleFormat::F32LE};
        cube.samples.resize(spectra.size());
        const std::size_t plane = static_cast<std::size_t>(h) * w;
        for (std::size_t i = 0; i < plane; ++i)
          for (std::uint32_t b = 0; b < cm.info.bands; ++b)
            cube.samples[b * plane + i] = spectra[i * cm.info.bands + b];
        manifest.j["crop"] = d_crop;
      } else if (d_scale > 1) {
        const int h = (M + d_scale - 1) / d_scale, w = (N + d_scale - 1) / d_scale;
        const CoordGrid grid = make_grid(M, N);
        std::vector<std::pair<float, float>> coords;
        for (int m = 0; m < M; m += d_scale)
          for (int n = 0; n < N; n += d_scale) {
            const auto& pt = grid.entries[static_cast<std::size_t>(m) * N + n];
            coords.emplace_back(pt.x, pt.y);
          }
        const std::vector<double> spectra = decode_partial(cm, coords);
        cube.header = CubeHeader{h, w, static_cast<int>(cm.info.bands), Interleave::BSQ,
                                 SampleFormat::F32LE};
        cube.samples.resize(spectra.size());
        const std::size_t plane = static_cast<std::size_t>(h) * w;
        for (std::size_t i = 0; i < plane; ++i)
          for (std::uint32_t b = 0; b < cm.info.bands; ++b)
            cube.samples[b * plane + i] = spectra[i * cm.info.bands + b];
        manifest.j["scale"] = d_scale;
      } else {
        cube = decompress(cm);
      }
      write_cube(cube, d_out, cube.header);
      write_header_sidecar(cube.header, d_out + ".json");
      manifest.finish(d_out + ".manifest.json");
      std::cout << "wrote " << d_out << " (" << cube.header.height << "x"
                << cube.header.width << "x" << cube.header.bands << ")\n";
    } else if (*e) {
      const HyperCube a = read_cube(e_a, read_header_sidecar(e_ha));
      const HyperCube b = read_cube(e_b, read_header_sidecar(e_hb));
      double m, p;
      if (e_raw_r > 0.0) {
        m = mse(a, b);
        p = psnr(m, e_raw_r);
      } else {
        const HyperCube an = normalize(a);
        HyperCube bn;
        bn.header = b.header;
        bn.samples.resize(b.samples.size());
        const double span = an.norm->hi - an.norm->lo;
        for (std::size_t i = 0; i < b.samples.size(); ++i)
          bn.samples[i] = span > 0 ? (b.samples[i] - an.norm->lo) / span : 0.0;
        m = mse(an, bn);
        p = psnr(m, 1.0);
      }
      std::cout << "mse," << m << "\npsnr," << format_psnr(p) << '\n';
    } else if (*s) {
      ManifestWriter manifest("search");
      manifest.j["inputs"] = {{"cube", s_cube}, {"header", s_header}};
      manifest.j["out"] = s_out;
      manifest.j["settings"] = {{"target_bpppb", s_target}, {"bits", s_bits},
                                {"probe_iters", s_probe},   {"seed", s_seed}};
      const CubeHeader header = read_header_sidecar(s_header);
      const HyperCube cube = normalize(read_cube(s_cube, header));
      Budget budget;
      budget.target_bpppb = s_target;
      budget.bits_per_param = s_bits;
      budget.rows = header.height;
      budget.cols = header.width;
      budget.bands = header.bands;
      SearchSpace space;
      space.depths = s_depths;
      space.lrs = s_lrs;
      space.probe_iterations = s_probe;
      const SearchResult result = search(cube, budget, space, s_seed);
      write_search_csv(result.report, s_out);
      manifest.finish(s_out + ".manifest.json");
      std::cout << "best: depth " << result.best.hidden_layers << " width "
                << result.best.hidden_width << " lr " << result.best_lr << '\n';
    } else if (*r) {
      ManifestWriter manifest("rd-sweep");
      manifest.j["inputs"] = {{"cube", r_cube}, {"header", r_header}};
      manifest.j["out"] = r_out;
      manifest.j["settings"] = {{"targets", r_targets}, {"bits", r_bits},
                                {"iterations", r_iters}, {"probe_iters", r_probe},
                                {"lr", r_lr},            {"seed", r_seed}};
      std::sort(r_targets.begin(), r_targets.end());
      std::sort(r_bits.begin(), r_bits.end());

      std::ofstream csv(r_out);
      if (!csv) throw IoError("cannot open for writing: " + r_out);
      csv << "bits,target_bpppb,status," << rd_csv_header() << '\n';
      csv.precision(17);
      for (int bits : r_bits) {
        for (double target : r_targets) {
          csv << bits << ',' << target << ',';
          try {
            std::ostringstream tag;
            tag << "point_" << bits << "_" << target << ".hsic";
            const std::string point_path =
                r_keep.empty()
                    ? (fs::temp_directory_path() / ("hsic_sweep_" + tag.str())).string()
                    : (fs::path(r_keep) / tag.str()).string();
            ManifestWriter point_manifest("rd-sweep-point");
            SirenConfig config;
            TrainSettings train;
            train.iterations = r_iters;
            train.lr = r_lr;
            train.seed = r_seed;
            train.eval_every = r_eval_every;
            const CompressOutcome out =
                run_compress(r_cube, r_header, target, config, train, bits, r_probe,
                             point_path, point_manifest);
            if (r_keep.empty()) {
              fs::remove(point_path);
              fs::remove(point_path + ".trace.csv");
            } else {
              point_manifest.finish(point_path + ".manifest.json");
            }
            csv << "ok," << rd_csv_row(out.point) << '\n';
          } catch (const std::exception& ex) {
            csv << "failed,,,,," << '\n';
            std::cerr << "rd-sweep point (bits=" << bits << ", target=" << target
                      << ") failed: " << ex.what() << '\n';
          }
          csv.flush();
        }
      }
      manifest.finish(r_out + ".manifest.json");
    } else if (*fg) {
      ManifestWriter manifest("fixtures gen");
      manifest.j["settings"] = {{"rows", f_rows}, {"cols", f_cols},
                                {"bands", f_bands}, {"seed", f_seed}};
      manifest.j["out"] = f_out;
      const SyntheticSpec spec = make_default_spec(f_rows, f_cols, f_bands, f_seed);
      const HyperCube cube = gen_smooth_cube(spec);
      write_cube(cube, f_out, cube.header);
      write_header_sidecar(cube.header, f_out + ".json");
      manifest.finish(f_out + ".manifest.json");
      std::cout << "wrote " << f_out << '\n';
    }
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex);
  } catch (const IoError& ex) {
    std::cerr << "io error: " << ex.what() << '\n';
    return 2;
  } catch (const FormatError& ex) {
    std::cerr << "format error: " << ex.what() << '\n';
    return 3;
  } catch (const ValidationError& ex) {
    std::cerr << "validation error: " << ex.what() << '\n';
    return 4;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
