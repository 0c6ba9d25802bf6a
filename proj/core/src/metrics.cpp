#include "hsic/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hsic/errors.hpp"

namespace hsic {

double mse(const HyperCube& a, const HyperCube& b) {
  if (a.header.height != b.header.height || a.header.width != b.header.width ||
      a.header.bands != b.header.bands) {
    throw ValidationError("mse: cube dimensions differ");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const double d = a.samples[i] - b.samples[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.samples.size());
}

double psnr(double mse_value, double peak_range) {
  if (mse_value < 0.0) throw ValidationError("psnr: negative mse");
  if (!(peak_range > 0.0)) throw ValidationError("psnr: peak range must be > 0");
  if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak_range * peak_range / mse_value);
}

double bpppb(std::int64_t n_params, int bits_per_param, int rows, int cols, int bands) {
  return static_cast<double>(n_params) * bits_per_param /
         (static_cast<double>(rows) * cols * bands);
}

double bpppb_from_bits(std::uint64_t total_bits, int rows, int cols, int bands) {
  return static_cast<double>(total_bits) /
         (static_cast<double>(rows) * cols * bands);
}

std::string format_psnr(double psnr_value) {
  if (std::isinf(psnr_value)) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << psnr_value;
  return os.str();
}

std::string rd_csv_header() { return "bpppb,mse,psnr,iteration,wall_seconds"; }

std::string rd_csv_row(const RdPoint& p) {
  std::ostringstream os;
  os.precision(17);
  os << p.bpppb << ',' << p.mse << ',' << format_psnr(p.psnr) << ',' << p.iteration
     << ',' << p.wall_seconds;
  return os.str();
}

void write_rd_csv(const std::vector<RdPoint>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << rd_csv_header() << '\n';
  for (const auto& p : points) out << rd_csv_row(p) << '\n';
}

}  // namespace hsic
