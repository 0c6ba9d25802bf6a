#include "hsic/cube.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

namespace hsic {
namespace {

using json = nlohmann::json;

// Offset of sample (row, col, band) within the on-disk file, in samples.
std::size_t disk_index(const CubeHeader& h, int row, int col, int band) {
  const std::size_t M = h.height, N = h.width, C = h.bands;
  switch (h.interleave) {
    case Interleave::BSQ:
      return (static_cast<std::size_t>(band) * M + row) * N + col;
    case Interleave::BIL:
      return (static_cast<std::size_t>(row) * C + band) * N + col;
    case Interleave::BIP:
      return (static_cast<std::size_t>(row) * N + col) * C + band;
  }
  throw FormatError("unknown interleave");
}

double decode_sample(const unsigned char* p, SampleFormat fmt) {
  switch (fmt) {
    case SampleFormat::U8:
      return static_cast<double>(*p);
    case SampleFormat::U16LE: {
      std::uint16_t v = static_cast<std::uint16_t>(p[0]) |
                        (static_cast<std::uint16_t>(p[1]) << 8);
      return static_cast<double>(v);
    }
    case SampleFormat::F32LE: {
      std::uint32_t v;
      std::memcpy(&v, p, 4);
      return static_cast<double>(std::bit_cast<float>(v));
    }
    case SampleFormat::F64LE: {
      std::uint64_t v;
      std::memcpy(&v, p, 8);
      return std::bit_cast<double>(v);
    }
  }
  throw FormatError("unknown sample format");
}

// Integer formats clamp to range and round half away from zero.
void encode_sample(double value, unsigned char* p, SampleFormat fmt) {
  switch (fmt) {
    case SampleFormat::U8: {
      double r = std::round(value);
      r = std::clamp(r, 0.0, 255.0);
      *p = static_cast<unsigned char>(r);
      return;
    }
    case SampleFormat::U16LE: {
      double r = std::round(value);
      r = std::clamp(r, 0.0, 65535.0);
      const std::uint16_t v = static_cast<std::uint16_t>(r);
      p[0] = static_cast<unsigned char>(v & 0xff);
      p[1] = static_cast<unsigned char>(v >> 8);
      return;
    }
    case SampleFormat::F32LE: {
      const std::uint32_t v = std::bit_cast<std::uint32_t>(static_cast<float>(value));
      std::memcpy(p, &v, 4);
      return;
    }
    case SampleFormat::F64LE: {
      const std::uint64_t v = std::bit_cast<std::uint64_t>(value);
      std::memcpy(p, &v, 8);
      return;
    }
  }
  throw FormatError("unknown sample format");
}

}  // namespace

const char* to_string(Interleave il) {
  switch (il) {
    case Interleave::BSQ: return "bsq";
    case Interleave::BIL: return "bil";
    case Interleave::BIP: return "bip";
  }
  return "?";
}

const char* to_string(SampleFormat fmt) {
  switch (fmt) {
    case SampleFormat::U8: return "u8";
    case SampleFormat::U16LE: return "u16le";
    case SampleFormat::F32LE: return "f32le";
    case SampleFormat::F64LE: return "f64le";
  }
  return "?";
}

Interleave interleave_from_string(const std::string& s) {
  if (s == "bsq" || s == "BSQ") return Interleave::BSQ;
  if (s == "bil" || s == "BIL") return Interleave::BIL;
  if (s == "bip" || s == "BIP") return Interleave::BIP;
  throw FormatError("unknown interleave: " + s);
}

SampleFormat sample_format_from_string(const std::string& s) {
  if (s == "u8") return SampleFormat::U8;
  if (s == "u16le") return SampleFormat::U16LE;
  if (s == "f32le") return SampleFormat::F32LE;
  if (s == "f64le") return SampleFormat::F64LE;
  throw FormatError("unknown sample format: " + s);
}

std::size_t bytes_per_sample(SampleFormat fmt) {
  switch (fmt) {
    case SampleFormat::U8: return 1;
    case SampleFormat::U16LE: return 2;
    case SampleFormat::F32LE: return 4;
    case SampleFormat::F64LE: return 8;
  }
  throw FormatError("unknown sample format");
}

void CubeHeader::validate() const {
  if (height < 1 || width < 1 || bands < 1)
    throw ValidationError("cube header: height, width, bands must all be >= 1");
}

std::size_t CubeHeader::sample_count() const {
  return static_cast<std::size_t>(height) * width * bands;
}

std::size_t CubeHeader::file_bytes() const {
  return sample_count() * bytes_per_sample(sample_format);
}

HyperCube read_cube(const std::string& path, const CubeHeader& header) {
  header.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open cube file: " + path);
  in.seekg(0, std::ios::end);
  const auto actual = static_cast<std::size_t>(in.tellg());
  const std::size_t expected = header.file_bytes();
  if (actual != expected) {
    throw FormatError("cube file size mismatch for " + path + ": expected " +
                      std::to_string(expected) + " bytes, found " +
                      std::to_string(actual));
  }
  in.seekg(0);
  std::vector<unsigned char> raw(actual);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(actual));
  if (!in) throw IoError("failed reading cube file: " + path);

  HyperCube cube;
  cube.header = header;
  cube.samples.resize(header.sample_count());
  const std::size_t bps = bytes_per_sample(header.sample_format);
  std::size_t k = 0;
  for (int band = 0; band < header.bands; ++band)
    for (int row = 0; row < header.height; ++row)
      for (int col = 0; col < header.width; ++col)
        cube.samples[k++] =
            decode_sample(raw.data() + disk_index(header, row, col, band) * bps,
                          header.sample_format);
  return cube;
}

void write_cube(const HyperCube& cube, const std::string& path, const CubeHeader& header) {
  header.validate();
  if (cube.header.height != header.height || cube.header.width != header.width ||
      cube.header.bands != header.bands) {
    throw ValidationError("write_cube: cube dimensions do not match header");
  }
  const std::size_t bps = bytes_per_sample(header.sample_format);
  std::vector<unsigned char> raw(header.file_bytes());
  std::size_t k = 0;
  for (int band = 0; band < header.bands; ++band)
    for (int row = 0; row < header.height; ++row)
      for (int col = 0; col < header.width; ++col)
        encode_sample(cube.samples[k++],
                      raw.data() + disk_index(header, row, col, band) * bps,
                      header.sample_format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open cube file for writing: " + path);
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("failed writing cube file: " + path);
}

HyperCube normalize(const HyperCube& cube) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : cube.samples) {
    if (!std::isfinite(v)) throw ValidationError("normalize: non-finite sample in cube");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  HyperCube out;
  out.header = cube.header;
  out.samples.resize(cube.samples.size());
  if (hi == lo) {
    std::fill(out.samples.begin(), out.samples.end(), 0.0);
  } else {
    const double scale = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < cube.samples.size(); ++i)
      out.samples[i] = (cube.samples[i] - lo) * scale;
  }
  out.norm = NormParams{lo, hi};
  return out;
}

HyperCube denormalize(const HyperCube& cube, const NormParams& norm) {
  HyperCube out;
  out.header = cube.header;
  out.samples.resize(cube.samples.size());
  for (std::size_t i = 0; i < cube.samples.size(); ++i)
    out.samples[i] = cube.samples[i] * (norm.hi - norm.lo) + norm.lo;
  out.norm.reset();
  return out;
}

CubeHeader read_header_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open header sidecar: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError("bad header sidecar " + path + ": " + e.what());
  }
  CubeHeader h;
  try {
    h.height = j.at("height").get<int>();
    h.width = j.at("width").get<int>();
    h.bands = j.at("bands").get<int>();
    h.interleave = interleave_from_string(j.at("interleave").get<std::string>());
    h.sample_format = sample_format_from_string(j.at("sample_format").get<std::string>());
  } catch (const json::exception& e) {
    throw FormatError("bad header sidecar " + path + ": " + e.what());
  }
  h.validate();
  return h;
}

void write_header_sidecar(const CubeHeader& header, const std::string& path) {
  json j{{"height", header.height},
         {"width", header.width},
         {"bands", header.bands},
         {"interleave", to_string(header.interleave)},
         {"sample_format", to_string(header.sample_format)}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot open header sidecar for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace hsic
