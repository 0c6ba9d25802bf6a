#pragma once

#include <bit>
#include <cstdint>
#include <cstring>

namespace hsic {

// IEEE binary16 conversion. Round-to-nearest-even on narrowing; values beyond
// the binary16 range clamp to +/- max finite (65504) instead of overflowing
// to infinity, so quantized weights stay finite.
inline std::uint16_t float_to_half(float f) {
  std::uint32_t x = std::bit_cast<std::uint32_t>(f);
  std::uint16_t sign = static_cast<std::uint16_t>((x >> 16) & 0x8000u);
  std::uint32_t abs = x & 0x7fffffffu;

  if (abs >= 0x7f800000u) {  // inf or NaN
    std::uint16_t payload = abs > 0x7f800000u ? 0x0200u : 0u;  // quiet NaN bit
    return static_cast<std::uint16_t>(sign | 0x7c00u | payload);
  }
  if (abs >= 0x477ff000u) {  // rounds above max finite half (65504)
    return static_cast<std::uint16_t>(sign | 0x7bffu);
  }
  if (abs < 0x38800000u) {  // subnormal half or zero
    // Add the implicit bit and shift down to units of 2^-24 with RNE.
    std::uint32_t mant = (abs & 0x007fffffu) | 0x00800000u;
    int shift = 126 - static_cast<int>(abs >> 23);  // in [14, inf)
    if (shift > 24) return sign;                    // underflows to zero
    std::uint32_t q = mant >> shift;
    std::uint32_t rem = mant & ((1u << shift) - 1);
    std::uint32_t half_ulp = 1u << (shift - 1);
    if (rem > half_ulp || (rem == half_ulp && (q & 1u))) ++q;
    return static_cast<std::uint16_t>(sign | q);
  }
  // Normal range: rebias exponent, round the 13 dropped mantissa bits.
  std::uint32_t bits = abs + 0xc8000000u;  // exponent rebias (-112 << 23)
  std::uint32_t q = bits >> 13;
  std::uint32_t rem = bits & 0x1fffu;
  if (rem > 0x1000u || (rem == 0x1000u && (q & 1u))) ++q;
  return static_cast<std::uint16_t>(sign | q);
}

inline float half_to_float(std::uint16_t h) {
  std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
  std::uint32_t exp = (h >> 10) & 0x1fu;
  std::uint32_t mant = h & 0x3ffu;

  std::uint32_t out;
  if (exp == 0) {
    if (mant == 0) {
      out = sign;
    } else {
      // Normalize the subnormal.
      int e = -1;
      do {
        mant <<= 1;
        ++e;
      } while ((mant & 0x400u) == 0);
      out = sign | ((113u - e) << 23) | ((mant & 0x3ffu) << 13);
    }
  } else if (exp == 31) {
    out = sign | 0x7f800000u | (mant << 13);
  } else {
    out = sign | ((exp + 112u) << 23) | (mant << 13);
  }
  return std::bit_cast<float>(out);
}

}  // namespace hsic
