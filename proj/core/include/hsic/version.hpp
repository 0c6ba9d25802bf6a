#pragma once

namespace hsic {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hsic
