#pragma once

#include <string_view>

namespace m2m {

inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace m2m
