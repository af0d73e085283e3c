#pragma once

#include <cstdint>
#include <string_view>

namespace h2ad {

// 64-bit FNV-1a, used to tag results with the configuration they came from.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace h2ad
