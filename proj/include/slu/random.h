// Copyright 2026 The mcat-slu Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SLU_RANDOM_H_
#define SLU_RANDOM_H_

#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <string_view>

namespace slu {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, 64 bit.
constexpr uint64_t HashString(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr uint64_t DeriveSeed(uint64_t base, uint64_t tag) { return Mix64(base ^ Mix64(tag)); }

constexpr uint64_t DeriveSeed(uint64_t base, std::string_view tag) {
  return DeriveSeed(base, HashString(tag));
}

constexpr uint64_t DeriveSeed(uint64_t base, std::string_view tag, uint64_t index) {
  return DeriveSeed(DeriveSeed(base, tag), index);
}

inline std::string ToHex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace slu

#endif  // SLU_RANDOM_H_
