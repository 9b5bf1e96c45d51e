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

#ifndef SLU_BINARY_IO_H_
#define SLU_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "slu/errors.h"

namespace slu {

// Little-endian scalar I/O independent of host byte order.
template <typename T>
void WriteLE(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T ReadLE(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw IoError("unexpected end of file");
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace slu

#endif  // SLU_BINARY_IO_H_
