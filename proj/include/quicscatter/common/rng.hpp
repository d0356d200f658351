// Copyright 2026 The quicscatter Authors
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

#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace quicscatter {

// Seeded generator used everywhere randomness is needed. Draws are built on
// raw engine output (not std::*_distribution) so sequences are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(mix(seed)) {}

  // Independent stream derived from a parent seed and a stream label.
  static Rng substream(uint64_t seed, uint64_t stream) { return Rng(mix(seed) ^ mix(stream + 0x9e37)); }

  uint64_t next() { return engine_(); }

  // Uniform in [0, bound); bound must be non-zero.
  uint64_t below(uint64_t bound) {
    // Rejection keeps the draw unbiased.
    uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform in [lo, hi].
  int64_t between(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo) + 1));
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  void fill(std::span<uint8_t> out) {
    size_t i = 0;
    while (i < out.size()) {
      uint64_t r = engine_();
      for (int b = 0; b < 8 && i < out.size(); ++b, ++i) out[i] = static_cast<uint8_t>(r >> (8 * b));
    }
  }

  static uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace quicscatter
