// Copyright 2026 The cavread Authors
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

#include <array>
#include <cstdint>
#include <string_view>

namespace cavread {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// A stream is identified by (seed, stream index, domain tag); distinct
/// identifiers give statistically independent sequences and any trial can
/// be regenerated on its own, whatever thread runs it.
class RandomStream {
 public:
  static constexpr std::string_view kAlgorithm = "philox4x32-10";

  RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t domain = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double exponential(double mean);
  /// Inversion below mean 10, Hormann's PTRS rejection sampler above.
  std::int64_t poisson(double mean);
  std::int64_t binomial(std::int64_t n, double p);

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_{};
  int available_ = 0;
};

/// Stream domains used by the simulation drivers.
enum class StreamDomain : std::uint32_t {
  trajectory = 1,
  counts = 2,
  trials_f1 = 3,
  trials_f2 = 4,
  preparation = 5,
  threshold_check = 6,
};

inline RandomStream make_stream(std::uint64_t seed, std::uint64_t index, StreamDomain domain) {
  return RandomStream(seed, index, static_cast<std::uint32_t>(domain));
}

}  // namespace cavread
