// Copyright 2026 The CLP Authors
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

#ifndef CLP_UTIL_HPP_
#define CLP_UTIL_HPP_

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clp {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent stream seeds from a user
// seed and a stream id, so that results do not depend on generation order.
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream);

inline Rng MakeStream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(MixSeed(seed, stream));
}

// Uniform double in [0, 1) from the top 53 bits. Stable across standard
// library implementations, unlike std::uniform_real_distribution.
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal pair via Box-Muller.
struct NormalPair {
  double first;
  double second;
};
NormalPair BoxMuller(Rng& rng);

// Shortest decimal representation that round-trips to the same double.
std::string FormatDouble(double value);

// Strict parsers; throw clp::Error(kData) mentioning `context` on failure.
double ParseDouble(std::string_view text, std::string_view context);
std::int64_t ParseInt(std::string_view text, std::string_view context);

// Splits on a single delimiter, keeping empty fields.
std::vector<std::string_view> SplitFields(std::string_view line, char delim);

std::string ReadFile(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);

// Lower-case hex SHA-256 digest.
std::string Sha256Hex(std::string_view bytes);
std::string Sha256File(const std::filesystem::path& path);

// Mean and sample standard deviation (n - 1 denominator, 0 for n < 2).
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd ComputeMeanStd(std::span<const double> values);

}  // namespace clp

#endif  // CLP_UTIL_HPP_
