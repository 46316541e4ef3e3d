#pragma once
// Small shared helpers: text normalization, digests, the seeded generator,
// JSON fragment extraction and file I/O.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agenteval {

// ASCII whitespace trim.
std::string trim(std::string_view text);

// Trim, then ASCII lower-case. Used for every case-insensitive comparison of
// names and labels.
std::string fold(std::string_view text);

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

std::uint64_t fnv1a64(std::string_view data);

// SplitMix64, "splitmix64-v1". The output sequence for a given seed is fixed
// and identical across platforms, unlike std:: distributions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  // Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform real in [0, 1) from the top 53 bits.
  double unit();

 private:
  std::uint64_t state_;
};

// Seeded Fisher-Yates over [0, n); the first k entries of the result are a
// uniform k-subset in draw order.
std::vector<std::size_t> seeded_permutation(std::size_t n, SplitMix64& rng);

// First balanced {...} (or [...]) span in text that parses as JSON of that
// shape. Brace matching honours JSON string escapes.
std::optional<std::string> first_json_object(std::string_view text);
std::optional<std::string> first_json_array(std::string_view text);

std::string read_file(const std::filesystem::path& path);

// Write-temp-then-rename so readers never see a torn file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Fixed six-decimal rendering used by every CSV.
std::string format_fixed6(double value);

}  // namespace agenteval
