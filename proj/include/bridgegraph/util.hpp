#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace bridgegraph {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Fixed-decimal formatting ("%.4f" style). Used for every CSV/SVG number so
// that repeated runs produce byte-identical output.
std::string fmt_fixed(double v, int decimals);

// Shortest round-trippable representation ("%.17g"), for artifacts that are
// re-imported and compared bit-exact.
std::string fmt_g17(double v);

std::string trim(const std::string& s);
std::string to_lower(std::string s);
bool starts_with(const std::string& s, const std::string& prefix);

// Minimal RFC-4180 style CSV handling: quote fields containing separators,
// split a line honoring quotes.
std::string csv_escape(const std::string& field);
std::vector<std::string> csv_split(const std::string& line);

// FNV-1a, used for content-addressed cache filenames.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Whole-file IO. atomic_write writes to "<path>.tmp" then renames so readers
// never observe a partial file.
std::optional<std::string> read_file(const std::string& path);
void atomic_write_file(const std::string& path, const std::string& bytes);

std::string iso8601_utc_now();

// Small deterministic PRNG (SplitMix64). The standard <random> engines would
// work, but distribution output is not pinned by the standard; this keeps
// sampling byte-reproducible no matter which libstdc++ builds the project.
struct Rng {
  std::uint64_t state = 0x9e3779b97f4a7c15ull;

  explicit Rng(std::uint64_t seed = 0) : state(seed + 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  // Uniform in [0, 1).
  double uniform() { return double(next_u64() >> 11) * (1.0 / 9007199254740992.0); }
  // Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n) { return std::size_t(uniform() * double(n)); }
  double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller (one value per call; cheap enough here).
  double normal();
  // k distinct indices from [0, n), ascending. Partial Fisher-Yates.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);
};

}  // namespace bridgegraph
