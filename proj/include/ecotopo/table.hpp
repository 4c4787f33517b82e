#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ecotopo {

// Tab-separated table with a single header row. Cells escape '\\', '\t',
// '\n' and '\r' as two-character backslash sequences so any term survives
// a write/read cycle.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
  static Table parse(std::string_view text);
};

std::string escape_cell(std::string_view cell);
std::string unescape_cell(std::string_view cell);

// Shortest decimal rendering that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

// "7576" -> "7,576".
std::string with_thousands(std::uint64_t value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Stable 64-bit FNV-1a; used for config hashes and derived seeds.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

// Static-chunked loop over [0, n). Each index is processed by exactly one
// worker; callers keep per-index work independent so results do not depend
// on the thread count.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& body);

// Thread count from ECOTOPO_THREADS, falling back to `fallback`.
unsigned threads_from_env(unsigned fallback = 1);

// Portable seeded generator: outputs depend only on the seed, never on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double gaussian();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ecotopo
