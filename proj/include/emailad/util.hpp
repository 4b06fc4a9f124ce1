#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emailad {

// ASCII-only case folding; bytes >= 0x80 pass through untouched.
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

// Trims SP and HTAB only.
std::string_view trim_wsp(std::string_view s);
std::string_view trim_space(std::string_view s);  // any isspace byte

// 64-bit FNV-1a, incremental.
class Fnv1a64 {
 public:
  Fnv1a64& update(std::string_view bytes);
  Fnv1a64& update_u64(std::uint64_t v);
  Fnv1a64& update_f64(double v);
  std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(std::string_view s);

// Child seeds derived from a parent seed and a tag. Used so that per-tree,
// per-fold and per-cell randomness does not depend on scheduling order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag_a, std::uint64_t tag_b);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Little-endian float64 packing used by the model file format.
std::string pack_f64(std::span<const double> values);
std::vector<double> unpack_f64(std::string_view b64);

// Worker count used by parallel_for. 0 means hardware concurrency.
void set_num_threads(unsigned n);
unsigned num_threads();

// Runs fn(i) for i in [0, n). Nested calls from inside a worker run serially,
// so callers never oversubscribe. fn must not depend on execution order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace emailad
