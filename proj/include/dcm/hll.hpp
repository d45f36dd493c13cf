#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dcm {

/// HyperLogLog sketch with 2^p byte registers and 64-bit hashes.
namespace hll {

inline constexpr unsigned kMinPrecision = 4;
inline constexpr unsigned kMaxPrecision = 16;

/// Register index and rank for a 64-bit hash at precision p.
inline std::pair<std::uint32_t, std::uint8_t> locate(std::uint64_t hash, unsigned p) {
  const auto index = static_cast<std::uint32_t>(hash >> (64 - p));
  const std::uint64_t rest = hash << p;
  const unsigned q = 64 - p;
  const unsigned rank = rest == 0 ? q + 1 : static_cast<unsigned>(__builtin_clzll(rest)) + 1;
  return {index, static_cast<std::uint8_t>(rank > q + 1 ? q + 1 : rank)};
}

/// Register-wise max of src into dst; returns true if dst changed.
bool merge_into(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src);

/// Cardinality estimate (Ertl's improved raw estimator, no bias tables).
double estimate(std::span<const std::uint8_t> registers, unsigned p);

}  // namespace hll

class HllCounter {
 public:
  explicit HllCounter(unsigned precision = 12);

  void add_hash(std::uint64_t hash);
  /// Register-wise max; returns true if anything changed.
  bool merge(const HllCounter& other);
  double estimate() const { return hll::estimate(registers_, p_); }

  unsigned precision() const { return p_; }
  std::span<const std::uint8_t> registers() const { return registers_; }

  friend bool operator==(const HllCounter&, const HllCounter&) = default;

 private:
  unsigned p_;
  std::vector<std::uint8_t> registers_;
};

}  // namespace dcm
