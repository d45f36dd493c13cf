#include "dcm/hll.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <limits>

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

#include "dcm/errors.hpp"

namespace dcm {
namespace hll {

bool merge_into(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src) {
  const std::size_t m = dst.size();
  std::size_t i = 0;
  bool changed = false;
#if defined(__SSE2__)
  __m128i diff = _mm_setzero_si128();
  for (; i + 16 <= m; i += 16) {
    const __m128i a = _mm_loadu_si128(reinterpret_cast<const __m128i*>(dst.data() + i));
    const __m128i b = _mm_loadu_si128(reinterpret_cast<const __m128i*>(src.data() + i));
    const __m128i mx = _mm_max_epu8(a, b);
    diff = _mm_or_si128(diff, _mm_xor_si128(mx, a));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(dst.data() + i), mx);
  }
  changed = _mm_movemask_epi8(_mm_cmpeq_epi8(diff, _mm_setzero_si128())) != 0xFFFF;
#endif
  for (; i < m; ++i) {
    if (src[i] > dst[i]) {
      dst[i] = src[i];
      changed = true;
    }
  }
  return changed;
}

namespace {

double sigma(double x) {
  if (x == 1.0) return std::numeric_limits<double>::infinity();
  double y = 1.0, z = x, prev;
  do {
    x *= x;
    prev = z;
    z += x * y;
    y += y;
  } while (z != prev);
  return z;
}

double tau(double x) {
  if (x == 0.0 || x == 1.0) return 0.0;
  double y = 1.0, z = 1.0 - x, prev;
  do {
    x = std::sqrt(x);
    prev = z;
    y *= 0.5;
    z -= (1.0 - x) * (1.0 - x) * y;
  } while (z != prev);
  return z / 3.0;
}

}  // namespace

double estimate(std::span<const std::uint8_t> registers, unsigned p) {
  const unsigned q = 64 - p;
  const double m = static_cast<double>(registers.size());
  std::array<std::uint32_t, 66> hist{};
  for (auto r : registers) ++hist[r];
  if (hist[0] == registers.size()) return 0.0;
  double z = m * tau(1.0 - hist[q + 1] / m);
  for (unsigned k = q; k >= 1; --k) z = 0.5 * (z + hist[k]);
  z += m * sigma(hist[0] / m);
  const double alpha_inf = 0.5 / std::log(2.0);
  return alpha_inf * m * m / z;
}

}  // namespace hll

HllCounter::HllCounter(unsigned precision) : p_(precision) {
  if (precision < hll::kMinPrecision || precision > hll::kMaxPrecision)
    throw ParameterOutOfRange("HLL precision must lie in [4, 16]");
  registers_.assign(std::size_t{1} << precision, 0);
}

void HllCounter::add_hash(std::uint64_t hash) {
  const auto [index, rank] = hll::locate(hash, p_);
  if (rank > registers_[index]) registers_[index] = rank;
}

bool HllCounter::merge(const HllCounter& other) {
  if (other.p_ != p_) throw ParameterOutOfRange("cannot merge HLL counters of different precision");
  return hll::merge_into(registers_, other.registers_);
}

}  // namespace dcm
