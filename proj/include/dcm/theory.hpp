#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "dcm/branching.hpp"
#include "dcm/hopcount.hpp"

namespace dcm {

/// Limiting law of H_n - floor(log_mu n), represented by Monte-Carlo draws of
/// W+ W- conditioned on being positive.
struct TheoreticalHopcountLaw {
  std::size_t n = 0;
  double nu = 0.0;
  double mu = 0.0;
  std::vector<double> products;  ///< strictly positive W+ W- draws
  std::size_t pool_plus = 0;
  std::size_t pool_minus = 0;

  /// Pairs the two (independent) pools index by index and keeps the
  /// positive products.
  static TheoreticalHopcountLaw from_pools(std::size_t n, double nu, double mu, const WPool& w_plus,
                                           const WPool& w_minus);
  /// W+ = W- = 1, as for regular sequences.
  static TheoreticalHopcountLaw unit(std::size_t n, double nu, double mu);
};

/// floor(log_base x) with an exact recheck near integers.
int floor_log(double x, double base);

double theoretical_cdf(const TheoreticalHopcountLaw& law, double x);
/// Monte-Carlo standard error of theoretical_cdf at x.
double theoretical_cdf_stderr(const TheoreticalHopcountLaw& law, double x);

/// Regular sequences: 1 - exp(-d^(floor(log_d n) + floor(x) + 1) / ((d-1) n)).
double dregular_cdf(std::uint32_t d, std::size_t n, double x);

/// Limiting probability that the hopcount is finite.
double prob_finite(double s_plus, double s_minus);

struct KsReport {
  double ks = 0.0;
  int shift = 0;                    ///< floor(log_mu n)
  std::vector<int> t;               ///< lattice t = -40..40
  std::vector<double> empirical;    ///< P(H - shift <= t | H finite)
  std::vector<double> theoretical;  ///< P(law <= t)
};

inline constexpr int kKsLattice = 40;

/// Sup-distance of the finite-conditioned CDFs on the shifted lattice.
KsReport ks_distance(const HopcountHistogram& empirical, const TheoreticalHopcountLaw& law);

/// 1(A + B <= L) prod_{s<A} (1 - B/(L - s)): probability that none of A
/// out-stubs pairs with any of B marked in-stubs among L.
long double survival_product_p(std::uint64_t a, std::uint64_t b, std::uint64_t l);

struct TailEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t reps = 0;
};

/// Unbiased estimate of P(H_n > k) for a uniform ordered pair of distinct
/// nodes in a DCM graph on `seq`. Each replicate grows the out-ball of the
/// source and the in-ball of the target alternately on lazily paired stubs,
/// multiplying in the exact probability that the two frontiers stay
/// unconnected and then pairing the advanced frontier conditioned on that.
TailEstimate exact_tail_smalln(const BiDegreeSequence& seq, std::size_t k, std::size_t reps, std::uint64_t seed);

/// CSV "t,empirical_pmf,theoretical_pmf" plus a JSON sidecar with `meta`.
void write_comparison(const KsReport& report, const std::filesystem::path& path,
                      nlohmann::json meta = nlohmann::json::object());

}  // namespace dcm
