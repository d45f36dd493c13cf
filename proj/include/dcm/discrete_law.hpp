#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dcm/rng.hpp"

namespace dcm {

/// Parametric families a DiscreteLaw may remember. The pmf table is always
/// authoritative for analytics; the family is kept so that sampling and tail
/// corrections can use exact closed forms.
namespace family {
struct Tabulated {};
struct PointMass {
  std::uint32_t value;
};
/// Poisson with a Pareto(shape, scale) random rate.
struct PoissonPareto {
  double shape;
  double scale;
};
/// P(k) proportional to k^{-exponent} on {1, ..., corpus}.
struct Zipf {
  double exponent;
  std::uint32_t corpus;
};
/// P(k) = success * (1 - success)^k on {0, 1, ...}.
struct Geometric {
  double success;
};
}  // namespace family

using LawFamily = std::variant<family::Tabulated, family::PointMass, family::PoissonPareto,
                               family::Zipf, family::Geometric>;

std::string describe(const LawFamily& f);

/// Probability mass function on the nonnegative integers.
///
/// Infinite-support laws are truncated at the first index where the retained
/// mass leaves less than the tail tolerance (or at a hard cap); the missing
/// mass is kept in tail_mass() and never renormalized away. mean() is the
/// retained-support mean, full_mean() the exact mean including the tail when
/// the family provides it.
class DiscreteLaw {
 public:
  static constexpr std::size_t kDefaultCap = std::size_t{1} << 22;

  DiscreteLaw() = default;

  /// Takes the table as given. Entries must be nonnegative; total retained
  /// mass must not exceed 1 + 1e-12. Missing mass becomes the tail.
  static DiscreteLaw from_pmf(std::vector<double> pmf, LawFamily fam = family::Tabulated{},
                              std::optional<double> exact_mean = std::nullopt);
  static DiscreteLaw point_mass(std::uint32_t value);
  static DiscreteLaw poisson_pareto(double shape, double scale, double tail_tol = 1e-12,
                                    std::size_t cap = kDefaultCap);
  static DiscreteLaw zipf(double exponent, std::uint32_t corpus);
  static DiscreteLaw geometric(double success, double tail_tol = 1e-12);
  static DiscreteLaw bernoulli(double p);

  double operator()(std::size_t k) const { return k < pmf_.size() ? pmf_[k] : 0.0; }
  std::span<const double> pmf() const { return pmf_; }
  std::span<const double> cdf() const { return cdf_; }
  std::size_t tail_cutoff() const { return pmf_.size(); }
  double tail_mass() const { return tail_mass_; }
  double mean() const { return mean_; }
  double full_mean() const { return full_mean_; }
  bool has_exact_mean() const { return exact_mean_; }
  const LawFamily& family() const { return family_; }

  /// Retained-support CDF; 1 - tail_mass() beyond the cutoff.
  double cdf_at(std::size_t k) const;

  /// E[D^s], retained support plus a family-specific tail estimate.
  double moment(double s) const;

  /// Pseudo-inverse inf{k : F(k) >= u}. Returns tail_cutoff() when u falls
  /// into the truncated tail.
  std::size_t quantile(double u) const;

  /// Sum over retained support of k * pmf(k) * q^(k-1) and friends are done
  /// by callers; this evaluates the generating function sum_k pmf(k) s^k.
  double pgf(double s) const;

 private:
  void finalize();

  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double tail_mass_ = 0.0;
  double mean_ = 0.0;
  double full_mean_ = 0.0;
  bool exact_mean_ = true;
  LawFamily family_ = family::Tabulated{};
};

/// Pseudo-inverse of a right-continuous step CDF given by its values at
/// 0, 1, 2, ...: the smallest k with cdf[k] >= u, or cdf.size() if none.
std::size_t pseudo_inverse_sample(std::span<const double> cdf, double u);

/// Kantorovich-Rubinstein distance with an absolute bound on the error
/// introduced by truncated tails.
struct Wasserstein1 {
  double value = 0.0;
  double truncation_error = 0.0;
};

/// Sum over k >= 0 of |F_p(k) - F_q(k)|.
Wasserstein1 wasserstein1(const DiscreteLaw& p, const DiscreteLaw& q);

/// Draws from a DiscreteLaw in O(1): exact closed-form samplers for point,
/// geometric and Poisson-Pareto laws, a Walker/Vose alias table otherwise.
class DegreeSampler {
 public:
  explicit DegreeSampler(const DiscreteLaw& law);

  std::uint64_t operator()(Rng& rng) const;

 private:
  enum class Kind { constant, geometric, poisson_pareto, alias };
  Kind kind_ = Kind::constant;
  std::uint64_t constant_ = 0;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace dcm
