#include "dcm/discrete_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "dcm/errors.hpp"

namespace dcm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Upper incomplete gamma Gamma(a, x) for x > 0 and any real a, via downward
// recurrence Gamma(a, x) = (Gamma(a + 1, x) - x^a e^{-x}) / a from a positive
// (or zero) argument.
double upper_incomplete_gamma(double a, double x) {
  if (a > 0.0) return boost::math::tgamma(a, x);
  int steps = static_cast<int>(std::ceil(-a));
  double base = a + steps;
  double value;
  if (base == 0.0) {
    value = boost::math::expint(1, x);  // Gamma(0, x) = E1(x)
  } else {
    value = boost::math::tgamma(base, x);
  }
  for (int i = 0; i < steps; ++i) {
    base -= 1.0;
    value = (value - std::pow(x, base) * std::exp(-x)) / base;
  }
  return value;
}

}  // namespace

std::string describe(const LawFamily& f) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const family::Tabulated&) { os << "tabulated"; },
                 [&](const family::PointMass& p) { os << "point(" << p.value << ")"; },
                 [&](const family::PoissonPareto& p) {
                   os << "poisson_pareto(" << p.shape << "," << p.scale << ")";
                 },
                 [&](const family::Zipf& z) { os << "zipf(" << z.exponent << "," << z.corpus << ")"; },
                 [&](const family::Geometric& g) { os << "geometric(" << g.success << ")"; },
             },
             f);
  return os.str();
}

DiscreteLaw DiscreteLaw::from_pmf(std::vector<double> pmf, LawFamily fam,
                                  std::optional<double> exact_mean) {
  long double total = 0.0L;
  for (double p : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidLaw("pmf entries must be finite and nonnegative");
    total += p;
  }
  if (total > 1.0L + 1e-12L) throw InvalidLaw("pmf mass exceeds one");
  while (!pmf.empty() && pmf.back() == 0.0) pmf.pop_back();

  DiscreteLaw law;
  law.pmf_ = std::move(pmf);
  law.family_ = fam;
  double tail = static_cast<double>(1.0L - total);
  law.tail_mass_ = std::abs(tail) < 1e-12 ? 0.0 : std::max(0.0, tail);
  law.finalize();
  if (exact_mean) {
    law.full_mean_ = *exact_mean;
    law.exact_mean_ = true;
  } else {
    law.full_mean_ = law.mean_;
    law.exact_mean_ = law.tail_mass_ == 0.0;
  }
  return law;
}

void DiscreteLaw::finalize() {
  cdf_.resize(pmf_.size());
  long double acc = 0.0L;
  long double m = 0.0L;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    acc += pmf_[k];
    m += static_cast<long double>(k) * pmf_[k];
    cdf_[k] = static_cast<double>(acc);
  }
  mean_ = static_cast<double>(m);
}

DiscreteLaw DiscreteLaw::point_mass(std::uint32_t value) {
  std::vector<double> pmf(std::size_t{value} + 1, 0.0);
  pmf[value] = 1.0;
  return from_pmf(std::move(pmf), family::PointMass{value}, static_cast<double>(value));
}

DiscreteLaw DiscreteLaw::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidLaw("bernoulli parameter outside [0,1]");
  return from_pmf({1.0 - p, p});
}

DiscreteLaw DiscreteLaw::poisson_pareto(double shape, double scale, double tail_tol,
                                        std::size_t cap) {
  if (!(shape > 1.0)) throw InvalidLaw("poisson_pareto needs shape > 1 for a finite mean");
  if (!(scale > 0.0)) throw InvalidLaw("poisson_pareto needs scale > 0");

  // P(D = k) = shape * scale^shape * Gamma(k - shape, scale) / k!
  const double prefactor = shape * std::pow(scale, shape);
  std::vector<double> pmf;
  pmf.reserve(1024);
  long double total = 0.0L;

  std::size_t k = 0;
  for (; k < cap; ++k) {
    const double a = static_cast<double>(k) - shape;
    if (a > 0.0) break;
    const double p =
        prefactor * upper_incomplete_gamma(a, scale) / boost::math::factorial<double>(static_cast<unsigned>(k));
    pmf.push_back(p);
    total += p;
  }

  // For k - shape > 0 track ratio = Gamma(k - shape) / k! by recurrence and
  // apply the regularized factor Q(k - shape, scale) until it is 1 to double
  // precision.
  double ratio = 0.0;
  bool q_is_one = false;
  if (k < cap) {
    ratio = std::exp(std::lgamma(static_cast<double>(k) - shape) - std::lgamma(static_cast<double>(k) + 1.0));
  }
  for (; k < cap && 1.0L - total >= tail_tol; ++k) {
    const double a = static_cast<double>(k) - shape;
    double q = 1.0;
    if (!q_is_one) {
      const double log_lower = a * std::log(scale) - scale - std::lgamma(a + 1.0);
      if (log_lower < -60.0) {
        q_is_one = true;
      } else {
        q = boost::math::gamma_q(a, scale);
      }
    }
    const double p = prefactor * ratio * q;
    pmf.push_back(p);
    total += p;
    ratio *= a / (static_cast<double>(k) + 1.0);
  }

  const double exact_mean = shape * scale / (shape - 1.0);
  DiscreteLaw law = from_pmf(std::move(pmf), family::PoissonPareto{shape, scale}, exact_mean);
  law.tail_mass_ = std::max(0.0, static_cast<double>(1.0L - total));
  return law;
}

DiscreteLaw DiscreteLaw::zipf(double exponent, std::uint32_t corpus) {
  if (corpus == 0) throw InvalidLaw("zipf corpus must be positive");
  if (!(exponent > 0.0)) throw InvalidLaw("zipf exponent must be positive");
  std::vector<double> pmf(std::size_t{corpus} + 1, 0.0);
  long double norm = 0.0L;
  for (std::uint32_t t = corpus; t >= 1; --t) norm += std::pow(static_cast<long double>(t), -exponent);
  for (std::uint32_t t = 1; t <= corpus; ++t)
    pmf[t] = static_cast<double>(std::pow(static_cast<long double>(t), -exponent) / norm);
  return from_pmf(std::move(pmf), family::Zipf{exponent, corpus});
}

DiscreteLaw DiscreteLaw::geometric(double success, double tail_tol) {
  if (!(success > 0.0 && success <= 1.0)) throw InvalidLaw("geometric success must be in (0,1]");
  std::vector<double> pmf;
  double survival = 1.0;  // P(D >= k)
  for (std::size_t k = 0; survival >= tail_tol; ++k) {
    pmf.push_back(success * survival);
    survival *= (1.0 - success);
  }
  DiscreteLaw law = from_pmf(std::move(pmf), family::Geometric{success}, (1.0 - success) / success);
  law.tail_mass_ = survival;
  return law;
}

double DiscreteLaw::cdf_at(std::size_t k) const {
  if (cdf_.empty()) return 1.0 - tail_mass_;
  return k < cdf_.size() ? cdf_[k] : cdf_.back();
}

double DiscreteLaw::moment(double s) const {
  long double acc = 0.0L;
  for (std::size_t k = 1; k < pmf_.size(); ++k)
    acc += std::pow(static_cast<long double>(k), s) * pmf_[k];
  if (tail_mass_ > 0.0) {
    if (const auto* pp = std::get_if<family::PoissonPareto>(&family_)) {
      // Beyond the cutoff the mixture behaves like its Pareto rate.
      if (s >= pp->shape) return std::numeric_limits<double>::infinity();
      const double K = static_cast<double>(pmf_.size());
      acc += pp->shape * std::pow(pp->scale, pp->shape) * std::pow(K, s - pp->shape) / (pp->shape - s);
    }
  }
  return static_cast<double>(acc);
}

std::size_t DiscreteLaw::quantile(double u) const { return pseudo_inverse_sample(cdf_, u); }

double DiscreteLaw::pgf(double s) const {
  long double acc = 0.0L;
  long double power = 1.0L;
  for (double p : pmf_) {
    acc += p * power;
    power *= s;
    if (power < 1e-300L) break;
  }
  return static_cast<double>(acc);
}

std::size_t pseudo_inverse_sample(std::span<const double> cdf, double u) {
  auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  return static_cast<std::size_t>(it - cdf.begin());
}

Wasserstein1 wasserstein1(const DiscreteLaw& p, const DiscreteLaw& q) {
  const std::size_t kp = p.tail_cutoff();
  const std::size_t kq = q.tail_cutoff();
  const std::size_t K = std::max(kp, kq);

  long double value = 0.0L;
  long double error = 0.0L;
  long double fp = 0.0L, fq = 0.0L;
  long double surv_p = 0.0L, surv_q = 0.0L;  // sum_{k<K} (1 - F(k))
  for (std::size_t k = 0; k < K; ++k) {
    fp += p(k);
    fq += q(k);
    value += std::abs(fp - fq);
    surv_p += 1.0L - fp;
    surv_q += 1.0L - fq;
    if (k >= kp) error += p.tail_mass();
    if (k >= kq) error += q.tail_mass();
  }

  // Region k >= K: sum of survival functions equals full mean minus the
  // retained partial sum, exact when the mean is known in closed form.
  auto tail_sum = [](const DiscreteLaw& law, long double retained) -> long double {
    if (law.tail_mass() == 0.0) return 0.0L;
    if (!law.has_exact_mean()) return std::numeric_limits<long double>::infinity();
    return std::max(0.0L, static_cast<long double>(law.full_mean()) - retained);
  };
  const long double tp = tail_sum(p, surv_p);
  const long double tq = tail_sum(q, surv_q);
  if (p.tail_mass() == 0.0) {
    value += tq;
  } else if (q.tail_mass() == 0.0) {
    value += tp;
  } else {
    error += tp + tq;
  }
  return {static_cast<double>(value), static_cast<double>(error)};
}

DegreeSampler::DegreeSampler(const DiscreteLaw& law) {
  const LawFamily& fam = law.family();
  if (const auto* pm = std::get_if<family::PointMass>(&fam)) {
    kind_ = Kind::constant;
    constant_ = pm->value;
    return;
  }
  if (const auto* g = std::get_if<family::Geometric>(&fam)) {
    kind_ = g->success >= 1.0 ? Kind::constant : Kind::geometric;
    constant_ = 0;
    a_ = g->success < 1.0 ? 1.0 / std::log1p(-g->success) : 0.0;
    return;
  }
  if (const auto* pp = std::get_if<family::PoissonPareto>(&fam)) {
    kind_ = Kind::poisson_pareto;
    a_ = pp->scale;
    b_ = -1.0 / pp->shape;
    return;
  }

  // Vose alias table over the retained support.
  const auto pmf = law.pmf();
  const std::size_t k = pmf.size();
  if (k == 0) throw InvalidLaw("cannot sample from an empty pmf");
  if (k == 1) {
    kind_ = Kind::constant;
    constant_ = 0;
    return;
  }
  kind_ = Kind::alias;
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  prob_.assign(k, 0.0);
  alias_.assign(k, 0);
  std::vector<double> scaled(k);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < k; ++i) {
    scaled[i] = pmf[i] * static_cast<double>(k) / total;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) prob_[i] = 1.0;
  for (auto i : small) prob_[i] = 1.0;
}

std::uint64_t DegreeSampler::operator()(Rng& rng) const {
  switch (kind_) {
    case Kind::constant:
      return constant_;
    case Kind::geometric:
      return static_cast<std::uint64_t>(std::floor(std::log(rng.uniform()) * a_));
    case Kind::poisson_pareto: {
      const double rate = a_ * std::pow(rng.uniform(), b_);
      return rng.poisson(rate);
    }
    case Kind::alias: {
      const std::uint64_t column = rng.below(prob_.size());
      return rng.uniform() < prob_[column] ? column : alias_[column];
    }
  }
  return 0;
}

}  // namespace dcm
