#include "dcm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "dcm/errors.hpp"
#include "dcm/fenwick.hpp"
#include "dcm/io.hpp"

namespace dcm {

TheoreticalHopcountLaw TheoreticalHopcountLaw::from_pools(std::size_t n, double nu, double mu,
                                                          const WPool& w_plus, const WPool& w_minus) {
  TheoreticalHopcountLaw law;
  law.n = n;
  law.nu = nu;
  law.mu = mu;
  law.pool_plus = w_plus.samples.size();
  law.pool_minus = w_minus.samples.size();
  const std::size_t m = std::min(law.pool_plus, law.pool_minus);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = w_plus.samples[i] * w_minus.samples[i];
    if (w > 0.0) law.products.push_back(w);
  }
  return law;
}

TheoreticalHopcountLaw TheoreticalHopcountLaw::unit(std::size_t n, double nu, double mu) {
  TheoreticalHopcountLaw law;
  law.n = n;
  law.nu = nu;
  law.mu = mu;
  law.products.assign(1, 1.0);
  law.pool_plus = law.pool_minus = 1;
  return law;
}

int floor_log(double x, double base) {
  if (!(x > 0.0) || !(base > 1.0)) throw ParameterOutOfRange("floor_log needs x > 0 and base > 1");
  const long double l = std::log(static_cast<long double>(x)) / std::log(static_cast<long double>(base));
  const long double r = std::round(l);
  if (std::abs(l - r) < 1e-9L) {
    const long double power = std::pow(static_cast<long double>(base), r);
    return static_cast<int>(power <= static_cast<long double>(x) ? r : r - 1);
  }
  return static_cast<int>(std::floor(l));
}

namespace {

double exponent_scale(const TheoreticalHopcountLaw& law, double x) {
  if (!(law.mu > 1.0)) throw ParameterOutOfRange("the hopcount law needs mu > 1");
  if (law.products.empty()) throw NoSurvivingMass("no positive W+ W- draws");
  const int k = floor_log(static_cast<double>(law.n), law.mu);
  return law.nu / (law.mu - 1.0) * std::pow(law.mu, k + std::floor(x)) / static_cast<double>(law.n);
}

}  // namespace

double theoretical_cdf(const TheoreticalHopcountLaw& law, double x) {
  const double c = exponent_scale(law, x);
  long double s = 0;
  for (double w : law.products) s += std::exp(-c * w);
  return static_cast<double>(1.0L - s / law.products.size());
}

double theoretical_cdf_stderr(const TheoreticalHopcountLaw& law, double x) {
  const double c = exponent_scale(law, x);
  const std::size_t m = law.products.size();
  if (m < 2) return 0.0;
  long double s = 0, ss = 0;
  for (double w : law.products) {
    const long double e = std::exp(-c * w);
    s += e;
    ss += e * e;
  }
  const long double mean = s / m;
  const long double var = std::max(0.0L, (ss - m * mean * mean) / (m - 1));
  return static_cast<double>(std::sqrt(var / m));
}

double dregular_cdf(std::uint32_t d, std::size_t n, double x) {
  if (d < 2) throw ParameterOutOfRange("regular closed form needs d >= 2");
  const int k = floor_log(static_cast<double>(n), d);
  const double power = std::pow(static_cast<double>(d), k + std::floor(x) + 1.0);
  return 1.0 - std::exp(-power / ((d - 1.0) * static_cast<double>(n)));
}

double prob_finite(double s_plus, double s_minus) {
  if (!(s_plus >= 0.0 && s_plus <= 1.0 && s_minus >= 0.0 && s_minus <= 1.0))
    throw ParameterOutOfRange("survival probabilities must lie in [0, 1]");
  return s_plus * s_minus;
}

KsReport ks_distance(const HopcountHistogram& empirical, const TheoreticalHopcountLaw& law) {
  if (!(empirical.finite_pairs > 0)) throw EmptyEmpirical("histogram has no finite distances");
  KsReport r;
  r.shift = floor_log(static_cast<double>(law.n), law.mu);
  for (int t = -kKsLattice; t <= kKsLattice; ++t) {
    const long long upto = static_cast<long long>(t) + r.shift;
    long double cum = 0;
    for (long long h = 1; h <= upto && h < static_cast<long long>(empirical.counts.size()); ++h)
      cum += empirical.counts[h];
    const double emp = static_cast<double>(cum / empirical.finite_pairs);
    const double theo = theoretical_cdf(law, t);
    r.t.push_back(t);
    r.empirical.push_back(emp);
    r.theoretical.push_back(theo);
    r.ks = std::max(r.ks, std::abs(emp - theo));
  }
  return r;
}

long double survival_product_p(std::uint64_t a, std::uint64_t b, std::uint64_t l) {
  if (a + b > l) return 0.0L;
  if (b == 0) return 1.0L;
  long double p = 1.0L;
  for (std::uint64_t s = 0; s < a; ++s) p *= 1.0L - static_cast<long double>(b) / static_cast<long double>(l - s);
  return p;
}

namespace {

// Stub-level state of one lazily paired exploration.
struct LazyPairing {
  std::vector<std::uint64_t> free_in, free_out;
  Fenwick in_tree, out_tree;
  std::vector<char> in_fwd, in_bwd;
  std::uint64_t paired = 0;

  explicit LazyPairing(const BiDegreeSequence& seq)
      : free_in(seq.d_minus.begin(), seq.d_minus.end()),
        free_out(seq.d_plus.begin(), seq.d_plus.end()),
        in_tree(free_in),
        out_tree(free_out),
        in_fwd(seq.size(), 0),
        in_bwd(seq.size(), 0) {}

  // Pairs every free stub of `front` on one side with uniform free stubs of
  // the other side, avoiding those owned by `avoid`; returns newly reached
  // nodes.
  std::vector<NodeId> advance(const std::vector<NodeId>& front, const std::vector<NodeId>& avoid, bool forward,
                              Rng& rng) {
    auto& own_free = forward ? free_out : free_in;
    auto& own_tree = forward ? out_tree : in_tree;
    auto& far_free = forward ? free_in : free_out;
    auto& far_tree = forward ? in_tree : out_tree;
    auto& seen = forward ? in_fwd : in_bwd;
    for (NodeId v : avoid) far_tree.add(v, -static_cast<std::int64_t>(far_free[v]));
    std::vector<NodeId> reached;
    for (NodeId u : front) {
      const std::uint64_t stubs = own_free[u];
      own_tree.add(u, -static_cast<std::int64_t>(stubs));
      own_free[u] = 0;
      for (std::uint64_t s = 0; s < stubs; ++s) {
        const auto x = static_cast<NodeId>(far_tree.find(rng.below(far_tree.total())));
        far_tree.add(x, -1);
        --far_free[x];
        ++paired;
        if (!seen[x]) {
          seen[x] = 1;
          reached.push_back(x);
        }
      }
    }
    for (NodeId v : avoid) far_tree.add(v, static_cast<std::int64_t>(far_free[v]));
    return reached;
  }
};

}  // namespace

TailEstimate exact_tail_smalln(const BiDegreeSequence& seq, std::size_t k, std::size_t reps, std::uint64_t seed) {
  const std::size_t n = seq.size();
  if (n < 2) throw ParameterOutOfRange("need at least two nodes");
  TailEstimate est;
  est.reps = reps;
  if (k == 0) {
    est.estimate = 1.0;
    return est;
  }
  if (reps == 0) return est;
  long double sum = 0, sum_sq = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    Rng rng(derive_seed(seed, r));
    const auto a = static_cast<NodeId>(rng.below(n));
    auto b = static_cast<NodeId>(rng.below(n - 1));
    if (b >= a) ++b;
    LazyPairing st(seq);
    st.in_fwd[a] = 1;
    st.in_bwd[b] = 1;
    std::vector<NodeId> front_f{a}, front_b{b};
    long double weight = 1.0L;
    for (std::size_t i = 2; i <= k + 1; ++i) {
      std::uint64_t out_stubs = 0, in_stubs = 0;
      for (NodeId v : front_f) out_stubs += st.free_out[v];
      for (NodeId v : front_b) in_stubs += st.free_in[v];
      if (out_stubs == 0 || in_stubs == 0) break;  // one ball is complete; no later connection
      weight *= survival_product_p(out_stubs, in_stubs, seq.total - st.paired);
      if (weight == 0.0L || i == k + 1) break;
      if (i % 2 == 0)
        front_f = st.advance(front_f, front_b, true, rng);
      else
        front_b = st.advance(front_b, front_f, false, rng);
    }
    sum += weight;
    sum_sq += weight * weight;
  }
  const long double mean = sum / reps;
  est.estimate = static_cast<double>(mean);
  if (reps > 1) {
    const long double var = std::max(0.0L, (sum_sq - reps * mean * mean) / (reps - 1));
    est.standard_error = static_cast<double>(std::sqrt(var / reps));
  }
  return est;
}

void write_comparison(const KsReport& report, const std::filesystem::path& path, nlohmann::json meta) {
  {
    auto os = io::open_out(path);
    os << std::setprecision(17) << "t,empirical_pmf,theoretical_pmf\n";
    for (std::size_t i = 0; i < report.t.size(); ++i) {
      const double pe = report.empirical[i] - (i > 0 ? report.empirical[i - 1] : 0.0);
      const double pt = report.theoretical[i] - (i > 0 ? report.theoretical[i - 1] : 0.0);
      os << report.t[i] << ',' << pe << ',' << pt << '\n';
    }
  }
  meta["ks"] = report.ks;
  meta["shift"] = report.shift;
  io::open_out(std::filesystem::path(path).replace_extension(".json")) << meta.dump(2) << '\n';
}

}  // namespace dcm
