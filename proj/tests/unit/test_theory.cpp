#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcm/errors.hpp"
#include "dcm/law_config.hpp"
#include "dcm/theory.hpp"

using namespace dcm;

namespace {

// P(H > k) for a uniform ordered pair of distinct nodes, averaged over all
// L! matchings of out-stubs to in-stubs.
double enumerate_tail(const BiDegreeSequence& seq, std::uint32_t k) {
  std::vector<NodeId> owners;
  for (NodeId v = 0; v < seq.size(); ++v) owners.insert(owners.end(), seq.d_minus[v], v);
  std::vector<std::size_t> perm(owners.size());
  std::iota(perm.begin(), perm.end(), 0);
  const std::size_t n = seq.size();
  double far = 0, total = 0;
  do {
    std::vector<Edge> edges;
    std::size_t j = 0;
    for (NodeId u = 0; u < n; ++u)
      for (std::uint32_t s = 0; s < seq.d_plus[u]; ++s) edges.push_back({u, owners[perm[j++]]});
    const auto g = Digraph::from_edges(n, edges);
    for (NodeId a = 0; a < n; ++a) {
      const auto d = bfs_all(g, a);
      for (NodeId b = 0; b < n; ++b)
        if (a != b) far += d[b] > k;
    }
    total += static_cast<double>(n * (n - 1));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return far / total;
}

}  // namespace

TEST_CASE("pairing survival product") {
  CHECK(static_cast<double>(survival_product_p(1, 1, 2)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(static_cast<double>(survival_product_p(2, 1, 3)) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(survival_product_p(3, 2, 4) == 0.0L);
  CHECK(survival_product_p(5, 0, 9) == 1.0L);
}

TEST_CASE("floor_log near integers") {
  CHECK(floor_log(1000, 10) == 3);
  CHECK(floor_log(999.999, 10) == 2);
  CHECK(floor_log(8, 2) == 3);
  CHECK(floor_log(1e5, 3) == 10);
  CHECK_THROWS_AS(floor_log(10, 1), ParameterOutOfRange);
}

TEST_CASE("regular closed form equals the general formula") {
  for (std::uint32_t d : {2u, 3u, 5u})
    for (std::size_t n : {100u, 12345u, 100000u}) {
      const auto law = TheoreticalHopcountLaw::unit(n, d, d);
      for (int x = -6; x <= 6; ++x)
        CHECK(theoretical_cdf(law, x) == doctest::Approx(dregular_cdf(d, n, x)).epsilon(1e-12));
    }
}

TEST_CASE("theoretical law input checks") {
  CHECK_THROWS_AS(theoretical_cdf(TheoreticalHopcountLaw::unit(100, 1, 1), 0), ParameterOutOfRange);
  TheoreticalHopcountLaw empty;
  empty.n = 100;
  empty.nu = empty.mu = 2;
  CHECK_THROWS_AS(theoretical_cdf(empty, 0), NoSurvivingMass);
  CHECK_THROWS_AS(ks_distance(HopcountHistogram{}, TheoreticalHopcountLaw::unit(100, 2, 2)), EmptyEmpirical);
  CHECK(prob_finite(0.5, 0.4) == doctest::Approx(0.2));
  CHECK_THROWS_AS(prob_finite(1.5, 0.4), ParameterOutOfRange);
}

TEST_CASE("theoretical cdf is a distribution function") {
  WPool plus, minus;
  Rng rng(3);
  for (int i = 0; i < 5000; ++i) {
    plus.samples.push_back(rng.uniform() < 0.3 ? 0.0 : -std::log(rng.uniform()));
    minus.samples.push_back(-std::log(rng.uniform()));
  }
  const auto law = TheoreticalHopcountLaw::from_pools(10000, 2.0, 2.5, plus, minus);
  CHECK(law.products.size() < 5000);
  double prev = 0;
  for (int x = -40; x <= 40; ++x) {
    const double c = theoretical_cdf(law, x);
    CHECK(c >= prev);
    prev = c;
  }
  CHECK(theoretical_cdf(law, -40) < 1e-6);
  CHECK(prev == doctest::Approx(1.0));
}

TEST_CASE("ks distance of a histogram drawn from the law itself") {
  const std::size_t n = 100000;
  const auto law = TheoreticalHopcountLaw::unit(n, 3, 3);
  const int shift = floor_log(n, 3);
  HopcountHistogram h;
  h.counts.assign(shift + 12, 0.0);
  for (int t = 1; t < static_cast<int>(h.counts.size()); ++t)
    h.counts[t] = 1e6 * (dregular_cdf(3, n, t - shift) - (t > 1 ? dregular_cdf(3, n, t - shift - 1) : 0.0));
  for (double c : h.counts) h.finite_pairs += c;
  h.total_pairs = h.finite_pairs;
  const auto r = ks_distance(h, law);
  CHECK(r.shift == shift);
  // Only the mass below distance one, unreachable for distinct nodes, remains.
  CHECK(r.ks == doctest::Approx(dregular_cdf(3, n, -shift)).epsilon(1e-9));
  CHECK(r.t.size() == 2 * kKsLattice + 1);
}

TEST_CASE("small-n tail estimator matches full enumeration") {
  const auto seq = BiDegreeSequence::from_degrees({2, 2, 2, 2}, {2, 2, 2, 2});
  SUBCASE("k = 1 is deterministic") {
    const double exact = enumerate_tail(seq, 1);
    CHECK(exact == doctest::Approx(30.0 / 56).epsilon(1e-12));
    const auto est = exact_tail_smalln(seq, 1, 50, 4);
    CHECK(est.estimate == doctest::Approx(exact).epsilon(1e-12));
  }
  SUBCASE("k = 2") {
    const double exact = enumerate_tail(seq, 2);
    const auto est = exact_tail_smalln(seq, 2, 40000, 5);
    CHECK(std::abs(est.estimate - exact) < 4 * est.standard_error);
  }
  CHECK(exact_tail_smalln(seq, 0, 10, 1).estimate == 1.0);
}

TEST_CASE("small-n tail estimator matches graph sampling") {
  const auto seq = sample_iid_bidegree(parse_law_spec("geom-indep:0.3"), 50, 8);
  const int graphs = 3000;
  const std::uint32_t k = 2;
  double s = 0, ss = 0;
  for (int i = 0; i < graphs; ++i) {
    const auto h = exact_all_pairs(pair_stubs(seq, derive_seed(77, i)), 1);
    double near = 0;
    for (std::uint32_t t = 1; t <= k && t < h.counts.size(); ++t) near += h.counts[t];
    const double frac = 1.0 - near / h.total_pairs;
    s += frac;
    ss += frac * frac;
  }
  const double mean = s / graphs;
  const double se_graphs = std::sqrt((ss / graphs - mean * mean) / graphs);
  const auto est = exact_tail_smalln(seq, k, 40000, 6);
  CHECK(std::abs(est.estimate - mean) < 4 * std::hypot(se_graphs, est.standard_error));
}
