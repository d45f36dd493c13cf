#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>

#include "dcm/coupling.hpp"
#include "dcm/errors.hpp"
#include "dcm/law_config.hpp"

using namespace dcm;

namespace {

// Two-sample chi-square homogeneity test; true when the statistic is below
// the 0.999 quantile.
bool same_law(const std::map<std::pair<std::uint64_t, std::uint64_t>, double>& a,
              const std::map<std::pair<std::uint64_t, std::uint64_t>, double>& b, double na, double nb) {
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::pair<double, double>> cells;
  for (const auto& [k, c] : a) cells[k].first = c;
  for (const auto& [k, c] : b) cells[k].second = c;
  double stat = 0;
  int df = -1;
  for (const auto& [k, c] : cells) {
    const double pooled = (c.first + c.second) / (na + nb);
    stat += std::pow(c.first - na * pooled, 2) / (na * pooled) + std::pow(c.second - nb * pooled, 2) / (nb * pooled);
    ++df;
  }
  if (df < 1) return true;
  return stat < boost::math::quantile(boost::math::chi_squared(df), 0.999);
}

}  // namespace

TEST_CASE("dynamic offspring law examples") {
  const auto seq = BiDegreeSequence::from_degrees({2, 2, 2}, {2, 2, 2});
  ExplorationState st(seq, Direction::out);
  CHECK(st.activate_root(0.5) == 2);
  auto h = dynamic_offspring_law(st);
  CHECK(h(2) == doctest::Approx(4.0 / 6));
  CHECK(h(0) == doctest::Approx(2.0 / 6));

  // Hand-evaluated on five nodes; root at the first slot of the degree order.
  const auto five = BiDegreeSequence::from_degrees({1, 3, 0, 2, 1}, {2, 0, 1, 1, 3});
  ExplorationState s5(five, Direction::out);
  s5.activate_root(0.1);  // position 0: node 1 (out-degree 0, in-degree 3)
  h = dynamic_offspring_law(s5);
  CHECK(h(0) == doctest::Approx(3.0 / 7));
  CHECK(h(1) == doctest::Approx(2.0 / 7));  // nodes 2 and 3: in-degrees 0 + 2
  CHECK(h(2) == doctest::Approx(1.0 / 7));
  CHECK(h(3) == doctest::Approx(1.0 / 7));

  // Activating everything leaves all mass at zero.
  Rng rng(1);
  while (!(st.active(0) && st.active(1) && st.active(2))) st.traverse(rng.uniform());
  h = dynamic_offspring_law(st);
  CHECK(h(0) == doctest::Approx(1.0));
}

TEST_CASE("V identity and stub exhaustion") {
  for (const char* spec : {"pp-indep:1.5,1", "zipf-equal:3.5,1000", "geom-indep:0.4"}) {
    for (auto dir : {Direction::out, Direction::in}) {
      const auto seq = sample_iid_bidegree(parse_law_spec(spec), 300, 5);
      ExplorationState st(seq, dir);
      Rng rng(2);
      st.activate_root(rng.uniform());
      bool ok = st.v_identity_holds();
      for (std::uint64_t t = 0; t < seq.total; ++t) {
        st.traverse(rng.uniform());
        ok = ok && st.v_identity_holds() && st.traversed() == t + 1;
      }
      CHECK(ok);
      CHECK(st.active_opposite_stubs() == 0);
      CHECK_THROWS_AS(st.traverse(0.5), ExhaustedStubs);
      CHECK_THROWS_AS(dynamic_offspring_law(st), ExhaustedStubs);
    }
  }
}

TEST_CASE("sandwich holds on every trace") {
  for (const char* spec : {"pp-indep:1.5,1", "zipf-equal:3.5,1000", "geom-indep:0.3", "dregular:3"}) {
    const auto law = parse_law_spec(spec);
    for (auto dir : {Direction::out, Direction::in}) {
      const auto gw = GWSpec::from_joint(law, dir);
      for (std::uint64_t r = 0; r < 40; ++r) {
        const auto seq = sample_iid_bidegree(law, 2000, derive_seed(r, 1));
        const auto tr = coupled_exploration(seq, gw, dir, 5, derive_seed(r, 2));
        CHECK(tr.sandwich_holds());
        const std::size_t first = tr.first_divergence.value_or(tr.z.size());
        bool equal_before = true;
        for (std::size_t m = 0; m < first && m < tr.z.size(); ++m)
          equal_before = equal_before && tr.z[m] == tr.z_hat[m] && tr.tree_only[m] == 0 && tr.graph_only[m] == 0;
        CHECK(equal_before);
      }
    }
  }
}

TEST_CASE("regular sequences couple exactly until a collision") {
  const auto law = JointDegreeLaw::d_regular(3);
  const auto gw = GWSpec::from_joint(law, Direction::out);
  const auto seq = sample_iid_bidegree(law, 100000, 1);
  int clean = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto tr = coupled_exploration(seq, gw, Direction::out, 3, r);
    if (tr.first_divergence) continue;
    ++clean;
    CHECK(tr.z == std::vector<std::uint64_t>{1, 3, 9, 27});
  }
  CHECK(clean > 190);
  // With a single generation the shared uniform gives identical root draws.
  const auto small = sample_iid_bidegree(law, 10, 2);
  for (std::uint64_t r = 0; r < 20; ++r) CHECK(coupled_exploration(small, gw, Direction::out, 1, r).z[1] == 3);
}

TEST_CASE("coupling leaves the graph marginal intact") {
  const auto seq = BiDegreeSequence::from_degrees({1, 2, 0, 3, 1, 1}, {2, 1, 2, 0, 1, 2});
  const auto gw = GWSpec::from_joint(parse_law_spec("geom-indep:0.4"), Direction::out);
  const int runs = 10000;
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> coupled, plain;
  for (int r = 0; r < runs; ++r) {
    const auto tr = coupled_exploration(seq, gw, Direction::out, 2, derive_seed(40, r));
    coupled[{tr.z[1], tr.z[2]}] += 1;

    const auto g = pair_stubs(seq, derive_seed(41, r));
    Rng rng(derive_seed(42, r));
    const auto root = static_cast<NodeId>(rng.below(seq.size()));
    std::vector<char> seen(seq.size(), 0);
    seen[root] = 1;
    std::uint64_t z2 = 0;
    for (NodeId v : g.out_neighbors(root))
      if (!seen[v]) {
        seen[v] = 1;
        z2 += g.out_degree(v);
      }
    plain[{g.out_degree(root), z2}] += 1;
  }
  CHECK(same_law(coupled, plain, runs, runs));
}

TEST_CASE("error bound") {
  const auto law = parse_law_spec("pp-indep:1.5,1");
  const auto seq = sample_iid_bidegree(law, 1000, 3);
  std::vector<char> none(seq.size(), 0), all(seq.size(), 1);
  CHECK(error_bound_E(0, seq, none, 3, 3, 0.1) == doctest::Approx(3 * std::pow(1000.0, -0.1)));
  double joint = 0;
  for (std::size_t r = 0; r < seq.size(); ++r) joint += static_cast<double>(seq.d_plus[r]) * seq.d_minus[r];
  CHECK(error_bound_E(0, seq, all, 3, 3, 0.1) ==
        doctest::Approx(4.0 / 3000 * joint + 3 * std::pow(1000.0, -0.1)));
  CHECK_THROWS_AS(error_bound_E(1501, seq, none, 3, 3, 0.1), OutOfValidityWindow);
}

TEST_CASE("mean coupling error stays below the bound") {
  // With shared uniforms the conditional mean of |chi_hat - chi| at a step is
  // the d1 distance between the current dynamic law and f, so it can be
  // evaluated exactly instead of averaging heavy-tailed differences.
  const auto law = parse_law_spec("zipf-equal:3.5,1000");
  const auto gw = GWSpec::from_joint(law, Direction::out);
  const std::size_t n = 10000;
  std::size_t steps = 0, within = 0;
  double mc_diff = 0, mc_bound = 0;
  for (std::uint64_t r = 0; steps < 1000; ++r) {
    const auto seq = sample_iid_bidegree(law, n, derive_seed(50, r));
    ExplorationState st(seq, Direction::out);
    Rng rng(derive_seed(51, r));
    std::uint64_t pending = st.activate_root(rng.uniform());
    for (int guard = 0; pending > 0 && guard < 400 && st.traversed() < seq.total; ++guard, --pending) {
      const double conditional = wasserstein1(dynamic_offspring_law(st), gw.f).value;
      const double bound = error_bound_E(st.traversed(), seq, st.active_flags(), gw.nu, gw.mu, 0.1);
      const double u = rng.uniform();
      const auto step = st.traverse(u);
      pending += step.offspring;
      within += conditional <= bound;
      mc_diff += std::abs(static_cast<double>(gw.f.quantile(u)) - static_cast<double>(step.offspring));
      mc_bound += bound;
      ++steps;
    }
  }
  CHECK(static_cast<double>(within) >= 0.99 * steps);
  CHECK(mc_diff <= mc_bound);
}

TEST_CASE("failure-rate preconditions") {
  const auto law = parse_law_spec("zipf-equal:3.5,1000");
  CHECK_FALSE(coupling_failure_rate(law, 1000, 0.6, 0.05, 2, 0, 1).has_value());
  CHECK_THROWS_AS(coupling_failure_rate(law, 1000, 0.6, 0.05, 50, 10, 1), ParameterOutOfRange);
  CHECK_THROWS_AS(coupling_failure_rate(law, 1000, 0.6, 0.2, 2, 10, 1), ParameterOutOfRange);
  CHECK_THROWS_AS(coupling_failure_rate(law, 1000, 1.2, 0.05, 2, 10, 1), ParameterOutOfRange);
  const auto a = coupling_failure_rate(law, 1000, 0.6, 0.05, 2, 30, 9);
  const auto b = coupling_failure_rate(law, 1000, 0.6, 0.05, 2, 30, 9);
  CHECK(a->freq_ratio_bound_fails == b->freq_ratio_bound_fails);
}

TEST_CASE("deterministic replay") {
  const auto law = parse_law_spec("pp-indep:1.5,1");
  const auto seq = sample_iid_bidegree(law, 5000, 1);
  const auto gw = GWSpec::from_joint(law, Direction::in);
  const auto a = coupled_exploration(seq, gw, Direction::in, 6, 3);
  const auto b = coupled_exploration(seq, gw, Direction::in, 6, 3);
  CHECK(a.z == b.z);
  CHECK(a.z_hat == b.z_hat);
}
