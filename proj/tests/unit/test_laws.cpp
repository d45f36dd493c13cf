#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "dcm/degree_sequences.hpp"
#include "dcm/errors.hpp"
#include "dcm/law_config.hpp"

using namespace dcm;

namespace {

// P(k) = E[exp(-L) L^k / k!] with L ~ Pareto(shape, scale), by direct quadrature.
double pp_pmf_quadrature(double shape, double scale, unsigned k) {
  auto integrand = [&](double l) {
    const double log_pois = -l + k * std::log(l) - std::lgamma(k + 1.0);
    return std::exp(log_pois + std::log(shape) + shape * std::log(scale) - (shape + 1) * std::log(l));
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, scale, std::numeric_limits<double>::infinity(), 15, 1e-13);
}

}  // namespace

TEST_CASE("poisson-pareto pmf matches quadrature") {
  for (double shape : {1.5, 2.5}) {
    const auto law = DiscreteLaw::poisson_pareto(shape, 1.0);
    for (unsigned k : {0u, 1u, 2u, 5u, 20u, 100u})
      CHECK(law(k) == doctest::Approx(pp_pmf_quadrature(shape, 1.0, k)).epsilon(1e-8));
    CHECK(law.full_mean() == doctest::Approx(shape / (shape - 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("truncated tails keep their mass") {
  const auto law = DiscreteLaw::poisson_pareto(1.5, 1.0);
  double s = 0;
  for (double p : law.pmf()) s += p;
  CHECK(s + law.tail_mass() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(law.mean() <= law.full_mean());
  CHECK(law.quantile(1.0 - law.tail_mass() / 2) == law.tail_cutoff());
}

TEST_CASE("closed-form families") {
  const auto g = DiscreteLaw::geometric(1.0 / 3);
  CHECK(g(0) == doctest::Approx(1.0 / 3));
  CHECK(g(2) == doctest::Approx(1.0 / 3 * 4.0 / 9));
  CHECK(g.full_mean() == doctest::Approx(2.0));
  const auto z = DiscreteLaw::zipf(2.0, 4);
  const double h = 1 + 0.25 + 1.0 / 9 + 1.0 / 16;
  CHECK(z(0) == 0.0);
  CHECK(z(3) == doctest::Approx(1.0 / 9 / h));
  CHECK(z.tail_mass() == 0.0);
  const auto pm = DiscreteLaw::point_mass(3);
  CHECK(pm.mean() == 3.0);
  CHECK(pm.quantile(1e-9) == 3);
  CHECK(pm.pgf(0.5) == doctest::Approx(0.125));
}

TEST_CASE("invalid laws are rejected") {
  CHECK_THROWS_AS(DiscreteLaw::from_pmf({0.5, -0.1}), InvalidLaw);
  CHECK_THROWS_AS(DiscreteLaw::from_pmf({0.7, 0.7}), InvalidLaw);
  CHECK_THROWS_AS(DiscreteLaw::poisson_pareto(1.0, 1.0), InvalidLaw);
  CHECK_THROWS_AS(DiscreteLaw::zipf(2.0, 0), InvalidLaw);
  CHECK_THROWS_AS(JointDegreeLaw::independent(DiscreteLaw::point_mass(2), DiscreteLaw::point_mass(3)),
                  InvalidLaw);
  CHECK_THROWS_AS(parse_law_spec("nonsense:1"), ValidationError);
  CHECK_THROWS_AS(parse_law_spec("dregular"), ValidationError);
}

TEST_CASE("pseudo-inverse sampling") {
  const std::vector<double> cdf{0.2, 0.2, 0.7, 1.0};
  CHECK(pseudo_inverse_sample(cdf, 0.1) == 0);
  CHECK(pseudo_inverse_sample(cdf, 0.2) == 0);
  CHECK(pseudo_inverse_sample(cdf, 0.21) == 2);
  CHECK(pseudo_inverse_sample(cdf, 0.99) == 3);
}

TEST_CASE("wasserstein distance is a metric") {
  const std::vector<DiscreteLaw> laws{DiscreteLaw::point_mass(1), DiscreteLaw::point_mass(4),
                                      DiscreteLaw::geometric(0.5), DiscreteLaw::zipf(2.5, 50),
                                      DiscreteLaw::from_pmf({0.1, 0.2, 0.3, 0.4})};
  for (const auto& a : laws) {
    CHECK(wasserstein1(a, a).value == 0.0);
    for (const auto& b : laws) {
      CHECK(wasserstein1(a, b).value == doctest::Approx(wasserstein1(b, a).value));
      for (const auto& c : laws)
        CHECK(wasserstein1(a, c).value <= wasserstein1(a, b).value + wasserstein1(b, c).value + 1e-12);
    }
  }
  CHECK(wasserstein1(laws[0], laws[1]).value == doctest::Approx(3.0));
}

TEST_CASE("joint law moments") {
  const auto reg = JointDegreeLaw::d_regular(3);
  CHECK(reg.nu() == 3.0);
  CHECK(reg.mu() == 3.0);
  const auto pp = parse_law_spec("pp-indep:1.5,1");
  CHECK(pp.nu() == doctest::Approx(3.0));
  CHECK(pp.mu() == doctest::Approx(3.0));
  const auto eq = parse_law_spec("zipf-equal:3.5,1000");
  CHECK(eq.mu() > 1.0);
  const auto table = JointDegreeLaw::explicit_table({{0, 2, 0.25}, {2, 0, 0.25}, {1, 1, 0.5}});
  CHECK(table.nu() == doctest::Approx(1.0));
  CHECK(table.mu() == doctest::Approx(0.5));
  CHECK_FALSE(table.supercritical());
  const auto sb = size_biased_law(table);
  CHECK(sb.f_plus(2) == doctest::Approx(0.0));
  CHECK(sb.f_plus(1) == doctest::Approx(0.5));
  CHECK(sb.f_plus(0) == doctest::Approx(0.5));
}

TEST_CASE("law specs round-trip through json") {
  for (const char* spec : {"dregular:3", "pp-indep:1.5,1", "zipf-equal:3.5,1000", "geom-indep:0.25"}) {
    const auto law = parse_law_spec(spec);
    const auto again = parse_joint_law(law_to_json(law));
    CHECK(again.nu() == doctest::Approx(law.nu()));
    CHECK(again.mu() == doctest::Approx(law.mu()));
  }
}

TEST_CASE("iid bi-degree sequences balance and are reproducible") {
  const auto law = parse_law_spec("pp-indep:1.5,1");
  const auto a = sample_iid_bidegree(law, 20000, 7);
  const auto b = sample_iid_bidegree(law, 20000, 7);
  CHECK(a.d_minus == b.d_minus);
  CHECK(a.d_plus == b.d_plus);
  const auto in = std::accumulate(a.d_minus.begin(), a.d_minus.end(), std::uint64_t{0});
  const auto out = std::accumulate(a.d_plus.begin(), a.d_plus.end(), std::uint64_t{0});
  CHECK(in == out);
  CHECK(in == a.total);
  const double bound = std::pow(20000.0, 0.75);
  CHECK(std::abs(static_cast<double>(a.provenance.delta_before)) <= bound);
  CHECK(a.provenance.modified.size() == static_cast<std::size_t>(std::llabs(a.provenance.delta_before)));
  CHECK_THROWS_AS(BiDegreeSequence::from_degrees({1, 2}, {2, 2}), ValidationError);
}

TEST_CASE("empirical nu is within the d1 distance of nu") {
  for (const char* spec : {"pp-indep:1.5,1", "zipf-equal:3.5,1000", "geom-indep:0.25"}) {
    const auto law = parse_law_spec(spec);
    const auto seq = sample_iid_bidegree(law, 5000, 3);
    const auto emp = empirical_distributions(seq);
    const auto rep = check_assumption(seq, law, 0.1, 1.0, 1e9);
    CHECK(std::abs(emp.nu_n - law.nu()) <=
          rep.d1_g_plus.value + rep.d1_g_plus.truncation_error + 1e-9);
    CHECK(std::abs(emp.nu_n - law.nu()) <=
          rep.d1_g_minus.value + rep.d1_g_minus.truncation_error + 1e-9);
  }
}

TEST_CASE("sequence files round-trip") {
  const auto seq = sample_iid_bidegree(parse_law_spec("geom-indep:0.3"), 500, 1);
  const auto path = std::filesystem::temp_directory_path() / "dcm_unit_seq.dcms";
  write_sequence_binary(seq, path);
  const auto back = read_sequence_binary(path);
  CHECK(back.d_minus == seq.d_minus);
  CHECK(back.d_plus == seq.d_plus);
  CHECK(back.total == seq.total);
  std::filesystem::remove(path);
}
