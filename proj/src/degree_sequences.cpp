#include "dcm/degree_sequences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dcm/errors.hpp"
#include "dcm/io.hpp"

namespace dcm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kMeanTol = 1e-9;

// E[D^2] including the tail where the family gives it in closed form.
double second_moment(const DiscreteLaw& law) {
  if (law.tail_mass() == 0.0) return law.moment(2.0);
  if (const auto* pp = std::get_if<family::PoissonPareto>(&law.family())) {
    if (pp->shape <= 2.0) return std::numeric_limits<double>::infinity();
    const double a = pp->shape, x = pp->scale;
    return a * x * x / (a - 2.0) + a * x / (a - 1.0);
  }
  if (const auto* g = std::get_if<family::Geometric>(&law.family())) {
    const double p = g->success;
    return (1.0 - p) * (2.0 - p) / (p * p);
  }
  return law.moment(2.0);
}

DiscreteLaw aggregate(const std::vector<JointAtom>& table, bool in_side) {
  std::vector<double> pmf;
  for (const auto& a : table) {
    const std::uint32_t k = in_side ? a.d_minus : a.d_plus;
    if (pmf.size() <= k) pmf.resize(std::size_t{k} + 1, 0.0);
    pmf[k] += a.probability;
  }
  return DiscreteLaw::from_pmf(std::move(pmf));
}

std::uint32_t to_degree(std::uint64_t d) {
  if (d > std::numeric_limits<std::uint32_t>::max() / 2)
    throw RuntimeFailure("sampled degree does not fit the 32-bit degree type");
  return static_cast<std::uint32_t>(d);
}

}  // namespace

JointDegreeLaw::JointDegreeLaw(Kind kind) : kind_(std::move(kind)) {
  std::visit(overloaded{
                 [&](const DRegular& r) {
                   nu_ = r.d;
                   mu_ = r.d;
                 },
                 [&](const Independent& i) {
                   const double m_in = i.in_law.full_mean();
                   const double m_out = i.out_law.full_mean();
                   if (std::abs(m_in - m_out) > kMeanTol)
                     throw InvalidLaw("marginal means differ: E[D-] = " + std::to_string(m_in) +
                                      ", E[D+] = " + std::to_string(m_out));
                   nu_ = m_out;
                   mu_ = nu_ > 0.0 ? m_in * m_out / nu_ : 0.0;
                 },
                 [&](const Equal& e) {
                   nu_ = e.law.full_mean();
                   const double m2 = second_moment(e.law);
                   if (!std::isfinite(m2)) throw InvalidLaw("E[D- D+] is infinite for the equal law");
                   mu_ = nu_ > 0.0 ? m2 / nu_ : 0.0;
                 },
                 [&](const Explicit& x) {
                   long double total = 0, m_in = 0, m_out = 0, cross = 0;
                   for (const auto& a : x.table) {
                     if (!(a.probability >= 0.0)) throw InvalidLaw("negative joint probability");
                     total += a.probability;
                     m_in += a.probability * a.d_minus;
                     m_out += a.probability * a.d_plus;
                     cross += a.probability * static_cast<long double>(a.d_minus) * a.d_plus;
                   }
                   if (std::abs(static_cast<double>(total) - 1.0) > kMeanTol)
                     throw InvalidLaw("joint table does not sum to one");
                   if (std::abs(static_cast<double>(m_in - m_out)) > kMeanTol)
                     throw InvalidLaw("marginal means differ in the joint table");
                   nu_ = static_cast<double>(m_out);
                   mu_ = nu_ > 0.0 ? static_cast<double>(cross) / nu_ : 0.0;
                 },
             },
             kind_);
  build_sampler();
}

void JointDegreeLaw::build_sampler() {
  samplers_.clear();
  std::visit(overloaded{
                 [&](const DRegular& r) { samplers_.emplace_back(DiscreteLaw::point_mass(r.d)); },
                 [&](const Independent& i) {
                   samplers_.emplace_back(i.in_law);
                   samplers_.emplace_back(i.out_law);
                 },
                 [&](const Equal& e) { samplers_.emplace_back(e.law); },
                 [&](const Explicit& x) {
                   std::vector<double> weights;
                   weights.reserve(x.table.size());
                   long double total = 0;
                   for (const auto& a : x.table) total += a.probability;
                   for (const auto& a : x.table) weights.push_back(static_cast<double>(a.probability / total));
                   samplers_.emplace_back(DiscreteLaw::from_pmf(std::move(weights)));
                 },
             },
             kind_);
}

JointDegreeLaw JointDegreeLaw::d_regular(std::uint32_t d) { return JointDegreeLaw(DRegular{d}); }

JointDegreeLaw JointDegreeLaw::independent(DiscreteLaw in_law, DiscreteLaw out_law) {
  return JointDegreeLaw(Independent{std::move(in_law), std::move(out_law)});
}

JointDegreeLaw JointDegreeLaw::equal(DiscreteLaw law) { return JointDegreeLaw(Equal{std::move(law)}); }

JointDegreeLaw JointDegreeLaw::explicit_table(std::vector<JointAtom> table) {
  if (table.empty()) throw InvalidLaw("empty joint table");
  return JointDegreeLaw(Explicit{std::move(table)});
}

std::string JointDegreeLaw::name() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const DRegular& r) { os << "d_regular(" << r.d << ")"; },
                 [&](const Independent& i) {
                   os << "independent(" << describe(i.in_law.family()) << ","
                      << describe(i.out_law.family()) << ")";
                 },
                 [&](const Equal& e) { os << "equal(" << describe(e.law.family()) << ")"; },
                 [&](const Explicit& x) { os << "explicit(" << x.table.size() << " atoms)"; },
             },
             kind_);
  return os.str();
}

DiscreteLaw JointDegreeLaw::in_marginal() const {
  return std::visit(overloaded{
                        [](const DRegular& r) { return DiscreteLaw::point_mass(r.d); },
                        [](const Independent& i) { return i.in_law; },
                        [](const Equal& e) { return e.law; },
                        [](const Explicit& x) { return aggregate(x.table, true); },
                    },
                    kind_);
}

DiscreteLaw JointDegreeLaw::out_marginal() const {
  return std::visit(overloaded{
                        [](const DRegular& r) { return DiscreteLaw::point_mass(r.d); },
                        [](const Independent& i) { return i.out_law; },
                        [](const Equal& e) { return e.law; },
                        [](const Explicit& x) { return aggregate(x.table, false); },
                    },
                    kind_);
}

double JointDegreeLaw::joint_moment(double kappa) const {
  return std::visit(overloaded{
                        [&](const DRegular& r) { return 2.0 * std::pow(double(r.d), kappa + 2.0); },
                        [&](const Independent& i) {
                          return i.in_law.moment(1.0 + kappa) * i.out_law.full_mean() +
                                 i.in_law.full_mean() * i.out_law.moment(1.0 + kappa);
                        },
                        [&](const Equal& e) { return 2.0 * e.law.moment(2.0 + kappa); },
                        [&](const Explicit& x) {
                          long double acc = 0;
                          for (const auto& a : x.table) {
                            const double dm = a.d_minus, dp = a.d_plus;
                            acc += a.probability * (std::pow(dm, kappa) + std::pow(dp, kappa)) * dm * dp;
                          }
                          return static_cast<double>(acc);
                        },
                    },
                    kind_);
}

std::pair<std::uint64_t, std::uint64_t> JointDegreeLaw::sample(Rng& rng) const {
  return std::visit(overloaded{
                        [&](const DRegular& r) { return std::pair<std::uint64_t, std::uint64_t>{r.d, r.d}; },
                        [&](const Independent&) {
                          const auto dm = samplers_[0](rng);
                          const auto dp = samplers_[1](rng);
                          return std::pair{dm, dp};
                        },
                        [&](const Equal&) {
                          const auto d = samplers_[0](rng);
                          return std::pair{d, d};
                        },
                        [&](const Explicit& x) {
                          const auto& a = x.table[samplers_[0](rng)];
                          return std::pair<std::uint64_t, std::uint64_t>{a.d_minus, a.d_plus};
                        },
                    },
                    kind_);
}

BiDegreeSequence BiDegreeSequence::from_degrees(std::vector<std::uint32_t> d_minus,
                                                std::vector<std::uint32_t> d_plus) {
  if (d_minus.size() != d_plus.size()) throw ValidationError("in/out degree arrays differ in length");
  const std::uint64_t in_sum = std::accumulate(d_minus.begin(), d_minus.end(), std::uint64_t{0});
  const std::uint64_t out_sum = std::accumulate(d_plus.begin(), d_plus.end(), std::uint64_t{0});
  if (in_sum != out_sum)
    throw ValidationError("in-degree sum " + std::to_string(in_sum) + " != out-degree sum " +
                          std::to_string(out_sum));
  BiDegreeSequence seq;
  seq.d_minus = std::move(d_minus);
  seq.d_plus = std::move(d_plus);
  seq.total = in_sum;
  return seq;
}

double default_iid_delta(double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw ParameterOutOfRange("kappa must lie in (0, 1]");
  return kappa < 1.0 ? 0.9 * kappa / (1.0 + kappa) : 0.25;
}

BiDegreeSequence sample_iid_bidegree(const JointDegreeLaw& law, std::size_t n, std::uint64_t seed,
                                     const IidOptions& options) {
  if (n == 0) throw ParameterOutOfRange("n must be positive");
  if (!(options.delta > 0.0 && options.delta < 1.0)) throw ParameterOutOfRange("delta must lie in (0, 1)");

  Rng rng(seed);
  const double threshold = std::pow(static_cast<double>(n), 1.0 - options.delta);
  std::vector<std::uint32_t> dm(n), dp(n);

  for (std::uint32_t attempt = 0;; ++attempt) {
    if (attempt >= options.max_retries) {
      throw RetriesExhausted("|Delta_n| exceeded n^(1-delta) in " + std::to_string(attempt) + " draws");
    }
    std::int64_t delta = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto [a, b] = law.sample(rng);
      dm[i] = to_degree(a);
      dp[i] = to_degree(b);
      delta += static_cast<std::int64_t>(dm[i]) - static_cast<std::int64_t>(dp[i]);
    }
    if (static_cast<double>(std::llabs(delta)) > threshold) continue;

    BiDegreeSequence seq;
    seq.provenance.delta_before = delta;
    seq.provenance.retries = attempt;
    seq.provenance.modified_in_degrees = delta <= 0;

    const auto count = static_cast<std::size_t>(std::llabs(delta));
    if (count > 0) {
      // Partial Fisher-Yates: the first `count` slots form a uniform sample
      // without replacement.
      std::vector<std::uint32_t> index(n);
      std::iota(index.begin(), index.end(), 0u);
      for (std::size_t j = 0; j < count; ++j) {
        const std::size_t pick = j + rng.below(n - j);
        std::swap(index[j], index[pick]);
      }
      index.resize(count);
      auto& side = delta <= 0 ? dm : dp;
      for (auto i : index) side[i] += 1;
      seq.provenance.modified = std::move(index);
    }
    seq.d_minus = dm;
    seq.d_plus = dp;
    seq.total = std::accumulate(dm.begin(), dm.end(), std::uint64_t{0});
    return seq;
  }
}

EmpiricalDegreeDistributions empirical_distributions(const BiDegreeSequence& seq) {
  if (seq.total == 0) throw EmptyGraph("bi-degree sequence has no stubs");
  const std::size_t n = seq.size();
  const std::uint32_t max_plus = *std::max_element(seq.d_plus.begin(), seq.d_plus.end());
  const std::uint32_t max_minus = *std::max_element(seq.d_minus.begin(), seq.d_minus.end());

  std::vector<double> gp(max_plus + std::size_t{1}), gm(max_minus + std::size_t{1});
  std::vector<double> fp(max_plus + std::size_t{1}), fm(max_minus + std::size_t{1});
  long double cross = 0;
  for (std::size_t r = 0; r < n; ++r) {
    gp[seq.d_plus[r]] += 1.0;
    gm[seq.d_minus[r]] += 1.0;
    fp[seq.d_plus[r]] += seq.d_minus[r];
    fm[seq.d_minus[r]] += seq.d_plus[r];
    cross += static_cast<long double>(seq.d_minus[r]) * seq.d_plus[r];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_l = 1.0 / static_cast<double>(seq.total);
  for (auto& v : gp) v *= inv_n;
  for (auto& v : gm) v *= inv_n;
  for (auto& v : fp) v *= inv_l;
  for (auto& v : fm) v *= inv_l;

  EmpiricalDegreeDistributions out;
  out.nu_n = static_cast<double>(seq.total) / static_cast<double>(n);
  out.mu_n = static_cast<double>(cross / seq.total);
  out.g_plus = DiscreteLaw::from_pmf(std::move(gp), family::Tabulated{}, out.nu_n);
  out.g_minus = DiscreteLaw::from_pmf(std::move(gm), family::Tabulated{}, out.nu_n);
  out.f_plus = DiscreteLaw::from_pmf(std::move(fp), family::Tabulated{}, out.mu_n);
  out.f_minus = DiscreteLaw::from_pmf(std::move(fm), family::Tabulated{}, out.mu_n);
  return out;
}

SizeBiasedLaws size_biased_law(const JointDegreeLaw& law) {
  if (!(law.nu() > 0.0)) throw DegenerateLaw("nu = 0, size-biasing undefined");
  const double nu = law.nu();
  return std::visit(
      overloaded{
          [&](const JointDegreeLaw::DRegular& r) {
            return SizeBiasedLaws{DiscreteLaw::point_mass(r.d), DiscreteLaw::point_mass(r.d)};
          },
          // E[1(D+ = t) D-] = g+(t) E[D-] = g+(t) nu.
          [&](const JointDegreeLaw::Independent& i) { return SizeBiasedLaws{i.out_law, i.in_law}; },
          [&](const JointDegreeLaw::Equal& e) {
            const auto g = e.law.pmf();
            std::vector<double> f(g.size());
            for (std::size_t t = 0; t < g.size(); ++t) f[t] = static_cast<double>(t) * g[t] / nu;
            LawFamily fam = family::Tabulated{};
            if (const auto* z = std::get_if<family::Zipf>(&e.law.family()))
              fam = family::Zipf{z->exponent - 1.0, z->corpus};
            if (const auto* p = std::get_if<family::PointMass>(&e.law.family())) fam = *p;
            DiscreteLaw biased = DiscreteLaw::from_pmf(std::move(f), fam, law.mu());
            return SizeBiasedLaws{biased, biased};
          },
          [&](const JointDegreeLaw::Explicit& x) {
            std::vector<double> fp, fm;
            for (const auto& a : x.table) {
              if (fp.size() <= a.d_plus) fp.resize(std::size_t{a.d_plus} + 1, 0.0);
              if (fm.size() <= a.d_minus) fm.resize(std::size_t{a.d_minus} + 1, 0.0);
              fp[a.d_plus] += a.probability * a.d_minus / nu;
              fm[a.d_minus] += a.probability * a.d_plus / nu;
            }
            return SizeBiasedLaws{DiscreteLaw::from_pmf(std::move(fp)), DiscreteLaw::from_pmf(std::move(fm))};
          },
      },
      law.kind());
}

AssumptionReport check_assumption(const BiDegreeSequence& seq, const DiscreteLaw& g_plus,
                                  const DiscreteLaw& g_minus, const DiscreteLaw& f_plus,
                                  const DiscreteLaw& f_minus, double eps, double kappa,
                                  double K_kappa) {
  if (!(eps > 0.0)) throw ParameterOutOfRange("eps must be positive");
  if (!(kappa > 0.0 && kappa <= 1.0)) throw ParameterOutOfRange("kappa must lie in (0, 1]");
  const auto emp = empirical_distributions(seq);
  const double n = static_cast<double>(seq.size());

  AssumptionReport rep;
  rep.eps = eps;
  rep.kappa = kappa;
  rep.d1_g_plus = wasserstein1(emp.g_plus, g_plus);
  rep.d1_g_minus = wasserstein1(emp.g_minus, g_minus);
  rep.d1_f_plus = wasserstein1(emp.f_plus, f_plus);
  rep.d1_f_minus = wasserstein1(emp.f_minus, f_minus);
  rep.eps_threshold = std::pow(n, -eps);

  long double acc = 0;
  for (std::size_t r = 0; r < seq.size(); ++r) {
    const long double dm = seq.d_minus[r], dp = seq.d_plus[r];
    acc += (std::pow(dm, static_cast<long double>(kappa)) + std::pow(dp, static_cast<long double>(kappa))) * dm * dp;
  }
  rep.moment_sum = static_cast<double>(acc);
  rep.moment_bound = K_kappa * n;

  auto within = [&](const Wasserstein1& d) { return d.value + d.truncation_error <= rep.eps_threshold; };
  rep.omega_n_holds = within(rep.d1_g_plus) && within(rep.d1_g_minus) && within(rep.d1_f_plus) &&
                      within(rep.d1_f_minus) && rep.moment_sum <= rep.moment_bound;
  return rep;
}

AssumptionReport check_assumption(const BiDegreeSequence& seq, const JointDegreeLaw& law, double eps,
                                  double kappa, double K_kappa) {
  const auto f = size_biased_law(law);
  return check_assumption(seq, law.out_marginal(), law.in_marginal(), f.f_plus, f.f_minus, eps, kappa,
                          K_kappa);
}

void write_sequence_binary(const BiDegreeSequence& seq, const std::filesystem::path& path) {
  auto os = io::open_out(path, true);
  io::write_header(os, "DCMS", 1);
  io::write_u64(os, seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    io::write_u32(os, seq.d_minus[i]);
    io::write_u32(os, seq.d_plus[i]);
  }
  if (!os) throw RuntimeFailure("write failed: " + path.string());
}

BiDegreeSequence read_sequence_binary(const std::filesystem::path& path) {
  auto is = io::open_in(path, true);
  const auto version = io::read_header(is, "DCMS");
  if (version != 1) throw FormatError("unsupported DCMS version " + std::to_string(version));
  const auto n = io::read_u64(is);
  std::vector<std::uint32_t> dm(n), dp(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    dm[i] = io::read_u32(is);
    dp[i] = io::read_u32(is);
  }
  return BiDegreeSequence::from_degrees(std::move(dm), std::move(dp));
}

void write_sequence_csv(const BiDegreeSequence& seq, const std::filesystem::path& path) {
  auto os = io::open_out(path);
  os << "index,d_minus,d_plus\n";
  for (std::size_t i = 0; i < seq.size(); ++i) os << i << ',' << seq.d_minus[i] << ',' << seq.d_plus[i] << '\n';
}

}  // namespace dcm
