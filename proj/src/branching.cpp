#include "dcm/branching.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include <json.hpp>

#include "dcm/errors.hpp"
#include "dcm/io.hpp"
#include "dcm/parallel.hpp"

namespace dcm {

GWSpec GWSpec::make(DiscreteLaw g, DiscreteLaw f) {
  GWSpec s;
  s.nu = g.full_mean();
  s.mu = f.full_mean();
  s.g = std::move(g);
  s.f = std::move(f);
  return s;
}

GWSpec GWSpec::from_joint(const JointDegreeLaw& law, Direction dir) {
  auto sb = size_biased_law(law);
  if (dir == Direction::out) return make(law.out_marginal(), std::move(sb.f_plus));
  return make(law.in_marginal(), std::move(sb.f_minus));
}

GWPath simulate_delayed_gw(const GWSpec& spec, std::size_t generations, std::uint64_t seed,
                           std::uint64_t cap) {
  if (generations < 1) throw ParameterOutOfRange("generations must be >= 1");
  Rng rng(seed);
  const DegreeSampler root(spec.g), off(spec.f);
  GWPath path;
  path.z.assign(generations + 1, 0);
  path.w.assign(generations + 1, 0.0);
  path.z[0] = 1;
  path.w[0] = 1.0;
  path.z[1] = root(rng);
  for (std::size_t k = 1; k < generations; ++k) {
    if (path.z[k] > cap) throw PopulationOverflow("generation " + std::to_string(k) + " exceeds cap");
    std::uint64_t next = 0;
    for (std::uint64_t i = 0; i < path.z[k]; ++i) next += off(rng);
    path.z[k + 1] = next;
  }
  if (path.z[generations] > cap) throw PopulationOverflow("last generation exceeds cap");
  for (std::size_t k = 1; k <= generations; ++k)
    path.w[k] = static_cast<double>(path.z[k]) / (spec.nu * std::pow(spec.mu, static_cast<double>(k - 1)));
  return path;
}

Extinction extinction_probability(const DiscreteLaw& f, double tol, std::size_t max_iterations) {
  Extinction e;
  if (f(1) == 1.0) {
    e.degenerate = true;
    return e;
  }
  double s = 0.0;
  while (e.iterations < max_iterations) {
    const double next = f.pgf(s);
    ++e.iterations;
    const bool done = std::abs(next - s) < tol;
    s = std::max(s, next);
    if (done) break;
  }
  e.q = std::min(s, 1.0);
  return e;
}

double survival_probability(const DiscreteLaw& g, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterOutOfRange("q must lie in [0, 1]");
  if (q == 1.0) return 0.0;
  return 1.0 - g.pgf(q);
}

TiltedLaws tilted_laws(const DiscreteLaw& g, const DiscreteLaw& f, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterOutOfRange("q must lie in [0, 1]");
  if (q == 0.0) throw UndefinedTilt("q = 0: the offspring law conditioned on extinction is undefined");
  TiltedLaws t;
  if (q == 1.0) {
    t.g_tilde = g;
    t.f_tilde = f;
    t.lambda = f.full_mean();
    return t;
  }
  // law(i) * q^(i + shift), cut once the weight underflows.
  auto tilt = [q](const DiscreteLaw& law, int shift) {
    std::vector<double> out;
    double power = std::pow(q, shift);
    for (std::size_t i = 0; i < law.tail_cutoff(); ++i) {
      out.push_back(law(i) * power);
      power *= q;
      if (power < 1e-300) break;
    }
    return out;
  };
  auto normalize = [](std::vector<double> pmf, const char* which) {
    long double total = 0;
    for (double p : pmf) total += p;
    if (!(total > 0)) throw UndefinedTilt(std::string(which) + " has zero mass after tilting");
    for (double& p : pmf) p = static_cast<double>(p / total);
    return std::pair{DiscreteLaw::from_pmf(std::move(pmf)), static_cast<double>(total)};
  };

  auto [f_tilde, f_total] = normalize(tilt(f, -1), "f");
  // At the fixed point the raw total is pgf(q)/q = 1; anything far off means
  // q is not an extinction probability of f.
  if (std::abs(f_total - 1.0) > 1e-6)
    throw UndefinedTilt("f tilt does not normalize (total " + std::to_string(f_total) + "); q is not a fixed point");
  t.f_tilde = std::move(f_tilde);
  t.g_tilde = normalize(tilt(g, 0), "g").first;
  t.lambda = t.f_tilde.mean();
  return t;
}

double WPool::mean() const {
  if (samples.empty()) return 0.0;
  long double s = 0;
  for (double x : samples) s += x;
  return static_cast<double>(s / samples.size());
}

double WPool::standard_error() const {
  if (samples.size() < 2) return 0.0;
  const long double m = mean();
  long double ss = 0;
  for (double x : samples) ss += (x - m) * (x - m);
  return static_cast<double>(std::sqrt(ss / (samples.size() - 1) / samples.size()));
}

double WPool::small_positive_fraction(double threshold) const {
  if (samples.empty()) return 0.0;
  std::size_t c = 0;
  for (double x : samples) c += (x > 0.0 && x < threshold);
  return static_cast<double>(c) / samples.size();
}

namespace {

constexpr std::size_t kPoolChunk = 4096;

// out[i] = (sum of `count ~ sampler` random entries of `in`) / scale.
void resample(const std::vector<double>& in, std::vector<double>& out, const DegreeSampler& sampler,
              double scale, std::uint64_t seed, unsigned threads) {
  const std::size_t size = out.size();
  const std::size_t chunks = (size + kPoolChunk - 1) / kPoolChunk;
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    const std::size_t end = std::min(size, (c + 1) * kPoolChunk);
    for (std::size_t i = c * kPoolChunk; i < end; ++i) {
      const std::uint64_t count = sampler(rng);
      double sum = 0.0;
      for (std::uint64_t t = 0; t < count; ++t) sum += in[rng.below(in.size())];
      out[i] = sum / scale;
    }
  });
}

}  // namespace

WPool population_dynamics(const GWSpec& spec, std::uint64_t seed, const PopulationOptions& options) {
  if (options.pool_size < 1) throw ParameterOutOfRange("pool_size must be >= 1");
  const DegreeSampler off(spec.f), root(spec.g);
  std::vector<double> cur(options.pool_size, 1.0), next(options.pool_size);
  for (std::size_t gen = 0; gen < options.generations; ++gen) {
    resample(cur, next, off, spec.mu, derive_seed(seed, gen), options.threads);
    cur.swap(next);
    // E[W] = 1 exactly; pinning the pool mean stops it from random-walking
    // across generations.
    long double sum = 0;
    for (double x : cur) sum += x;
    if (sum > 0) {
      const double scale = static_cast<double>(static_cast<long double>(cur.size()) / sum);
      if (scale != 1.0)
        for (double& x : cur) x *= scale;
    }
  }
  resample(cur, next, root, spec.nu, derive_seed(seed, options.generations), options.threads);

  WPool pool;
  pool.samples = std::move(next);
  pool.generations = options.generations;
  pool.pool_size = options.pool_size;
  pool.seed = seed;
  std::size_t zeros = 0;
  for (double x : pool.samples) zeros += (x == 0.0);
  pool.zero_fraction = static_cast<double>(zeros) / pool.pool_size;
  return pool;
}

void write_pool(const WPool& pool, const std::filesystem::path& csv_path) {
  {
    auto os = io::open_out(csv_path);
    os << std::setprecision(17);
    for (double x : pool.samples) os << x << '\n';
  }
  nlohmann::json meta = {{"pool_size", pool.pool_size},
                         {"generations", pool.generations},
                         {"seed", pool.seed},
                         {"zero_fraction", pool.zero_fraction},
                         {"mean", pool.mean()},
                         {"small_positive_fraction", pool.small_positive_fraction()}};
  auto js = io::open_out(std::filesystem::path(csv_path).replace_extension(".json"));
  js << meta.dump(2) << '\n';
}

}  // namespace dcm
