#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dcm/degree_sequences.hpp"

namespace dcm {

/// Exploration direction: out (+) follows edges forward, in (-) backward.
enum class Direction { out, in };

/// Delayed Galton-Watson process: the root reproduces by g, everyone else by f.
struct GWSpec {
  DiscreteLaw g;
  DiscreteLaw f;
  double nu = 0.0;
  double mu = 0.0;

  /// nu and mu are taken from the laws' exact means.
  static GWSpec make(DiscreteLaw g, DiscreteLaw f);
  /// (g+, f+) for Direction::out, (g-, f-) for Direction::in.
  static GWSpec from_joint(const JointDegreeLaw& law, Direction dir);
};

struct GWPath {
  std::vector<std::uint64_t> z;  ///< z[0] = 1, z[k] generation sizes
  std::vector<double> w;         ///< w[k] = z[k] / (nu mu^(k-1)) for k >= 1; w[0] = 1
};

GWPath simulate_delayed_gw(const GWSpec& spec, std::size_t generations, std::uint64_t seed,
                           std::uint64_t cap = 1'000'000'000);

struct Extinction {
  double q = 0.0;
  bool degenerate = false;  ///< f = point mass at 1; every s is a fixed point
  std::size_t iterations = 0;
};

/// Smallest fixed point of the pgf of f, by monotone iteration from 0.
Extinction extinction_probability(const DiscreteLaw& f, double tol = 1e-12,
                                  std::size_t max_iterations = 1'000'000);

/// 1 - sum_t g(t) q^t.
double survival_probability(const DiscreteLaw& g, double q);

/// Laws of the process conditioned on extinction.
struct TiltedLaws {
  DiscreteLaw g_tilde;  ///< g(i) q^i / sum_t g(t) q^t
  DiscreteLaw f_tilde;  ///< f(i) q^(i-1)
  double lambda = 0.0;  ///< mean of f_tilde
};

TiltedLaws tilted_laws(const DiscreteLaw& g, const DiscreteLaw& f, double q);

/// Approximate draws of the martingale limit W of a delayed process.
struct WPool {
  std::vector<double> samples;
  double zero_fraction = 0.0;
  std::size_t generations = 0;
  std::size_t pool_size = 0;
  std::uint64_t seed = 0;

  double mean() const;
  double standard_error() const;
  /// Fraction of strictly positive samples below the threshold; a gauge of
  /// finite-depth truncation bias.
  double small_positive_fraction(double threshold = 1e-6) const;
};

struct PopulationOptions {
  std::size_t pool_size = 100'000;
  std::size_t generations = 30;
  unsigned threads = 0;
};

/// Bootstrap of W = (1/mu) sum_{t <= N_f} W_t started from a pool of ones,
/// rescaled to mean one after every generation, followed by one delayed
/// pass with N_g and 1/nu. Output depends only on the seed and the sizes,
/// not on the thread count.
WPool population_dynamics(const GWSpec& spec, std::uint64_t seed, const PopulationOptions& options = {});

/// One sample per line, plus a JSON sidecar next to it.
void write_pool(const WPool& pool, const std::filesystem::path& csv_path);

}  // namespace dcm
