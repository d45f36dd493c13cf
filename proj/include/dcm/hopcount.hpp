#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcm/digraph.hpp"

namespace dcm {

inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

/// Directed distance from source to target, kUnreachable if there is no path.
/// Level-synchronous bidirectional search that always grows the cheaper side.
std::uint32_t bfs_distance(const Digraph& g, NodeId source, NodeId target);

/// Reusable scratch space for repeated bidirectional searches on one graph.
class BidirectionalBfs {
 public:
  explicit BidirectionalBfs(const Digraph& g);
  std::uint32_t distance(NodeId source, NodeId target);

 private:
  void bump_epoch();

  const Digraph* g_;
  std::vector<std::uint32_t> dist_f_, dist_b_, seen_f_, seen_b_;
  std::vector<NodeId> front_f_, front_b_, next_;
  std::uint32_t epoch_ = 0;
};

/// Single-source distances (kUnreachable where unreachable).
std::vector<std::uint32_t> bfs_all(const Digraph& g, NodeId source);

enum class HopcountMode { exact_all_pairs, sampled_pairs, hll_estimate };
std::string to_string(HopcountMode mode);

/// counts[t] = ordered pairs at distance exactly t (counts[0] is always 0).
/// Counts are real so that sketch estimates fit the same type.
struct HopcountHistogram {
  std::vector<double> counts;
  double finite_pairs = 0.0;
  double total_pairs = 0.0;
  HopcountMode mode = HopcountMode::exact_all_pairs;

  /// Adds another histogram's counts (e.g. pooling several graphs).
  void accumulate(const HopcountHistogram& other);
  /// Distance pmf conditioned on a finite distance.
  std::vector<double> conditional_pmf() const;
  double finite_fraction() const { return total_pairs > 0 ? finite_pairs / total_pairs : 0.0; }
};

HopcountHistogram exact_all_pairs(const Digraph& g, unsigned threads = 0);

/// num_pairs uniform ordered pairs with i != j.
HopcountHistogram sample_hopcounts(const Digraph& g, std::size_t num_pairs, std::uint64_t seed,
                                   unsigned threads = 0);

struct NeighborhoodOptions {
  enum class Mode { exact, hll };
  Mode mode = Mode::exact;
  unsigned precision = 10;
  std::size_t t_max = 64;
  std::uint64_t salt = 0;  ///< hash salt for the sketches
  unsigned threads = 0;
};

/// values[t-1] = N(t) = ordered pairs (u, v), u != v, with distance <= t.
struct NeighborhoodFunction {
  std::vector<double> values;
  std::size_t stabilized_at = 0;  ///< smallest t from which N is constant; 0 if not reached
  NeighborhoodOptions options;

  /// Pairs at finite distance >= t, for t = 1..t_max.
  std::vector<double> at_least() const;
};

NeighborhoodFunction neighborhood_function(const Digraph& g, const NeighborhoodOptions& options);

/// Differences of a cumulative neighborhood function given as N(1), N(2), ...
/// Empty counts with finite_pairs = 0 when N is identically 0.
HopcountHistogram hopcount_pmf_from_nf(std::span<const double> within,
                                       HopcountMode mode = HopcountMode::exact_all_pairs);

// CSV "t,count" or "t,within,at_least" with a JSON sidecar holding `meta`.
void write_histogram(const HopcountHistogram& h, const std::filesystem::path& path,
                     nlohmann::json meta = nlohmann::json::object());
void write_neighborhood(const NeighborhoodFunction& nf, const std::filesystem::path& path,
                        nlohmann::json meta = nlohmann::json::object());

}  // namespace dcm
