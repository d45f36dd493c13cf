#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "dcm/branching.hpp"
#include "dcm/digraph.hpp"
#include "dcm/fenwick.hpp"

namespace dcm {

/// Graph exploration in one direction on lazily paired stubs.
///
/// Following a stub of the explored side ("out" stubs for Direction::out)
/// lands on a uniform unpaired stub of the opposite side. Those targets are
/// kept in one weighted structure: slot 0 holds V, the unpaired opposite
/// stubs on active nodes; the remaining slots are the nodes sorted by their
/// explored-side degree, weighted by their opposite degree while inactive.
/// A quantile query therefore returns the pseudo-inverse of the dynamic
/// offspring law and the node that realizes it in one step.
class ExplorationState {
 public:
  ExplorationState(const BiDegreeSequence& seq, Direction dir);

  Direction direction() const { return dir_; }
  std::uint64_t traversed() const { return traversed_; }       ///< T
  std::uint64_t total() const { return seq_->total; }          ///< L_n
  std::uint64_t active_opposite_stubs() const { return v_; }   ///< V
  bool active(NodeId r) const { return active_[r] != 0; }
  const std::vector<char>& active_flags() const { return active_; }
  /// Sum of D+ D- over active nodes.
  std::uint64_t active_joint_sum() const { return active_joint_; }

  /// Activates the node at position ceil(u n) - 1 of the degree order, i.e.
  /// the pseudo-inverse of the empirical root law; returns its explored-side
  /// degree.
  std::uint64_t activate_root(double u);

  struct Step {
    std::uint64_t offspring;     ///< chi
    std::optional<NodeId> node;  ///< newly activated node, if any
  };
  /// Traverses one explored-side stub using uniform u.
  Step traverse(double u);

  /// L_n - sum_r D_r^opp I_r(T) - T == V.
  bool v_identity_holds() const;

 private:
  friend DiscreteLaw dynamic_offspring_law(const ExplorationState& state);
  void activate(std::size_t slot);
  std::uint64_t explored_degree(NodeId r) const;
  std::uint64_t opposite_degree(NodeId r) const;

  const BiDegreeSequence* seq_;
  Direction dir_;
  std::vector<NodeId> order_;  ///< nodes by explored-side degree; slot = position + 1
  std::vector<char> active_;
  Fenwick weights_;
  std::uint64_t traversed_ = 0;
  std::uint64_t v_ = 0;
  std::uint64_t inactive_opposite_ = 0;
  std::uint64_t active_joint_ = 0;
};

/// The offspring pmf the next traversal would use: for t >= 1 the opposite
/// stubs of inactive nodes with explored degree t, with the V mass and the
/// inactive degree-0 nodes at t = 0, all over L_n - T.
DiscreteLaw dynamic_offspring_law(const ExplorationState& state);

struct CouplingStep {
  std::uint64_t traversed;      ///< T before the traversal
  std::uint32_t generation;     ///< generation of the traversed stub
  std::uint64_t chi;
  std::uint64_t chi_hat;
  double error_bound;           ///< E(T), NaN outside its validity window
};

struct CoupledTrace {
  std::vector<std::uint64_t> z, z_hat;            ///< index m = 0..k_max, z[0] = z_hat[0] = 1
  std::vector<std::uint64_t> tree_only, graph_only;
  std::optional<std::size_t> first_divergence;
  bool graph_exhausted = false;                   ///< all L_n stubs traversed before k_max
  std::vector<CouplingStep> steps;                ///< filled when requested
  std::uint64_t seed = 0;

  /// Z-hat - tree_only <= Z <= Z-hat + graph_only in every generation.
  bool sandwich_holds() const;
};

struct CouplingOptions {
  bool record_steps = false;
  double eps = 0.1;                      ///< for the error-bound overlay
  std::uint64_t max_labels = 50'000'000; ///< per generation
};

/// Graph exploration and delayed branching process driven by one uniform per
/// label, labels taken generation by generation in lexicographic order.
CoupledTrace coupled_exploration(const BiDegreeSequence& seq, const GWSpec& law, Direction dir,
                                 std::size_t k_max, std::uint64_t seed, const CouplingOptions& options = {});

struct FailureRates {
  double freq_any_deficit_exceeds = 0.0;  ///< some deficit > Z-hat_m n^-gamma
  double freq_ratio_bound_fails = 0.0;    ///< Z_m outside Z-hat_m (1 +- n^-gamma)
  std::size_t reps = 0;
};

struct FailureOptions {
  double kappa = 1.0;
  double eps = 0.1;
  Direction dir = Direction::out;
  IidOptions iid;
};

/// Largest admissible depth floor((1 - delta) log n / log mu).
std::size_t max_coupling_depth(std::size_t n, double mu, double delta);

/// Fresh i.i.d. sequence and coupling per replicate. Requires 0 < delta < 1,
/// 0 < gamma < min(delta kappa, eps) and 1 <= k <= max_coupling_depth.
/// Returns nullopt when reps = 0.
std::optional<FailureRates> coupling_failure_rate(const JointDegreeLaw& law, std::size_t n, double delta,
                                                  double gamma, std::size_t k, std::size_t reps,
                                                  std::uint64_t seed, const FailureOptions& options = {});

/// (4/(nu n)) sum_r (1 - I_r(t)) D+_r D-_r + 4 mu t/(nu n) + 3 n^-eps, for
/// t <= nu n / 2.
double error_bound_E(std::uint64_t t, const BiDegreeSequence& seq, const std::vector<char>& active, double nu,
                     double mu, double eps);

/// CSV "m,z,z_hat,deficit_tree_only,deficit_graph_only,error_bound" (the
/// last column is the mean E(T) over the stubs of generation m) plus JSON.
void write_trace(const CoupledTrace& trace, const std::filesystem::path& path,
                 nlohmann::json meta = nlohmann::json::object());

}  // namespace dcm
