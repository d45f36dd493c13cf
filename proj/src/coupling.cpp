#include "dcm/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>

#include "dcm/errors.hpp"
#include "dcm/io.hpp"

namespace dcm {

ExplorationState::ExplorationState(const BiDegreeSequence& seq, Direction dir)
    : seq_(&seq), dir_(dir), order_(seq.size()), active_(seq.size(), 0) {
  if (seq.size() == 0) throw ParameterOutOfRange("empty degree sequence");
  std::iota(order_.begin(), order_.end(), NodeId{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [this](NodeId a, NodeId b) { return explored_degree(a) < explored_degree(b); });
  std::vector<std::uint64_t> w(seq.size() + 1, 0);
  for (std::size_t i = 0; i < order_.size(); ++i) w[i + 1] = opposite_degree(order_[i]);
  weights_ = Fenwick(w);
  inactive_opposite_ = seq.total;
}

std::uint64_t ExplorationState::explored_degree(NodeId r) const {
  return dir_ == Direction::out ? seq_->d_plus[r] : seq_->d_minus[r];
}

std::uint64_t ExplorationState::opposite_degree(NodeId r) const {
  return dir_ == Direction::out ? seq_->d_minus[r] : seq_->d_plus[r];
}

void ExplorationState::activate(std::size_t slot) {
  const NodeId r = order_[slot - 1];
  const std::uint64_t opp = opposite_degree(r);
  weights_.add(slot, -static_cast<std::int64_t>(opp));
  weights_.add(0, static_cast<std::int64_t>(opp));
  active_[r] = 1;
  inactive_opposite_ -= opp;
  v_ += opp;
  active_joint_ += static_cast<std::uint64_t>(seq_->d_plus[r]) * seq_->d_minus[r];
}

std::uint64_t ExplorationState::activate_root(double u) {
  const std::size_t n = order_.size();
  const auto pos = static_cast<std::size_t>(std::clamp<double>(std::ceil(u * n) - 1.0, 0.0, n - 1.0));
  activate(pos + 1);
  return explored_degree(order_[pos]);
}

ExplorationState::Step ExplorationState::traverse(double u) {
  const std::uint64_t remaining = seq_->total - traversed_;
  if (remaining == 0) throw ExhaustedStubs("all stubs have been traversed");
  const auto target = static_cast<std::uint64_t>(
      std::clamp<double>(std::ceil(u * static_cast<double>(remaining)) - 1.0, 0.0, remaining - 1.0));
  const std::size_t slot = weights_.find(target);
  Step step{0, std::nullopt};
  if (slot != 0) {
    const NodeId r = order_[slot - 1];
    step = {explored_degree(r), r};
    activate(slot);
  }
  // The traversed stub consumes one opposite stub of an (now) active node.
  weights_.add(0, -1);
  --v_;
  ++traversed_;
  return step;
}

bool ExplorationState::v_identity_holds() const {
  std::uint64_t inactive = 0;
  for (std::size_t r = 0; r < active_.size(); ++r)
    if (!active_[r]) inactive += opposite_degree(static_cast<NodeId>(r));
  return seq_->total - inactive - traversed_ == v_ && inactive == inactive_opposite_;
}

DiscreteLaw dynamic_offspring_law(const ExplorationState& state) {
  const std::uint64_t remaining = state.total() - state.traversed();
  if (remaining == 0) throw ExhaustedStubs("all stubs have been traversed");
  std::vector<double> pmf(1, 0.0);
  for (NodeId r : state.order_) {
    if (state.active_[r]) continue;
    const std::uint64_t t = state.explored_degree(r);
    if (pmf.size() <= t) pmf.resize(t + 1, 0.0);
    pmf[t] += static_cast<double>(state.opposite_degree(r));
  }
  pmf[0] += static_cast<double>(state.v_);
  for (double& p : pmf) p /= static_cast<double>(remaining);
  return DiscreteLaw::from_pmf(std::move(pmf));
}

namespace {

double error_bound_from_sum(std::uint64_t t, std::uint64_t active_joint, std::size_t n, double nu, double mu,
                            double eps) {
  const double nn = static_cast<double>(n);
  return 4.0 / (nu * nn) * static_cast<double>(active_joint) + 4.0 * mu * static_cast<double>(t) / (nu * nn) +
         3.0 * std::pow(nn, -eps);
}

struct Label {
  bool graph;
  bool tree;
};

}  // namespace

double error_bound_E(std::uint64_t t, const BiDegreeSequence& seq, const std::vector<char>& active, double nu,
                     double mu, double eps) {
  const double n = static_cast<double>(seq.size());
  if (static_cast<double>(t) > nu * n / 2.0) throw OutOfValidityWindow("t exceeds nu n / 2");
  if (active.size() != seq.size()) throw ParameterOutOfRange("activity flags do not match the sequence");
  std::uint64_t joint = 0;
  for (std::size_t r = 0; r < seq.size(); ++r)
    if (active[r]) joint += static_cast<std::uint64_t>(seq.d_plus[r]) * seq.d_minus[r];
  return error_bound_from_sum(t, joint, seq.size(), nu, mu, eps);
}

bool CoupledTrace::sandwich_holds() const {
  for (std::size_t m = 0; m < z.size(); ++m) {
    const auto lo = static_cast<std::int64_t>(z_hat[m]) - static_cast<std::int64_t>(tree_only[m]);
    const auto hi = z_hat[m] + graph_only[m];
    if (static_cast<std::int64_t>(z[m]) < lo || z[m] > hi) return false;
  }
  return true;
}

CoupledTrace coupled_exploration(const BiDegreeSequence& seq, const GWSpec& law, Direction dir, std::size_t k_max,
                                 std::uint64_t seed, const CouplingOptions& options) {
  if (k_max < 1) throw ParameterOutOfRange("k_max must be >= 1");
  ExplorationState state(seq, dir);
  Rng rng(seed);
  CoupledTrace trace;
  trace.seed = seed;
  trace.z.assign(1, 1);
  trace.z_hat.assign(1, 1);
  trace.tree_only.assign(1, 0);
  trace.graph_only.assign(1, 0);

  const double u_root = rng.uniform();
  const std::uint64_t chi_root = state.activate_root(u_root);
  const std::uint64_t chi_hat_root = law.g.quantile(u_root);
  std::vector<Label> generation, next;
  for (std::uint64_t j = 0; j < std::max(chi_root, chi_hat_root); ++j)
    generation.push_back({j < chi_root, j < chi_hat_root});

  const double window = law.nu * static_cast<double>(seq.size()) / 2.0;
  for (std::size_t m = 1; m <= k_max; ++m) {
    std::uint64_t z = 0, z_hat = 0, tree_only = 0, graph_only = 0;
    for (const auto& l : generation) {
      z += l.graph;
      z_hat += l.tree;
      tree_only += l.tree && !l.graph;
      graph_only += l.graph && !l.tree;
    }
    trace.z.push_back(z);
    trace.z_hat.push_back(z_hat);
    trace.tree_only.push_back(tree_only);
    trace.graph_only.push_back(graph_only);
    if (!trace.first_divergence && (tree_only > 0 || graph_only > 0)) trace.first_divergence = m;
    if (m == k_max) break;

    next.clear();
    for (const auto& l : generation) {
      const double u = rng.uniform();
      const std::uint64_t chi_hat = law.f.quantile(u);
      std::uint64_t chi = 0;
      if (l.graph) {
        const std::uint64_t t_before = state.traversed();
        const std::uint64_t joint_before = state.active_joint_sum();
        chi = state.traverse(u).offspring;
        if (options.record_steps) {
          const double e = static_cast<double>(t_before) <= window
                               ? error_bound_from_sum(t_before, joint_before, seq.size(), law.nu, law.mu, options.eps)
                               : std::numeric_limits<double>::quiet_NaN();
          trace.steps.push_back({t_before, static_cast<std::uint32_t>(m), chi, chi_hat, e});
        }
      }
      const std::uint64_t cg = l.graph ? chi : 0;
      const std::uint64_t ct = l.tree ? chi_hat : 0;
      for (std::uint64_t j = 0; j < std::max(cg, ct); ++j) next.push_back({j < cg, j < ct});
      if (next.size() > options.max_labels) throw PopulationOverflow("coupled generation exceeds label cap");
    }
    generation.swap(next);
  }
  trace.graph_exhausted = state.traversed() == seq.total;
  return trace;
}

std::size_t max_coupling_depth(std::size_t n, double mu, double delta) {
  if (!(mu > 1.0)) throw ParameterOutOfRange("coupling window needs mu > 1");
  return static_cast<std::size_t>(std::floor((1.0 - delta) * std::log(static_cast<double>(n)) / std::log(mu)));
}

std::optional<FailureRates> coupling_failure_rate(const JointDegreeLaw& law, std::size_t n, double delta,
                                                  double gamma, std::size_t k, std::size_t reps,
                                                  std::uint64_t seed, const FailureOptions& options) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterOutOfRange("delta must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma < std::min(delta * options.kappa, options.eps)))
    throw ParameterOutOfRange("gamma must lie in (0, min(delta kappa, eps))");
  const GWSpec spec = GWSpec::from_joint(law, options.dir);
  const std::size_t window = max_coupling_depth(n, spec.mu, delta);
  if (k < 1 || k > window)
    throw ParameterOutOfRange("k = " + std::to_string(k) + " outside [1, " + std::to_string(window) + "]");
  if (reps == 0) return std::nullopt;

  const double slack = std::pow(static_cast<double>(n), -gamma);
  std::size_t deficit_fail = 0, ratio_fail = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto seq = sample_iid_bidegree(law, n, derive_seed(seed, 2 * r), options.iid);
    const auto trace = coupled_exploration(seq, spec, options.dir, k, derive_seed(seed, 2 * r + 1));
    bool deficit = false, ratio = false;
    for (std::size_t m = 1; m <= k; ++m) {
      const double bound = static_cast<double>(trace.z_hat[m]) * slack;
      if (trace.tree_only[m] > bound || trace.graph_only[m] > bound) deficit = true;
      const double z = static_cast<double>(trace.z[m]);
      if (z < trace.z_hat[m] * (1.0 - slack) || z > trace.z_hat[m] * (1.0 + slack)) ratio = true;
    }
    deficit_fail += deficit;
    ratio_fail += ratio;
  }
  FailureRates out;
  out.reps = reps;
  out.freq_any_deficit_exceeds = static_cast<double>(deficit_fail) / reps;
  out.freq_ratio_bound_fails = static_cast<double>(ratio_fail) / reps;
  return out;
}

void write_trace(const CoupledTrace& trace, const std::filesystem::path& path, nlohmann::json meta) {
  const std::size_t gens = trace.z.size();
  std::vector<double> e_sum(gens, 0.0);
  std::vector<std::size_t> e_count(gens, 0);
  for (const auto& s : trace.steps) {
    if (std::isnan(s.error_bound) || s.generation >= gens) continue;
    e_sum[s.generation] += s.error_bound;
    ++e_count[s.generation];
  }
  {
    auto os = io::open_out(path);
    os << std::setprecision(17) << "m,z,z_hat,deficit_tree_only,deficit_graph_only,error_bound\n";
    for (std::size_t m = 0; m < gens; ++m) {
      os << m << ',' << trace.z[m] << ',' << trace.z_hat[m] << ',' << trace.tree_only[m] << ','
         << trace.graph_only[m] << ',';
      if (e_count[m] > 0) os << e_sum[m] / e_count[m];
      os << '\n';
    }
  }
  meta["seed"] = trace.seed;
  meta["generations"] = gens - 1;
  meta["graph_exhausted"] = trace.graph_exhausted;
  meta["sandwich_holds"] = trace.sandwich_holds();
  if (trace.first_divergence)
    meta["first_divergence"] = *trace.first_divergence;
  else
    meta["first_divergence"] = nullptr;
  io::open_out(std::filesystem::path(path).replace_extension(".json")) << meta.dump(2) << '\n';
}

}  // namespace dcm
