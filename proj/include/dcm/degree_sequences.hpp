#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dcm/discrete_law.hpp"

namespace dcm {

/// One entry of an explicit joint table.
struct JointAtom {
  std::uint32_t d_minus;
  std::uint32_t d_plus;
  double probability;
};

/// Prescribed joint law of (in-degree, out-degree) of a node.
class JointDegreeLaw {
 public:
  struct DRegular {
    std::uint32_t d;
  };
  struct Independent {
    DiscreteLaw in_law;
    DiscreteLaw out_law;
  };
  struct Equal {
    DiscreteLaw law;
  };
  struct Explicit {
    std::vector<JointAtom> table;
  };
  using Kind = std::variant<DRegular, Independent, Equal, Explicit>;

  static JointDegreeLaw d_regular(std::uint32_t d);
  static JointDegreeLaw independent(DiscreteLaw in_law, DiscreteLaw out_law);
  static JointDegreeLaw equal(DiscreteLaw law);
  static JointDegreeLaw explicit_table(std::vector<JointAtom> table);

  const Kind& kind() const { return kind_; }
  std::string name() const;

  /// Marginal laws g^- (in-degree) and g^+ (out-degree).
  DiscreteLaw in_marginal() const;
  DiscreteLaw out_marginal() const;

  /// nu = E[D+] = E[D-].
  double nu() const { return nu_; }
  /// mu = E[D- D+] / nu.
  double mu() const { return mu_; }
  bool supercritical() const { return mu_ > 1.0; }

  /// E[((D-)^kappa + (D+)^kappa) D+ D-].
  double joint_moment(double kappa) const;

  /// Draws one (D-, D+) pair.
  std::pair<std::uint64_t, std::uint64_t> sample(Rng& rng) const;

 private:
  explicit JointDegreeLaw(Kind kind);
  void build_sampler();

  Kind kind_;
  double nu_ = 0.0;
  double mu_ = 0.0;
  std::vector<DegreeSampler> samplers_;
};

/// Record of what the i.i.d. algorithm did to balance the sums.
struct SequenceProvenance {
  std::int64_t delta_before = 0;  ///< sum(D-) - sum(D+) of the accepted draw
  std::uint32_t retries = 0;      ///< rejected draws before acceptance
  std::vector<std::uint32_t> modified;  ///< indices that received +1
  bool modified_in_degrees = false;     ///< true when the +1 went to d_minus
};

/// Bi-degree sequence with equal in/out totals.
struct BiDegreeSequence {
  std::vector<std::uint32_t> d_minus;
  std::vector<std::uint32_t> d_plus;
  std::uint64_t total = 0;  ///< L_n
  SequenceProvenance provenance;

  std::size_t size() const { return d_minus.size(); }

  /// Validates the equal-sum constraint and sets total.
  static BiDegreeSequence from_degrees(std::vector<std::uint32_t> d_minus,
                                       std::vector<std::uint32_t> d_plus);
};

/// Default delta for the i.i.d. algorithm: 0.9 kappa / (1 + kappa) for
/// kappa < 1, 0.25 for kappa = 1.
double default_iid_delta(double kappa);

struct IidOptions {
  double delta = 0.25;
  std::uint32_t max_retries = 1000;
};

/// i.i.d. algorithm: draw n pairs, accept when |Delta_n| <= n^{1-delta},
/// then add one to |Delta_n| uniformly chosen entries of the deficient side.
BiDegreeSequence sample_iid_bidegree(const JointDegreeLaw& law, std::size_t n, std::uint64_t seed,
                                     const IidOptions& options = {});

struct EmpiricalDegreeDistributions {
  DiscreteLaw g_plus, g_minus, f_plus, f_minus;
  double nu_n = 0.0;
  double mu_n = 0.0;
};

EmpiricalDegreeDistributions empirical_distributions(const BiDegreeSequence& seq);

/// Size-biased laws f^+(t) = E[1(D+ = t) D-]/nu and f^-(t) = E[1(D- = t) D+]/nu.
struct SizeBiasedLaws {
  DiscreteLaw f_plus;
  DiscreteLaw f_minus;
};
SizeBiasedLaws size_biased_law(const JointDegreeLaw& law);

struct AssumptionReport {
  Wasserstein1 d1_g_plus, d1_g_minus, d1_f_plus, d1_f_minus;
  double eps = 0.0;
  double kappa = 0.0;
  double eps_threshold = 0.0;  ///< n^{-eps}
  double moment_sum = 0.0;
  double moment_bound = 0.0;  ///< K_kappa * n
  bool omega_n_holds = false;
};

/// Checks the distance and joint-moment conditions against explicit limit laws.
AssumptionReport check_assumption(const BiDegreeSequence& seq, const DiscreteLaw& g_plus,
                                  const DiscreteLaw& g_minus, const DiscreteLaw& f_plus,
                                  const DiscreteLaw& f_minus, double eps, double kappa,
                                  double K_kappa);
AssumptionReport check_assumption(const BiDegreeSequence& seq, const JointDegreeLaw& law, double eps,
                                  double kappa, double K_kappa);

// Serialization: "DCMS" binary (magic, u32 version, u64 n, n x (u32 d-, u32 d+),
// all little-endian) and CSV (index,d_minus,d_plus).
void write_sequence_binary(const BiDegreeSequence& seq, const std::filesystem::path& path);
BiDegreeSequence read_sequence_binary(const std::filesystem::path& path);
void write_sequence_csv(const BiDegreeSequence& seq, const std::filesystem::path& path);

}  // namespace dcm
