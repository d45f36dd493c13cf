// dcmlab: generate directed configuration-model graphs, measure hopcounts and
// compare them with the branching-process limit.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcm/branching.hpp"
#include "dcm/coupling.hpp"
#include "dcm/degree_sequences.hpp"
#include "dcm/digraph.hpp"
#include "dcm/errors.hpp"
#include "dcm/hopcount.hpp"
#include "dcm/io.hpp"
#include "dcm/law_config.hpp"
#include "dcm/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void log(const std::string& msg) { std::cerr << "[dcmlab] " << msg << '\n'; }

struct Common {
  std::string law = "dregular:3";
  std::size_t n = 1000;
  std::size_t graphs = 1;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  unsigned threads = 0;
  bool deterministic = false;
  double iid_delta = 0.25;
  std::uint32_t max_retries = 1000;
};

struct HopOpts {
  std::string mode = "hll";
  unsigned p = 10;
  std::size_t t_max = 64;
  std::size_t pairs = 100000;
  std::vector<std::string> graph_files;
};

struct PoolOpts {
  std::size_t pool = 100000;
  std::size_t generations = 30;
};

// Seeds of graph `index`: sequence, pairing, sketch salt, pair sampling.
std::uint64_t graph_seed(std::uint64_t seed, std::size_t index, std::uint64_t purpose) {
  return dcm::derive_seed(dcm::derive_seed(seed, index), purpose);
}

std::uint64_t require_seed(const Common& c) {
  if (!c.seed) throw dcm::ParameterOutOfRange("--seed is required for this command");
  return *c.seed;
}

dcm::BiDegreeSequence make_sequence(const dcm::JointDegreeLaw& law, const Common& c, std::size_t index) {
  dcm::IidOptions iid;
  iid.delta = c.iid_delta;
  iid.max_retries = c.max_retries;
  return dcm::sample_iid_bidegree(law, c.n, graph_seed(*c.seed, index, 0), iid);
}

json describe_run(CLI::App* sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      if (opt->get_expected_max() > 1) {
        cfg[name] = r;
      } else if (opt->get_type_size() == 0) {
        cfg[name] = true;
      } else {
        cfg[name] = r.back();
      }
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

void write_sidecar(const fs::path& path, const json& j) { dcm::io::open_out(path) << j.dump(2) << '\n'; }

dcm::NeighborhoodOptions nf_options(const HopOpts& h, const Common& c, std::uint64_t salt) {
  dcm::NeighborhoodOptions o;
  o.mode = h.mode == "exact" ? dcm::NeighborhoodOptions::Mode::exact : dcm::NeighborhoodOptions::Mode::hll;
  o.precision = h.p;
  o.t_max = h.t_max;
  o.salt = salt;
  o.threads = c.threads;
  return o;
}

void validate_hop(const HopOpts& h) {
  if (h.mode != "exact" && h.mode != "hll" && h.mode != "sampled")
    throw dcm::ParameterOutOfRange("--mode must be exact, hll or sampled");
  if (h.p < 4 || h.p > 16) throw dcm::ParameterOutOfRange("--p must lie in [4, 16]");
  if (h.t_max < 1) throw dcm::ParameterOutOfRange("--t-max must be >= 1");
}

// Pooled hopcount histogram over the graphs described by the options.
dcm::HopcountHistogram measure(const HopOpts& h, const Common& c, std::optional<dcm::JointDegreeLaw> law,
                               const fs::path& out_dir, json& per_graph) {
  dcm::HopcountHistogram pooled;
  pooled.counts.assign(1, 0.0);
  const std::size_t count = h.graph_files.empty() ? c.graphs : h.graph_files.size();
  for (std::size_t i = 0; i < count; ++i) {
    dcm::Digraph g;
    if (!h.graph_files.empty()) {
      const fs::path f = h.graph_files[i];
      g = f.extension() == ".dcmg" ? dcm::read_graph_binary(f) : dcm::read_edge_list(f);
    } else {
      g = dcm::pair_stubs(make_sequence(*law, c, i), graph_seed(*c.seed, i, 1));
    }
    const std::uint64_t seed = c.seed.value_or(0);
    dcm::HopcountHistogram hist;
    if (h.mode == "sampled") {
      hist = dcm::sample_hopcounts(g, h.pairs, graph_seed(seed, i, 3), c.threads);
    } else {
      const auto nf = dcm::neighborhood_function(g, nf_options(h, c, graph_seed(seed, i, 2)));
      dcm::write_neighborhood(nf, out_dir / ("nf_" + std::to_string(i) + ".csv"),
                              {{"graph", i}, {"n", g.num_nodes()}, {"seed", seed}});
      hist = dcm::hopcount_pmf_from_nf(nf.values, h.mode == "hll" ? dcm::HopcountMode::hll_estimate
                                                                   : dcm::HopcountMode::exact_all_pairs);
      hist.total_pairs = static_cast<double>(g.num_nodes()) * (g.num_nodes() - 1.0);
    }
    per_graph.push_back({{"graph", i},
                         {"n", g.num_nodes()},
                         {"edges", g.num_edges()},
                         {"finite_pairs", hist.finite_pairs},
                         {"total_pairs", hist.total_pairs}});
    log("graph " + std::to_string(i) + ": finite fraction " + std::to_string(hist.finite_fraction()));
    pooled.accumulate(hist);
    pooled.mode = hist.mode;
  }
  return pooled;
}

dcm::TheoreticalHopcountLaw build_theory(const dcm::JointDegreeLaw& law, std::size_t n, const PoolOpts& p,
                                         std::uint64_t seed, unsigned threads, const fs::path& out_dir,
                                         json& meta) {
  if (!law.supercritical()) throw dcm::ParameterOutOfRange("hopcount comparison needs mu > 1");
  const auto plus = dcm::GWSpec::from_joint(law, dcm::Direction::out);
  const auto minus = dcm::GWSpec::from_joint(law, dcm::Direction::in);
  dcm::PopulationOptions po;
  po.pool_size = p.pool;
  po.generations = p.generations;
  po.threads = threads;
  const auto w_plus = dcm::population_dynamics(plus, dcm::derive_seed(seed, 101), po);
  const auto w_minus = dcm::population_dynamics(minus, dcm::derive_seed(seed, 102), po);
  dcm::write_pool(w_plus, out_dir / "w_plus.csv");
  dcm::write_pool(w_minus, out_dir / "w_minus.csv");
  const auto q_plus = dcm::extinction_probability(plus.f);
  const auto q_minus = dcm::extinction_probability(minus.f);
  const double s_plus = dcm::survival_probability(plus.g, q_plus.q);
  const double s_minus = dcm::survival_probability(minus.g, q_minus.q);
  meta["nu"] = law.nu();
  meta["mu"] = law.mu();
  meta["q_plus"] = q_plus.q;
  meta["q_minus"] = q_minus.q;
  meta["s_plus"] = s_plus;
  meta["s_minus"] = s_minus;
  meta["prob_finite"] = dcm::prob_finite(s_plus, s_minus);
  meta["pool_size"] = p.pool;
  meta["generations"] = p.generations;
  meta["zero_fraction_plus"] = w_plus.zero_fraction;
  meta["zero_fraction_minus"] = w_minus.zero_fraction;
  return dcm::TheoreticalHopcountLaw::from_pools(n, law.nu(), law.mu(), w_plus, w_minus);
}

// JSON config entries become leading arguments; real flags come later and win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") path = args[i + 1];
  if (path.empty() || args.empty()) return args;
  std::ifstream is(path);
  if (!is) throw dcm::ValidationError("cannot open config '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(is);
  } catch (const json::exception& e) {
    throw dcm::ValidationError(std::string("config does not parse: ") + e.what());
  }
  if (cfg.contains("config") && cfg["config"].is_object()) cfg = cfg["config"];
  std::vector<std::string> injected;
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) injected.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        injected.push_back(flag);
        injected.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      }
    } else {
      injected.push_back(flag);
      injected.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  // Subcommand name stays first.
  std::vector<std::string> out{args.front()};
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directed configuration model hopcount laboratory"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common c;
  HopOpts h;
  PoolOpts p;
  std::string config_path;

  auto add_common = [&](CLI::App* s, bool graphs) {
    s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    s->add_option("--config", config_path, "JSON file with option values; flags override it");
    s->add_option("--law", c.law, "Joint degree law, e.g. dregular:3, pp-indep:1.5,1, zipf-equal:3.5,1000")
        ->capture_default_str();
    s->add_option("--n", c.n, "Number of nodes")->capture_default_str();
    if (graphs) s->add_option("--graphs", c.graphs, "Number of independent graphs")->capture_default_str();
    s->add_option("--seed", c.seed, "Master seed (u64)");
    s->add_option("--out", c.out, "Output directory")->capture_default_str();
    s->add_option("--threads", c.threads, "Worker threads, 0 = all cores")->capture_default_str();
    s->add_flag("--deterministic", c.deterministic, "Fixed work partitioning (results never depend on threads)");
    s->add_option("--iid-delta", c.iid_delta, "Acceptance exponent of the i.i.d. sequence algorithm")
        ->capture_default_str();
    s->add_option("--max-retries", c.max_retries, "Redraw limit of the i.i.d. algorithm")->capture_default_str();
  };
  auto add_hop = [&](CLI::App* s) {
    s->add_option("--mode", h.mode, "exact | hll | sampled")->capture_default_str();
    s->add_option("--p", h.p, "HLL precision")->capture_default_str();
    s->add_option("--t-max", h.t_max, "Largest distance of the neighborhood function")->capture_default_str();
    s->add_option("--pairs", h.pairs, "Pairs per graph in sampled mode")->capture_default_str();
  };
  auto add_pool = [&](CLI::App* s) {
    s->add_option("--pool", p.pool, "Population-dynamics pool size")->capture_default_str();
    s->add_option("--generations", p.generations, "Population-dynamics generations")->capture_default_str();
  };

  auto* gen = app.add_subcommand("gen", "Sample bi-degree sequences and pair them into graphs");
  add_common(gen, true);
  bool edge_list = false, seq_csv = false;
  gen->add_flag("--edge-list", edge_list, "Also write text edge lists");
  gen->add_flag("--csv", seq_csv, "Also write degree sequences as CSV");

  auto* hop = app.add_subcommand("hopcount", "Hopcount histogram of generated or stored graphs");
  add_common(hop, true);
  add_hop(hop);
  hop->add_option("--graph", h.graph_files, "Graph files (.dcmg or edge list) instead of generating");

  auto* theory = app.add_subcommand("theory", "Martingale-limit pools and the limiting hopcount CDF");
  add_common(theory, false);
  add_pool(theory);

  auto* compare = app.add_subcommand("compare", "Kolmogorov-Smirnov distance between measured and limiting law");
  add_common(compare, true);
  add_hop(compare);
  add_pool(compare);

  double delta = 0.6, gamma = 0.05, kappa = 1.0, eps = 0.1, k_const = 0.0;
  std::size_t k = 2, reps = 100;
  bool write_one_trace = false;
  auto* coupling = app.add_subcommand("coupling", "Failure frequency of the exploration/branching coupling");
  add_common(coupling, false);
  coupling->add_option("--delta", delta, "Window exponent: k <= (1 - delta) log n / log mu")->capture_default_str();
  coupling->add_option("--gamma", gamma, "Deficit exponent, below min(delta kappa, eps)")->capture_default_str();
  coupling->add_option("--k", k, "Generations to compare")->capture_default_str();
  coupling->add_option("--reps", reps, "Replicates")->capture_default_str();
  coupling->add_option("--kappa", kappa, "Moment exponent kappa in (0, 1]")->capture_default_str();
  coupling->add_option("--eps", eps, "Distance exponent epsilon")->capture_default_str();
  coupling->add_flag("--trace", write_one_trace, "Also write the trace of the first replicate");

  auto* check = app.add_subcommand("check", "Distance and joint-moment conditions for one sampled sequence");
  add_common(check, false);
  check->add_option("--kappa", kappa, "Moment exponent kappa in (0, 1]")->capture_default_str();
  check->add_option("--eps", eps, "Distance exponent epsilon")->capture_default_str();
  check->add_option("--K", k_const, "Moment constant; 0 = twice the limiting joint moment")->capture_default_str();

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const dcm::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  try {
    const fs::path out_dir = c.out;
    CLI::App* sub = app.get_subcommands().front();
    json sidecar = {{"command", sub->get_name()}, {"config", describe_run(sub)}};
    if (c.n < 2) throw dcm::ParameterOutOfRange("--n must be >= 2");
    fs::create_directories(out_dir);

    if (sub == gen) {
      const std::uint64_t seed = require_seed(c);
      const auto law = dcm::parse_law_spec(c.law);
      json graphs = json::array();
      for (std::size_t i = 0; i < c.graphs; ++i) {
        const auto seq = make_sequence(law, c, i);
        const auto g = dcm::pair_stubs(seq, graph_seed(seed, i, 1));
        char stem[32];
        std::snprintf(stem, sizeof stem, "%03zu", i);
        dcm::write_sequence_binary(seq, out_dir / ("seq_" + std::string(stem) + ".dcms"));
        dcm::write_graph_binary(g, out_dir / ("graph_" + std::string(stem) + ".dcmg"));
        if (seq_csv) dcm::write_sequence_csv(seq, out_dir / ("seq_" + std::string(stem) + ".csv"));
        if (edge_list) dcm::write_edge_list(g, out_dir / ("graph_" + std::string(stem) + ".txt"));
        const auto st = dcm::graph_stats(g);
        graphs.push_back({{"graph", i},
                          {"edges", g.num_edges()},
                          {"delta_before", seq.provenance.delta_before},
                          {"retries", seq.provenance.retries},
                          {"modified", seq.provenance.modified.size()},
                          {"self_loops", st.self_loops},
                          {"multi_edge_excess", st.multi_edge_excess}});
        log("graph " + std::to_string(i) + ": " + std::to_string(g.num_edges()) + " edges");
      }
      sidecar["law"] = dcm::law_to_json(law);
      sidecar["graphs"] = graphs;
      write_sidecar(out_dir / "gen.json", sidecar);
    } else if (sub == hop) {
      validate_hop(h);
      std::optional<dcm::JointDegreeLaw> law;
      if (h.graph_files.empty()) {
        require_seed(c);
        law = dcm::parse_law_spec(c.law);
      } else if (h.mode == "sampled") {
        require_seed(c);
      }
      json per_graph = json::array();
      const auto hist = measure(h, c, law, out_dir, per_graph);
      dcm::write_histogram(hist, out_dir / "hopcount.csv", {{"seed", c.seed.value_or(0)}, {"p", h.p},
                                                            {"t_max", h.t_max}});
      sidecar["graphs"] = per_graph;
      sidecar["finite_fraction"] = hist.finite_fraction();
      write_sidecar(out_dir / "hopcount_run.json", sidecar);
    } else if (sub == theory) {
      const std::uint64_t seed = require_seed(c);
      const auto law = dcm::parse_law_spec(c.law);
      json meta;
      const auto th = build_theory(law, c.n, p, seed, c.threads, out_dir, meta);
      const auto* reg = std::get_if<dcm::JointDegreeLaw::DRegular>(&law.kind());
      {
        auto os = dcm::io::open_out(out_dir / "theory_cdf.csv");
        os << std::setprecision(17) << "t,cdf,stderr" << (reg ? ",closed_form" : "") << '\n';
        for (int t = -dcm::kKsLattice; t <= dcm::kKsLattice; ++t) {
          os << t << ',' << dcm::theoretical_cdf(th, t) << ',' << dcm::theoretical_cdf_stderr(th, t);
          if (reg) os << ',' << dcm::dregular_cdf(reg->d, c.n, t);
          os << '\n';
        }
      }
      meta["shift"] = dcm::floor_log(static_cast<double>(c.n), law.mu());
      meta["positive_products"] = th.products.size();
      sidecar["theory"] = meta;
      write_sidecar(out_dir / "theory.json", sidecar);
    } else if (sub == compare) {
      validate_hop(h);
      const std::uint64_t seed = require_seed(c);
      const auto law = dcm::parse_law_spec(c.law);
      json meta;
      const auto th = build_theory(law, c.n, p, seed, c.threads, out_dir, meta);
      json per_graph = json::array();
      const auto hist = measure(h, c, law, out_dir, per_graph);
      const auto report = dcm::ks_distance(hist, th);
      meta["n"] = c.n;
      meta["graphs"] = per_graph;
      meta["finite_fraction"] = hist.finite_fraction();
      meta["seed"] = seed;
      dcm::write_comparison(report, out_dir / "compare.csv", meta);
      sidecar["ks"] = report.ks;
      sidecar["result"] = meta;
      write_sidecar(out_dir / "compare_run.json", sidecar);
      log("KS distance " + std::to_string(report.ks));
    } else if (sub == coupling) {
      const std::uint64_t seed = require_seed(c);
      const auto law = dcm::parse_law_spec(c.law);
      dcm::FailureOptions fo;
      fo.kappa = kappa;
      fo.eps = eps;
      fo.iid.delta = c.iid_delta;
      fo.iid.max_retries = c.max_retries;
      const auto rates = dcm::coupling_failure_rate(law, c.n, delta, gamma, k, reps, seed, fo);
      if (rates) {
        sidecar["freq_any_deficit_exceeds"] = rates->freq_any_deficit_exceeds;
        sidecar["freq_ratio_bound_fails"] = rates->freq_ratio_bound_fails;
      } else {
        sidecar["freq_any_deficit_exceeds"] = nullptr;
        sidecar["freq_ratio_bound_fails"] = nullptr;
      }
      sidecar["max_depth"] = dcm::max_coupling_depth(c.n, law.mu(), delta);
      if (write_one_trace && reps > 0) {
        // Replays replicate 0 of the failure-rate loop.
        const auto seq = dcm::sample_iid_bidegree(law, c.n, dcm::derive_seed(seed, 0), fo.iid);
        dcm::CouplingOptions co;
        co.record_steps = true;
        co.eps = eps;
        const auto trace = dcm::coupled_exploration(seq, dcm::GWSpec::from_joint(law, dcm::Direction::out),
                                                    dcm::Direction::out, k, dcm::derive_seed(seed, 1), co);
        dcm::write_trace(trace, out_dir / "trace.csv", {{"n", c.n}});
      }
      write_sidecar(out_dir / "coupling.json", sidecar);
    } else if (sub == check) {
      const std::uint64_t seed = require_seed(c);
      const auto law = dcm::parse_law_spec(c.law);
      dcm::IidOptions iid;
      iid.delta = c.iid_delta;
      iid.max_retries = c.max_retries;
      const auto seq = dcm::sample_iid_bidegree(law, c.n, seed, iid);
      const double K = k_const > 0 ? k_const : 2.0 * law.joint_moment(kappa);
      const auto rep = dcm::check_assumption(seq, law, eps, kappa, K);
      auto d1 = [](const dcm::Wasserstein1& w) {
        return json{{"value", w.value}, {"truncation_error", w.truncation_error}};
      };
      sidecar["report"] = {{"d1_g_plus", d1(rep.d1_g_plus)},   {"d1_g_minus", d1(rep.d1_g_minus)},
                           {"d1_f_plus", d1(rep.d1_f_plus)},   {"d1_f_minus", d1(rep.d1_f_minus)},
                           {"eps_threshold", rep.eps_threshold}, {"moment_sum", rep.moment_sum},
                           {"moment_bound", rep.moment_bound}, {"omega_n_holds", rep.omega_n_holds}};
      write_sidecar(out_dir / "check.json", sidecar);
      log(std::string("omega_n_holds = ") + (rep.omega_n_holds ? "true" : "false"));
    }
  } catch (const dcm::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const dcm::RuntimeFailure& e) {
    std::cerr << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
