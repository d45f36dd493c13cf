#include "dcm/hopcount.hpp"

#include <algorithm>
#include <cstring>
#include <iomanip>

#include "dcm/errors.hpp"
#include "dcm/hll.hpp"
#include "dcm/io.hpp"
#include "dcm/parallel.hpp"
#include "dcm/rng.hpp"

namespace dcm {

BidirectionalBfs::BidirectionalBfs(const Digraph& g)
    : g_(&g),
      dist_f_(g.num_nodes()),
      dist_b_(g.num_nodes()),
      seen_f_(g.num_nodes(), 0),
      seen_b_(g.num_nodes(), 0) {}

void BidirectionalBfs::bump_epoch() {
  if (++epoch_ == 0) {
    std::fill(seen_f_.begin(), seen_f_.end(), 0);
    std::fill(seen_b_.begin(), seen_b_.end(), 0);
    epoch_ = 1;
  }
}

std::uint32_t BidirectionalBfs::distance(NodeId source, NodeId target) {
  const auto& g = *g_;
  if (source >= g.num_nodes() || target >= g.num_nodes()) throw NodeOutOfRange("node id outside [0, n)");
  if (source == target) return 0;
  bump_epoch();
  seen_f_[source] = epoch_;
  dist_f_[source] = 0;
  seen_b_[target] = epoch_;
  dist_b_[target] = 0;
  front_f_.assign(1, source);
  front_b_.assign(1, target);
  std::uint64_t work_f = g.out_degree(source), work_b = g.in_degree(target);
  std::uint32_t depth_f = 0, depth_b = 0;

  // Every shortest path has length > depth_f + depth_b until the sides meet,
  // so the first completed level with a meeting yields the exact distance.
  while (!front_f_.empty() && !front_b_.empty()) {
    std::uint32_t best = kUnreachable;
    next_.clear();
    if (work_f <= work_b) {
      std::uint64_t work = 0;
      for (NodeId u : front_f_) {
        for (NodeId v : g.out_neighbors(u)) {
          if (seen_f_[v] == epoch_) continue;
          seen_f_[v] = epoch_;
          dist_f_[v] = depth_f + 1;
          if (seen_b_[v] == epoch_) best = std::min(best, depth_f + 1 + dist_b_[v]);
          next_.push_back(v);
          work += g.out_degree(v);
        }
      }
      ++depth_f;
      front_f_.swap(next_);
      work_f = work;
    } else {
      std::uint64_t work = 0;
      for (NodeId u : front_b_) {
        for (NodeId v : g.in_neighbors(u)) {
          if (seen_b_[v] == epoch_) continue;
          seen_b_[v] = epoch_;
          dist_b_[v] = depth_b + 1;
          if (seen_f_[v] == epoch_) best = std::min(best, depth_b + 1 + dist_f_[v]);
          next_.push_back(v);
          work += g.in_degree(v);
        }
      }
      ++depth_b;
      front_b_.swap(next_);
      work_b = work;
    }
    if (best != kUnreachable) return best;
  }
  return kUnreachable;
}

std::uint32_t bfs_distance(const Digraph& g, NodeId source, NodeId target) {
  return BidirectionalBfs(g).distance(source, target);
}

std::vector<std::uint32_t> bfs_all(const Digraph& g, NodeId source) {
  if (source >= g.num_nodes()) throw NodeOutOfRange("node id outside [0, n)");
  std::vector<std::uint32_t> dist(g.num_nodes(), kUnreachable);
  std::vector<NodeId> queue;
  queue.reserve(g.num_nodes());
  dist[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    for (NodeId v : g.out_neighbors(u)) {
      if (dist[v] != kUnreachable) continue;
      dist[v] = dist[u] + 1;
      queue.push_back(v);
    }
  }
  return dist;
}

std::string to_string(HopcountMode mode) {
  switch (mode) {
    case HopcountMode::exact_all_pairs: return "exact_all_pairs";
    case HopcountMode::sampled_pairs: return "sampled_pairs";
    case HopcountMode::hll_estimate: return "hll_estimate";
  }
  return "unknown";
}

void HopcountHistogram::accumulate(const HopcountHistogram& other) {
  if (counts.size() < other.counts.size()) counts.resize(other.counts.size(), 0.0);
  for (std::size_t t = 0; t < other.counts.size(); ++t) counts[t] += other.counts[t];
  finite_pairs += other.finite_pairs;
  total_pairs += other.total_pairs;
}

std::vector<double> HopcountHistogram::conditional_pmf() const {
  std::vector<double> pmf(counts.size(), 0.0);
  if (finite_pairs <= 0) return pmf;
  for (std::size_t t = 0; t < counts.size(); ++t) pmf[t] = counts[t] / finite_pairs;
  return pmf;
}

namespace {

void add_count(std::vector<double>& counts, std::uint32_t d, double amount = 1.0) {
  if (counts.size() <= d) counts.resize(d + 1, 0.0);
  counts[d] += amount;
}

HopcountHistogram merge_partials(std::vector<HopcountHistogram>& parts, HopcountMode mode) {
  HopcountHistogram h;
  h.mode = mode;
  for (const auto& p : parts) h.accumulate(p);
  if (h.counts.empty()) h.counts.assign(1, 0.0);
  return h;
}

}  // namespace

HopcountHistogram exact_all_pairs(const Digraph& g, unsigned threads) {
  const std::size_t n = g.num_nodes();
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<HopcountHistogram> parts(worker_count(chunks, threads));
  parallel_chunks(chunks, threads, [&](std::size_t c, unsigned w) {
    auto& part = parts[w];
    for (std::size_t s = c * kChunk; s < std::min(n, (c + 1) * kChunk); ++s) {
      const auto dist = bfs_all(g, static_cast<NodeId>(s));
      for (std::size_t v = 0; v < n; ++v) {
        if (v == s || dist[v] == kUnreachable) continue;
        add_count(part.counts, dist[v]);
        part.finite_pairs += 1.0;
      }
    }
  });
  auto h = merge_partials(parts, HopcountMode::exact_all_pairs);
  h.total_pairs = static_cast<double>(n) * static_cast<double>(n > 0 ? n - 1 : 0);
  return h;
}

HopcountHistogram sample_hopcounts(const Digraph& g, std::size_t num_pairs, std::uint64_t seed,
                                   unsigned threads) {
  const std::size_t n = g.num_nodes();
  if (n < 2) throw ParameterOutOfRange("need at least two nodes to sample pairs");
  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (num_pairs + kChunk - 1) / kChunk;
  const unsigned workers = worker_count(chunks, threads);
  std::vector<HopcountHistogram> parts(workers);
  std::vector<BidirectionalBfs> searches;
  searches.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) searches.emplace_back(g);
  parallel_chunks(chunks, threads, [&](std::size_t c, unsigned w) {
    Rng rng(derive_seed(seed, c));
    auto& part = parts[w];
    for (std::size_t k = c * kChunk; k < std::min(num_pairs, (c + 1) * kChunk); ++k) {
      const auto i = static_cast<NodeId>(rng.below(n));
      auto j = static_cast<NodeId>(rng.below(n - 1));
      if (j >= i) ++j;
      const auto d = searches[w].distance(i, j);
      if (d == kUnreachable) continue;
      add_count(part.counts, d);
      part.finite_pairs += 1.0;
    }
  });
  auto h = merge_partials(parts, HopcountMode::sampled_pairs);
  h.total_pairs = static_cast<double>(num_pairs);
  return h;
}

std::vector<double> NeighborhoodFunction::at_least() const {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const double total = values.back();
  for (std::size_t t = 1; t <= values.size(); ++t) out[t - 1] = total - (t >= 2 ? values[t - 2] : 0.0);
  return out;
}

namespace {

NeighborhoodFunction nf_exact(const Digraph& g, const NeighborhoodOptions& opt) {
  const auto h = exact_all_pairs(g, opt.threads);
  NeighborhoodFunction nf;
  nf.options = opt;
  nf.values.assign(opt.t_max, 0.0);
  double running = 0.0;
  for (std::size_t t = 1; t <= opt.t_max; ++t) {
    if (t < h.counts.size()) running += h.counts[t];
    nf.values[t - 1] = running;
  }
  const std::size_t diameter = h.counts.size() - 1;
  nf.stabilized_at = diameter <= opt.t_max ? std::max<std::size_t>(diameter, 1) : 0;
  return nf;
}

// Synchronous rounds: ball_{t+1}(u) = ball_t(u) united with ball_t(v) over
// out-neighbours v, so the counter of u tracks the nodes reachable from u.
NeighborhoodFunction nf_hll(const Digraph& g, const NeighborhoodOptions& opt) {
  const std::size_t n = g.num_nodes();
  const unsigned p = opt.precision;
  if (p < hll::kMinPrecision || p > hll::kMaxPrecision) throw ParameterOutOfRange("HLL precision must lie in [4, 16]");
  const std::size_t m = std::size_t{1} << p;
  NeighborhoodFunction nf;
  nf.options = opt;
  nf.values.assign(opt.t_max, 0.0);
  if (n == 0) return nf;

  std::vector<std::uint8_t> cur(n * m, 0), next;
  const std::uint64_t salt = mix64(opt.salt);
  for (std::size_t u = 0; u < n; ++u) {
    const auto [index, rank] = hll::locate(mix64(u ^ salt), p);
    cur[u * m + index] = rank;
  }
  std::vector<double> est(n), base(n);
  for (std::size_t u = 0; u < n; ++u) base[u] = est[u] = hll::estimate({cur.data() + u * m, m}, p);
  std::vector<char> changed(n, 1), next_changed(n);

  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::size_t t = 1;
  for (; t <= opt.t_max; ++t) {
    next = cur;
    parallel_chunks(chunks, opt.threads, [&](std::size_t c) {
      for (std::size_t u = c * kChunk; u < std::min(n, (c + 1) * kChunk); ++u) {
        bool any = false;
        std::span<std::uint8_t> dst{next.data() + u * m, m};
        for (NodeId v : g.out_neighbors(static_cast<NodeId>(u)))
          if (changed[v] && hll::merge_into(dst, {cur.data() + std::size_t{v} * m, m})) any = true;
        next_changed[u] = any;
        if (any) est[u] = hll::estimate(dst, p);
      }
    });
    long double total = 0;
    for (std::size_t u = 0; u < n; ++u) total += est[u] - base[u];
    nf.values[t - 1] = static_cast<double>(total);
    cur.swap(next);
    changed.swap(next_changed);
    if (std::none_of(changed.begin(), changed.end(), [](char c) { return c != 0; })) break;
  }
  if (t <= opt.t_max) {
    nf.stabilized_at = std::max<std::size_t>(t - 1, 1);
    for (std::size_t r = t + 1; r <= opt.t_max; ++r) nf.values[r - 1] = nf.values[t - 1];
  }
  return nf;
}

}  // namespace

NeighborhoodFunction neighborhood_function(const Digraph& g, const NeighborhoodOptions& options) {
  if (options.t_max < 1) throw ParameterOutOfRange("t_max must be >= 1");
  return options.mode == NeighborhoodOptions::Mode::exact ? nf_exact(g, options) : nf_hll(g, options);
}

HopcountHistogram hopcount_pmf_from_nf(std::span<const double> within, HopcountMode mode) {
  HopcountHistogram h;
  h.mode = mode;
  h.counts.assign(1, 0.0);
  double prev = 0.0;
  for (std::size_t i = 0; i < within.size(); ++i) {
    if (within[i] < prev) throw NonMonotoneInput("N(" + std::to_string(i + 1) + ") < N(" + std::to_string(i) + ")");
    h.counts.push_back(within[i] - prev);
    prev = within[i];
  }
  while (h.counts.size() > 1 && h.counts.back() == 0.0) h.counts.pop_back();
  h.finite_pairs = prev;
  h.total_pairs = prev;
  return h;
}

void write_histogram(const HopcountHistogram& h, const std::filesystem::path& path, nlohmann::json meta) {
  {
    auto os = io::open_out(path);
    os << std::setprecision(17) << "t,count\n";
    for (std::size_t t = 1; t < h.counts.size(); ++t) os << t << ',' << h.counts[t] << '\n';
  }
  meta["mode"] = to_string(h.mode);
  meta["finite_pairs"] = h.finite_pairs;
  meta["total_pairs"] = h.total_pairs;
  io::open_out(std::filesystem::path(path).replace_extension(".json")) << meta.dump(2) << '\n';
}

void write_neighborhood(const NeighborhoodFunction& nf, const std::filesystem::path& path, nlohmann::json meta) {
  const auto ge = nf.at_least();
  {
    auto os = io::open_out(path);
    os << std::setprecision(17) << "t,within,at_least\n";
    for (std::size_t t = 1; t <= nf.values.size(); ++t) os << t << ',' << nf.values[t - 1] << ',' << ge[t - 1] << '\n';
  }
  const bool hll_mode = nf.options.mode == NeighborhoodOptions::Mode::hll;
  meta["mode"] = hll_mode ? "hll_estimate" : "exact_all_pairs";
  if (hll_mode) meta["p"] = nf.options.precision;
  meta["t_max"] = nf.options.t_max;
  meta["stabilized_at"] = nf.stabilized_at;
  meta["finite_pairs"] = nf.values.empty() ? 0.0 : nf.values.back();
  io::open_out(std::filesystem::path(path).replace_extension(".json")) << meta.dump(2) << '\n';
}

}  // namespace dcm
