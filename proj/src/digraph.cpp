#include "dcm/digraph.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <string>

#include "dcm/errors.hpp"
#include "dcm/io.hpp"

namespace dcm {

Digraph Digraph::from_edges(std::size_t n, std::span<const Edge> edges, bool is_multigraph) {
  if (n > std::numeric_limits<NodeId>::max()) throw ValidationError("too many nodes for 32-bit ids");
  Digraph g;
  g.n_ = n;
  g.multigraph_ = is_multigraph;
  g.out_offsets_.assign(n + 1, 0);
  for (const auto& e : edges) {
    if (e.src >= n || e.dst >= n) throw NodeOutOfRange("edge endpoint outside [0, n)");
    ++g.out_offsets_[e.src + 1];
  }
  for (std::size_t u = 0; u < n; ++u) g.out_offsets_[u + 1] += g.out_offsets_[u];
  g.out_targets_.resize(edges.size());
  std::vector<std::uint64_t> cursor(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
  for (const auto& e : edges) g.out_targets_[cursor[e.src]++] = e.dst;
  g.build_reverse();
  return g;
}

void Digraph::build_reverse() {
  in_offsets_.assign(n_ + 1, 0);
  for (auto v : out_targets_) ++in_offsets_[v + 1];
  for (std::size_t v = 0; v < n_; ++v) in_offsets_[v + 1] += in_offsets_[v];
  in_sources_.resize(out_targets_.size());
  std::vector<std::uint64_t> cursor(in_offsets_.begin(), in_offsets_.end() - 1);
  for (std::size_t u = 0; u < n_; ++u)
    for (auto k = out_offsets_[u]; k < out_offsets_[u + 1]; ++k)
      in_sources_[cursor[out_targets_[k]]++] = static_cast<NodeId>(u);
}

std::vector<Edge> Digraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (std::size_t u = 0; u < n_; ++u)
    for (auto v : out_neighbors(static_cast<NodeId>(u))) out.push_back({static_cast<NodeId>(u), v});
  return out;
}

Digraph pair_stubs(const BiDegreeSequence& seq, std::uint64_t seed) {
  const std::size_t n = seq.size();
  if (n > std::numeric_limits<NodeId>::max()) throw ValidationError("too many nodes for 32-bit ids");

  // In-stub owners, shuffled; positional matching against out-stubs in owner
  // order makes the shuffled array the out-adjacency directly.
  std::vector<NodeId> in_owner;
  in_owner.reserve(seq.total);
  for (std::size_t v = 0; v < n; ++v) in_owner.insert(in_owner.end(), seq.d_minus[v], static_cast<NodeId>(v));

  Rng rng(seed);
  for (std::size_t i = in_owner.size(); i > 1; --i) std::swap(in_owner[i - 1], in_owner[rng.below(i)]);

  Digraph g;
  g.n_ = n;
  g.multigraph_ = true;
  g.out_offsets_.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) g.out_offsets_[u + 1] = g.out_offsets_[u] + seq.d_plus[u];
  g.out_targets_ = std::move(in_owner);
  g.build_reverse();
  return g;
}

Digraph erase(const Digraph& g) {
  std::vector<Edge> kept;
  kept.reserve(g.num_edges());
  std::vector<NodeId> scratch;
  for (std::size_t u = 0; u < g.num_nodes(); ++u) {
    const auto nb = g.out_neighbors(static_cast<NodeId>(u));
    scratch.assign(nb.begin(), nb.end());
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    for (auto v : scratch)
      if (v != u) kept.push_back({static_cast<NodeId>(u), v});
  }
  return Digraph::from_edges(g.num_nodes(), kept, false);
}

GraphStats graph_stats(const Digraph& g) {
  GraphStats s;
  std::vector<NodeId> scratch;
  std::uint64_t distinct = 0;
  for (std::size_t u = 0; u < g.num_nodes(); ++u) {
    const auto nb = g.out_neighbors(static_cast<NodeId>(u));
    scratch.assign(nb.begin(), nb.end());
    std::sort(scratch.begin(), scratch.end());
    for (std::size_t i = 0; i < scratch.size(); ++i) {
      if (scratch[i] == u) ++s.self_loops;
      if (i == 0 || scratch[i] != scratch[i - 1]) ++distinct;
    }
    s.max_out_degree = std::max<std::uint64_t>(s.max_out_degree, nb.size());
    s.max_in_degree = std::max<std::uint64_t>(s.max_in_degree, g.in_degree(static_cast<NodeId>(u)));
  }
  s.multi_edge_excess = g.num_edges() - distinct;
  return s;
}

void write_graph_binary(const Digraph& g, const std::filesystem::path& path) {
  auto os = io::open_out(path, true);
  io::write_header(os, "DCMG", 1);
  io::write_u64(os, g.num_nodes());
  io::write_u64(os, g.num_edges());
  for (std::size_t u = 0; u < g.num_nodes(); ++u) {
    for (auto v : g.out_neighbors(static_cast<NodeId>(u))) {
      io::write_u32(os, static_cast<std::uint32_t>(u));
      io::write_u32(os, v);
    }
  }
  if (!os) throw RuntimeFailure("write failed: " + path.string());
}

Digraph read_graph_binary(const std::filesystem::path& path) {
  auto is = io::open_in(path, true);
  const auto version = io::read_header(is, "DCMG");
  if (version != 1) throw FormatError("unsupported DCMG version " + std::to_string(version));
  const auto n = io::read_u64(is);
  const auto m = io::read_u64(is);
  std::vector<Edge> edges(m);
  for (auto& e : edges) {
    e.src = io::read_u32(is);
    e.dst = io::read_u32(is);
  }
  return Digraph::from_edges(n, edges);
}

void write_edge_list(const Digraph& g, const std::filesystem::path& path) {
  auto os = io::open_out(path);
  os << "# nodes " << g.num_nodes() << '\n';
  for (std::size_t u = 0; u < g.num_nodes(); ++u)
    for (auto v : g.out_neighbors(static_cast<NodeId>(u))) os << u << ' ' << v << '\n';
}

Digraph read_edge_list(const std::filesystem::path& path) {
  auto is = io::open_in(path);
  std::vector<Edge> edges;
  std::size_t n = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string word;
      std::size_t declared = 0;
      if (hs >> word >> declared && word == "nodes") n = std::max(n, declared);
      continue;
    }
    std::istringstream ls(line);
    std::uint64_t a = 0, b = 0;
    if (!(ls >> a >> b)) throw FormatError("bad edge line: '" + line + "'");
    if (a > std::numeric_limits<NodeId>::max() || b > std::numeric_limits<NodeId>::max())
      throw FormatError("node id too large: '" + line + "'");
    edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
    n = std::max<std::size_t>(n, std::max(a, b) + 1);
  }
  return Digraph::from_edges(n, edges);
}

}  // namespace dcm
