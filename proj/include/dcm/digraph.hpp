#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dcm/degree_sequences.hpp"

namespace dcm {

using NodeId = std::uint32_t;

struct Edge {
  NodeId src;
  NodeId dst;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable directed multigraph in offset/target form with an eagerly built
/// reverse adjacency. Node ids are dense in [0, n).
class Digraph {
 public:
  Digraph() = default;

  /// Edges are stored in the given order per source node.
  static Digraph from_edges(std::size_t n, std::span<const Edge> edges, bool is_multigraph = true);

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return out_targets_.size(); }
  bool is_multigraph() const { return multigraph_; }

  std::span<const NodeId> out_neighbors(NodeId u) const {
    return {out_targets_.data() + out_offsets_[u], out_targets_.data() + out_offsets_[u + 1]};
  }
  std::span<const NodeId> in_neighbors(NodeId v) const {
    return {in_sources_.data() + in_offsets_[v], in_sources_.data() + in_offsets_[v + 1]};
  }
  std::size_t out_degree(NodeId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }
  std::size_t in_degree(NodeId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }

  std::vector<Edge> edges() const;

 private:
  friend Digraph pair_stubs(const BiDegreeSequence&, std::uint64_t);
  void build_reverse();

  std::size_t n_ = 0;
  std::vector<std::uint64_t> out_offsets_{0};
  std::vector<NodeId> out_targets_;
  std::vector<std::uint64_t> in_offsets_{0};
  std::vector<NodeId> in_sources_;
  bool multigraph_ = true;
};

/// Directed configuration model: out-stub j (grouped by owner) is matched
/// with position j of a uniformly shuffled array of in-stub owners.
Digraph pair_stubs(const BiDegreeSequence& seq, std::uint64_t seed);

/// Erased model: drops self-loops and merges parallel edges.
Digraph erase(const Digraph& g);

struct GraphStats {
  std::uint64_t self_loops = 0;
  std::uint64_t multi_edge_excess = 0;  ///< edges minus distinct ordered pairs
  std::uint64_t max_in_degree = 0;
  std::uint64_t max_out_degree = 0;
};

GraphStats graph_stats(const Digraph& g);

// "DCMG" binary: magic, u32 version, u64 n, u64 m, m x (u32 src, u32 dst).
void write_graph_binary(const Digraph& g, const std::filesystem::path& path);
Digraph read_graph_binary(const std::filesystem::path& path);
// Plain edge list: optional "# nodes N" line, then "src dst" per line.
void write_edge_list(const Digraph& g, const std::filesystem::path& path);
Digraph read_edge_list(const std::filesystem::path& path);

}  // namespace dcm
