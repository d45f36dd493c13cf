#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "dcm/digraph.hpp"
#include "dcm/errors.hpp"
#include "dcm/law_config.hpp"

using namespace dcm;

namespace {

std::vector<NodeId> flat_targets(const Digraph& g) {
  std::vector<NodeId> v;
  for (NodeId u = 0; u < g.num_nodes(); ++u)
    for (NodeId x : g.out_neighbors(u)) v.push_back(x);
  return v;
}

// Pearson statistic of observed counts against equal expected frequencies.
double chi_square_uniform(const std::map<std::vector<NodeId>, int>& counts, std::size_t cells, int trials) {
  const double expected = static_cast<double>(trials) / cells;
  double stat = 0;
  for (const auto& [_, c] : counts) stat += (c - expected) * (c - expected) / expected;
  stat += (cells - counts.size()) * expected;
  return stat;
}

}  // namespace

TEST_CASE("pairing is uniform over stub matchings") {
  // Distinct in-owners: all 3! arrangements equally likely.
  auto seq = BiDegreeSequence::from_degrees({1, 1, 1}, {2, 1, 0});
  std::map<std::vector<NodeId>, int> counts;
  const int trials = 60000;
  for (int i = 0; i < trials; ++i) ++counts[flat_targets(pair_stubs(seq, derive_seed(5, i)))];
  CHECK(counts.size() == 6);
  CHECK(chi_square_uniform(counts, 6, trials) < 20.5);  // 5 df, p ~ 0.001

  // Repeated owner: the 3 distinct owner words each carry 2 of the 6 matchings.
  seq = BiDegreeSequence::from_degrees({2, 1, 0}, {1, 1, 1});
  counts.clear();
  for (int i = 0; i < trials; ++i) ++counts[flat_targets(pair_stubs(seq, derive_seed(6, i)))];
  CHECK(counts.size() == 3);
  CHECK(chi_square_uniform(counts, 3, trials) < 13.8);  // 2 df
}

TEST_CASE("pairing preserves degrees") {
  for (const char* spec : {"pp-indep:1.5,1", "zipf-equal:3.5,1000", "dregular:3"}) {
    const auto seq = sample_iid_bidegree(parse_law_spec(spec), 3000, 9);
    const auto g = pair_stubs(seq, 10);
    CHECK(g.num_edges() == seq.total);
    bool ok = true;
    for (NodeId u = 0; u < g.num_nodes(); ++u)
      ok = ok && g.out_degree(u) == seq.d_plus[u] && g.in_degree(u) == seq.d_minus[u];
    CHECK(ok);
    std::uint64_t reverse_edges = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
      for (NodeId u : g.in_neighbors(v)) {
        const auto outs = g.out_neighbors(u);
        reverse_edges += std::count(outs.begin(), outs.end(), v) > 0;
      }
    CHECK(reverse_edges == seq.total);
  }
}

TEST_CASE("pairing is reproducible from the seed") {
  const auto seq = sample_iid_bidegree(parse_law_spec("pp-indep:1.5,1"), 2000, 1);
  CHECK(pair_stubs(seq, 4).edges() == pair_stubs(seq, 4).edges());
  CHECK(pair_stubs(seq, 4).edges() != pair_stubs(seq, 5).edges());
}

TEST_CASE("erased graph is simple") {
  const std::vector<Edge> edges{{0, 0}, {0, 1}, {0, 1}, {1, 2}, {2, 0}, {2, 0}, {2, 2}};
  const auto g = Digraph::from_edges(3, edges);
  const auto s = graph_stats(g);
  CHECK(s.self_loops == 2);
  CHECK(s.multi_edge_excess == 2);
  const auto e = erase(g);
  CHECK(e.num_edges() == 3);
  CHECK_FALSE(e.is_multigraph());
  const auto es = graph_stats(e);
  CHECK(es.self_loops == 0);
  CHECK(es.multi_edge_excess == 0);
}

TEST_CASE("graph files round-trip") {
  const auto seq = sample_iid_bidegree(parse_law_spec("geom-indep:0.3"), 400, 2);
  const auto g = pair_stubs(seq, 3);
  const auto dir = std::filesystem::temp_directory_path();
  write_graph_binary(g, dir / "dcm_unit.dcmg");
  write_edge_list(g, dir / "dcm_unit.txt");
  const auto a = read_graph_binary(dir / "dcm_unit.dcmg");
  const auto b = read_edge_list(dir / "dcm_unit.txt");
  CHECK(a.num_nodes() == g.num_nodes());
  CHECK(b.num_nodes() == g.num_nodes());
  CHECK(a.edges() == g.edges());
  CHECK(b.edges() == g.edges());
  std::filesystem::remove(dir / "dcm_unit.dcmg");
  std::filesystem::remove(dir / "dcm_unit.txt");
}

TEST_CASE("bad graph files are rejected") {
  const auto path = std::filesystem::temp_directory_path() / "dcm_unit_bad.dcmg";
  { std::ofstream(path) << "nope"; }
  CHECK_THROWS_AS(read_graph_binary(path), FormatError);
  std::filesystem::remove(path);
}
