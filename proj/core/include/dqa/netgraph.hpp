#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dqa/types.hpp"

namespace dqa::netgraph {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Edge = std::pair<int, int>;

// Undirected agent graph. Self-loops are not stored; the neighborhood of k
// always contains k itself.
class NetworkTopology {
 public:
  explicit NetworkTopology(int n_nodes);
  static NetworkTopology from_edges(int n_nodes, const std::vector<Edge>& edges,
                                    std::optional<std::vector<Point>> positions = std::nullopt);

  int size() const { return n_; }
  void add_edge(int a, int b);
  bool adjacent(int a, int b) const;

  // N_k = {k} u {l : l adjacent to k}, ascending.
  std::vector<int> neighborhood(int k) const;
  // n_k = |N_k|, counting k itself.
  int degree(int k) const;
  int max_degree() const;

  bool is_connected() const;
  std::vector<Edge> edges() const;  // a < b, lexicographic

  const std::optional<std::vector<Point>>& positions() const { return positions_; }
  void set_positions(std::vector<Point> positions);

 private:
  void check_node(int k) const;

  int n_;
  std::vector<char> adj_;
  std::optional<std::vector<Point>> positions_;
};

// Coefficients a_lk: column k holds the weights node k applies to the
// intermediate estimates of its neighbors.
class CombinationMatrix {
 public:
  explicit CombinationMatrix(RMatrix a);

  int size() const { return static_cast<int>(a_.rows()); }
  double operator()(int l, int k) const { return a_(l, k); }
  const RMatrix& matrix() const { return a_; }

 private:
  RMatrix a_;
};

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nodes uniform in the unit square, edge iff distance <= radius. Redraws
// until the graph is connected; throws TopologyError after max_attempts.
NetworkTopology random_geometric_topology(int n, double radius, std::uint64_t seed, int max_attempts = 1000);

CombinationMatrix metropolis_weights(const NetworkTopology& topology);

struct Violation {
  enum class Kind { kDimension, kWeightOutsideNeighborhood, kNonPositiveNeighborWeight, kColumnSum };
  Kind kind;
  int l = -1;  // row, or -1 when the violation concerns a whole column
  int k = -1;
  double value = 0.0;

  std::string describe() const;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_combination(const CombinationMatrix& a, const NetworkTopology& topology,
                                      double tol = 1e-12);

// A kron I_m.
RMatrix lift_combination(const CombinationMatrix& a, int m);

// Operator mapping stacked intermediate estimates H to stacked local
// estimates W in the ATC combine step, W = (A^T kron I_m) H.
RMatrix combine_operator(const CombinationMatrix& a, int m);

// Edge list CSV: header `node_a,node_b`, one undirected edge per row.
void write_edge_list_csv(std::ostream& os, const NetworkTopology& topology);
std::vector<Edge> read_edge_list_csv(std::istream& is);

// Node attribute CSV: header `node,x,y`.
void write_node_csv(std::ostream& os, const NetworkTopology& topology);
std::vector<Point> read_node_csv(std::istream& is);

NetworkTopology read_topology_csv(std::istream& edges, std::istream& nodes);

}  // namespace dqa::netgraph
