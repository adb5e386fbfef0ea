#include "dqa/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

#include "dqa/format.hpp"
#include "dqa/rng.hpp"

namespace dqa::netgraph {

NetworkTopology::NetworkTopology(int n_nodes) : n_(n_nodes) {
  if (n_nodes < 1) throw std::invalid_argument("topology needs at least one node");
  adj_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0);
}

NetworkTopology NetworkTopology::from_edges(int n_nodes, const std::vector<Edge>& edges,
                                            std::optional<std::vector<Point>> positions) {
  NetworkTopology t(n_nodes);
  for (const auto& [a, b] : edges) t.add_edge(a, b);
  if (positions) t.set_positions(std::move(*positions));
  return t;
}

void NetworkTopology::check_node(int k) const {
  if (k < 0 || k >= n_) {
    throw std::out_of_range("node index " + std::to_string(k) + " outside [0, " + std::to_string(n_) + ")");
  }
}

void NetworkTopology::add_edge(int a, int b) {
  check_node(a);
  check_node(b);
  if (a == b) throw std::invalid_argument("self-loops are implicit and cannot be added");
  adj_[static_cast<std::size_t>(a) * n_ + b] = 1;
  adj_[static_cast<std::size_t>(b) * n_ + a] = 1;
}

bool NetworkTopology::adjacent(int a, int b) const {
  check_node(a);
  check_node(b);
  return adj_[static_cast<std::size_t>(a) * n_ + b] != 0;
}

std::vector<int> NetworkTopology::neighborhood(int k) const {
  check_node(k);
  std::vector<int> out;
  for (int l = 0; l < n_; ++l) {
    if (l == k || adj_[static_cast<std::size_t>(l) * n_ + k]) out.push_back(l);
  }
  return out;
}

int NetworkTopology::degree(int k) const {
  check_node(k);
  int d = 1;
  for (int l = 0; l < n_; ++l) d += adj_[static_cast<std::size_t>(l) * n_ + k];
  return d;
}

int NetworkTopology::max_degree() const {
  int best = 0;
  for (int k = 0; k < n_; ++k) best = std::max(best, degree(k));
  return best;
}

bool NetworkTopology::is_connected() const {
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v = 0; v < n_; ++v) {
      if (adj_[static_cast<std::size_t>(u) * n_ + v] && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n_;
}

std::vector<Edge> NetworkTopology::edges() const {
  std::vector<Edge> out;
  for (int a = 0; a < n_; ++a) {
    for (int b = a + 1; b < n_; ++b) {
      if (adj_[static_cast<std::size_t>(a) * n_ + b]) out.emplace_back(a, b);
    }
  }
  return out;
}

void NetworkTopology::set_positions(std::vector<Point> positions) {
  if (static_cast<int>(positions.size()) != n_) {
    throw std::invalid_argument("position count does not match node count");
  }
  positions_ = std::move(positions);
}

CombinationMatrix::CombinationMatrix(RMatrix a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols() || a_.rows() == 0) {
    throw std::invalid_argument("combination matrix must be square and non-empty");
  }
}

NetworkTopology random_geometric_topology(int n, double radius, std::uint64_t seed, int max_attempts) {
  if (n < 1) throw std::invalid_argument("random_geometric_topology: n must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("random_geometric_topology: radius must be > 0");
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(Stream::kTopology)}));
  const double r2 = radius * radius;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<Point> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) {
      p.x = rng.uniform();
      p.y = rng.uniform();
    }
    NetworkTopology t(n);
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        const double dx = pts[a].x - pts[b].x;
        const double dy = pts[a].y - pts[b].y;
        if (dx * dx + dy * dy <= r2) t.add_edge(a, b);
      }
    }
    if (t.is_connected()) {
      t.set_positions(std::move(pts));
      return t;
    }
  }
  throw TopologyError("no connected geometric graph with n=" + std::to_string(n) +
                      " radius=" + format_double(radius) + " after " + std::to_string(max_attempts) +
                      " attempts");
}

CombinationMatrix metropolis_weights(const NetworkTopology& topology) {
  const int n = topology.size();
  RMatrix a = RMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double off = 0.0;
    for (int l : topology.neighborhood(k)) {
      if (l == k) continue;
      a(l, k) = 1.0 / std::max(topology.degree(k), topology.degree(l));
      off += a(l, k);
    }
    a(k, k) = 1.0 - off;
  }
  return CombinationMatrix(std::move(a));
}

std::string Violation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kDimension:
      os << "dimension mismatch: matrix is " << l << "x" << l << ", topology has " << k << " nodes";
      break;
    case Kind::kWeightOutsideNeighborhood:
      os << "a(" << l << "," << k << ") = " << format_double(value) << " but " << l
         << " is not a neighbor of " << k;
      break;
    case Kind::kNonPositiveNeighborWeight:
      os << "a(" << l << "," << k << ") = " << format_double(value) << " must be > 0 for a neighbor";
      break;
    case Kind::kColumnSum:
      os << "column " << k << " sums to " << format_double(value) << ", expected 1";
      break;
  }
  return os.str();
}

ValidationReport validate_combination(const CombinationMatrix& a, const NetworkTopology& topology, double tol) {
  ValidationReport report;
  const int n = topology.size();
  if (a.size() != n) {
    report.violations.push_back({Violation::Kind::kDimension, a.size(), n, 0.0});
    return report;
  }
  for (int k = 0; k < n; ++k) {
    double sum = 0.0;
    for (int l = 0; l < n; ++l) {
      const double v = a(l, k);
      const bool neighbor = l == k || topology.adjacent(l, k);
      if (!neighbor && v != 0.0) {
        report.violations.push_back({Violation::Kind::kWeightOutsideNeighborhood, l, k, v});
      } else if (neighbor && !(v > 0.0)) {
        report.violations.push_back({Violation::Kind::kNonPositiveNeighborWeight, l, k, v});
      }
      sum += v;
    }
    if (!(std::abs(sum - 1.0) <= tol)) {
      report.violations.push_back({Violation::Kind::kColumnSum, -1, k, sum});
    }
  }
  return report;
}

RMatrix lift_combination(const CombinationMatrix& a, int m) {
  if (m < 1) throw std::invalid_argument("lift_combination: m must be >= 1");
  const int n = a.size();
  RMatrix c = RMatrix::Zero(static_cast<Eigen::Index>(n) * m, static_cast<Eigen::Index>(n) * m);
  for (int r = 0; r < n; ++r) {
    for (int s = 0; s < n; ++s) {
      const double v = a(r, s);
      if (v == 0.0) continue;
      for (int i = 0; i < m; ++i) c(r * m + i, s * m + i) = v;
    }
  }
  return c;
}

RMatrix combine_operator(const CombinationMatrix& a, int m) {
  return lift_combination(CombinationMatrix(a.matrix().transpose()), m);
}

void write_edge_list_csv(std::ostream& os, const NetworkTopology& topology) {
  os << "node_a,node_b\n";
  for (const auto& [a, b] : topology.edges()) os << a << ',' << b << '\n';
}

namespace {

int parse_index(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": bad node index '" + s + "'");
  }
}

}  // namespace

std::vector<Edge> read_edge_list_csv(std::istream& is) {
  std::vector<Edge> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    if (line_no == 1 && f.size() == 2 && f[0] == "node_a") continue;
    if (f.size() != 2) throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 2 fields");
    edges.emplace_back(parse_index(f[0], line_no), parse_index(f[1], line_no));
  }
  return edges;
}

void write_node_csv(std::ostream& os, const NetworkTopology& topology) {
  os << "node,x,y\n";
  for (int k = 0; k < topology.size(); ++k) {
    const Point p = topology.positions() ? (*topology.positions())[static_cast<std::size_t>(k)] : Point{};
    os << k << ',' << format_double(p.x) << ',' << format_double(p.y) << '\n';
  }
}

std::vector<Point> read_node_csv(std::istream& is) {
  std::vector<std::pair<int, Point>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    if (line_no == 1 && f.size() == 3 && f[0] == "node") continue;
    if (f.size() != 3) throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 3 fields");
    rows.push_back({parse_index(f[0], line_no), Point{parse_double(f[1]), parse_double(f[2])}});
  }
  std::vector<Point> pts(rows.size());
  std::vector<char> filled(rows.size(), 0);
  for (const auto& [k, p] : rows) {
    if (k < 0 || k >= static_cast<int>(rows.size()) || filled[static_cast<std::size_t>(k)]) {
      throw std::invalid_argument("node attribute CSV must list each node 0..N-1 exactly once");
    }
    pts[static_cast<std::size_t>(k)] = p;
    filled[static_cast<std::size_t>(k)] = 1;
  }
  return pts;
}

NetworkTopology read_topology_csv(std::istream& edges, std::istream& nodes) {
  auto pts = read_node_csv(nodes);
  const int n = static_cast<int>(pts.size());
  return NetworkTopology::from_edges(n, read_edge_list_csv(edges), std::move(pts));
}

}  // namespace dqa::netgraph
