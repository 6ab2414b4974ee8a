#pragma once

// Extended (lag-node) and compact causal graphs built from a coefficient set.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stn/error.hpp"
#include "stn/model.hpp"
#include "stn/panel.hpp"

namespace stn {

enum class GraphKind { Extended, Compact };

inline const char* to_string(GraphKind k) { return k == GraphKind::Extended ? "extended" : "compact"; }

inline constexpr const char* kLagSuffix = "-L1";

struct StnNode {
  std::size_t variable_index = 0;
  int lag = 0;  // 0 or 1
  std::string label;

  friend bool operator==(const StnNode&, const StnNode&) = default;
};

using Edge = std::pair<std::size_t, std::size_t>;  // (source node, target node)

/**
 * @brief Directed graph over STN nodes. adjacency(i, j) is 1 iff edge i -> j.
 *
 * Extended graphs list the p contemporaneous nodes first, then their p lag-1
 * copies in the same order. Compact graphs hold just the p variables.
 */
class StnGraph {
 public:
  StnGraph(GraphKind kind, std::vector<StnNode> nodes, std::set<Edge> edges)
      : kind_(kind), nodes_(std::move(nodes)), edges_(std::move(edges)) {
    const auto n = nodes_.size();
    adjacency_ = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (const auto& [s, t] : edges_) {
      if (s >= n || t >= n) throw DimensionError("edge references a node outside the graph");
      if (kind_ == GraphKind::Extended && nodes_[t].lag != 0)
        throw ConfigError("extended graph edge targets a lagged node");
      adjacency_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = 1;
    }
  }

  GraphKind kind() const noexcept { return kind_; }
  const std::vector<StnNode>& nodes() const noexcept { return nodes_; }
  const std::set<Edge>& edges() const noexcept { return edges_; }
  const Eigen::MatrixXi& adjacency() const noexcept { return adjacency_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool has_edge(std::size_t s, std::size_t t) const { return edges_.count({s, t}) != 0; }

  friend bool operator==(const StnGraph& a, const StnGraph& b) {
    return a.kind_ == b.kind_ && a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  GraphKind kind_;
  std::vector<StnNode> nodes_;
  std::set<Edge> edges_;
  Eigen::MatrixXi adjacency_;
};

/// Graph rebuilt from a 0/1 adjacency matrix over the given nodes.
inline StnGraph graph_from_adjacency(GraphKind kind, std::vector<StnNode> nodes, const Eigen::MatrixXi& adjacency) {
  if (adjacency.rows() != static_cast<Eigen::Index>(nodes.size()) || adjacency.cols() != adjacency.rows())
    throw DimensionError("adjacency matrix does not match the node list");
  std::set<Edge> edges;
  for (Eigen::Index i = 0; i < adjacency.rows(); ++i)
    for (Eigen::Index j = 0; j < adjacency.cols(); ++j)
      if (adjacency(i, j) != 0) edges.insert({static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
  return StnGraph(kind, std::move(nodes), std::move(edges));
}

/// Edge Xj -> Xi iff |psi(i,j)| > threshold; edge Xj-L1 -> Xi iff |phi(i,j)| > threshold.
inline StnGraph extended_graph(const CoefficientSet& coeffs, const std::vector<std::string>& names,
                               double threshold = 0.0) {
  if (!coeffs.consistent()) throw DimensionError("inconsistent coefficient set");
  const auto p = coeffs.p();
  if (names.size() != p)
    throw DimensionError("got " + std::to_string(names.size()) + " names for " + std::to_string(p) + " variables");
  if (!(threshold >= 0.0)) throw ConfigError("edge threshold must be >= 0");
  std::vector<StnNode> nodes;
  for (std::size_t j = 0; j < p; ++j) nodes.push_back({j, 0, names[j]});
  for (std::size_t j = 0; j < p; ++j) nodes.push_back({j, 1, names[j] + kLagSuffix});
  std::set<Edge> edges;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(j);
      if (std::abs(coeffs.psi(r, c)) > threshold) edges.insert({j, i});
      if (std::abs(coeffs.phi(r, c)) > threshold) edges.insert({p + j, i});
    }
  }
  return StnGraph(GraphKind::Extended, std::move(nodes), std::move(edges));
}

/// Collapses lags: j -> i whenever Xj -> Xi or Xj-L1 -> Xi. Own-lag edges become self-loops.
inline StnGraph compact_graph(const StnGraph& extended) {
  if (extended.kind() != GraphKind::Extended) throw ConfigError("compact_graph needs an extended graph");
  const auto p = extended.size() / 2;
  std::vector<StnNode> nodes(extended.nodes().begin(), extended.nodes().begin() + static_cast<std::ptrdiff_t>(p));
  std::set<Edge> edges;
  for (const auto& [s, t] : extended.edges())
    edges.insert({extended.nodes()[s].variable_index, extended.nodes()[t].variable_index});
  return StnGraph(GraphKind::Compact, std::move(nodes), std::move(edges));
}

struct Neighborhoods {
  std::set<std::size_t> n_in;
  std::set<std::size_t> n_out;
  std::set<std::size_t> ne;  // n_in U n_out
  std::set<std::size_t> cl;  // ne U {node}
};

/// In/out neighbourhoods of a node; self-loops are not neighbours.
inline Neighborhoods neighborhoods(const StnGraph& graph, std::size_t node) {
  if (node >= graph.size()) throw DimensionError("node index " + std::to_string(node) + " out of range");
  Neighborhoods nb;
  for (const auto& [s, t] : graph.edges()) {
    if (s == t) continue;
    if (t == node) nb.n_in.insert(s);
    if (s == node) nb.n_out.insert(t);
  }
  nb.ne = nb.n_in;
  nb.ne.insert(nb.n_out.begin(), nb.n_out.end());
  nb.cl = nb.ne;
  nb.cl.insert(node);
  return nb;
}

struct CycleCheck {
  bool acyclic = true;
  std::optional<std::vector<std::size_t>> witness;  // closed walk, first == last
};

/// Depth-first cycle search. Nodes are explored in index order, so the witness is deterministic.
inline CycleCheck is_acyclic(const StnGraph& graph, bool ignore_self_loops = true) {
  const auto n = graph.size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (const auto& [s, t] : graph.edges())
    if (!(ignore_self_loops && s == t)) succ[s].push_back(t);

  enum Color : unsigned char { White, Grey, Black };
  std::vector<Color> color(n, White);
  std::vector<std::size_t> path;
  std::vector<std::size_t> cursor(n, 0);

  for (std::size_t root = 0; root < n; ++root) {
    if (color[root] != White) continue;
    path.push_back(root);
    color[root] = Grey;
    while (!path.empty()) {
      const auto u = path.back();
      if (cursor[u] < succ[u].size()) {
        const auto v = succ[u][cursor[u]++];
        if (color[v] == Grey) {
          CycleCheck out;
          out.acyclic = false;
          std::vector<std::size_t> cycle(std::find(path.begin(), path.end(), v), path.end());
          cycle.push_back(v);
          out.witness = std::move(cycle);
          return out;
        }
        if (color[v] == White) {
          color[v] = Grey;
          path.push_back(v);
        }
      } else {
        color[u] = Black;
        path.pop_back();
      }
    }
  }
  return {};
}

/// Edges leaving a risk-parameter node (variable 0) toward another variable.
inline std::vector<Edge> risk_out_edges(const StnGraph& graph) {
  std::vector<Edge> out;
  for (const auto& e : graph.edges()) {
    const auto& src = graph.nodes()[e.first];
    const auto& dst = graph.nodes()[e.second];
    if (src.variable_index == 0 && dst.variable_index != 0) out.push_back(e);
  }
  return out;
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace detail

/// Graphviz DOT text. The risk parameter is drawn as a box, lag nodes dashed.
inline std::string export_dot(const StnGraph& graph) {
  std::ostringstream os;
  os << "digraph STN {\n";
  os << "  // " << to_string(graph.kind()) << " graph\n";
  os << "  rankdir=LR;\n";
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto& n = graph.nodes()[i];
    os << "  n" << i << " [label=\"" << detail::dot_escape(n.label) << "\", shape="
       << (n.variable_index == 0 ? "box" : "ellipse");
    if (n.lag == 1) os << ", style=dashed";
    os << "];\n";
  }
  for (const auto& [s, t] : graph.edges()) os << "  n" << s << " -> n" << t << ";\n";
  os << "}\n";
  return os.str();
}

/// Adjacency as CSV with node labels on the header row and first column.
inline std::string export_adjacency_csv(const StnGraph& graph) {
  std::ostringstream os;
  os << "node";
  for (const auto& n : graph.nodes()) os << ',' << detail::csv_field(n.label);
  os << '\n';
  const auto& a = graph.adjacency();
  for (std::size_t i = 0; i < graph.size(); ++i) {
    os << detail::csv_field(graph.nodes()[i].label);
    for (Eigen::Index j = 0; j < a.cols(); ++j) os << ',' << a(static_cast<Eigen::Index>(i), j);
    os << '\n';
  }
  return os.str();
}

}  // namespace stn
