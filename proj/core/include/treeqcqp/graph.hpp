#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "treeqcqp/hermitian.hpp"

namespace treeqcqp {

/// Undirected simple graph on vertices 0..n-1. Edges are stored once with
/// i < j, sorted lexicographically.
class ProblemGraph {
 public:
  using Edge = std::pair<int, int>;

  explicit ProblemGraph(int n = 0) : n_(n), adjacency_(static_cast<size_t>(n)) {}
  ProblemGraph(int n, const std::vector<Edge>& edges);

  int vertex_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const { return adjacency_[static_cast<size_t>(v)]; }
  bool has_edge(int i, int j) const;

  /// Component label per vertex, labels 0..k-1 in order of first appearance.
  std::vector<int> components() const;
  bool is_connected() const;

  friend bool operator==(const ProblemGraph& a, const ProblemGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

/// Connected with exactly n - 1 edges.
bool is_tree(const ProblemGraph& g);

/// Sparsity graph of a single Hermitian matrix: (i, j) is an edge iff i != j
/// and |H_ij| > tau_zero.
ProblemGraph matrix_graph(const HermitianMatrix& h, double tau_zero = kTauZero);

/// BFS depth of every vertex from root (-1 when unreachable).
std::vector<int> bfs_depth(const ProblemGraph& g, int root);

}  // namespace treeqcqp
