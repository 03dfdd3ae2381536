#include "treeqcqp/graph.hpp"

#include <algorithm>
#include <deque>

#include "treeqcqp/errors.hpp"

namespace treeqcqp {

ProblemGraph::ProblemGraph(int n, const std::vector<Edge>& edges)
    : n_(n), adjacency_(static_cast<size_t>(n)) {
  for (auto [i, j] : edges) {
    if (i == j) throw ValidationError("ProblemGraph: self-loops are not allowed");
    if (i < 0 || j < 0 || i >= n || j >= n) throw ValidationError("ProblemGraph: vertex out of range");
    edges_.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (auto [i, j] : edges_) {
    adjacency_[static_cast<size_t>(i)].push_back(j);
    adjacency_[static_cast<size_t>(j)].push_back(i);
  }
}

bool ProblemGraph::has_edge(int i, int j) const {
  const Edge e{std::min(i, j), std::max(i, j)};
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

std::vector<int> ProblemGraph::components() const {
  std::vector<int> label(static_cast<size_t>(n_), -1);
  int next = 0;
  for (int s = 0; s < n_; ++s) {
    if (label[static_cast<size_t>(s)] >= 0) continue;
    std::deque<int> queue{s};
    label[static_cast<size_t>(s)] = next;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int w : neighbors(v)) {
        if (label[static_cast<size_t>(w)] < 0) {
          label[static_cast<size_t>(w)] = next;
          queue.push_back(w);
        }
      }
    }
    ++next;
  }
  return label;
}

bool ProblemGraph::is_connected() const {
  if (n_ <= 1) return true;
  const auto label = components();
  return std::all_of(label.begin(), label.end(), [](int l) { return l == 0; });
}

bool is_tree(const ProblemGraph& g) {
  return g.vertex_count() >= 1 && g.is_connected() &&
         static_cast<int>(g.edges().size()) == g.vertex_count() - 1;
}

ProblemGraph matrix_graph(const HermitianMatrix& h, double tau_zero) {
  std::vector<ProblemGraph::Edge> edges;
  const int n = static_cast<int>(h.dim());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(h(i, j)) > tau_zero) edges.emplace_back(i, j);
  return ProblemGraph(n, edges);
}

std::vector<int> bfs_depth(const ProblemGraph& g, int root) {
  std::vector<int> depth(static_cast<size_t>(g.vertex_count()), -1);
  if (root < 0 || root >= g.vertex_count()) return depth;
  std::deque<int> queue{root};
  depth[static_cast<size_t>(root)] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : g.neighbors(v)) {
      if (depth[static_cast<size_t>(w)] < 0) {
        depth[static_cast<size_t>(w)] = depth[static_cast<size_t>(v)] + 1;
        queue.push_back(w);
      }
    }
  }
  return depth;
}

}  // namespace treeqcqp
