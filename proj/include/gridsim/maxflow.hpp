#pragma once

#include <vector>

namespace gridsim {

/// Dinic max-flow over real capacities. Residual capacities at or below the
/// tolerance given to solve() count as saturated.
class MaxFlow {
 public:
  explicit MaxFlow(int n_nodes);

  /// Adds a directed edge and returns its id.
  int add_edge(int from, int to, double capacity);

  double solve(int source, int sink, double tolerance);

  double flow(int edge_id) const;

  /// Nodes reachable from the source through unsaturated residual edges
  /// after solve(): the source side of the minimal minimum cut.
  std::vector<bool> source_side(int source) const;

 private:
  struct Edge {
    int to;
    int rev;
    double cap;
    double original;
  };

  bool bfs(int source, int sink);
  double dfs(int u, int sink, double pushed);

  std::vector<std::vector<Edge>> adj_;
  std::vector<std::pair<int, int>> edge_ref_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
  double tol_ = 0.0;
};

}  // namespace gridsim
