#include "gridsim/maxflow.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace gridsim {

MaxFlow::MaxFlow(int n_nodes) : adj_(static_cast<std::size_t>(n_nodes)) {}

int MaxFlow::add_edge(int from, int to, double capacity) {
  auto& fwd = adj_[static_cast<std::size_t>(from)];
  auto& bwd = adj_[static_cast<std::size_t>(to)];
  fwd.push_back({to, static_cast<int>(bwd.size()), capacity, capacity});
  bwd.push_back({from, static_cast<int>(fwd.size()) - 1, 0.0, 0.0});
  edge_ref_.emplace_back(from, static_cast<int>(fwd.size()) - 1);
  return static_cast<int>(edge_ref_.size()) - 1;
}

bool MaxFlow::bfs(int source, int sink) {
  level_.assign(adj_.size(), -1);
  std::queue<int> q;
  level_[static_cast<std::size_t>(source)] = 0;
  q.push(source);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (const auto& e : adj_[static_cast<std::size_t>(u)]) {
      if (e.cap > tol_ && level_[static_cast<std::size_t>(e.to)] < 0) {
        level_[static_cast<std::size_t>(e.to)] = level_[static_cast<std::size_t>(u)] + 1;
        q.push(e.to);
      }
    }
  }
  return level_[static_cast<std::size_t>(sink)] >= 0;
}

double MaxFlow::dfs(int u, int sink, double pushed) {
  if (u == sink) return pushed;
  auto& edges = adj_[static_cast<std::size_t>(u)];
  for (auto& i = next_[static_cast<std::size_t>(u)]; i < edges.size(); ++i) {
    Edge& e = edges[i];
    if (e.cap <= tol_ || level_[static_cast<std::size_t>(e.to)] != level_[static_cast<std::size_t>(u)] + 1) continue;
    const double got = dfs(e.to, sink, std::min(pushed, e.cap));
    if (got > 0.0) {
      e.cap -= got;
      adj_[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.rev)].cap += got;
      return got;
    }
  }
  return 0.0;
}

double MaxFlow::solve(int source, int sink, double tolerance) {
  tol_ = tolerance;
  double total = 0.0;
  while (bfs(source, sink)) {
    next_.assign(adj_.size(), 0);
    while (true) {
      const double f = dfs(source, sink, std::numeric_limits<double>::infinity());
      if (f <= 0.0) break;
      total += f;
    }
  }
  return total;
}

double MaxFlow::flow(int edge_id) const {
  const auto [u, i] = edge_ref_[static_cast<std::size_t>(edge_id)];
  const Edge& e = adj_[static_cast<std::size_t>(u)][static_cast<std::size_t>(i)];
  return e.original - e.cap;
}

std::vector<bool> MaxFlow::source_side(int source) const {
  std::vector<bool> seen(adj_.size(), false);
  std::vector<int> stack{source};
  seen[static_cast<std::size_t>(source)] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const auto& e : adj_[static_cast<std::size_t>(u)]) {
      if (e.cap > tol_ && !seen[static_cast<std::size_t>(e.to)]) {
        seen[static_cast<std::size_t>(e.to)] = true;
        stack.push_back(e.to);
      }
    }
  }
  return seen;
}

}  // namespace gridsim
