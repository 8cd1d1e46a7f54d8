#include "coarse/detail/maxflow.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace coarse::detail {

FlowNetwork::FlowNetwork(std::size_t nodes, double eps) : eps_(eps), adj_(nodes) {}

std::size_t FlowNetwork::add_edge(std::size_t from, std::size_t to, double capacity) {
  adj_[from].push_back({to, adj_[to].size(), capacity, 0.0});
  adj_[to].push_back({from, adj_[from].size() - 1, 0.0, 0.0});
  handles_.emplace_back(from, adj_[from].size() - 1);
  return handles_.size() - 1;
}

double FlowNetwork::flow(std::size_t edge) const {
  const auto [u, i] = handles_.at(edge);
  return adj_[u][i].flow;
}

bool FlowNetwork::build_levels(std::size_t s, std::size_t t) {
  level_.assign(adj_.size(), -1);
  std::queue<std::size_t> q;
  level_[s] = 0;
  q.push(s);
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (const auto& e : adj_[u]) {
      if (level_[e.to] < 0 && e.cap - e.flow > eps_) {
        level_[e.to] = level_[u] + 1;
        q.push(e.to);
      }
    }
  }
  return level_[t] >= 0;
}

double FlowNetwork::push(std::size_t u, std::size_t t, double limit) {
  if (u == t) return limit;
  for (std::size_t& i = next_[u]; i < adj_[u].size(); ++i) {
    Edge& e = adj_[u][i];
    if (level_[e.to] != level_[u] + 1 || e.cap - e.flow <= eps_) continue;
    const double pushed = push(e.to, t, std::min(limit, e.cap - e.flow));
    if (pushed > eps_) {
      e.flow += pushed;
      adj_[e.to][e.rev].flow -= pushed;
      return pushed;
    }
  }
  return 0.0;
}

double FlowNetwork::max_flow(std::size_t source, std::size_t sink) {
  double total = 0.0;
  while (build_levels(source, sink)) {
    next_.assign(adj_.size(), 0);
    while (true) {
      const double f = push(source, sink, std::numeric_limits<double>::infinity());
      if (f <= eps_) break;
      total += f;
    }
  }
  return total;
}

std::vector<bool> FlowNetwork::reachable(std::size_t source) const {
  std::vector<bool> seen(adj_.size(), false);
  std::queue<std::size_t> q;
  seen[source] = true;
  q.push(source);
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop();
    for (const auto& e : adj_[u]) {
      if (!seen[e.to] && e.cap - e.flow > eps_) {
        seen[e.to] = true;
        q.push(e.to);
      }
    }
  }
  return seen;
}

}  // namespace coarse::detail
