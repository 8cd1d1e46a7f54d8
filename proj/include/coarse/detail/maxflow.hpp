#pragma once

#include <cstddef>
#include <vector>

namespace coarse::detail {

/// Dinic max-flow on real capacities. Residuals below `eps` count as saturated.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes, double eps = 1e-15);

  /// Returns an edge handle usable with flow().
  std::size_t add_edge(std::size_t from, std::size_t to, double capacity);

  double max_flow(std::size_t source, std::size_t sink);

  double flow(std::size_t edge) const;

  /// Nodes reachable from `source` in the residual graph (source side of a min cut).
  std::vector<bool> reachable(std::size_t source) const;

 private:
  struct Edge {
    std::size_t to;
    std::size_t rev;
    double cap;
    double flow;
  };

  bool build_levels(std::size_t s, std::size_t t);
  double push(std::size_t u, std::size_t t, double limit);

  double eps_;
  std::vector<std::vector<Edge>> adj_;
  std::vector<std::pair<std::size_t, std::size_t>> handles_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

}  // namespace coarse::detail
