#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ergolab/rational.hpp"

namespace ergolab {

// Dinic max-flow over exact big-integer capacities. Capacities reach the
// cardinalities of the power-sequence sets, far beyond 64 bits, so no
// machine-word shortcut is possible.
class MaxFlow {
 public:
  explicit MaxFlow(size_t n);

  // returns a handle usable with flow() after max_flow()
  size_t add_edge(size_t from, size_t to, Int cap);
  Int max_flow(size_t source, size_t sink);
  Int flow(size_t handle) const;
  // vertices reachable from `source` in the residual graph (the source side
  // of a minimum cut); valid after max_flow()
  std::vector<char> min_cut_side(size_t source) const;

 private:
  struct Edge {
    size_t to, rev;
    Int cap;
  };
  std::vector<std::vector<Edge>> adj_;
  std::vector<std::pair<size_t, size_t>> handles_;
  std::vector<int> level_;
  std::vector<size_t> iter_;

  bool bfs(size_t s, size_t t);
  Int dfs(size_t v, size_t t, Int pushed);
};

}  // namespace ergolab
