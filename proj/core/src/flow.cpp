#include "ergolab/flow.hpp"

#include <deque>
#include <stdexcept>

namespace ergolab {

MaxFlow::MaxFlow(size_t n) : adj_(n) {}

size_t MaxFlow::add_edge(size_t from, size_t to, Int cap) {
  if (from >= adj_.size() || to >= adj_.size()) throw std::out_of_range("flow vertex");
  if (cap < 0) throw std::invalid_argument("negative capacity");
  adj_[from].push_back({to, adj_[to].size(), std::move(cap)});
  adj_[to].push_back({from, adj_[from].size() - 1, 0});
  handles_.emplace_back(from, adj_[from].size() - 1);
  return handles_.size() - 1;
}

bool MaxFlow::bfs(size_t s, size_t t) {
  level_.assign(adj_.size(), -1);
  std::deque<size_t> q{s};
  level_[s] = 0;
  while (!q.empty()) {
    size_t v = q.front();
    q.pop_front();
    for (const Edge& e : adj_[v]) {
      if (e.cap > 0 && level_[e.to] < 0) {
        level_[e.to] = level_[v] + 1;
        q.push_back(e.to);
      }
    }
  }
  return level_[t] >= 0;
}

Int MaxFlow::dfs(size_t v, size_t t, Int pushed) {
  if (v == t) return pushed;
  for (size_t& i = iter_[v]; i < adj_[v].size(); ++i) {
    Edge& e = adj_[v][i];
    if (e.cap > 0 && level_[e.to] == level_[v] + 1) {
      Int got = dfs(e.to, t, std::min(pushed, e.cap));
      if (got > 0) {
        e.cap -= got;
        adj_[e.to][e.rev].cap += got;
        return got;
      }
    }
  }
  return 0;
}

Int MaxFlow::max_flow(size_t s, size_t t) {
  Int total = 0;
  while (bfs(s, t)) {
    iter_.assign(adj_.size(), 0);
    Int inf = 1;  // residual out-capacity of s bounds any augmenting path
    for (const Edge& e : adj_[s]) inf += e.cap;
    for (;;) {
      Int got = dfs(s, t, inf);
      if (got == 0) break;
      total += got;
    }
  }
  return total;
}

Int MaxFlow::flow(size_t handle) const {
  auto [v, i] = handles_.at(handle);
  const Edge& e = adj_[v][i];
  return adj_[e.to][e.rev].cap;  // reverse capacity accumulates the pushed flow
}

std::vector<char> MaxFlow::min_cut_side(size_t s) const {
  std::vector<char> seen(adj_.size(), 0);
  std::deque<size_t> q{s};
  seen[s] = 1;
  while (!q.empty()) {
    size_t v = q.front();
    q.pop_front();
    for (const Edge& e : adj_[v]) {
      if (e.cap > 0 && !seen[e.to]) {
        seen[e.to] = 1;
        q.push_back(e.to);
      }
    }
  }
  return seen;
}

}  // namespace ergolab
