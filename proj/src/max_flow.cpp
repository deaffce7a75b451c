#include "max_flow.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace usec::detail {

std::size_t MaxFlow::add_edge(std::size_t from, std::size_t to, Rational capacity) {
  const std::size_t id = arcs_.size();
  arcs_.push_back({to, std::move(capacity), 0});
  arcs_.push_back({from, 0, 0});
  adjacency_[from].push_back(id);
  adjacency_[to].push_back(id + 1);
  return id;
}

Rational MaxFlow::run(std::size_t source, std::size_t sink) {
  for (auto& arc : arcs_) arc.flow = 0;
  // Reverse arcs carry negative flow of their partner; capacity stays 0.
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  Rational total = 0;
  std::vector<std::size_t> parent_arc(adjacency_.size());
  std::deque<std::size_t> queue;

  while (true) {
    std::fill(parent_arc.begin(), parent_arc.end(), kNone);
    queue.assign(1, source);
    bool found = false;
    while (!queue.empty() && !found) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t arc : adjacency_[u]) {
        const std::size_t v = arcs_[arc].to;
        if (v == source || parent_arc[v] != kNone || residual(arc) <= 0) continue;
        parent_arc[v] = arc;
        if (v == sink) {
          found = true;
          break;
        }
        queue.push_back(v);
      }
    }
    if (!found) break;

    Rational bottleneck = residual(parent_arc[sink]);
    for (std::size_t v = arcs_[parent_arc[sink] ^ 1].to; v != source; v = arcs_[parent_arc[v] ^ 1].to) {
      bottleneck = std::min(bottleneck, residual(parent_arc[v]));
    }
    for (std::size_t v = sink; v != source; v = arcs_[parent_arc[v] ^ 1].to) {
      arcs_[parent_arc[v]].flow += bottleneck;
      arcs_[parent_arc[v] ^ 1].flow -= bottleneck;
    }
    total += bottleneck;
  }
  return total;
}

std::vector<bool> MaxFlow::reachable_from(std::size_t source) const {
  std::vector<bool> seen(adjacency_.size(), false);
  std::deque<std::size_t> queue{source};
  seen[source] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t arc : adjacency_[u]) {
      const std::size_t v = arcs_[arc].to;
      if (!seen[v] && residual(arc) > 0) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  return seen;
}

std::vector<bool> MaxFlow::cannot_reach(std::size_t sink) const {
  // Walk residual arcs backwards from the sink: u reaches v if arc u->v has
  // residual capacity, i.e. the partner of an arc in adjacency_[v].
  std::vector<bool> reaches(adjacency_.size(), false);
  std::deque<std::size_t> queue{sink};
  reaches[sink] = true;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t arc : adjacency_[v]) {
      const std::size_t into = arc ^ 1;
      const std::size_t u = arcs_[arc].to;
      if (!reaches[u] && residual(into) > 0) {
        reaches[u] = true;
        queue.push_back(u);
      }
    }
  }
  reaches.flip();
  return reaches;
}

}  // namespace usec::detail
