#pragma once

#include "usec/rational.hpp"

#include <cstddef>
#include <vector>

namespace usec::detail {

/// Edmonds-Karp over exact rationals. Breadth-first search visits arcs in
/// insertion order, so the flow found is a deterministic function of the
/// order edges were added.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes) : adjacency_(nodes) {}

  /// Returns the id of the forward arc.
  std::size_t add_edge(std::size_t from, std::size_t to, Rational capacity);
  void set_capacity(std::size_t edge, Rational capacity) { arcs_[edge].capacity = std::move(capacity); }

  /// Resets all flow and computes a maximum flow from source to sink.
  Rational run(std::size_t source, std::size_t sink);

  const Rational& flow(std::size_t edge) const { return arcs_[edge].flow; }

  /// Nodes reachable from `source` in the residual graph: source side of
  /// the inclusion-minimal minimum cut.
  std::vector<bool> reachable_from(std::size_t source) const;
  /// Nodes that cannot reach `sink` in the residual graph: source side of
  /// the inclusion-maximal minimum cut.
  std::vector<bool> cannot_reach(std::size_t sink) const;

 private:
  struct Arc {
    std::size_t to;
    Rational capacity;
    Rational flow;
  };
  Rational residual(std::size_t arc) const { return arcs_[arc].capacity - arcs_[arc].flow; }

  std::vector<Arc> arcs_;  // arc ^ 1 is the reverse of arc
  std::vector<std::vector<std::size_t>> adjacency_;
};

}  // namespace usec::detail
