#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mtreg/observable.hpp"
#include "mtreg/statespace.hpp"

namespace mtreg {

// Deterministic causal map between state spaces: a point map whose pullback
// acts on observables by state substitution.
class CausalMap {
public:
  using Fn = std::function<std::vector<double>(std::span<const double>)>;

  CausalMap(StateSpace source, StateSpace target, Fn fn,
            std::string label = "");

  static CausalMap identity(StateSpace space);

  const StateSpace& source() const { return *source_; }
  const StateSpace& target() const { return *target_; }
  const std::string& label() const { return label_; }

  // Applies the map; the result is validated against the target space.
  State apply(const State& omega) const;
  std::vector<double> apply_raw(std::span<const double> coords) const;

  // Sequential composition: first this map, then `next`.
  CausalMap and_then(const CausalMap& next) const;

private:
  std::shared_ptr<const StateSpace> source_;
  std::shared_ptr<const StateSpace> target_;
  Fn fn_;
  std::string label_;
};

// Finite tree on nodes {0, ..., size-1} ordered towards a root: every
// non-root node stores its parent and every node reaches the root.
class TreeOrderedSet {
public:
  // parent[root] must be negative; all other entries name the parent node.
  TreeOrderedSet(int root, std::vector<int> parent);

  int size() const { return static_cast<int>(parent_.size()); }
  int root() const { return root_; }
  int parent(int node) const;
  const std::vector<int>& children(int node) const;

  bool is_ancestor(int a, int b) const;  // a on b's path to the root (or a==b)
  // Nodes from `from` down to `to` inclusive; `from` must be an ancestor.
  std::vector<int> path(int from, int to) const;
  // Depth-first preorder from the root, children visited in ascending index.
  const std::vector<int>& preorder() const { return preorder_; }

private:
  int root_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
  std::vector<int> preorder_;
};

// A tree of state spaces, an edge map per non-root node (parent -> node),
// and observables attached to some nodes.
class CausalSystem {
public:
  CausalSystem(TreeOrderedSet tree, std::vector<StateSpace> space_at,
               std::map<int, CausalMap> edge_to,
               std::map<int, Observable> observable_at);

  const TreeOrderedSet& tree() const { return tree_; }
  const StateSpace& space_at(int node) const;
  const CausalMap& edge_to(int node) const;  // map parent(node) -> node
  const Observable* observable_at(int node) const;  // nullptr if absent
  std::vector<int> observed_nodes() const;  // ascending

private:
  TreeOrderedSet tree_;
  std::vector<StateSpace> space_at_;
  std::map<int, CausalMap> edge_to_;
  std::map<int, Observable> observable_at_;
};

// Observable on the map's source whose probabilities equal the original's
// at the mapped state.
Observable pullback(const CausalMap& map, const Observable& obs);

// Composite of the edge maps along the tree path from `from` to `to`.
CausalMap compose_path(const CausalSystem& system, int from, int to);

// Product over observed nodes (depth-first preorder) of each observable
// pulled back to the root. Measured-value coordinates follow that order.
Observable composite_observable(const CausalSystem& system);

}  // namespace mtreg
