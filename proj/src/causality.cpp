#include "mtreg/causality.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "mtreg/errors.hpp"
#include "mtreg/rng.hpp"

namespace mtreg {
namespace {

// Draws a point inside a state-space box for construction-time spot checks.
std::vector<double> probe_point(const StateSpace& space,
                                std::mt19937_64& gen) {
  std::vector<double> p(space.dims());
  std::normal_distribution<double> gauss(0.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int d = 0; d < space.dims(); ++d) {
    const Interval& b = space.bounds()[d];
    const bool lo_inf = std::isinf(b.lo);
    const bool hi_inf = std::isinf(b.hi);
    double v = 0.0;
    if (lo_inf && hi_inf) {
      v = gauss(gen);
    } else if (lo_inf) {
      v = b.hi - std::abs(gauss(gen));
    } else if (hi_inf) {
      v = b.lo + std::abs(gauss(gen));
    } else {
      v = b.lo + (b.hi - b.lo) * unit(gen);
    }
    if (space.positivity()[d] && v <= 0.0) {
      v = std::abs(v) + 1e-3;
    }
    p[d] = v;
  }
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// CausalMap

CausalMap::CausalMap(StateSpace source, StateSpace target, Fn fn,
                     std::string label)
    : source_(std::make_shared<const StateSpace>(std::move(source))),
      target_(std::make_shared<const StateSpace>(std::move(target))),
      fn_(std::move(fn)),
      label_(std::move(label)) {
  if (!fn_) throw ConstructionError("causal map: function must be set");
}

CausalMap CausalMap::identity(StateSpace space) {
  StateSpace copy = space;
  return CausalMap(
      std::move(copy), std::move(space),
      [](std::span<const double> w) {
        return std::vector<double>(w.begin(), w.end());
      },
      "id");
}

std::vector<double> CausalMap::apply_raw(std::span<const double> coords) const {
  if (static_cast<int>(coords.size()) != source_->dims()) {
    throw DomainError("causal map: state has dimension " +
                      std::to_string(coords.size()) + ", map expects " +
                      std::to_string(source_->dims()));
  }
  std::vector<double> out = fn_(coords);
  if (static_cast<int>(out.size()) != target_->dims()) {
    throw DomainError("causal map '" + label_ +
                      "': image has dimension " + std::to_string(out.size()) +
                      ", target expects " + std::to_string(target_->dims()));
  }
  return out;
}

State CausalMap::apply(const State& omega) const {
  if (!(omega.space() == *source_)) {
    throw DomainError("causal map: state does not live on the source space");
  }
  return State(apply_raw(omega.coords()), target_);
}

CausalMap CausalMap::and_then(const CausalMap& next) const {
  if (!(*target_ == next.source())) {
    throw ConstructionError(
        "causal map composition: target of the first map must equal the "
        "source of the second");
  }
  Fn first = fn_;
  Fn second = next.fn_;
  std::string label = label_.empty() || next.label_.empty()
                          ? label_ + next.label_
                          : next.label_ + " . " + label_;
  return CausalMap(
      *source_, next.target(),
      [first, second](std::span<const double> w) {
        const std::vector<double> mid = first(w);
        return second(mid);
      },
      std::move(label));
}

// ---------------------------------------------------------------------------
// TreeOrderedSet

TreeOrderedSet::TreeOrderedSet(int root, std::vector<int> parent)
    : root_(root), parent_(std::move(parent)) {
  const int n = static_cast<int>(parent_.size());
  if (n == 0) throw StructureError("tree: needs at least one node");
  if (root_ < 0 || root_ >= n) {
    throw StructureError("tree: root " + std::to_string(root_) +
                         " out of range");
  }
  if (parent_[root_] >= 0) {
    throw StructureError("tree: root must have no parent");
  }
  children_.assign(n, {});
  for (int v = 0; v < n; ++v) {
    if (v == root_) continue;
    const int p = parent_[v];
    if (p < 0 || p >= n) {
      throw StructureError("tree: node " + std::to_string(v) +
                           " has out-of-range parent " + std::to_string(p));
    }
    if (p == v) {
      throw StructureError("tree: node " + std::to_string(v) +
                           " is its own parent");
    }
    children_[p].push_back(v);
  }
  // Every node must reach the root; a walk longer than n nodes is a cycle.
  for (int v = 0; v < n; ++v) {
    int cur = v;
    int steps = 0;
    while (cur != root_) {
      cur = parent_[cur];
      if (++steps > n) {
        throw StructureError("tree: node " + std::to_string(v) +
                             " does not reach the root (cycle)");
      }
    }
  }
  for (auto& c : children_) std::sort(c.begin(), c.end());
  preorder_.reserve(n);
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    preorder_.push_back(v);
    for (auto it = children_[v].rbegin(); it != children_[v].rend(); ++it) {
      stack.push_back(*it);
    }
  }
}

int TreeOrderedSet::parent(int node) const {
  if (node < 0 || node >= size()) {
    throw StructureError("tree: node " + std::to_string(node) + " out of range");
  }
  return parent_[node];
}

const std::vector<int>& TreeOrderedSet::children(int node) const {
  if (node < 0 || node >= size()) {
    throw StructureError("tree: node " + std::to_string(node) + " out of range");
  }
  return children_[node];
}

bool TreeOrderedSet::is_ancestor(int a, int b) const {
  if (a < 0 || a >= size() || b < 0 || b >= size()) {
    throw StructureError("tree: node out of range");
  }
  int cur = b;
  while (true) {
    if (cur == a) return true;
    if (cur == root_) return false;
    cur = parent_[cur];
  }
}

std::vector<int> TreeOrderedSet::path(int from, int to) const {
  if (!is_ancestor(from, to)) {
    throw PathError("tree: node " + std::to_string(from) +
                    " is not an ancestor of node " + std::to_string(to));
  }
  std::vector<int> rev;
  int cur = to;
  while (true) {
    rev.push_back(cur);
    if (cur == from) break;
    cur = parent_[cur];
  }
  return {rev.rbegin(), rev.rend()};
}

// ---------------------------------------------------------------------------
// CausalSystem

CausalSystem::CausalSystem(TreeOrderedSet tree,
                           std::vector<StateSpace> space_at,
                           std::map<int, CausalMap> edge_to,
                           std::map<int, Observable> observable_at)
    : tree_(std::move(tree)),
      space_at_(std::move(space_at)),
      edge_to_(std::move(edge_to)),
      observable_at_(std::move(observable_at)) {
  const int n = tree_.size();
  if (static_cast<int>(space_at_.size()) != n) {
    throw StructureError("causal system: one state space per node required");
  }
  for (int v = 0; v < n; ++v) {
    if (v == tree_.root()) {
      if (edge_to_.count(v)) {
        throw StructureError("causal system: root has no incoming edge");
      }
      continue;
    }
    auto it = edge_to_.find(v);
    if (it == edge_to_.end()) {
      throw StructureError("causal system: missing edge map into node " +
                           std::to_string(v));
    }
    const CausalMap& e = it->second;
    if (!(e.source() == space_at_[tree_.parent(v)])) {
      throw StructureError("causal system: edge into node " +
                           std::to_string(v) +
                           " does not start at the parent's state space");
    }
    if (!(e.target() == space_at_[v])) {
      throw StructureError("causal system: edge into node " +
                           std::to_string(v) +
                           " does not land in the node's state space");
    }
  }
  for (const auto& [v, obs] : observable_at_) {
    if (v < 0 || v >= n) {
      throw StructureError("causal system: observable attached to node " +
                           std::to_string(v) + " out of range");
    }
    if (!(obs.state_space() == space_at_[v])) {
      throw StructureError("causal system: observable at node " +
                           std::to_string(v) +
                           " does not live on that node's state space");
    }
  }
  // Spot-check each edge map on a few admissible source states so domain
  // violations surface at construction rather than mid-computation.
  auto gen = rng::engine(0x6d74726567u);
  for (const auto& [v, e] : edge_to_) {
    for (int trial = 0; trial < 4; ++trial) {
      const std::vector<double> p = probe_point(e.source(), gen);
      if (!e.source().admits(p)) continue;
      std::vector<double> out;
      try {
        out = e.apply_raw(p);
      } catch (const Error& err) {
        throw StructureError("causal system: edge into node " +
                             std::to_string(v) +
                             " failed on an admissible state: " + err.what());
      }
      if (!e.target().admits(out)) {
        throw StructureError(
            "causal system: edge into node " + std::to_string(v) +
            " maps an admissible state outside the target space");
      }
    }
  }
}

const StateSpace& CausalSystem::space_at(int node) const {
  if (node < 0 || node >= tree_.size()) {
    throw StructureError("causal system: node " + std::to_string(node) +
                         " out of range");
  }
  return space_at_[node];
}

const CausalMap& CausalSystem::edge_to(int node) const {
  auto it = edge_to_.find(node);
  if (it == edge_to_.end()) {
    throw StructureError("causal system: no edge into node " +
                         std::to_string(node));
  }
  return it->second;
}

const Observable* CausalSystem::observable_at(int node) const {
  auto it = observable_at_.find(node);
  return it == observable_at_.end() ? nullptr : &it->second;
}

std::vector<int> CausalSystem::observed_nodes() const {
  std::vector<int> nodes;
  nodes.reserve(observable_at_.size());
  for (const auto& [v, obs] : observable_at_) nodes.push_back(v);
  return nodes;
}

// ---------------------------------------------------------------------------
// Operations

Observable pullback(const CausalMap& map, const Observable& obs) {
  if (!(obs.state_space() == map.target())) {
    throw ConstructionError(
        "pullback: observable must live on the map's target space");
  }
  CausalMap copy = map;
  return compose_with_state_map(
             obs, map.source(),
             [copy](const State& w) { return copy.apply(w); })
      .with_tag(ObservableTag::pullback);
}

CausalMap compose_path(const CausalSystem& system, int from, int to) {
  const std::vector<int> nodes = system.tree().path(from, to);
  CausalMap acc = CausalMap::identity(system.space_at(from));
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    acc = acc.and_then(system.edge_to(nodes[i]));
  }
  return acc;
}

Observable composite_observable(const CausalSystem& system) {
  const int root = system.tree().root();
  std::vector<Observable> parts;
  for (int v : system.tree().preorder()) {
    const Observable* obs = system.observable_at(v);
    if (obs == nullptr) continue;
    if (v == root) {
      parts.push_back(*obs);
    } else {
      parts.push_back(pullback(compose_path(system, root, v), *obs));
    }
  }
  if (parts.empty()) {
    throw StructureError(
        "composite observable: the system has no observables attached");
  }
  return product_observable(std::move(parts))
      .with_tag(ObservableTag::composite);
}

}  // namespace mtreg
