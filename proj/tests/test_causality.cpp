#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mtreg/causality.hpp"
#include "mtreg/errors.hpp"
#include "mtreg/observable.hpp"

using namespace mtreg;

namespace {

CausalMap affine_map(double scale, double shift) {
  return CausalMap(StateSpace::real(1), StateSpace::real(1),
                   [scale, shift](std::span<const double> w) {
                     return std::vector<double>{scale * w[0] + shift};
                   },
                   "affine");
}

}  // namespace

TEST_CASE("causal map: apply, identity, composition order") {
  const CausalMap f = affine_map(2.0, 1.0);   // w -> 2w + 1
  const CausalMap g = affine_map(-1.0, 3.0);  // u -> 3 - u
  const State w({2.0}, StateSpace::real(1));
  CHECK(f.apply(w)[0] == 5.0);
  CHECK(CausalMap::identity(StateSpace::real(1)).apply(w)[0] == 2.0);
  // f then g: g(f(w)) = 3 - (2w + 1).
  CHECK(f.and_then(g).apply(w)[0] == 3.0 - 5.0);
  CHECK(g.and_then(f).apply(w)[0] == 2.0 * 1.0 + 1.0);

  const CausalMap to_plane =
      CausalMap(StateSpace::real(1), StateSpace::real(2),
                [](std::span<const double> w) {
                  return std::vector<double>{w[0], -w[0]};
                });
  CHECK_THROWS_AS(to_plane.and_then(f), ConstructionError);
  const State plane_point({0.0, 0.0}, StateSpace::real(2));
  CHECK_THROWS_AS(f.apply(plane_point), DomainError);
}

TEST_CASE("pullback substitutes the mapped state") {
  const Observable obs = make_normal_observable(SigmaMode::fixed(1.0));
  const CausalMap f = affine_map(2.0, 1.0);
  const Observable pulled = pullback(f, obs);
  CHECK(pulled.tag() == ObservableTag::pullback);
  CHECK(pulled.value_dim() == 1);
  const State w({0.25}, StateSpace::real(1));
  const State fw = f.apply(w);
  const double x[] = {0.8};
  CHECK(pulled.density(x, w) == obs.density(x, fw));
  CHECK(pulled.log_density(x, w) == obs.log_density(x, fw));
  const Event e = Event::interval(-1.0, 2.0);
  CHECK(pulled.event_prob(e, w) == obs.event_prob(e, fw));
  // Sampling goes through the mapped state too.
  CHECK(pulled.sample(w, 3, 5) == obs.sample(fw, 3, 5));

  const Observable two_dim = make_normal_observable(SigmaMode::state_coordinate(1));
  CHECK_THROWS_AS(pullback(f, two_dim), ConstructionError);
}

TEST_CASE("pullback is functorial: composed maps equal nested pullbacks") {
  const Observable obs = make_normal_observable(SigmaMode::fixed(0.5));
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 25; ++trial) {
    const CausalMap f = affine_map(u(gen), u(gen));
    const CausalMap g = affine_map(u(gen), u(gen));
    const Observable once = pullback(f.and_then(g), obs);
    const Observable nested = pullback(f, pullback(g, obs));
    const State w({u(gen)}, StateSpace::real(1));
    const double x[] = {u(gen)};
    CHECK(once.density(x, w) == nested.density(x, w));
    const Event e = Event::interval(-0.7, 1.3);
    CHECK(once.event_prob(e, w) == nested.event_prob(e, w));
  }
}

TEST_CASE("tree-ordered set: preorder, ancestors, paths") {
  //        0
  //       / \
  //      1   2
  //     / \
  //    3   4
  const TreeOrderedSet tree(0, {-1, 0, 0, 1, 1});
  CHECK(tree.size() == 5);
  CHECK(tree.root() == 0);
  CHECK(tree.preorder() == std::vector<int>{0, 1, 3, 4, 2});
  CHECK(tree.children(1) == std::vector<int>{3, 4});
  CHECK(tree.is_ancestor(0, 4));
  CHECK(tree.is_ancestor(1, 3));
  CHECK(tree.is_ancestor(2, 2));
  CHECK_FALSE(tree.is_ancestor(1, 2));
  CHECK_FALSE(tree.is_ancestor(3, 1));
  CHECK(tree.path(0, 3) == std::vector<int>{0, 1, 3});
  CHECK(tree.path(1, 1) == std::vector<int>{1});
  CHECK_THROWS_AS(tree.path(1, 2), PathError);
  CHECK_THROWS_AS(tree.path(4, 3), PathError);
}

TEST_CASE("tree-ordered set rejects malformed structures") {
  CHECK_THROWS_AS(TreeOrderedSet(0, {}), StructureError);
  CHECK_THROWS_AS(TreeOrderedSet(2, {-1, 0}), StructureError);     // root range
  CHECK_THROWS_AS(TreeOrderedSet(0, {0, 0}), StructureError);      // root has parent
  CHECK_THROWS_AS(TreeOrderedSet(0, {-1, 5}), StructureError);     // parent range
  CHECK_THROWS_AS(TreeOrderedSet(0, {-1, 1}), StructureError);     // self loop
  CHECK_THROWS_AS(TreeOrderedSet(0, {-1, 2, 1}), StructureError);  // cycle
}

TEST_CASE("causal system validates spaces, edges, observables") {
  const StateSpace line = StateSpace::real(1);
  const TreeOrderedSet chain(0, {-1, 0});
  const Observable obs = make_normal_observable(SigmaMode::fixed(1.0));

  // Missing edge map.
  CHECK_THROWS_AS(CausalSystem(chain, {line, line}, {}, {{1, obs}}),
                  StructureError);
  // Edge with the wrong source dimension.
  const CausalMap bad_source =
      CausalMap(StateSpace::real(2), line, [](std::span<const double> w) {
        return std::vector<double>{w[0]};
      });
  {
    std::map<int, CausalMap> edges;
    edges.emplace(1, bad_source);
    CHECK_THROWS_AS(
        CausalSystem(chain, {line, line}, std::move(edges), {{1, obs}}),
        StructureError);
  }
  // Observable living on the wrong space.
  {
    std::map<int, CausalMap> edges;
    edges.emplace(1, affine_map(1.0, 0.0));
    const Observable two_dim =
        make_normal_observable(SigmaMode::state_coordinate(1));
    CHECK_THROWS_AS(CausalSystem(chain, {line, line}, std::move(edges),
                                 {{1, two_dim}}),
                    StructureError);
  }
  // Edge whose image violates the target's positivity constraint.
  {
    const StateSpace half = StateSpace::real_with_positive_last(1);
    std::map<int, CausalMap> edges;
    edges.emplace(1, CausalMap(line, half, [](std::span<const double> w) {
                    return std::vector<double>{-std::abs(w[0]) - 1.0};
                  }));
    CHECK_THROWS_AS(CausalSystem(chain, {line, half}, std::move(edges), {}),
                    StructureError);
  }
}

TEST_CASE("compose_path multiplies edge maps along the tree") {
  const StateSpace line = StateSpace::real(1);
  const TreeOrderedSet chain(0, {-1, 0, 1});
  std::map<int, CausalMap> edges;
  edges.emplace(1, affine_map(2.0, 1.0));   // 0 -> 1
  edges.emplace(2, affine_map(-3.0, 0.5));  // 1 -> 2
  const Observable obs = make_normal_observable(SigmaMode::fixed(1.0));
  const CausalSystem sys(chain, {line, line, line}, std::move(edges),
                         {{2, obs}});
  const CausalMap whole = compose_path(sys, 0, 2);
  const State w({1.25}, line);
  const double expected = -3.0 * (2.0 * 1.25 + 1.0) + 0.5;
  CHECK(whole.apply(w)[0] == expected);
  // Identity path.
  CHECK(compose_path(sys, 1, 1).apply(State({4.0}, line))[0] == 4.0);
  CHECK_THROWS_AS(compose_path(sys, 2, 0), PathError);
}

TEST_CASE("composite observable: single-node system reproduces the observable") {
  const StateSpace line = StateSpace::real(1);
  const TreeOrderedSet solo(0, {-1});
  const Observable obs = make_normal_observable(SigmaMode::fixed(2.0));
  const CausalSystem sys(solo, {line}, {}, {{0, obs}});
  const Observable comp = composite_observable(sys);
  CHECK(comp.tag() == ObservableTag::composite);
  CHECK(comp.value_dim() == 1);
  const State w({0.5}, line);
  const Event e = Event::interval(-1.0, 1.0);
  CHECK(comp.event_prob(e, w) == obs.event_prob(e, w));
}

TEST_CASE("composite observable: branched system, manual oracle") {
  // 0 -> 1 -> 2 (observable), 0 -> 3 (observable); preorder 0,1,2,3 puts the
  // node-2 coordinate first.
  const StateSpace line = StateSpace::real(1);
  const TreeOrderedSet tree(0, {-1, 0, 1, 0});
  std::map<int, CausalMap> edges;
  edges.emplace(1, affine_map(2.0, 0.0));
  edges.emplace(2, affine_map(1.0, -1.0));
  edges.emplace(3, affine_map(-1.0, 2.0));
  const Observable obs = make_normal_observable(SigmaMode::fixed(1.0));
  const CausalSystem sys(tree, {line, line, line, line}, std::move(edges),
                         {{2, obs}, {3, obs}});
  const Observable comp = composite_observable(sys);
  CHECK(comp.value_dim() == 2);

  const State w({0.75}, line);
  // Manual composition: node 2 sees 2w - 1, node 3 sees 2 - w.
  const State at2({2.0 * 0.75 - 1.0}, line);
  const State at3({2.0 - 0.75}, line);
  const Event box = Event::rect({Interval{0.0, 1.0}, Interval::le(0.5)});
  const double manual = obs.event_prob(Event::interval(0.0, 1.0), at2) *
                        obs.event_prob(Event::half_line_le(0.5), at3);
  CHECK(comp.event_prob(box, w) == doctest::Approx(manual).epsilon(1e-14));

  // The first measured coordinate belongs to node 2: tightening its side
  // moves the probability by the node-2 factor only.
  const Event loose = Event::rect({Interval::whole(), Interval::le(0.5)});
  CHECK(comp.event_prob(loose, w) ==
        doctest::Approx(obs.event_prob(Event::half_line_le(0.5), at3))
            .epsilon(1e-12));

  const double x[] = {0.3, 0.9};
  const double d2[] = {0.3};
  const double d3[] = {0.9};
  CHECK(comp.density(x, w) ==
        doctest::Approx(obs.density(d2, at2) * obs.density(d3, at3))
            .epsilon(1e-14));

  // A system with no observables cannot form a composite.
  const TreeOrderedSet solo(0, {-1});
  const CausalSystem empty_sys(solo, {line}, {}, {});
  CHECK_THROWS_AS(composite_observable(empty_sys), StructureError);
}
