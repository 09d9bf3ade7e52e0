#include <catch_amalgamated.hpp>

#include <random>

#include "test_support.hpp"
#include "trajopt/cooling.hpp"
#include "trajopt/oracle.hpp"
#include "trajopt/trajectory.hpp"

using namespace trajopt;
using Catch::Matchers::WithinAbs;

namespace {

ProblemInstance inst_of(Vector lam, Vector a, Vector e) {
  return validate({std::move(lam), std::move(a), std::move(e)});
}

}  // namespace

TEST_CASE("minimal vertex puts the largest eigenvalues on the lowest labels", "[trajectory]") {
  auto i1 = inst_of({.4, .3, .2, .1}, {0, 0, 1, 1}, {0, 1, 0, 1});
  CHECK(minimal_vertex(i1, preferred_order(i1.target, i1.cost)) == Vector{.4, .3, .2, .1});
  auto i2 = inst_of({.4, .3, .2, .1}, {1, 1, 0, 0}, {0, 1, 0, 1});
  CHECK(minimal_vertex(i2, preferred_order(i2.target, i2.cost)) == Vector{.2, .1, .4, .3});
}

TEST_CASE("maximal vertex attains alpha_max at minimal cost", "[trajectory]") {
  auto i1 = inst_of({.4, .3, .2, .1}, {0, 0, 1, 1}, {0, 1, 0, 1});
  const auto order = preferred_order(i1.target, i1.cost);
  const auto vmax = maximal_vertex(i1, order);
  CHECK(vmax == Vector{.2, .1, .4, .3});
  const auto poly = induced_polygon(enumerate_vertices(i1.lambda, 1e-12), i1.target, i1.cost);
  CHECK_THAT(cost_value(vmax, i1.cost), WithinAbs(envelope_min_cost(poly, poly.alpha_max), 1e-15));
  CHECK(build(i1).vertices.back() == vmax);

  auto flat = inst_of({.5, .3, .2}, {1, 1, 1}, {0, 1, 2});
  CHECK(maximal_vertex(flat, preferred_order(flat.target, flat.cost)) ==
        minimal_vertex(flat, preferred_order(flat.target, flat.cost)));

  auto two = inst_of({.7, .3}, {1, 0}, {0, 1});
  CHECK(maximal_vertex(two, preferred_order(two.target, two.cost)) == Vector{.7, .3});
}

TEST_CASE("next_step picks the minimal-gradient raising av-swap", "[trajectory]") {
  const auto ci = working_example();
  const auto& inst = ci.instance;
  const auto first = next_step(*inst.initial_populations, inst);
  REQUIRE(first);
  // |01> (index 1) takes population from |10> (index 4)
  CHECK(first->k == 1);
  CHECK(first->l == 4);
  CHECK_THAT(first->gradient, WithinAbs(-0.2, 1e-12));

  const auto traj = build(inst);
  CHECK_FALSE(next_step(traj.vertices.back(), inst));
  CHECK_THROWS_AS(next_step(Vector(8, 0.1), inst), Error);
}

TEST_CASE("two-level instance has one step of slope -Es", "[trajectory]") {
  const double es = 0.3;
  const auto t = build(inst_of({.7, .3}, {1, 0}, {0, es}));
  REQUIRE(t.steps.size() == 1);
  CHECK_THAT(t.steps[0].gradient, WithinAbs(-es, 1e-15));
  CHECK_THAT(t.alpha_min(), WithinAbs(0.3, 1e-15));
  CHECK_THAT(t.alpha_max(), WithinAbs(0.7, 1e-15));
}

TEST_CASE("fully degenerate target gives an empty trajectory", "[trajectory]") {
  const auto t = build(inst_of({.5, .3, .2}, {1, 1, 1}, {0, 1, 2}));
  CHECK(t.steps.empty());
  CHECK(omega_opt(t, 1.0) == cost_value(t.vertices[0], Vector{0, 1, 2}));
}

TEST_CASE("working example from alpha_in follows the four cooling swaps", "[trajectory]") {
  const auto ci = working_example();
  const auto& inst = ci.instance;
  const auto tail = continue_from(inst, *inst.initial_populations);
  REQUIRE(tail.steps.size() == 4);
  const double expected[] = {-0.2, 0.0, 0.4, 0.8};
  for (std::size_t s = 0; s < 4; ++s) CHECK_THAT(tail.steps[s].gradient, WithinAbs(expected[s], 1e-12));
  CHECK(tail.steps[3].k == 3);
  CHECK(tail.steps[3].l == 4);

  const auto full = build(inst);
  const auto cut = tail_from(full, 0.5);
  REQUIRE(cut.steps.size() == 4);
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK(cut.steps[s].k == tail.steps[s].k);
    CHECK(cut.steps[s].l == tail.steps[s].l);
  }
  CHECK_THAT(omega_opt(full, 0.5), WithinAbs(cost_value(*inst.initial_populations, inst.cost), 1e-12));
}

TEST_CASE("omega_opt and state_at", "[trajectory]") {
  const auto t = build(working_example().instance);
  CHECK(omega_opt(t, t.alpha_min()) == t.breakpoints.front().omega);
  for (const auto& b : t.breakpoints) CHECK(omega_opt(t, b.alpha) == b.omega);
  const double mid = 0.5 * (t.breakpoints[2].alpha + t.breakpoints[3].alpha);
  const auto sp = state_at(t, mid);
  CHECK(sp.segment == 2);
  CHECK_THAT(target_value(sp.populations, working_example().instance.target), WithinAbs(mid, 1e-12));
  CHECK_THAT(sp.t, WithinAbs(0.5, 1e-12));
  CHECK_THROWS_AS(omega_opt(t, 2.0), Error);
  CHECK_NOTHROW(omega_opt(t, t.alpha_max() + 5e-10));
}

TEST_CASE("trajectory invariants on random instances", "[trajectory][property]") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t d = 3 + rep % 5;
    const auto inst = testing::random_instance(rng, d, rep % 2 == 0);
    const auto t = build(inst);
    REQUIRE(t.vertices.size() == t.steps.size() + 1);
    for (std::size_t s = 0; s < t.steps.size(); ++s) {
      const auto& st = t.steps[s];
      CHECK(inst.target[st.k] > inst.target[st.l]);
      CHECK(t.vertices[s][st.k] < t.vertices[s][st.l]);
      CHECK(apply_swap(t.vertices[s], st.k, st.l) == t.vertices[s + 1]);
      CHECK(t.breakpoints[s + 1].alpha > t.breakpoints[s].alpha);
      CHECK_THAT(st.alpha_end - st.alpha_start, WithinAbs(st.delta_alpha, 1e-12));
      if (s > 0) CHECK(st.gradient >= t.steps[s - 1].gradient - 1e-12);
    }
    std::uniform_real_distribution<double> u(t.alpha_min(), t.alpha_max());
    for (int i = 0; i < 10; ++i) {
      const auto sp = state_at(t, u(rng));
      CHECK(majorizes(inst.lambda, sp.populations, 1e-12));
    }
  }
}

TEST_CASE("uniqueness conditions at the minimal point", "[trajectory]") {
  CHECK(uniqueness_at_minimum(inst_of({.5, .3, .2}, {0, 1, 2}, {0, 0, 0})).condition == 1);
  CHECK(uniqueness_at_minimum(inst_of({.7, .3}, {1, 1}, {0, 1})).condition == 2);
  CHECK_FALSE(uniqueness_at_minimum(inst_of({.7, .3}, {1, 1}, {0, 0})).unique);
  const auto u3 = uniqueness_at_minimum(inst_of({.4, .3, .3}, {0, 1, 1}, {0, 1, 1}));
  CHECK(u3.unique);
  CHECK(u3.condition == 3);
}

TEST_CASE("entry point replays the trajectory", "[trajectory]") {
  const auto t = build(working_example().instance);
  const auto e0 = entry_point(t, t.alpha_min());
  CHECK(e0.chain.empty());
  const auto e3 = entry_point(t, t.breakpoints[3].alpha);
  CHECK(e3.chain.size() == 3);
  for (const auto& tt : e3.chain) CHECK(tt.t == 0.0);
  const double mid = 0.25 * t.breakpoints[4].alpha + 0.75 * t.breakpoints[5].alpha;
  const auto em = entry_point(t, mid);
  REQUIRE(em.chain.size() == 5);
  CHECK_THAT(em.chain.back().t, WithinAbs(0.25, 1e-9));

  // applying the chain to the permuted spectrum reproduces the state
  Vector p(t.dim());
  const auto& lam = working_example().instance.lambda;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = lam[em.source[i]];
  for (const auto& tt : em.chain) p = trajopt::apply(tt, p);
  CHECK(same_vector(p, em.state.populations, 1e-12));
}
