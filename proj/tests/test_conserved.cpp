#include <catch_amalgamated.hpp>

#include <complex>
#include <random>

#include "test_support.hpp"
#include "trajopt/conserved.hpp"
#include "trajopt/cooling.hpp"
#include "trajopt/lift.hpp"
#include "trajopt/oracle.hpp"

using namespace trajopt;
using Catch::Matchers::WithinAbs;

TEST_CASE("block decomposition groups equal conserved values", "[conserved]") {
  const auto s = block_decompose(Vector{0, 1, 1, 2});
  REQUIRE(s.blocks.size() == 3);
  CHECK(s.blocks[0] == std::vector<std::size_t>{0});
  CHECK(s.blocks[1] == std::vector<std::size_t>{1, 2});
  CHECK(s.blocks[2] == std::vector<std::size_t>{3});
  CHECK(block_decompose(Vector{2, 2, 2}).blocks.size() == 1);

  const auto g = generalized(incoherent_example());
  std::vector<std::size_t> sizes;
  for (const auto& b : g.structure.blocks) sizes.push_back(b.size());
  CHECK(sizes == std::vector<std::size_t>{1, 3, 4, 3, 1});
}

TEST_CASE("dephasing removes cross-block coherences only", "[conserved]") {
  const auto s = block_decompose(Vector{0, 1, 1});
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(3, 3);
  rho.diagonal() << 0.5, 0.3, 0.2;
  CHECK(dephase(rho, s) == rho);

  rho(0, 1) = {0.1, 0.05};
  rho(1, 0) = std::conj(rho(0, 1));
  rho(1, 2) = {0.0, 0.1};
  rho(2, 1) = std::conj(rho(1, 2));
  const auto d = dephase(rho, s);
  CHECK(d(0, 1) == std::complex<double>(0.0));
  CHECK(d(1, 2) == rho(1, 2));
  CHECK_THAT(coherence_mass(rho, s), WithinAbs(std::sqrt(2 * (0.01 + 0.0025)), 1e-15));

  Eigen::MatrixXcd bad = rho;
  bad(0, 1) = 0.3;
  CHECK_THROWS_AS(dephase(bad, s), Error);
  Eigen::MatrixXcd trace2 = rho * 2.0;
  CHECK_THROWS_AS(dephase(trace2, s), Error);
}

TEST_CASE("product states of the incoherent demo are block-diagonal", "[conserved]") {
  const auto ci = incoherent_example();
  const auto g = generalized(ci);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(12, 12);
  for (Eigen::Index i = 0; i < 12; ++i) rho(i, i) = ci.instance.lambda[static_cast<std::size_t>(i)];
  CHECK(coherence_mass(rho, g.structure) == 0.0);
}

TEST_CASE("Jacobi eigenvalues", "[conserved]") {
  Eigen::MatrixXd A(3, 3);
  A << 2, 1, 0, 1, 2, 0, 0, 0, 5;
  const auto eig = jacobi_eigen(A);
  CHECK_THAT(eig.values[0], WithinAbs(5.0, 1e-12));
  CHECK_THAT(eig.values[1], WithinAbs(3.0, 1e-12));
  CHECK_THAT(eig.values[2], WithinAbs(1.0, 1e-12));
  const Eigen::MatrixXd recon = eig.vectors * Eigen::VectorXd::Map(eig.values.data(), 3).asDiagonal() *
                                eig.vectors.transpose();
  CHECK((recon - A).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXcd H(2, 2);
  H << 1.0, std::complex<double>(0, 1), std::complex<double>(0, -1), 1.0;
  const auto hv = hermitian_eigenvalues(H);
  CHECK_THAT(hv[0], WithinAbs(2.0, 1e-12));
  CHECK_THAT(hv[1], WithinAbs(0.0, 1e-12));
}

TEST_CASE("density input is split into block spectra", "[conserved]") {
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(3, 3);
  rho.diagonal() << 0.5, 0.25, 0.25;
  rho(1, 2) = 0.1;
  rho(2, 1) = 0.1;
  rho(0, 1) = 0.05;  // discarded by dephasing
  rho(1, 0) = 0.05;
  const auto g = generalized_from_density(rho, {1, 0, 1}, {0, 1, 2}, {0, 1, 1});
  CHECK_THAT(g.base.lambda[0], WithinAbs(0.5, 1e-12));
  CHECK_THAT(g.base.lambda[1], WithinAbs(0.35, 1e-12));
  CHECK_THAT(g.base.lambda[2], WithinAbs(0.15, 1e-12));
  CHECK(*g.base.initial_populations == Vector{0.5, 0.25, 0.25});
}

TEST_CASE("a constant conserved vector reproduces the plain trajectory", "[conserved][property]") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 30; ++rep) {
    auto inst = testing::random_instance(rng, 3 + rep % 5, rep % 2 == 0);
    const auto plain = build(inst);
    inst.conserved = Vector(inst.dim(), 1.5);
    const auto gen = build_generalized(make_generalized(inst));
    REQUIRE(gen.steps.size() == plain.steps.size());
    CHECK(gen.vertices == plain.vertices);
    for (std::size_t s = 0; s < gen.steps.size(); ++s) {
      CHECK(gen.steps[s].k == plain.steps[s].k);
      CHECK(gen.steps[s].l == plain.steps[s].l);
      CHECK(gen.steps[s].gradient == plain.steps[s].gradient);
    }
  }
}

TEST_CASE("two blocks merge their gradients in sorted order", "[conserved]") {
  // block {0,1}: gradient -1; block {2,3}: gradient -3 then block {0,1}
  ProblemInstance inst;
  inst.lambda = {0.4, 0.1, 0.3, 0.2};
  inst.target = {1, 0, 1, 0};
  inst.cost = {0, 1, 0, 3};
  inst.conserved = Vector{0, 0, 1, 1};
  const auto g = make_generalized(inst);
  const auto t = build_generalized(g);
  REQUIRE(t.steps.size() == 2);
  CHECK(t.steps[0].gradient == -3.0);
  CHECK(t.steps[1].gradient == -1.0);
  CHECK(t.steps[0].k == 2);
  CHECK(t.steps[1].k == 0);
}

TEST_CASE("generalized vertex counts", "[conserved]") {
  auto g = generalized(incoherent_example(1.0, 1.0, 0.3, Vector{0.6, 0.4}));
  CHECK(generalized_vertex_count(g) == 864);
  CHECK(enumerate_generalized_vertices(g).count() == 864);

  ProblemInstance single{{0.5, 0.3, 0.2}, {1, 0, 0}, {0, 1, 2}};
  CHECK(generalized_vertex_count(make_generalized(single)) == 6);
  ProblemInstance degen{{0.4, 0.3, 0.3}, {1, 0, 0}, {0, 1, 2}};
  CHECK(generalized_vertex_count(make_generalized(degen)) == 3);
}

TEST_CASE("edges of a product polytope are per-block av-swaps", "[conserved][property]") {
  ProblemInstance inst;
  inst.lambda = {0.3, 0.2, 0.1, 0.25, 0.15};
  inst.target = {1, 0, 0, 1, 0};
  inst.cost = {0, 1, 2, 0, 1};
  inst.conserved = Vector{0, 0, 0, 1, 1};
  const auto g = make_generalized(inst);
  const auto vs = enumerate_generalized_vertices(g);
  REQUIRE(vs.count() == 12);
  for (const auto& v : vs.vertices) {
    for (const auto& w : vs.vertices) {
      if (v == w) continue;
      bool predicted = false;
      for (const auto& block : g.structure.blocks) {
        Vector sub;
        for (auto i : block) sub.push_back(v[i]);
        for (const auto& s : av_swaps(sub, 1e-12)) {
          if (apply_swap(v, block[s.k], block[s.l]) == w) predicted = true;
        }
      }
      CHECK(predicted == is_edge(v, w, vs, 1e-12));
    }
  }
}

TEST_CASE("lifted generalized unitaries commute with the conserved observable", "[conserved]") {
  const auto ci = incoherent_example(1.0, 1.0, 0.3, Vector{0.6, 0.4});
  const auto g = generalized(ci);
  const auto t = build_generalized(g);
  const Eigen::VectorXd c = to_eigen(*g.base.conserved);
  for (double frac : {0.0, 0.3, 0.5, 0.9, 1.0}) {
    const auto lp = lift_point(t, t.alpha_min() + frac * (t.alpha_max() - t.alpha_min()));
    const Matrix C = c.asDiagonal();
    CHECK((lp.unitary * C - C * lp.unitary).cwiseAbs().maxCoeff() <= 1e-12);
  }
  for (std::size_t s = 0; s + 1 < t.steps.size(); ++s) {
    CHECK(t.steps[s + 1].gradient >= t.steps[s].gradient - 1e-12);
  }
}
