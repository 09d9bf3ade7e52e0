#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trajopt/core.hpp"
#include "trajopt/error.hpp"
#include "trajopt/jacobi.hpp"
#include "trajopt/polytope.hpp"
#include "trajopt/trajectory.hpp"

namespace trajopt {

inline constexpr double kConservedEps = 1e-9;

/// Partition of the basis into eigenspaces of the conserved observable,
/// ordered by ascending eigenvalue. Indices inside a block ascend.
struct BlockStructure {
  Blocks blocks;
  Vector block_values;
};

struct GeneralizedInstance {
  ProblemInstance base;
  BlockStructure structure;
  std::vector<Vector> block_lambdas;
};

inline BlockStructure block_decompose(std::span<const double> c, double eps = kConservedEps) {
  const auto level = cluster_levels(c, eps);
  BlockStructure out;
  if (c.empty()) return out;
  const std::size_t levels = *std::max_element(level.begin(), level.end()) + 1;
  out.blocks.resize(levels);
  for (std::size_t i = 0; i < c.size(); ++i) out.blocks[level[i]].push_back(i);
  for (const auto& b : out.blocks) out.block_values.push_back(c[b.front()]);
  return out;
}

/// Validates the base instance and splits it by its conserved vector (a
/// missing conserved vector means a single block).
inline GeneralizedInstance make_generalized(ProblemInstance inst, double eps = kConservedEps) {
  inst = validate(std::move(inst));
  GeneralizedInstance g;
  g.structure = inst.conserved ? block_decompose(*inst.conserved, eps)
                               : BlockStructure{single_block(inst.dim()), {0.0}};
  for (const auto& b : g.structure.blocks) {
    Vector lam;
    for (auto i : b) lam.push_back(inst.lambda[i]);
    g.block_lambdas.push_back(std::move(lam));
  }
  if (inst.initial_populations) {
    for (std::size_t bi = 0; bi < g.structure.blocks.size(); ++bi) {
      Vector pin;
      for (auto i : g.structure.blocks[bi]) pin.push_back((*inst.initial_populations)[i]);
      if (!majorizes(g.block_lambdas[bi], pin, kNormalizationTol)) {
        throw Error(ErrorCode::NotMajorized,
                    "initial populations of block " + std::to_string(bi) +
                        " are not majorized by its eigenvalues");
      }
    }
  }
  g.base = std::move(inst);
  return g;
}

/// Removes every coherence between distinct blocks.
inline Eigen::MatrixXcd dephase(const Eigen::MatrixXcd& rho, const BlockStructure& structure,
                                double tol = 1e-10) {
  const Eigen::Index d = rho.rows();
  if (rho.cols() != d) throw Error(ErrorCode::DimensionMismatch, "dephase: matrix not square");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw Error(ErrorCode::NotHermitian, "dephase: matrix is not Hermitian");
  }
  if (std::abs(rho.trace() - std::complex<double>(1.0, 0.0)) > 1e-9) {
    throw Error(ErrorCode::NotUnitTrace, "dephase: trace is not 1");
  }
  std::vector<std::size_t> block_of(static_cast<std::size_t>(d), structure.blocks.size());
  for (std::size_t b = 0; b < structure.blocks.size(); ++b) {
    for (auto i : structure.blocks[b]) {
      if (i >= static_cast<std::size_t>(d)) {
        throw Error(ErrorCode::DimensionMismatch, "dephase: block index exceeds matrix size");
      }
      block_of[i] = b;
    }
  }
  Eigen::MatrixXcd out = rho;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (block_of[static_cast<std::size_t>(i)] != block_of[static_cast<std::size_t>(j)]) {
        out(i, j) = 0.0;
      }
    }
  }
  return out;
}

/// Frobenius norm of the discarded cross-block coherences.
inline double coherence_mass(const Eigen::MatrixXcd& rho, const BlockStructure& structure) {
  return (rho - dephase(rho, structure)).norm();
}

/// Builds a generalized instance from a full density matrix: dephase, then
/// diagonalize each block. Each block's eigenvalues are placed on its indices
/// in descending order; the real diagonal becomes initial_populations.
inline GeneralizedInstance generalized_from_density(const Eigen::MatrixXcd& rho, Vector target,
                                                    Vector cost, Vector conserved,
                                                    double eps_pop = 1e-12,
                                                    double eps_grad = 1e-12) {
  const auto structure = block_decompose(conserved);
  const Eigen::MatrixXcd deph = dephase(rho, structure);
  ProblemInstance inst;
  inst.lambda.assign(static_cast<std::size_t>(rho.rows()), 0.0);
  for (const auto& b : structure.blocks) {
    const auto n = static_cast<Eigen::Index>(b.size());
    Eigen::MatrixXcd sub(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index s = 0; s < n; ++s)
        sub(r, s) = deph(static_cast<Eigen::Index>(b[static_cast<std::size_t>(r)]),
                         static_cast<Eigen::Index>(b[static_cast<std::size_t>(s)]));
    const auto vals = hermitian_eigenvalues(sub);
    for (std::size_t r = 0; r < b.size(); ++r) inst.lambda[b[r]] = std::max(vals[r], 0.0);
  }
  Vector diag(static_cast<std::size_t>(rho.rows()));
  for (Eigen::Index i = 0; i < rho.rows(); ++i) diag[static_cast<std::size_t>(i)] = rho(i, i).real();
  inst.initial_populations = std::move(diag);
  inst.target = std::move(target);
  inst.cost = std::move(cost);
  inst.conserved = std::move(conserved);
  inst.eps_pop = eps_pop;
  inst.eps_grad = eps_grad;
  return make_generalized(std::move(inst));
}

/// Trajectory over the direct product of block polytopes: per-block minimal
/// vertices, then at each step the minimal-gradient av-swap inside any block.
inline OptimalTrajectory build_generalized(const GeneralizedInstance& g) {
  return build_in_blocks(g.base, g.structure.blocks);
}

/// Product over blocks of the per-block distinct-permutation counts.
inline std::uint64_t generalized_vertex_count(const GeneralizedInstance& g,
                                              std::size_t max_block_dim = kDefaultMaxEnumDim) {
  std::uint64_t total = 1;
  for (const auto& lam : g.block_lambdas) {
    if (lam.size() > max_block_dim) {
      throw Error(ErrorCode::DimensionTooLarge,
                  "block of dimension " + std::to_string(lam.size()) + " exceeds cap");
    }
    total *= multinomial_count(degeneracy_class_sizes(lam, g.base.eps_pop));
  }
  return total;
}

/// Every vertex of the product polytope as a full-length vector.
inline VertexSet enumerate_generalized_vertices(const GeneralizedInstance& g,
                                                std::size_t max_block_dim = kDefaultMaxEnumDim,
                                                std::uint64_t max_vertices = 2'000'000) {
  if (generalized_vertex_count(g, max_block_dim) > max_vertices) {
    throw Error(ErrorCode::DimensionTooLarge, "product polytope has too many vertices");
  }
  std::vector<VertexSet> per_block;
  for (const auto& lam : g.block_lambdas) per_block.push_back(enumerate_vertices(lam, g.base.eps_pop, max_block_dim));
  VertexSet out;
  const std::size_t d = g.base.dim();
  std::vector<std::size_t> pick(per_block.size(), 0);
  while (true) {
    PopulationVector v(d);
    for (std::size_t b = 0; b < per_block.size(); ++b) {
      const auto& src = per_block[b].vertices[pick[b]];
      for (std::size_t r = 0; r < src.size(); ++r) v[g.structure.blocks[b][r]] = src[r];
    }
    out.vertices.push_back(std::move(v));
    std::size_t b = per_block.size();
    while (b > 0) {
      --b;
      if (++pick[b] < per_block[b].count()) break;
      pick[b] = 0;
      if (b == 0) return out;
    }
    if (per_block.empty()) return out;
  }
}

}  // namespace trajopt
