// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CUTFEEC_GHOST_HPP
#define CUTFEEC_GHOST_HPP

#include "cutfeec/spaces.hpp"

#include <Eigen/Sparse>

#include <optional>
#include <vector>

namespace cutfeec {

class AssemblyError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// How the facet integrand of the penalty is evaluated.
enum class GhostIntegrand
{
  FullJump,        // inner product of the full Alt^k jumps
  TraceDecomposed  // γ_n[·]∧★γ_n[·] + γ[·]∧★γ[·] in the facet frame
};

struct FacetSet
{
  enum class Kind
  {
    Full,
    Macro
  };
  Kind kind = Kind::Full;
  double delta = 0.25;

  static FacetSet full() { return {Kind::Full, 1.0}; }
  static FacetSet macro(double delta) { return {Kind::Macro, delta}; }
};

std::vector<StabFacet> select_facets(const ActiveMesh &am, const FacetSet &set);

/// Local penalty matrix of one facet over the union of the two neighbours' DOFs.
struct FacetMatrix
{
  std::vector<int> dofs;
  Eigen::MatrixXd S;
};

FacetMatrix facet_penalty(const FESpace &sp, const StabFacet &facet, double eta,
                          GhostIntegrand integrand = GhostIntegrand::FullJump, int facet_degree = 2);

/// Σ_F Σ_ℓ η h_F^{2ℓ+1} ∫_F (jump terms of ∇_n^(ℓ)); throws AssemblyError on a boundary facet.
Eigen::SparseMatrix<double> assemble_ghost(const FESpace &sp, const std::vector<StabFacet> &facets, double eta,
                                           GhostIntegrand integrand = GhostIntegrand::FullJump,
                                           int facet_degree = 2);

struct Spectrum
{
  double min = 0;
  double max = 0;
};

/// Matrices of (·,·)_Ω, s(·,·), (·,·)_s and (·,·)_{Ω_h} on one space.
struct GhostGram
{
  int k = 0;
  double eta = 1.0;
  FacetSet facet_set;
  std::vector<StabFacet> facets;
  Eigen::SparseMatrix<double> M_phys;
  Eigen::SparseMatrix<double> S;
  Eigen::SparseMatrix<double> M_s;
  Eigen::SparseMatrix<double> M_active;
};

struct GramOptions
{
  double eta = 1.0;
  FacetSet facet_set = FacetSet::full();
  int volume_degree = 2;
  int facet_degree = 2;
};

GhostGram ghost_gram(const FESpace &sp, const GramOptions &options = {});

/// Extreme eigenvalues of A x = λ B x for symmetric A and symmetric positive definite B.
/// Lanczos iteration in the B inner product with full reorthogonalisation.
Spectrum generalized_extremes(const Eigen::SparseMatrix<double> &A, const Eigen::SparseMatrix<double> &B,
                              int max_iterations = 300, double tolerance = 1e-10);

/// Dense reference: Cholesky of B and a symmetric eigensolve.
Spectrum generalized_extremes_dense(const Eigen::MatrixXd &A, const Eigen::MatrixXd &B);

/// Throws AssemblyError if λ_min(M_s) < 1e-13 λ_max(M_s).
void check_definite(const GhostGram &gram);

}  // namespace cutfeec

#endif  // CUTFEEC_GHOST_HPP
