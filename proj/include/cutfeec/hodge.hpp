// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CUTFEEC_HODGE_HPP
#define CUTFEEC_HODGE_HPP

#include "cutfeec/ghost.hpp"
#include "cutfeec/spaces.hpp"

#include <Eigen/Sparse>

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>

namespace cutfeec {

class SolverError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a singular value lies within a factor 10 of the rank cutoff.
class RankError : public std::runtime_error
{
public:
  RankError(const std::string &what, double gap) : std::runtime_error(what), gap(gap) {}
  double gap;
};

struct RankDecision
{
  int rank = 0;
  double sigma_max = 0;
  double smallest_kept = 0;       // 0 if nothing was kept
  double largest_dropped = 0;     // 0 if nothing was dropped
  /// smallest_kept / largest_dropped (infinite when the dropped ones are exact zeros)
  double gap() const;
};

/// Columns are M-orthonormal DOF vectors spanning {ρ : Dₖρ = 0, (ρ, D_{k-1}τ)_M = 0 ∀τ}.
struct HarmonicBasis
{
  int k = 0;
  Eigen::MatrixXd vectors;
  int dim = 0;
  int kernel_dim = 0;  // dim Ker D_k
  int exact_rank = 0;  // rank D_{k-1}
  RankDecision kernel_rank;
  RankDecision exact_rank_decision;
};

inline constexpr double kRankCutoff = 1e-9;

/// `D_km1` (null for k = 0) maps V^{k-1} -> V^k, `D_k` (null for the top degree) maps V^k -> V^{k+1}.
HarmonicBasis harmonic_basis(int k, const Eigen::SparseMatrix<double> &M, const Eigen::SparseMatrix<double> *D_km1,
                             const Eigen::SparseMatrix<double> *D_k, double cutoff = kRankCutoff);

/// Orthonormal (Euclidean) basis of the kernel of a dense matrix by SVD.
Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd &A, double cutoff, RankDecision *decision = nullptr);

/// Inner-product matrices and coboundaries of the complex around degree k.
struct MixedOperators
{
  int k = 0;
  const Eigen::SparseMatrix<double> *M_km1 = nullptr;
  const Eigen::SparseMatrix<double> *M_k = nullptr;
  const Eigen::SparseMatrix<double> *M_kp1 = nullptr;
  const Eigen::SparseMatrix<double> *D_km1 = nullptr;
  const Eigen::SparseMatrix<double> *D_k = nullptr;
};

/// Symmetric saddle-point system, unknowns ordered (σ, η, λ).
struct MixedSystem
{
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  int n_sigma = 0;
  int n_eta = 0;
  int n_lambda = 0;
};

MixedSystem assemble_mixed(const MixedOperators &ops, const HarmonicBasis &H, const Eigen::VectorXd &load);

struct MixedSolution
{
  Eigen::VectorXd sigma;
  Eigen::VectorXd eta;
  Eigen::VectorXd lambda_coeffs;
  double residual = 0;           // ‖A x − b‖₂
  double relative_residual = 0;  // residual / ‖b‖₂, or the absolute residual when b = 0
  MixedSystem system;
};

inline constexpr double kSolverTolerance = 1e-10;

/// Sparse LU with partial pivoting; throws SolverError on a singular factorisation,
/// a non-finite solution, or a relative residual above `tolerance`.
MixedSolution solve_mixed(const MixedSystem &system, double tolerance = kSolverTolerance);

/// Hager–Higham estimate of ‖A‖₁ ‖A⁻¹‖₁ using a sparse LU factorisation.
double condition_estimate(const Eigen::SparseMatrix<double> &A);

/// ‖A‖₁ ‖A⁻¹‖₁ with an explicit dense inverse.
double condition_dense(const Eigen::MatrixXd &A);

/// Closed-form fields of a manufactured solution; empty functions are treated as zero.
struct ExactSolution
{
  FormField f;
  FormField eta;
  FormField d_eta;
  FormField sigma;
  FormField d_sigma;
  FormField lambda;
};

struct ErrorRecord
{
  double eta = 0;
  double d_eta = 0;
  double sigma = 0;
  double d_sigma = 0;
  double lambda = 0;
};

struct HodgeOptions
{
  GramOptions gram;
  bool stabilize = true;
  int load_degree = 2;
  int error_degree = 4;
};

/// Unfitted mixed Hodge–Laplace problem of degree k on one active mesh.
class HodgeLaplace
{
public:
  HodgeLaplace(std::shared_ptr<const ActiveMesh> mesh, int k, const HodgeOptions &options = {});

  int k() const { return k_; }
  const HodgeOptions &options() const { return options_; }
  const ActiveMesh &mesh() const { return *mesh_; }
  bool has_degree(int degree) const { return degree >= std::max(0, k_ - 1) && degree <= std::min(2, k_ + 1); }

  const FESpace &space(int degree) const { return *spaces_.at(degree); }
  const GhostGram &gram(int degree) const;
  /// The inner product used by the scheme: M_s, or M_phys when unstabilised.
  const Eigen::SparseMatrix<double> &inner_product(int degree) const;
  const Eigen::SparseMatrix<double> &coboundary(int from_degree) const { return D_.at(from_degree); }
  const HarmonicBasis &harmonic() const { return harmonic_; }

  MixedSystem assemble(const FormField &f) const;
  MixedSolution solve(const FormField &f) const;

  ErrorRecord errors(const MixedSolution &sol, const ExactSolution &exact) const;
  /// ‖x‖ in the scheme's inner product of the given degree.
  double norm(int degree, const Eigen::VectorXd &x) const;
  /// L2(Ω) norm of a closed-form field of the given degree.
  double physical_norm(int degree, const FormField &f) const;
  /// Projection of f onto V^k in the scheme's inner product.
  Eigen::VectorXd project(const FormField &f) const;

private:
  std::shared_ptr<const ActiveMesh> mesh_;
  int k_;
  HodgeOptions options_;
  std::array<std::unique_ptr<FESpace>, 3> spaces_;
  std::array<std::optional<GhostGram>, 3> grams_;
  std::array<Eigen::SparseMatrix<double>, 2> D_;
  HarmonicBasis harmonic_;
};

}  // namespace cutfeec

#endif  // CUTFEEC_HODGE_HPP
