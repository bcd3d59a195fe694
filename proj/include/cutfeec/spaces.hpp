// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CUTFEEC_SPACES_HPP
#define CUTFEEC_SPACES_HPP

#include "cutfeec/forms.hpp"
#include "cutfeec/geometry.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace cutfeec {

using Form2 = AltForm<double>;

/// Form on R^2 whose components are affine: coeffs(c, :) = [a, b_x, b_y] means
/// component c equals a + b_x x + b_y y. Valid (as a polynomial extension) everywhere.
struct PolyForm
{
  int degree = 0;
  Eigen::Matrix<double, Eigen::Dynamic, 3, 0, 2, 3> coeffs;

  Form2 value(const Vec2 &x) const;
  /// Directional derivative along `dir` (constant for affine components).
  Form2 derivative(const Vec2 &dir) const;
  /// ∇_n^(ℓ) at x: ℓ = 0 value, ℓ = 1 derivative, zero for ℓ >= 2.
  Form2 directional(const Vec2 &x, int ell, const Vec2 &dir) const;
};

PolyForm exterior_derivative(const PolyForm &w);

enum class Region
{
  Physical,  // Ω, by cut quadrature
  Active     // Ω_h, the union of active triangles
};

using FormField = std::function<Form2(const Vec2 &)>;

/// Lowest-order trimmed (Whitney) space P⁻₁Λᵏ on the active mesh, k ∈ {0, 1, 2}.
/// DOFs are the active vertices, edges (oriented low -> high vertex index) or triangles.
class FESpace
{
public:
  FESpace(std::shared_ptr<const ActiveMesh> mesh, int k, int r = 1);

  int degree() const { return k_; }
  int poly_degree() const { return r_; }
  int size() const { return static_cast<int>(entities_.size()); }
  int local_size() const { return k_ == 2 ? 1 : 3; }

  const ActiveMesh &mesh() const { return *mesh_; }
  std::shared_ptr<const ActiveMesh> mesh_ptr() const { return mesh_; }

  /// Background entity (vertex, edge or triangle id) of each DOF.
  const std::vector<int> &entities() const { return entities_; }
  int dof_of_entity(int entity) const { return entity_dof_[entity]; }

  /// Global DOFs of the active background triangle t, in local basis order.
  std::span<const int> local_dofs(int t) const;
  std::span<const PolyForm> local_basis(int t) const;

  /// ∇_n^(ℓ) of every local basis function of t at x (polynomial extension outside t).
  std::vector<Form2> eval_basis(int t, const Vec2 &x, int ell, const Vec2 &normal) const;
  /// Value at x ∈ closure(t) of the discrete form with DOF vector c.
  Form2 eval(int t, const Eigen::VectorXd &c, const Vec2 &x) const;

  /// Max deviation from identity of the DOF-functional matrix over all triangles.
  double unisolvence_defect() const;

  /// Canonical interpolant (vertex values, edge line integrals, triangle integrals).
  Eigen::VectorXd interpolate(const FormField &f) const;

private:
  int local_index(int t) const;

  std::shared_ptr<const ActiveMesh> mesh_;
  int k_;
  int r_;
  std::vector<int> entities_;
  std::vector<int> entity_dof_;
  std::vector<int> tri_local_;   // background triangle -> active position, -1 if inactive
  std::vector<int> dofs_;        // active position * local_size + i
  std::vector<PolyForm> basis_;  // same layout
};

/// Signed incidence matrix realising d : V^k -> V^{k+1} on the DOFs.
struct CoboundaryMatrix
{
  int from_degree = 0;
  Eigen::SparseMatrix<int> D;

  Eigen::SparseMatrix<double> as_double() const { return D.cast<double>(); }
};

CoboundaryMatrix coboundary(const FESpace &sp_k, const FESpace &sp_k1);

/// M_ij = ∫_B inner(φ_i, φ_j) with B = Ω (cut quadrature) or Ω_h.
Eigen::SparseMatrix<double> mass_matrix(const FESpace &sp, Region region, int degree = 2);

/// F_i = ∫_Ω inner(f, φ_i) by cut quadrature.
Eigen::VectorXd load_vector(const FESpace &sp, const FormField &f, int degree = 2);

/// Number of connected components of the active mesh through shared edges.
int connected_components(const ActiveMesh &am);

}  // namespace cutfeec

#endif  // CUTFEEC_SPACES_HPP
