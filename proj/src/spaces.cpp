// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#include "cutfeec/spaces.hpp"

#include <numeric>
#include <stdexcept>

namespace cutfeec {

Form2 PolyForm::value(const Vec2 &x) const
{
  Form2 out(2, degree);
  for (int c = 0; c < out.size(); ++c)
    out.coeffs()[c] = coeffs(c, 0) + coeffs(c, 1) * x.x() + coeffs(c, 2) * x.y();
  return out;
}

Form2 PolyForm::derivative(const Vec2 &dir) const
{
  Form2 out(2, degree);
  for (int c = 0; c < out.size(); ++c)
    out.coeffs()[c] = coeffs(c, 1) * dir.x() + coeffs(c, 2) * dir.y();
  return out;
}

Form2 PolyForm::directional(const Vec2 &x, int ell, const Vec2 &dir) const
{
  if (ell == 0)
    return value(x);
  if (ell == 1)
    return derivative(dir);
  return Form2(2, degree);
}

PolyForm exterior_derivative(const PolyForm &w)
{
  PolyForm d;
  d.degree = w.degree + 1;
  d.coeffs.setZero(detail::binomial(2, d.degree), 3);
  if (w.degree == 0)
  {
    d.coeffs(0, 0) = w.coeffs(0, 1);
    d.coeffs(1, 0) = w.coeffs(0, 2);
  }
  else if (w.degree == 1)
  {
    // d(w_x dx + w_y dy) = (∂_x w_y - ∂_y w_x) dx∧dy
    d.coeffs(0, 0) = w.coeffs(1, 1) - w.coeffs(0, 2);
  }
  return d;
}

namespace {

// Barycentric coordinates of T as affine functions: row i = [a_i, b_ix, b_iy].
Eigen::Matrix3d barycentric(const Triangle2<double> &T)
{
  Eigen::Matrix3d V;
  for (int i = 0; i < 3; ++i)
    V.row(i) << 1.0, T[i].x(), T[i].y();
  // λ_i(x_j) = δ_ij  <=>  V * C = I with column i holding the coefficients of λ_i.
  return V.inverse().transpose();
}

}  // namespace

FESpace::FESpace(std::shared_ptr<const ActiveMesh> mesh, int k, int r) : mesh_(std::move(mesh)), k_(k), r_(r)
{
  if (k < 0 || k > 2)
    throw std::invalid_argument("FESpace: form degree must be 0, 1 or 2");
  if (r != 1)
    throw std::invalid_argument("FESpace: only the lowest-order trimmed family (r = 1) is implemented");
  const auto &bg = *mesh_->parent;
  switch (k)
  {
  case 0:
    entities_ = mesh_->active_vertices;
    entity_dof_.assign(bg.vertices.size(), -1);
    break;
  case 1:
    entities_ = mesh_->active_edges;
    entity_dof_.assign(bg.edges.size(), -1);
    break;
  default:
    entities_ = mesh_->active;
    entity_dof_.assign(bg.triangles.size(), -1);
    break;
  }
  for (int i = 0; i < size(); ++i)
    entity_dof_[entities_[i]] = i;

  tri_local_.assign(bg.triangles.size(), -1);
  const int nl = local_size();
  for (std::size_t a = 0; a < mesh_->active.size(); ++a)
  {
    const int t = mesh_->active[a];
    tri_local_[t] = static_cast<int>(a);
    const auto T = bg.triangle(t);
    const Eigen::Matrix3d lam = barycentric(T);
    const auto &tv = bg.triangles[t];
    for (int i = 0; i < nl; ++i)
    {
      PolyForm w;
      w.degree = k;
      w.coeffs.setZero(detail::binomial(2, k), 3);
      if (k == 0)
      {
        w.coeffs.row(0) = lam.row(i);
        dofs_.push_back(entity_dof_[tv[i]]);
      }
      else if (k == 1)
      {
        const int e = bg.triangle_edges[t][i];
        // Local positions of the edge's low and high vertices.
        int p = 0, q = 0;
        for (int l = 0; l < 3; ++l)
        {
          if (tv[l] == bg.edges[e][0])
            p = l;
          if (tv[l] == bg.edges[e][1])
            q = l;
        }
        // λ_p ∇λ_q − λ_q ∇λ_p, componentwise affine.
        for (int c = 0; c < 2; ++c)
        {
          const double gq = lam(q, 1 + c), gp = lam(p, 1 + c);
          w.coeffs.row(c) = lam.row(p) * gq - lam.row(q) * gp;
        }
        dofs_.push_back(entity_dof_[e]);
      }
      else
      {
        w.coeffs(0, 0) = 1.0 / bg.area(t);
        dofs_.push_back(entity_dof_[t]);
      }
      basis_.push_back(w);
    }
  }
}

int FESpace::local_index(int t) const
{
  const int a = (t >= 0 && t < static_cast<int>(tri_local_.size())) ? tri_local_[t] : -1;
  if (a < 0)
    throw std::out_of_range("FESpace: triangle is not active");
  return a;
}

std::span<const int> FESpace::local_dofs(int t) const
{
  const int a = local_index(t);
  return {dofs_.data() + a * local_size(), static_cast<std::size_t>(local_size())};
}

std::span<const PolyForm> FESpace::local_basis(int t) const
{
  const int a = local_index(t);
  return {basis_.data() + a * local_size(), static_cast<std::size_t>(local_size())};
}

std::vector<Form2> FESpace::eval_basis(int t, const Vec2 &x, int ell, const Vec2 &normal) const
{
  std::vector<Form2> out;
  for (const auto &w : local_basis(t))
    out.push_back(w.directional(x, ell, normal));
  return out;
}

Form2 FESpace::eval(int t, const Eigen::VectorXd &c, const Vec2 &x) const
{
  Form2 out(2, k_);
  const auto dofs = local_dofs(t);
  const auto basis = local_basis(t);
  for (std::size_t i = 0; i < dofs.size(); ++i)
    out += c[dofs[i]] * basis[i].value(x);
  return out;
}

namespace {

// DOF functional of the local entity i of triangle t applied to a form field.
double dof_functional(const BackgroundMesh &bg, int k, int t, int i, const FormField &f)
{
  const auto &tv = bg.triangles[t];
  if (k == 0)
    return f(bg.vertices[tv[i]]).coeffs()[0];
  if (k == 1)
  {
    const int e = bg.triangle_edges[t][i];
    const Vec2 a = bg.vertices[bg.edges[e][0]], b = bg.vertices[bg.edges[e][1]];
    const Vec2 tangent = b - a;  // line integral ∫_0^1 w(a + s(b-a))·(b-a) ds
    const auto rule = facet_rule<double>(a, b, 5);
    return rule.integrate([&](const Vec2 &x) { return f(x).coeffs().dot(tangent) / tangent.norm(); });
  }
  return triangle_rule(bg.triangle(t), 4).integrate([&](const Vec2 &x) { return f(x).coeffs()[0]; });
}

}  // namespace

double FESpace::unisolvence_defect() const
{
  const auto &bg = *mesh_->parent;
  double defect = 0;
  for (int t : mesh_->active)
  {
    const auto basis = local_basis(t);
    for (int i = 0; i < local_size(); ++i)
      for (int j = 0; j < local_size(); ++j)
      {
        const PolyForm &w = basis[j];
        const double value = dof_functional(bg, k_, t, i, [&](const Vec2 &x) { return w.value(x); });
        defect = std::max(defect, std::abs(value - (i == j ? 1.0 : 0.0)));
      }
  }
  return defect;
}

Eigen::VectorXd FESpace::interpolate(const FormField &f) const
{
  const auto &bg = *mesh_->parent;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(size());
  std::vector<char> done(size(), 0);
  for (int t : mesh_->active)
  {
    const auto dofs = local_dofs(t);
    for (int i = 0; i < local_size(); ++i)
    {
      if (done[dofs[i]])
        continue;
      c[dofs[i]] = dof_functional(bg, k_, t, i, f);
      done[dofs[i]] = 1;
    }
  }
  return c;
}

CoboundaryMatrix coboundary(const FESpace &sp_k, const FESpace &sp_k1)
{
  if (sp_k1.degree() != sp_k.degree() + 1 || &sp_k.mesh() != &sp_k1.mesh())
    throw std::invalid_argument("coboundary: need spaces of degrees k and k+1 on the same mesh");
  const auto &am = sp_k.mesh();
  const auto &bg = *am.parent;
  std::vector<Eigen::Triplet<int>> trip;
  if (sp_k.degree() == 0)
  {
    for (int e : am.active_edges)
    {
      const int row = sp_k1.dof_of_entity(e);
      trip.emplace_back(row, sp_k.dof_of_entity(bg.edges[e][1]), 1);
      trip.emplace_back(row, sp_k.dof_of_entity(bg.edges[e][0]), -1);
    }
  }
  else
  {
    for (int t : am.active)
    {
      const auto &tv = bg.triangles[t];
      const int row = sp_k1.dof_of_entity(t);
      for (int l = 0; l < 3; ++l)
      {
        // Counter-clockwise boundary edge tv[l] -> tv[l+1] is local edge (l + 2) % 3.
        const int a = tv[l], b = tv[(l + 1) % 3];
        const int e = bg.triangle_edges[t][(l + 2) % 3];
        trip.emplace_back(row, sp_k.dof_of_entity(e), a < b ? 1 : -1);
      }
    }
  }
  CoboundaryMatrix d;
  d.from_degree = sp_k.degree();
  d.D.resize(sp_k1.size(), sp_k.size());
  d.D.setFromTriplets(trip.begin(), trip.end());
  return d;
}

Eigen::SparseMatrix<double> mass_matrix(const FESpace &sp, Region region, int degree)
{
  const auto &am = sp.mesh();
  const auto &bg = *am.parent;
  std::vector<Eigen::Triplet<double>> trip;
  for (int t : am.active)
  {
    const auto rule = region == Region::Physical ? am.physical_rule(t, degree) : triangle_rule(bg.triangle(t), degree);
    if (rule.empty())
      continue;
    const auto dofs = sp.local_dofs(t);
    const auto basis = sp.local_basis(t);
    const int nl = sp.local_size();
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(nl, nl);
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      std::vector<Form2> values;
      for (const auto &w : basis)
        values.push_back(w.value(rule.points[q]));
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j)
          local(i, j) += rule.weights[q] * inner(values[i], values[j]);
    }
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j)
        trip.emplace_back(dofs[i], dofs[j], local(i, j));
  }
  Eigen::SparseMatrix<double> M(sp.size(), sp.size());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

Eigen::VectorXd load_vector(const FESpace &sp, const FormField &f, int degree)
{
  const auto &am = sp.mesh();
  Eigen::VectorXd F = Eigen::VectorXd::Zero(sp.size());
  for (int t : am.active)
  {
    const auto rule = am.physical_rule(t, degree);
    const auto dofs = sp.local_dofs(t);
    const auto basis = sp.local_basis(t);
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const Form2 fx = f(rule.points[q]);
      for (std::size_t i = 0; i < dofs.size(); ++i)
        F[dofs[i]] += rule.weights[q] * inner(fx, basis[i].value(rule.points[q]));
    }
  }
  return F;
}

int connected_components(const ActiveMesh &am)
{
  const auto &bg = *am.parent;
  std::vector<int> parent(bg.vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v)
      v = parent[v] = parent[parent[v]];
    return v;
  };
  for (int e : am.active_edges)
    parent[find(bg.edges[e][0])] = find(bg.edges[e][1]);
  int count = 0;
  for (int v : am.active_vertices)
    count += find(v) == v;
  return count;
}

}  // namespace cutfeec
