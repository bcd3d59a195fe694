// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#include "cutfeec/ghost.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>

namespace cutfeec {

std::vector<StabFacet> select_facets(const ActiveMesh &am, const FacetSet &set)
{
  if (set.kind == FacetSet::Kind::Full)
    return am.stab_facets;
  return macro_facets(am, set.delta);
}

FacetMatrix facet_penalty(const FESpace &sp, const StabFacet &facet, double eta, GhostIntegrand integrand,
                          int facet_degree)
{
  const auto &am = sp.mesh();
  const auto &bg = *am.parent;
  if (facet.from < 0 || facet.to < 0 || !am.is_active(facet.from) || !am.is_active(facet.to))
    throw AssemblyError("facet_penalty: facet " + std::to_string(facet.edge) +
                        " does not have two active neighbours");

  FacetMatrix out;
  const auto dofs1 = sp.local_dofs(facet.from);
  const auto dofs2 = sp.local_dofs(facet.to);
  out.dofs.assign(dofs1.begin(), dofs1.end());
  for (int d : dofs2)
    if (std::find(out.dofs.begin(), out.dofs.end(), d) == out.dofs.end())
      out.dofs.push_back(d);
  std::sort(out.dofs.begin(), out.dofs.end());
  const int nd = static_cast<int>(out.dofs.size());
  auto slot = [&](int dof) {
    return static_cast<int>(std::lower_bound(out.dofs.begin(), out.dofs.end(), dof) - out.dofs.begin());
  };

  const Vec2 a = bg.vertices[bg.edges[facet.edge][0]], b = bg.vertices[bg.edges[facet.edge][1]];
  const double hF = (b - a).norm();
  PointN<double> normal = facet.normal, tangent_origin = a;
  FacetFrame<double>::Tangents tangents(2, 1);
  tangents.col(0) = (b - a) / hF;
  const FacetFrame<double> frame(normal, tangents, tangent_origin);

  const auto rule = facet_rule<double>(a, b, facet_degree);
  const auto basis1 = sp.local_basis(facet.from);
  const auto basis2 = sp.local_basis(facet.to);
  out.S = Eigen::MatrixXd::Zero(nd, nd);
  for (int ell = 0; ell <= sp.poly_degree(); ++ell)
  {
    const double scale = eta * std::pow(hF, 2 * ell + 1);
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const Vec2 &x = rule.points[q];
      std::vector<Form2> jump(nd, Form2(2, sp.degree()));
      for (std::size_t i = 0; i < dofs1.size(); ++i)
        jump[slot(dofs1[i])] += basis1[i].directional(x, ell, facet.normal);
      for (std::size_t i = 0; i < dofs2.size(); ++i)
        jump[slot(dofs2[i])] -= basis2[i].directional(x, ell, facet.normal);

      if (integrand == GhostIntegrand::FullJump)
      {
        for (int i = 0; i < nd; ++i)
          for (int j = 0; j < nd; ++j)
            out.S(i, j) += scale * rule.weights[q] * inner(jump[i], jump[j]);
      }
      else
      {
        std::vector<Form2> tr, ntr;
        for (const auto &J : jump)
        {
          tr.push_back(trace(J, frame));
          ntr.push_back(normal_trace(J, frame));
        }
        for (int i = 0; i < nd; ++i)
          for (int j = 0; j < nd; ++j)
            out.S(i, j) += scale * rule.weights[q] * (inner(ntr[i], ntr[j]) + inner(tr[i], tr[j]));
      }
    }
  }
  return out;
}

Eigen::SparseMatrix<double> assemble_ghost(const FESpace &sp, const std::vector<StabFacet> &facets, double eta,
                                           GhostIntegrand integrand, int facet_degree)
{
  if (!(eta > 0))
    throw AssemblyError("assemble_ghost: penalty parameter must be positive");
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto &f : facets)
  {
    const auto local = facet_penalty(sp, f, eta, integrand, facet_degree);
    const int nd = static_cast<int>(local.dofs.size());
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j)
        trip.emplace_back(local.dofs[i], local.dofs[j], local.S(i, j));
  }
  Eigen::SparseMatrix<double> S(sp.size(), sp.size());
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

GhostGram ghost_gram(const FESpace &sp, const GramOptions &options)
{
  GhostGram g;
  g.k = sp.degree();
  g.eta = options.eta;
  g.facet_set = options.facet_set;
  g.facets = select_facets(sp.mesh(), options.facet_set);
  g.M_phys = mass_matrix(sp, Region::Physical, options.volume_degree);
  g.M_active = mass_matrix(sp, Region::Active, options.volume_degree);
  g.S = assemble_ghost(sp, g.facets, options.eta, GhostIntegrand::FullJump, options.facet_degree);
  g.M_s = g.M_phys + g.S;
  return g;
}

namespace {

Eigen::VectorXd tridiagonal_eigenvalues(const std::vector<double> &alpha, const std::vector<double> &beta,
                                        Eigen::MatrixXd *vectors)
{
  const int m = static_cast<int>(alpha.size());
  Eigen::MatrixXd Tm = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
  {
    Tm(i, i) = alpha[i];
    if (i + 1 < m)
      Tm(i, i + 1) = Tm(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tm);
  if (vectors)
    *vectors = es.eigenvectors();
  return es.eigenvalues();
}

}  // namespace

Spectrum generalized_extremes(const Eigen::SparseMatrix<double> &A, const Eigen::SparseMatrix<double> &B,
                              int max_iterations, double tolerance)
{
  const int n = static_cast<int>(A.rows());
  if (n == 0)
    return {};
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol(B);
  if (chol.info() != Eigen::Success)
    throw AssemblyError("generalized_extremes: B is not positive definite");

  const int steps = std::min(n, max_iterations);
  Eigen::MatrixXd V(n, steps + 1);
  std::vector<double> alpha, beta;

  std::mt19937 gen(20260412u);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = dist(gen);
  v /= std::sqrt(v.dot(B * v));
  V.col(0) = v;

  Spectrum result;
  for (int j = 0; j < steps; ++j)
  {
    const Eigen::VectorXd Av = A * V.col(j);
    Eigen::VectorXd w = chol.solve(Av);
    alpha.push_back(V.col(j).dot(Av));
    // Full reorthogonalisation in the B inner product, applied twice.
    for (int pass = 0; pass < 2; ++pass)
    {
      const Eigen::VectorXd Bw = B * w;
      const Eigen::VectorXd coeffs = V.leftCols(j + 1).transpose() * Bw;
      w -= V.leftCols(j + 1) * coeffs;
    }
    const double b = std::sqrt(std::max(0.0, w.dot(B * w)));

    const bool last = j + 1 == steps;
    const bool check = last || (j + 1) % 10 == 0 || b < 1e-14 * std::abs(alpha[0]);
    if (check)
    {
      Eigen::MatrixXd S;
      const Eigen::VectorXd theta = tridiagonal_eigenvalues(alpha, beta, &S);
      result = {theta[0], theta[theta.size() - 1]};
      const int m = static_cast<int>(theta.size());
      const double scale = std::max(std::abs(theta[0]), std::abs(theta[m - 1]));
      const double res_min = std::abs(b * S(m - 1, 0));
      const double res_max = std::abs(b * S(m - 1, m - 1));
      // Residual bounds for the two extreme Ritz pairs.
      if (res_min <= tolerance * scale && res_max <= tolerance * scale)
        return result;
      if (b < 1e-14 * scale)
        return result;
    }
    if (last)
      break;
    beta.push_back(b);
    V.col(j + 1) = w / b;
  }
  return result;
}

Spectrum generalized_extremes_dense(const Eigen::MatrixXd &A, const Eigen::MatrixXd &B)
{
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw AssemblyError("generalized_extremes_dense: eigensolver failed");
  const auto &ev = es.eigenvalues();
  return {ev[0], ev[ev.size() - 1]};
}

void check_definite(const GhostGram &gram)
{
  Eigen::SparseMatrix<double> I(gram.M_s.rows(), gram.M_s.cols());
  I.setIdentity();
  const Spectrum sp = generalized_extremes(gram.M_s, I);
  if (!(sp.min >= 1e-13 * sp.max))
    throw AssemblyError("ghost_gram: M_s is numerically singular (λ_min/λ_max = " +
                        std::to_string(sp.min / sp.max) + ")");
}

}  // namespace cutfeec
