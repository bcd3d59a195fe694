// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#include "cutfeec/hodge.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <cstdio>
#include <limits>

namespace cutfeec {

double RankDecision::gap() const
{
  if (largest_dropped <= 0)
    return std::numeric_limits<double>::infinity();
  return smallest_kept / largest_dropped;
}

namespace {

std::string format_double(double x)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

RankDecision decide_rank(const Eigen::VectorXd &sv, double cutoff)
{
  RankDecision d;
  d.sigma_max = sv.size() ? sv.maxCoeff() : 0.0;
  const double threshold = cutoff * d.sigma_max;
  for (int i = 0; i < sv.size(); ++i)
  {
    const double s = sv[i];
    if (d.sigma_max > 0 && s > threshold / 10 && s < threshold * 10)
      throw RankError("rank decision is ambiguous: singular value " + format_double(s / d.sigma_max) +
                          " (relative) lies within a factor 10 of the cutoff " + format_double(cutoff),
                      s / threshold);
    if (d.sigma_max > 0 && s > threshold)
    {
      ++d.rank;
      d.smallest_kept = d.smallest_kept == 0 ? s : std::min(d.smallest_kept, s);
    }
    else
      d.largest_dropped = std::max(d.largest_dropped, s);
  }
  return d;
}

}  // namespace

Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd &A, double cutoff, RankDecision *decision)
{
  const Eigen::Index n = A.cols();
  if (A.rows() == 0 || n == 0)
  {
    if (decision)
      *decision = {};
    return Eigen::MatrixXd::Identity(n, n);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const RankDecision d = decide_rank(svd.singularValues(), cutoff);
  if (decision)
    *decision = d;
  return svd.matrixV().rightCols(n - d.rank);
}

HarmonicBasis harmonic_basis(int k, const Eigen::SparseMatrix<double> &M, const Eigen::SparseMatrix<double> *D_km1,
                             const Eigen::SparseMatrix<double> *D_k, double cutoff)
{
  const Eigen::Index n = M.rows();
  if (D_km1 && D_km1->rows() != n)
    throw std::invalid_argument("harmonic_basis: D_{k-1} has the wrong number of rows");
  if (D_k && D_k->cols() != n)
    throw std::invalid_argument("harmonic_basis: D_k has the wrong number of columns");

  HarmonicBasis hb;
  hb.k = k;
  Eigen::MatrixXd K = D_k ? kernel_basis(Eigen::MatrixXd(*D_k), cutoff, &hb.kernel_rank)
                          : Eigen::MatrixXd::Identity(n, n);
  hb.kernel_dim = static_cast<int>(K.cols());

  Eigen::MatrixXd H = K;
  if (D_km1 && D_km1->cols() > 0 && K.cols() > 0)
  {
    // ρ = K y is orthogonal to range D_{k-1} iff y is in the left null space of Kᵀ M D_{k-1}.
    const Eigen::MatrixXd C = K.transpose() * (M * Eigen::MatrixXd(*D_km1));
    const Eigen::MatrixXd Y = kernel_basis(C.transpose(), cutoff, &hb.exact_rank_decision);
    hb.exact_rank = hb.exact_rank_decision.rank;
    H = K * Y;
  }
  hb.dim = static_cast<int>(H.cols());
  if (hb.kernel_dim != hb.exact_rank + hb.dim)
    throw RankError("harmonic_basis: dim Ker D_k != rank D_{k-1} + dim of the harmonic space", 0);

  if (hb.dim > 0)
  {
    const Eigen::MatrixXd G = H.transpose() * (M * H);
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
      throw RankError("harmonic_basis: inner product is not definite on the harmonic space", 0);
    // H L^{-T} has Gram matrix L^{-1} G L^{-T} = I.
    H = llt.matrixU().solve<Eigen::OnTheRight>(H);
  }
  hb.vectors = H;
  return hb;
}

MixedSystem assemble_mixed(const MixedOperators &ops, const HarmonicBasis &H, const Eigen::VectorXd &load)
{
  if (!ops.M_k)
    throw std::invalid_argument("assemble_mixed: missing inner product of degree k");
  const bool has_sigma = ops.k > 0;
  const bool has_deta = ops.k < 2;
  if (has_sigma && (!ops.M_km1 || !ops.D_km1))
    throw std::invalid_argument("assemble_mixed: missing degree k-1 operators");
  if (has_deta && (!ops.M_kp1 || !ops.D_k))
    throw std::invalid_argument("assemble_mixed: missing degree k+1 operators");

  const auto &Mk = *ops.M_k;
  MixedSystem sys;
  sys.n_sigma = has_sigma ? static_cast<int>(ops.M_km1->rows()) : 0;
  sys.n_eta = static_cast<int>(Mk.rows());
  sys.n_lambda = H.dim;
  if (load.size() != sys.n_eta || H.vectors.rows() != (H.dim ? sys.n_eta : H.vectors.rows()))
    throw std::invalid_argument("assemble_mixed: size mismatch");
  const int os = 0, oe = sys.n_sigma, ol = sys.n_sigma + sys.n_eta;
  const int N = ol + sys.n_lambda;

  std::vector<Eigen::Triplet<double>> trip;
  auto add_sparse = [&](const Eigen::SparseMatrix<double> &B, int r0, int c0, double scale) {
    for (int col = 0; col < B.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(B, col); it; ++it)
        trip.emplace_back(r0 + static_cast<int>(it.row()), c0 + static_cast<int>(it.col()), scale * it.value());
  };

  if (has_sigma)
  {
    const Eigen::SparseMatrix<double> B = Mk * (*ops.D_km1);  // n_eta × n_sigma
    add_sparse(*ops.M_km1, os, os, -1.0);
    add_sparse(B, oe, os, 1.0);
    add_sparse(Eigen::SparseMatrix<double>(B.transpose()), os, oe, 1.0);
  }
  if (has_deta)
  {
    const Eigen::SparseMatrix<double> L = Eigen::SparseMatrix<double>(ops.D_k->transpose()) * (*ops.M_kp1) * (*ops.D_k);
    add_sparse(L, oe, oe, 1.0);
  }
  if (sys.n_lambda > 0)
  {
    const Eigen::MatrixXd MH = Mk * H.vectors;
    for (int j = 0; j < sys.n_lambda; ++j)
      for (int i = 0; i < sys.n_eta; ++i)
        if (MH(i, j) != 0)
        {
          trip.emplace_back(oe + i, ol + j, MH(i, j));
          trip.emplace_back(ol + j, oe + i, MH(i, j));
        }
  }
  sys.A.resize(N, N);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  sys.A.makeCompressed();
  sys.b = Eigen::VectorXd::Zero(N);
  sys.b.segment(oe, sys.n_eta) = load;
  return sys;
}

MixedSolution solve_mixed(const MixedSystem &system, double tolerance)
{
  const auto &A = system.A;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw SolverError("solve_mixed: LU factorisation failed: " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(system.b);
  // One step of iterative refinement.
  const Eigen::VectorXd r0 = system.b - A * x;
  x += lu.solve(r0);
  if (!x.allFinite())
    throw SolverError("solve_mixed: solution is not finite");

  MixedSolution sol;
  sol.residual = (A * x - system.b).norm();
  const double bn = system.b.norm();
  sol.relative_residual = bn > 0 ? sol.residual / bn : sol.residual;
  if (!(sol.relative_residual <= tolerance))
    throw SolverError("solve_mixed: relative residual " + format_double(sol.relative_residual) +
                      " exceeds " + format_double(tolerance));
  sol.sigma = x.segment(0, system.n_sigma);
  sol.eta = x.segment(system.n_sigma, system.n_eta);
  sol.lambda_coeffs = x.segment(system.n_sigma + system.n_eta, system.n_lambda);
  sol.system = system;
  return sol;
}

namespace {

double norm1(const Eigen::SparseMatrix<double> &A)
{
  double best = 0;
  for (int col = 0; col < A.outerSize(); ++col)
  {
    double s = 0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it)
      s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

Eigen::VectorXd sign_of(const Eigen::VectorXd &y)
{
  return y.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
}

}  // namespace

double condition_estimate(const Eigen::SparseMatrix<double> &A)
{
  const Eigen::Index n = A.rows();
  if (n == 0)
    return 0;
  Eigen::SparseMatrix<double> Ac = A;
  Ac.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(Ac);
  lu.factorize(Ac);
  if (lu.info() != Eigen::Success)
    return std::numeric_limits<double>::infinity();
  auto solve = [&](const Eigen::VectorXd &b) -> Eigen::VectorXd { return lu.solve(b); };
  auto solve_t = [&](const Eigen::VectorXd &b) -> Eigen::VectorXd { return lu.transpose().solve(b); };

  // Hager's method for ‖A⁻¹‖₁ with Higham's safeguards.
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd y = solve(x);
  double est = y.lpNorm<1>();
  if (n > 1)
  {
    Eigen::VectorXd xi = sign_of(y);
    Eigen::VectorXd z = solve_t(xi);
    for (int iter = 0; iter < 5; ++iter)
    {
      Eigen::Index j;
      const double zmax = z.cwiseAbs().maxCoeff(&j);
      if (iter > 0 && zmax <= z.dot(x))
        break;
      x.setZero();
      x[j] = 1.0;
      y = solve(x);
      const double old = est;
      est = y.lpNorm<1>();
      const Eigen::VectorXd xi_new = sign_of(y);
      if (xi_new == xi || est <= old)
      {
        est = std::max(est, old);
        break;
      }
      xi = xi_new;
      z = solve_t(xi);
    }
    Eigen::VectorXd alt(n);
    for (Eigen::Index i = 0; i < n; ++i)
      alt[i] = (i % 2 ? -1.0 : 1.0) * (1.0 + static_cast<double>(i) / static_cast<double>(n - 1));
    est = std::max(est, 2.0 * solve(alt).lpNorm<1>() / (3.0 * static_cast<double>(n)));
  }
  if (!std::isfinite(est))
    return std::numeric_limits<double>::infinity();
  return norm1(Ac) * est;
}

double condition_dense(const Eigen::MatrixXd &A)
{
  const Eigen::MatrixXd inv = A.fullPivLu().inverse();
  return A.cwiseAbs().colwise().sum().maxCoeff() * inv.cwiseAbs().colwise().sum().maxCoeff();
}

HodgeLaplace::HodgeLaplace(std::shared_ptr<const ActiveMesh> mesh, int k, const HodgeOptions &options)
    : mesh_(std::move(mesh)), k_(k), options_(options)
{
  if (k < 0 || k > 2)
    throw std::invalid_argument("HodgeLaplace: form degree must be 0, 1 or 2");
  for (int d = 0; d <= 2; ++d)
    spaces_[d] = std::make_unique<FESpace>(mesh_, d);
  for (int d = 0; d <= 2; ++d)
    if (has_degree(d))
      grams_[d] = ghost_gram(*spaces_[d], options_.gram);
  D_[0] = cutfeec::coboundary(*spaces_[0], *spaces_[1]).as_double();
  D_[1] = cutfeec::coboundary(*spaces_[1], *spaces_[2]).as_double();
  harmonic_ = harmonic_basis(k, inner_product(k), k > 0 ? &D_[k - 1] : nullptr, k < 2 ? &D_[k] : nullptr);
}

const GhostGram &HodgeLaplace::gram(int degree) const
{
  if (degree < 0 || degree > 2 || !grams_[degree])
    throw std::out_of_range("HodgeLaplace: no Gram matrices for degree " + std::to_string(degree));
  return *grams_[degree];
}

const Eigen::SparseMatrix<double> &HodgeLaplace::inner_product(int degree) const
{
  const auto &g = gram(degree);
  return options_.stabilize ? g.M_s : g.M_phys;
}

MixedSystem HodgeLaplace::assemble(const FormField &f) const
{
  MixedOperators ops;
  ops.k = k_;
  ops.M_k = &inner_product(k_);
  if (k_ > 0)
  {
    ops.M_km1 = &inner_product(k_ - 1);
    ops.D_km1 = &D_[k_ - 1];
  }
  if (k_ < 2)
  {
    ops.M_kp1 = &inner_product(k_ + 1);
    ops.D_k = &D_[k_];
  }
  return assemble_mixed(ops, harmonic_, load_vector(space(k_), f, options_.load_degree));
}

MixedSolution HodgeLaplace::solve(const FormField &f) const { return solve_mixed(assemble(f)); }

namespace {

Form2 value_or_zero(const FormField &f, const Vec2 &x, int degree)
{
  return f ? f(x) : Form2(2, degree);
}

}  // namespace

ErrorRecord HodgeLaplace::errors(const MixedSolution &sol, const ExactSolution &exact) const
{
  const auto &bg = *mesh_->parent;
  (void)bg;
  const FESpace &Vk = space(k_);
  const Eigen::VectorXd lam = harmonic_.dim ? Eigen::VectorXd(harmonic_.vectors * sol.lambda_coeffs)
                                            : Eigen::VectorXd::Zero(Vk.size());
  Eigen::VectorXd deta, dsigma;
  if (k_ < 2)
    deta = D_[k_] * sol.eta;
  if (k_ > 0)
    dsigma = D_[k_ - 1] * sol.sigma;

  ErrorRecord e;
  for (int t : mesh_->active)
  {
    const auto rule = mesh_->physical_rule(t, options_.error_degree);
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const Vec2 &x = rule.points[q];
      const double w = rule.weights[q];
      auto sq = [](const Form2 &a) { return inner(a, a); };
      e.eta += w * sq(Vk.eval(t, sol.eta, x) - value_or_zero(exact.eta, x, k_));
      e.lambda += w * sq(Vk.eval(t, lam, x) - value_or_zero(exact.lambda, x, k_));
      if (k_ < 2)
        e.d_eta += w * sq(space(k_ + 1).eval(t, deta, x) - value_or_zero(exact.d_eta, x, k_ + 1));
      if (k_ > 0)
      {
        e.sigma += w * sq(space(k_ - 1).eval(t, sol.sigma, x) - value_or_zero(exact.sigma, x, k_ - 1));
        e.d_sigma += w * sq(Vk.eval(t, dsigma, x) - value_or_zero(exact.d_sigma, x, k_));
      }
    }
  }
  e.eta = std::sqrt(e.eta);
  e.d_eta = std::sqrt(e.d_eta);
  e.sigma = std::sqrt(e.sigma);
  e.d_sigma = std::sqrt(e.d_sigma);
  e.lambda = std::sqrt(e.lambda);
  return e;
}

double HodgeLaplace::norm(int degree, const Eigen::VectorXd &x) const
{
  return std::sqrt(std::max(0.0, x.dot(inner_product(degree) * x)));
}

double HodgeLaplace::physical_norm(int degree, const FormField &f) const
{
  double s = 0;
  for (int t : mesh_->active)
  {
    const auto rule = mesh_->physical_rule(t, options_.error_degree);
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const Form2 v = value_or_zero(f, rule.points[q], degree);
      s += rule.weights[q] * inner(v, v);
    }
  }
  return std::sqrt(s);
}

Eigen::VectorXd HodgeLaplace::project(const FormField &f) const
{
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(inner_product(k_));
  if (ldlt.info() != Eigen::Success)
    throw SolverError("project: inner product factorisation failed");
  return ldlt.solve(load_vector(space(k_), f, options_.load_degree));
}

}  // namespace cutfeec
