// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#include "cutfeec/hodge.hpp"

#include <Eigen/Dense>
#include <catch_amalgamated.hpp>

#include <random>

using namespace cutfeec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::shared_ptr<const ActiveMesh> active(int m, const LevelSet &phi)
{
  auto bg = std::make_shared<const BackgroundMesh>(build_background(Box{-1, 1, -1, 1}, m));
  return std::make_shared<const ActiveMesh>(classify(bg, phi));
}

std::shared_ptr<const ActiveMesh> disk(int m, double eps = 0)
{
  return active(m, LevelSet::circle(Vec2(0, 0), 0.75).shifted(Vec2(eps, 0)));
}

std::shared_ptr<const ActiveMesh> annulus(int m, double eps = 0)
{
  return active(m, LevelSet::annulus(Vec2(0, 0), 0.5, 0.95).shifted(Vec2(eps, 0)));
}

HodgeOptions macro_options(bool stabilize = true)
{
  HodgeOptions o;
  o.gram.facet_set = FacetSet::macro(0.25);
  o.stabilize = stabilize;
  return o;
}

Form2 form(int k, std::initializer_list<double> c)
{
  Form2 w(2, k);
  int i = 0;
  for (double v : c)
    w.coeffs()[i++] = v;
  return w;
}

FormField zero(int k)
{
  return [k](const Vec2 &) { return Form2(2, k); };
}

double harmonic_defect(const HodgeLaplace &hl)
{
  const auto &H = hl.harmonic();
  const int k = hl.k();
  const Eigen::MatrixXd M = hl.inner_product(k);
  double worst = 0;
  if (H.dim == 0)
    return 0;
  worst = std::max(worst, (H.vectors.transpose() * M * H.vectors - Eigen::MatrixXd::Identity(H.dim, H.dim))
                              .cwiseAbs()
                              .maxCoeff());
  if (k < 2)
    worst = std::max(worst, (hl.coboundary(k) * H.vectors).cwiseAbs().maxCoeff());
  if (k > 0)
    worst = std::max(worst, (H.vectors.transpose() * M * hl.coboundary(k - 1)).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

TEST_CASE("discrete harmonic forms have the topological dimensions", "[hodge]")
{
  for (int m : {8, 16})
  {
    INFO("m = " << m);
    for (int k = 0; k <= 2; ++k)
    {
      const HodgeLaplace d(disk(m, 1e-3), k, macro_options());
      const HodgeLaplace a(annulus(m, 1e-3), k, macro_options());
      INFO("k = " << k);
      CHECK(d.harmonic().dim == (k == 0 ? 1 : 0));
      CHECK(a.harmonic().dim == (k == 2 ? 0 : 1));
      CHECK(harmonic_defect(d) <= 1e-10);
      CHECK(harmonic_defect(a) <= 1e-10);
      // Ker D_k = Im D_{k-1} ⊕ harmonic.
      CHECK(a.harmonic().kernel_dim == a.harmonic().exact_rank + a.harmonic().dim);
      CHECK(a.harmonic().kernel_rank.gap() > 1e3);
    }
  }
}

TEST_CASE("k = 0 harmonic forms are the constants", "[hodge]")
{
  const HodgeLaplace hl(disk(8), 0, macro_options());
  const Eigen::VectorXd h = hl.harmonic().vectors.col(0);
  CHECK((h.array() - h[0]).abs().maxCoeff() <= 1e-12 * std::abs(h[0]));
}

TEST_CASE("harmonic dimensions do not depend on the inner product", "[hodge]")
{
  const auto am = annulus(16, 1e-6);
  const HodgeLaplace hl(am, 1, macro_options());
  const auto &g = hl.gram(1);
  for (const Eigen::SparseMatrix<double> *M : {&g.M_s, &g.M_active})
  {
    const auto H = harmonic_basis(1, *M, &hl.coboundary(0), &hl.coboundary(1));
    CHECK(H.dim == 1);
  }
}

TEST_CASE("kernel bases and rank decisions", "[hodge]")
{
  Eigen::MatrixXd A(2, 2);
  A << 1, 1, 1, 1;
  RankDecision dec;
  const Eigen::MatrixXd K = kernel_basis(A, kRankCutoff, &dec);
  REQUIRE(K.cols() == 1);
  CHECK((A * K).norm() < 1e-15);
  CHECK_THAT(K.norm(), WithinAbs(1.0, 1e-15));
  CHECK(dec.rank == 1);
  CHECK_THAT(dec.sigma_max, WithinRel(2.0, 1e-14));

  const Eigen::MatrixXd full = Eigen::Vector3d(3, 2, 1).asDiagonal();
  CHECK(kernel_basis(full, kRankCutoff).cols() == 0);
  // A singular value within a factor 10 of the cutoff is ambiguous.
  const Eigen::MatrixXd near = Eigen::Vector2d(1.0, 5e-9).asDiagonal();
  CHECK_THROWS_AS(kernel_basis(near, kRankCutoff), RankError);
  const Eigen::MatrixXd clear = Eigen::Vector2d(1.0, 1e-13).asDiagonal();
  CHECK(kernel_basis(clear, kRankCutoff).cols() == 1);
}

TEST_CASE("the mixed system is symmetric with the expected blocks", "[hodge]")
{
  for (int k = 0; k <= 2; ++k)
  {
    const HodgeLaplace hl(annulus(8), k, macro_options());
    const MixedSystem sys = hl.assemble(zero(k));
    const Eigen::MatrixXd A = sys.A;
    CHECK(sys.n_sigma == (k > 0 ? hl.space(k - 1).size() : 0));
    CHECK(sys.n_eta == hl.space(k).size());
    CHECK(sys.n_lambda == hl.harmonic().dim);
    CHECK(A.rows() == sys.n_sigma + sys.n_eta + sys.n_lambda);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * A.cwiseAbs().maxCoeff());
    if (sys.n_lambda > 0)
      CHECK(A.bottomRightCorner(sys.n_lambda, sys.n_lambda).cwiseAbs().maxCoeff() == 0.0);
    if (k == 2)
    {
      // No D_k: the η-η block vanishes.
      CHECK(A.block(sys.n_sigma, sys.n_sigma, sys.n_eta, sys.n_eta).cwiseAbs().maxCoeff() == 0.0);
    }
    if (k > 0)
    {
      const Eigen::MatrixXd Mkm1 = hl.inner_product(k - 1);
      CHECK((A.topLeftCorner(sys.n_sigma, sys.n_sigma) + Mkm1).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("zero data gives the zero solution", "[hodge]")
{
  for (int k = 0; k <= 2; ++k)
  {
    const HodgeLaplace hl(annulus(8), k, macro_options());
    const auto sol = hl.solve(zero(k));
    CHECK(sol.eta.norm() == 0.0);
    CHECK(sol.sigma.norm() == 0.0);
    CHECK(sol.lambda_coeffs.norm() == 0.0);
  }
}

TEST_CASE("constant data for k = 0 is purely harmonic", "[hodge]")
{
  const HodgeLaplace hl(disk(16, 1e-3), 0, macro_options());
  const auto sol = hl.solve([](const Vec2 &) { return form(0, {1.0}); });
  ExactSolution ex;
  ex.lambda = [](const Vec2 &) { return form(0, {1.0}); };
  const auto e = hl.errors(sol, ex);
  CHECK(e.eta <= 1e-10);
  CHECK(e.d_eta <= 1e-10);
  CHECK(e.lambda <= 1e-10);
  CHECK(sol.relative_residual <= 1e-10);
}

TEST_CASE("k = 2 reproduces the divergence of the flux", "[hodge]")
{
  const HodgeLaplace hl(disk(16, 1e-3), 2, macro_options());
  const FormField f = [](const Vec2 &x) { return form(2, {4.0 + x.x() * x.y()}); };
  const auto sol = hl.solve(f);
  const Eigen::VectorXd div = hl.coboundary(1) * sol.sigma;
  const Eigen::VectorXd proj = hl.project(f);
  CHECK((div - proj).cwiseAbs().maxCoeff() <= 1e-10 * proj.cwiseAbs().maxCoeff());
}

TEST_CASE("the harmonic constraint holds for a generic load", "[hodge]")
{
  const HodgeLaplace hl(annulus(16, 1e-3), 1, macro_options());
  const FormField f = [](const Vec2 &x) { return form(1, {std::sin(x.y()), x.x() * x.x()}); };
  const auto sol = hl.solve(f);
  const Eigen::VectorXd c = hl.harmonic().vectors.transpose() * (hl.inner_product(1) * sol.eta);
  CHECK(c.norm() <= 1e-10 * std::max(1.0, sol.eta.norm()));
  CHECK(sol.relative_residual <= 1e-10);
  CHECK(std::abs(sol.lambda_coeffs[0]) > 1e-3);
}

TEST_CASE("the k = 2 disk problem converges", "[hodge]")
{
  const double R2 = 0.75 * 0.75;
  ExactSolution ex;
  ex.f = [](const Vec2 &) { return form(2, {4.0}); };
  ex.eta = [R2](const Vec2 &x) { return form(2, {R2 - x.squaredNorm()}); };
  ex.sigma = [](const Vec2 &x) { return form(1, {-2.0 * x.y(), 2.0 * x.x()}); };
  ex.d_sigma = ex.f;
  std::vector<ErrorRecord> errs;
  for (int m : {8, 16})
  {
    const HodgeLaplace hl(disk(m), 2, macro_options());
    errs.push_back(hl.errors(hl.solve(ex.f), ex));
  }
  CHECK(errs[1].eta < 0.7 * errs[0].eta);
  CHECK(errs[1].sigma < 0.7 * errs[0].sigma);
  CHECK(errs[1].d_sigma < 1e-8);
}

TEST_CASE("on an uncut domain stabilisation has no effect", "[hodge]")
{
  const auto am = active(8, LevelSet::circle(Vec2(0, 0), 10));
  const FormField f = [](const Vec2 &x) { return form(1, {x.y(), 1.0 - x.x()}); };
  const HodgeLaplace on(am, 1, macro_options(true)), off(am, 1, macro_options(false));
  const auto a = on.solve(f), b = off.solve(f);
  CHECK((a.eta - b.eta).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((a.sigma - b.sigma).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("condition number estimates", "[hodge]")
{
  Eigen::SparseMatrix<double> I(4, 4);
  I.setIdentity();
  CHECK_THAT(condition_estimate(I), WithinRel(1.0, 1e-14));
  Eigen::SparseMatrix<double> D = Eigen::MatrixXd(Eigen::Vector2d(1.0, 1e-6).asDiagonal()).sparseView();
  CHECK_THAT(condition_estimate(D), WithinRel(1e6, 1e-10));
  CHECK_THAT(condition_dense(Eigen::MatrixXd(D)), WithinRel(1e6, 1e-10));

  std::mt19937 gen(8);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd G(50, 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j)
      G(i, j) = nd(gen);
  const Eigen::MatrixXd S = G * G.transpose() + 1e-2 * Eigen::MatrixXd::Identity(50, 50);
  const double est = condition_estimate(S.sparseView()), ref = condition_dense(S);
  CHECK(est <= ref * (1 + 1e-10));
  CHECK(est >= ref / 10);

  Eigen::SparseMatrix<double> Z(3, 3);
  Z.insert(0, 0) = 1.0;
  CHECK(std::isinf(condition_estimate(Z)));
}

TEST_CASE("singular systems are reported", "[hodge]")
{
  MixedSystem sys;
  sys.A.resize(2, 2);
  sys.A.insert(0, 0) = 1.0;
  sys.b = Eigen::Vector2d(1.0, 1.0);
  sys.n_eta = 2;
  CHECK_THROWS_AS(solve_mixed(sys), SolverError);
}

TEST_CASE("stabilisation keeps the condition number bounded under cut perturbations", "[hodge]")
{
  std::vector<double> stab, plain;
  for (double eps : {0.0, 1e-3, 1e-6})
  {
    const HodgeLaplace on(annulus(8, eps), 1, macro_options(true));
    stab.push_back(condition_estimate(on.assemble(zero(1)).A));
    const HodgeLaplace off(annulus(8, eps), 1, macro_options(false));
    plain.push_back(condition_estimate(off.assemble(zero(1)).A));
  }
  const auto [lo, hi] = std::minmax_element(stab.begin(), stab.end());
  CHECK(*hi / *lo < 2.0);
  CHECK(plain.back() > 1e3 * stab.back());
}
