// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#include "cutfeec/experiments.hpp"

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

namespace cutfeec {

int CsvTable::column(const std::string &name) const
{
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name)
      return static_cast<int>(i);
  return -1;
}

std::string format_number(double x)
{
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15e", x);
  return buf;
}

void write_csv(std::ostream &os, const ExperimentConfig &cfg, const CsvTable &table)
{
  os << "# " << kCsvVersion << ' ' << table.command << '\n';
  for (const auto &line : cfg.resolved())
    os << "# config: " << line << '\n';
  auto write_row = [&](const std::vector<std::string> &row) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << row[i];
    os << '\n';
  };
  write_row(table.header);
  for (const auto &row : table.rows)
    write_row(row);
  for (const auto &line : table.footer)
    os << "# " << line << '\n';
}

namespace {

Vec2 shifted_center(const ExperimentConfig &cfg, double epsilon) { return cfg.center + epsilon * cfg.offset_direction; }

FacetSet facet_set_of(const ExperimentConfig &cfg, FacetChoice choice)
{
  if (choice == FacetChoice::Both)
    throw ConfigError("config: facet_set = both is only valid for norm-equiv");
  return choice == FacetChoice::Full ? FacetSet::full() : FacetSet::macro(cfg.delta);
}

Form2 form(int degree, std::initializer_list<double> c)
{
  Form2 w(2, degree);
  int i = 0;
  for (double v : c)
    w.coeffs()[i++] = v;
  return w;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt_int(long v) { return std::to_string(v); }

}  // namespace

LevelSet make_level_set(const ExperimentConfig &cfg, double epsilon)
{
  const LevelSet base = cfg.shape == Shape::Disk ? LevelSet::circle(cfg.center, cfg.radius)
                                                 : LevelSet::annulus(cfg.center, cfg.r_inner, cfg.r_outer);
  return base.shifted(epsilon * cfg.offset_direction);
}

std::shared_ptr<const ActiveMesh> make_active_mesh(const ExperimentConfig &cfg, int m, double epsilon)
{
  auto bg = std::make_shared<const BackgroundMesh>(build_background(cfg.box, m));
  return std::make_shared<const ActiveMesh>(classify(bg, make_level_set(cfg, epsilon), cfg.max_path));
}

ExactSolution make_exact(const ExperimentConfig &cfg, double epsilon)
{
  const Vec2 c = shifted_center(cfg, epsilon);
  const int k = cfg.k;
  ExactSolution ex;
  switch (cfg.problem)
  {
  case Problem::Zero:
    ex.f = [k](const Vec2 &) { return Form2(2, k); };
    break;
  case Problem::Constant:
    ex.f = [](const Vec2 &) { return form(0, {1.0}); };
    ex.lambda = ex.f;
    break;
  case Problem::Poisson:
  {
    const double R2 = cfg.radius * cfg.radius;
    ex.f = [](const Vec2 &) { return form(2, {4.0}); };
    ex.eta = [c, R2](const Vec2 &x) { return form(2, {R2 - (x - c).squaredNorm()}); };
    // σ solves (σ, τ) = (η, dτ): σ = (∂_y u, -∂_x u) for η = u dx∧dy with u = 0 on the circle.
    ex.sigma = [c](const Vec2 &x) { return form(1, {-2.0 * (x.y() - c.y()), 2.0 * (x.x() - c.x())}); };
    ex.d_sigma = ex.f;
    break;
  }
  case Problem::Harmonic:
    ex.f = [c](const Vec2 &x) {
      const Vec2 r = x - c;
      const double r2 = r.squaredNorm();
      return form(1, {-r.y() / r2, r.x() / r2});
    };
    ex.lambda = ex.f;
    break;
  }
  return ex;
}

HodgeOptions make_options(const ExperimentConfig &cfg, FacetChoice facets, bool stabilize)
{
  HodgeOptions o;
  o.gram.eta = cfg.eta;
  o.gram.facet_set = facet_set_of(cfg, facets);
  o.gram.volume_degree = cfg.quad_degree_volume;
  o.gram.facet_degree = cfg.quad_degree_facet;
  o.stabilize = stabilize;
  return o;
}

CsvTable run_converge(const ExperimentConfig &cfg)
{
  CsvTable t;
  t.command = "converge";
  t.header = {"m",         "h",         "epsilon",    "n_sigma",    "n_eta",      "n_lambda",
              "err_eta",   "err_deta",  "err_sigma",  "err_dsigma", "err_lambda", "norm_eta_s",
              "norm_sigma_s", "residual", "kappa1",   "wall_time_s"};
  const double eps = cfg.epsilon_list.front();
  const ExactSolution exact = make_exact(cfg, eps);
  std::vector<double> hs;
  std::vector<std::array<double, 7>> errs;
  for (int m : cfg.m_list)
  {
    const auto t0 = std::chrono::steady_clock::now();
    HodgeLaplace hl(make_active_mesh(cfg, m, eps), cfg.k, make_options(cfg, cfg.facet_set, cfg.stabilize));
    const MixedSolution sol = hl.solve(exact.f);
    const ErrorRecord e = hl.errors(sol, exact);
    const double norm_eta = hl.norm(cfg.k, sol.eta);
    const double norm_sigma = cfg.k > 0 ? hl.norm(cfg.k - 1, sol.sigma) : 0.0;
    const double kappa = condition_estimate(sol.system.A);
    const double h = hl.mesh().parent->h;
    hs.push_back(h);
    errs.push_back({e.eta, e.d_eta, e.sigma, e.d_sigma, e.lambda, norm_eta, norm_sigma});
    t.rows.push_back({fmt_int(m), format_number(h), format_number(eps), fmt_int(sol.system.n_sigma),
                      fmt_int(sol.system.n_eta), fmt_int(sol.system.n_lambda), format_number(e.eta),
                      format_number(e.d_eta), format_number(e.sigma), format_number(e.d_sigma),
                      format_number(e.lambda), format_number(norm_eta), format_number(norm_sigma),
                      format_number(sol.relative_residual), format_number(kappa),
                      format_number(seconds_since(t0))});
  }
  t.footer.push_back("orders,m_coarse,m_fine,err_eta,err_deta,err_sigma,err_dsigma,err_lambda,norm_eta_s,norm_sigma_s");
  for (std::size_t i = 0; i + 1 < hs.size(); ++i)
  {
    std::string line = "orders," + fmt_int(cfg.m_list[i]) + "," + fmt_int(cfg.m_list[i + 1]);
    for (int c = 0; c < 7; ++c)
    {
      const double a = errs[i][c], b = errs[i + 1][c];
      const double order = (a > 0 && b > 0) ? std::log(a / b) / std::log(hs[i] / hs[i + 1])
                                            : std::numeric_limits<double>::quiet_NaN();
      line += "," + format_number(order);
    }
    t.footer.push_back(line);
  }
  return t;
}

CsvTable run_sweep_cut(const ExperimentConfig &cfg)
{
  CsvTable t;
  t.command = "sweep-cut";
  t.header = {"m",
              "epsilon",
              "kappa1_stabilized",
              "kappa1_unstabilized",
              "lambda_min_s",
              "lambda_max_s",
              "lambda_min_phys",
              "lambda_max_phys"};
  for (int m : cfg.m_list)
    for (double eps : cfg.epsilon_list)
    {
      const auto mesh = make_active_mesh(cfg, m, eps);
      const auto zero = [k = cfg.k](const Vec2 &) { return Form2(2, k); };
      HodgeLaplace stab(mesh, cfg.k, make_options(cfg, cfg.facet_set, true));
      const double kappa_s = condition_estimate(stab.assemble(zero).A);
      if (!std::isfinite(kappa_s))
        throw SolverError("sweep-cut: stabilised system is singular at m = " + std::to_string(m));

      std::string kappa_u = "infeasible";
      try
      {
        HodgeLaplace unstab(mesh, cfg.k, make_options(cfg, cfg.facet_set, false));
        const double ku = condition_estimate(unstab.assemble(zero).A);
        if (std::isfinite(ku))
          kappa_u = format_number(ku);
      }
      catch (const RankError &)
      {
      }
      catch (const SolverError &)
      {
      }

      const auto &g = stab.gram(cfg.k);
      const Spectrum s = generalized_extremes(g.M_s, g.M_active);
      const Spectrum p = generalized_extremes(g.M_phys, g.M_active);
      t.rows.push_back({fmt_int(m), format_number(eps), format_number(kappa_s), kappa_u, format_number(s.min),
                        format_number(s.max), format_number(p.min), format_number(p.max)});
    }
  return t;
}

CsvTable run_norm_equiv(const ExperimentConfig &cfg)
{
  CsvTable t;
  t.command = "norm-equiv";
  t.header = {"k",           "m",           "epsilon",         "facet_set",
              "lambda_min_s", "lambda_max_s", "lambda_min_phys", "lambda_max_phys"};
  std::vector<FacetChoice> sets;
  if (cfg.facet_set == FacetChoice::Both)
    sets = {FacetChoice::Full, FacetChoice::Macro};
  else
    sets = {cfg.facet_set};

  struct Range
  {
    double min_lo = std::numeric_limits<double>::infinity(), min_hi = -std::numeric_limits<double>::infinity();
    double max_lo = std::numeric_limits<double>::infinity(), max_hi = -std::numeric_limits<double>::infinity();
    double phys_min = std::numeric_limits<double>::infinity();
    void add(const Spectrum &s, const Spectrum &p)
    {
      min_lo = std::min(min_lo, s.min);
      min_hi = std::max(min_hi, s.min);
      max_lo = std::min(max_lo, s.max);
      max_hi = std::max(max_hi, s.max);
      phys_min = std::min(phys_min, p.min);
    }
  };
  std::map<std::pair<int, int>, Range> groups;
  Range all;

  for (int k : cfg.degrees())
    for (int m : cfg.m_list)
      for (double eps : cfg.epsilon_list)
      {
        const auto mesh = make_active_mesh(cfg, m, eps);
        const FESpace sp(mesh, k);
        for (FacetChoice fc : sets)
        {
          const auto o = make_options(cfg, fc, true);
          const GhostGram g = ghost_gram(sp, o.gram);
          const Spectrum s = generalized_extremes(g.M_s, g.M_active);
          const Spectrum p = generalized_extremes(g.M_phys, g.M_active);
          groups[{k, static_cast<int>(fc)}].add(s, p);
          all.add(s, p);
          t.rows.push_back({fmt_int(k), fmt_int(m), format_number(eps), to_string(fc), format_number(s.min),
                            format_number(s.max), format_number(p.min), format_number(p.max)});
        }
      }

  t.footer.push_back("summary,k,facet_set,lambda_min_s_lo,lambda_min_s_hi,lambda_max_s_lo,lambda_max_s_hi,"
                     "lambda_min_phys_lo");
  auto line = [](const std::string &k, const std::string &fs, const Range &r) {
    return "summary," + k + "," + fs + "," + format_number(r.min_lo) + "," + format_number(r.min_hi) + "," +
           format_number(r.max_lo) + "," + format_number(r.max_hi) + "," + format_number(r.phys_min);
  };
  for (const auto &[key, r] : groups)
    t.footer.push_back(line(fmt_int(key.first), to_string(static_cast<FacetChoice>(key.second)), r));
  t.footer.push_back(line("all", "all", all));
  return t;
}

namespace {

std::vector<std::string> component_names(const std::string &field, int degree)
{
  if (degree == 1)
    return {field + "_dx", field + "_dy"};
  return {field + (degree == 0 ? "" : "_dxdy")};
}

void open_or_throw(std::ofstream &os, const std::string &path)
{
  os.open(path);
  if (!os)
    throw ConfigError("output: cannot open " + path + " for writing");
}

}  // namespace

CsvTable run_solve(const ExperimentConfig &cfg)
{
  const auto t0 = std::chrono::steady_clock::now();
  const int m = cfg.m_list.front();
  const double eps = cfg.epsilon_list.front();
  const int k = cfg.k;
  const ExactSolution exact = make_exact(cfg, eps);
  const auto mesh = make_active_mesh(cfg, m, eps);
  HodgeLaplace hl(mesh, k, make_options(cfg, cfg.facet_set, cfg.stabilize));
  const MixedSolution sol = hl.solve(exact.f);
  const ErrorRecord e = hl.errors(sol, exact);
  const Eigen::VectorXd lam = hl.harmonic().dim ? Eigen::VectorXd(hl.harmonic().vectors * sol.lambda_coeffs)
                                                : Eigen::VectorXd::Zero(sol.eta.size());

  CsvTable t;
  t.command = "solve";
  t.header = {"m",          "h",          "epsilon",    "k",          "harmonic_dim", "n_sigma",
              "n_eta",      "n_lambda",   "lambda_coeff", "norm_lambda_s", "norm_eta_s", "norm_sigma_s",
              "err_eta",    "err_deta",   "err_sigma",  "err_dsigma",  "err_lambda",  "residual",
              "wall_time_s"};
  const double coeff = hl.harmonic().dim ? sol.lambda_coeffs[0] : 0.0;
  std::vector<std::string> row = {fmt_int(m),
                                  format_number(mesh->parent->h),
                                  format_number(eps),
                                  fmt_int(k),
                                  fmt_int(hl.harmonic().dim),
                                  fmt_int(sol.system.n_sigma),
                                  fmt_int(sol.system.n_eta),
                                  fmt_int(sol.system.n_lambda),
                                  format_number(coeff),
                                  format_number(hl.norm(k, lam)),
                                  format_number(hl.norm(k, sol.eta)),
                                  format_number(k > 0 ? hl.norm(k - 1, sol.sigma) : 0.0),
                                  format_number(e.eta),
                                  format_number(e.d_eta),
                                  format_number(e.sigma),
                                  format_number(e.d_sigma),
                                  format_number(e.lambda),
                                  format_number(sol.relative_residual)};

  if (!cfg.dof_dump.empty())
  {
    std::ofstream os;
    open_or_throw(os, cfg.dof_dump);
    os << "block,dof,entity,value\n";
    auto dump = [&](const char *block, int degree, const Eigen::VectorXd &v) {
      const auto &ent = hl.space(degree).entities();
      for (int i = 0; i < v.size(); ++i)
        os << block << ',' << i << ',' << ent[i] << ',' << format_number(v[i]) << '\n';
    };
    if (k > 0)
      dump("sigma", k - 1, sol.sigma);
    dump("eta", k, sol.eta);
    dump("lambda", k, lam);
  }

  if (!cfg.field_dump.empty())
  {
    std::ofstream os;
    open_or_throw(os, cfg.field_dump);
    std::vector<std::string> cols = {"x", "y", "phi", "active"};
    for (const auto &n : component_names("eta", k))
      cols.push_back(n);
    if (k > 0)
      for (const auto &n : component_names("sigma", k - 1))
        cols.push_back(n);
    for (const auto &n : component_names("lambda", k))
      cols.push_back(n);
    for (std::size_t i = 0; i < cols.size(); ++i)
      os << (i ? "," : "") << cols[i];
    os << '\n';

    const auto &bg = *mesh->parent;
    const LevelSet phi = make_level_set(cfg, eps);
    const int n = cfg.grid_n;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
      {
        const Vec2 x(cfg.box.xmin + cfg.box.width() * i / (n - 1), cfg.box.ymin + cfg.box.height() * j / (n - 1));
        const int tri = bg.locate(x);
        const bool active = tri >= 0 && mesh->is_active(tri);
        os << format_number(x.x()) << ',' << format_number(x.y()) << ',' << format_number(phi(x)) << ','
           << (active ? 1 : 0);
        auto put = [&](int degree, const Eigen::VectorXd &c) {
          const int ncomp = degree == 1 ? 2 : 1;
          if (!active)
          {
            for (int q = 0; q < ncomp; ++q)
              os << ",nan";
            return;
          }
          const Form2 v = hl.space(degree).eval(tri, c, x);
          for (int q = 0; q < ncomp; ++q)
            os << ',' << format_number(v.coeffs()[q]);
        };
        put(k, sol.eta);
        if (k > 0)
          put(k - 1, sol.sigma);
        put(k, lam);
        os << '\n';
      }
  }

  if (!cfg.mesh_dump.empty())
  {
    std::ofstream os;
    open_or_throw(os, cfg.mesh_dump);
    write_mesh_dump(os, *mesh, hl.gram(k).facets);
  }

  row.push_back(format_number(seconds_since(t0)));
  t.rows.push_back(row);
  return t;
}

void apply_thread_limit()
{
  if (const char *env = std::getenv("CUTFEEC_THREADS"))
  {
    const int n = std::atoi(env);
    if (n > 0)
      Eigen::setNbThreads(n);
  }
}

int run_command(const std::string &command, const std::string &config_path, const std::string &out_path,
                std::ostream &err)
{
  try
  {
    ExperimentConfig cfg = load_config(config_path);
    if (!out_path.empty())
      cfg.output = out_path;
    CsvTable table;
    if (command == "converge")
      table = run_converge(cfg);
    else if (command == "sweep-cut")
      table = run_sweep_cut(cfg);
    else if (command == "norm-equiv")
      table = run_norm_equiv(cfg);
    else if (command == "solve")
      table = run_solve(cfg);
    else
      throw ConfigError("unknown command " + command);

    if (cfg.output.empty())
      write_csv(std::cout, cfg, table);
    else
    {
      std::ofstream os;
      open_or_throw(os, cfg.output);
      write_csv(os, cfg, table);
    }
    return kExitOk;
  }
  catch (const ConfigError &e)
  {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  catch (const GeometryError &e)
  {
    err << "geometry error: " << e.what() << '\n';
    return kExitGeometry;
  }
  catch (const std::exception &e)
  {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace cutfeec
