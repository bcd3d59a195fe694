// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#include "cutfeec/geometry.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

using namespace cutfeec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const Box unit_box{0, 1, 0, 1};

std::shared_ptr<const BackgroundMesh> mesh(const Box &box, int m)
{
  return std::make_shared<const BackgroundMesh>(build_background(box, m));
}

// Same triangulation with the triangles listed in a shuffled order.
BackgroundMesh relabel(const BackgroundMesh &bg, std::vector<int> &perm, unsigned seed)
{
  const int nt = static_cast<int>(bg.triangles.size());
  perm.resize(nt);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 gen(seed);
  std::shuffle(perm.begin(), perm.end(), gen);
  std::vector<int> inv(nt);
  for (int i = 0; i < nt; ++i)
    inv[perm[i]] = i;
  BackgroundMesh out = bg;
  for (int i = 0; i < nt; ++i)
  {
    out.triangles[i] = bg.triangles[perm[i]];
    out.triangle_edges[i] = bg.triangle_edges[perm[i]];
  }
  for (auto &et : out.edge_triangles)
    for (int &t : et)
      if (t >= 0)
        t = inv[t];
  return out;
}

// Brute-force activity: does {φ_lin < 0} meet T, judged on a dense barycentric lattice plus random points?
bool sampled_active(const Triangle2<double> &T, const std::array<double, 3> &phi, std::mt19937 &gen)
{
  auto phi_lin = [&](double l0, double l1, double l2) { return l0 * phi[0] + l1 * phi[1] + l2 * phi[2]; };
  const int N = 100;  // (N+1)(N+2)/2 = 5151 lattice points
  for (int i = 0; i <= N; ++i)
    for (int j = 0; i + j <= N; ++j)
      if (phi_lin(double(i) / N, double(j) / N, double(N - i - j) / N) < 0)
        return true;
  std::uniform_real_distribution<double> u(0, 1);
  for (int s = 0; s < 5000; ++s)
  {
    double a = u(gen), b = u(gen);
    if (a + b > 1)
    {
      a = 1 - a;
      b = 1 - b;
    }
    if (phi_lin(a, b, 1 - a - b) < 0)
      return true;
  }
  (void)T;
  return false;
}

}  // namespace

TEST_CASE("background mesh counts and orientation", "[geometry]")
{
  const auto m1 = build_background(unit_box, 1);
  CHECK(m1.triangles.size() == 2);
  CHECK(m1.edges.size() == 5);
  CHECK(m1.vertices.size() == 4);
  const auto m2 = build_background(unit_box, 2);
  CHECK(m2.triangles.size() == 8);
  CHECK(m2.edges.size() == 16);
  CHECK(m2.vertices.size() == 9);
  CHECK(m2.h == 0.5);

  for (int m : {1, 3, 8})
  {
    const auto bg = build_background(Box{-1, 2, -1, 2}, m);
    double area = 0;
    for (int t = 0; t < static_cast<int>(bg.triangles.size()); ++t)
    {
      CHECK(signed_area(bg.triangle(t)) > 0);
      area += bg.area(t);
      for (int l = 0; l < 3; ++l)
      {
        // Local edge l is opposite local vertex l.
        const auto &e = bg.edges[bg.triangle_edges[t][l]];
        CHECK(e[0] != bg.triangles[t][l]);
        CHECK(e[1] != bg.triangles[t][l]);
      }
    }
    CHECK_THAT(area, WithinAbs(9.0, 1e-14));
    // Conforming: interior edges have two triangles, boundary edges one.
    int boundary = 0;
    for (std::size_t e = 0; e < bg.edges.size(); ++e)
    {
      CHECK(bg.edges[e][0] < bg.edges[e][1]);
      boundary += bg.edge_triangles[e][1] < 0;
    }
    CHECK(boundary == 4 * m);
    // Euler characteristic of a disk.
    CHECK(int(bg.vertices.size()) - int(bg.edges.size()) + int(bg.triangles.size()) == 1);
  }
  CHECK_THROWS_AS(build_background(Box{0, 0, 0, 1}, 2), GeometryError);
  CHECK_THROWS_AS(build_background(unit_box, 0), GeometryError);
}

TEST_CASE("point location", "[geometry]")
{
  const auto bg = build_background(unit_box, 4);
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int s = 0; s < 200; ++s)
  {
    const Vec2 x(u(gen), u(gen));
    const int t = bg.locate(x);
    REQUIRE(t >= 0);
    const auto T = bg.triangle(t);
    // Barycentric coordinates are all non-negative.
    for (int i = 0; i < 3; ++i)
    {
      const Triangle2<double> sub{x, T[(i + 1) % 3], T[(i + 2) % 3]};
      CHECK(signed_area(sub) >= -1e-15);
    }
  }
  CHECK(bg.locate(Vec2(1.5, 0.5)) == -1);
}

TEST_CASE("level set constructors", "[geometry]")
{
  const auto c = LevelSet::circle(Vec2(1, 0), 0.5);
  CHECK_THAT(c(Vec2(1, 0)), WithinAbs(-0.5, 1e-15));
  CHECK_THAT(c(Vec2(2, 0)), WithinAbs(0.5, 1e-15));
  const auto a = LevelSet::annulus(Vec2(0, 0), 0.5, 1.0);
  CHECK(a(Vec2(0.75, 0)) < 0);
  CHECK(a(Vec2(0.2, 0)) > 0);
  CHECK(a(Vec2(1.2, 0)) > 0);
  const auto h = LevelSet::affine(Vec2(1, 0), 0.25);
  CHECK(h(Vec2(0.2, 7)) < 0);
  CHECK(h(Vec2(0.3, 7)) > 0);
  const auto s = c.shifted(Vec2(0.1, 0));
  CHECK_THAT(s(Vec2(1.1, 0)), WithinAbs(-0.5, 1e-15));
  CHECK(!c.description().empty());
}

TEST_CASE("classification of trivial geometries", "[geometry]")
{
  const auto bg = mesh(unit_box, 4);
  const auto all = classify(bg, LevelSet::circle(Vec2(0.5, 0.5), 10.0));
  CHECK(all.count(CellLabel::Immersed) == 32);
  CHECK(all.stab_facets.empty());
  CHECK(all.cut_to_uncut.empty());
  CHECK(all.n_realized == 0);
  CHECK(macro_facets(all, 0.25).empty());

  CHECK_THROWS_AS(classify(bg, LevelSet::circle(Vec2(5, 5), 0.5)), GeometryError);
}

TEST_CASE("an affine cut through one corner cell", "[geometry]")
{
  const auto bg = mesh(unit_box, 4);
  // Ω = {x + y > 0.1}: the two triangles at the origin are cut, the rest immersed.
  const auto am = classify(bg, LevelSet::affine(Vec2(-1, -1), -0.1));
  CHECK(am.labels[0] == CellLabel::Cut);
  CHECK(am.labels[1] == CellLabel::Cut);
  CHECK(am.count(CellLabel::Cut) == 2);
  CHECK(am.count(CellLabel::Immersed) == 30);
  std::set<int> stab;
  for (const auto &f : am.stab_facets)
    stab.insert(f.edge);
  for (int t : {0, 1})
    for (int e : bg->triangle_edges[t])
      if (bg->edge_triangles[e][1] >= 0)
        CHECK(stab.count(e) == 1);
  CHECK(stab.size() == 3);
  // Both cut triangles border an immersed one.
  for (int t : {0, 1})
  {
    const auto &p = am.cut_to_uncut.at(t);
    CHECK(p.triangles.size() == 2);
    CHECK(p.facets.size() == 1);
    CHECK(am.labels[p.target] == CellLabel::Immersed);
  }
}

TEST_CASE("activity matches a sampling oracle", "[geometry][property]")
{
  const auto bg = mesh(unit_box, 8);
  const LevelSet disk = LevelSet::circle(Vec2(0.5, 0.5), 0.25);
  const auto am = classify(bg, disk);
  std::mt19937 gen(9);
  int sampled = 0;
  for (int t = 0; t < static_cast<int>(bg->triangles.size()); ++t)
  {
    const bool active = sampled_active(bg->triangle(t), am.phi(t), gen);
    sampled += active;
    CHECK(active == am.is_active(t));
  }
  CHECK(sampled == static_cast<int>(am.active.size()));
  // Immersed triangles carry the full measure.
  for (int t : am.active)
    if (am.labels[t] == CellLabel::Immersed)
      CHECK_THAT(am.cut_fraction[t], WithinAbs(1.0, 1e-14));
}

TEST_CASE("stabilisation facets and their normals", "[geometry]")
{
  for (int m : {8, 16})
  {
    const auto bg = mesh(Box{-1, 1, -1, 1}, m);
    const auto am = classify(bg, LevelSet::annulus(Vec2(0, 0), 0.5, 0.95));
    for (const auto &f : am.stab_facets)
    {
      CHECK(f.from < f.to);
      CHECK(am.is_active(f.from));
      CHECK(am.is_active(f.to));
      CHECK((am.labels[f.from] == CellLabel::Cut || am.labels[f.to] == CellLabel::Cut));
      const Vec2 a = bg->vertices[bg->edges[f.edge][0]], b = bg->vertices[bg->edges[f.edge][1]];
      CHECK_THAT(f.normal.norm(), WithinAbs(1.0, 1e-15));
      CHECK_THAT(f.normal.dot(b - a), WithinAbs(0.0, 1e-15));
      const auto cf = bg->triangle(f.from), ct = bg->triangle(f.to);
      const Vec2 d = (ct[0] + ct[1] + ct[2] - cf[0] - cf[1] - cf[2]) / 3.0;
      CHECK(f.normal.dot(d) > 0);
    }
  }
}

TEST_CASE("cut-to-uncut paths", "[geometry]")
{
  std::map<int, int> realized;
  for (int m : {16, 32})
  {
    const auto am = classify(mesh(unit_box, m), LevelSet::circle(Vec2(0.5, 0.5), 0.3));
    realized[m] = am.n_realized;
    CHECK(am.n_realized <= 4);
    for (const auto &[t, p] : am.cut_to_uncut)
    {
      CHECK(am.labels[t] == CellLabel::Cut);
      CHECK(p.triangles.front() == t);
      CHECK(p.triangles.back() == p.target);
      CHECK(am.labels[p.target] == CellLabel::Immersed);
      REQUIRE(p.facets.size() + 1 == p.triangles.size());
      for (std::size_t i = 0; i < p.facets.size(); ++i)
        CHECK(am.parent->neighbour(p.triangles[i], p.facets[i]) == p.triangles[i + 1]);
    }
  }
  CHECK(realized[16] == realized[32]);

  // The n_max guard is surfaced.
  CHECK_THROWS_AS(classify(mesh(unit_box, 16), LevelSet::circle(Vec2(0.5, 0.5), 0.3), 1), GeometryError);
  // A domain smaller than one element has no immersed triangle.
  CHECK_THROWS_AS(classify(mesh(unit_box, 4), LevelSet::circle(Vec2(0.5, 0.5), 0.05)), GeometryError);
}

TEST_CASE("path length does not grow under refinement", "[geometry][property]")
{
  const Box box{-1, 1, -1, 1};
  for (const auto &phi : {LevelSet::circle(Vec2(0, 0), 0.75), LevelSet::annulus(Vec2(0, 0), 0.5, 0.95)})
  {
    int prev = -1;
    for (int m : {8, 16, 32, 64})
    {
      const int n = classify(mesh(box, m), phi).n_realized;
      if (prev >= 0)
        CHECK(n <= prev + 1);
      prev = n;
    }
  }
}

TEST_CASE("macro facets", "[geometry]")
{
  const auto bg = mesh(Box{-1, 1, -1, 1}, 8);
  const auto am = classify(bg, LevelSet::circle(Vec2(0, 0), 0.75).shifted(Vec2(1e-3, 0)));
  const auto macro = macro_facets(am, 0.25);
  std::set<int> stab, chosen;
  for (const auto &f : am.stab_facets)
    stab.insert(f.edge);
  for (const auto &f : macro)
  {
    CHECK(stab.count(f.edge) == 1);
    chosen.insert(f.edge);
  }
  int small = 0;
  for (int t : am.active)
  {
    if (am.labels[t] != CellLabel::Cut || am.cut_fraction[t] >= 0.25)
      continue;
    ++small;
    bool touched = false;
    for (int e : bg->triangle_edges[t])
      touched = touched || chosen.count(e);
    CHECK(touched);
  }
  CHECK(small > 0);
  CHECK(macro.size() < am.stab_facets.size());

  double smallest = 1.0;
  for (int t : am.active)
    smallest = std::min(smallest, am.cut_fraction[t]);
  CHECK(macro_facets(am, smallest * 0.5).empty());
  CHECK_THROWS_AS(macro_facets(am, 0.0), GeometryError);
  CHECK_THROWS_AS(macro_facets(am, 1.5), GeometryError);
  // δ = 1: every cut triangle is small and attached to an immersed root.
  const auto full = macro_facets(am, 1.0);
  CHECK(full.size() <= am.stab_facets.size());
}

TEST_CASE("mesh diagnostics", "[geometry]")
{
  const Triangle2<double> right{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  CHECK_THAT(shape_ratio(right), WithinRel(std::sqrt(2.0) / (2.0 - std::sqrt(2.0)), 1e-14));
  const auto d8 = mesh_diagnostics(classify(mesh(unit_box, 8), LevelSet::circle(Vec2(0.5, 0.5), 0.3)));
  const auto d16 = mesh_diagnostics(classify(mesh(unit_box, 16), LevelSet::circle(Vec2(0.5, 0.5), 0.3)));
  CHECK(d8.h_min == d8.h_max);
  CHECK_THAT(d8.h_max, WithinRel(std::sqrt(2.0) / 8, 1e-14));
  CHECK_THAT(d8.kappa_max, WithinRel(d16.kappa_max, 1e-12));
  CHECK(d8.n_realized >= 1);
}

TEST_CASE("classification is invariant under triangle relabelling", "[geometry][property]")
{
  const auto bg = build_background(Box{-1, 1, -1, 1}, 8);
  std::vector<int> perm;
  const auto shuffled = std::make_shared<const BackgroundMesh>(relabel(bg, perm, 5));
  const LevelSet phi = LevelSet::annulus(Vec2(0, 0), 0.5, 0.95);
  const auto a = classify(std::make_shared<const BackgroundMesh>(bg), phi);
  const auto b = classify(shuffled, phi);
  auto key_set = [](const ActiveMesh &am, CellLabel label) {
    std::set<std::array<int, 3>> out;
    for (int t : am.active)
      if (am.labels[t] == label)
        out.insert(am.parent->triangles[t]);
    return out;
  };
  CHECK(key_set(a, CellLabel::Cut) == key_set(b, CellLabel::Cut));
  CHECK(key_set(a, CellLabel::Immersed) == key_set(b, CellLabel::Immersed));
  std::set<int> fa, fb;
  for (const auto &f : a.stab_facets)
    fa.insert(f.edge);
  for (const auto &f : b.stab_facets)
    fb.insert(f.edge);
  CHECK(fa == fb);
}

TEST_CASE("mesh dump format", "[geometry]")
{
  const auto bg = mesh(unit_box, 4);
  const auto am = classify(bg, LevelSet::affine(Vec2(-1, -1), -0.1));
  std::ostringstream os;
  write_mesh_dump(os, am, {am.stab_facets.front()});
  std::istringstream is(os.str());
  int v = 0, t = 0, f = 0, macro = 0;
  for (std::string line; std::getline(is, line);)
  {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v")
      ++v;
    else if (tag == "t")
      ++t;
    else if (tag == "f")
    {
      int i, j;
      std::string label;
      ls >> i >> j >> label;
      ++f;
      macro += label == "MACRO";
      CHECK((label == "MACRO" || label == "STAB"));
    }
  }
  CHECK(v == 25);
  CHECK(t == 32);
  CHECK(f == 3);
  CHECK(macro == 1);
}
