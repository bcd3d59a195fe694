// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#include "cutfeec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace cutfeec {

LevelSet::LevelSet(Function fn, std::string description)
    : fn_(std::move(fn)), description_(std::move(description))
{
}

LevelSet LevelSet::circle(const Vec2 &center, double radius)
{
  if (!(radius > 0))
    throw GeometryError("LevelSet::circle: radius must be positive");
  std::ostringstream os;
  os << "circle(" << center.x() << "," << center.y() << ";" << radius << ")";
  return LevelSet([center, radius](const Vec2 &x) { return (x - center).norm() - radius; }, os.str());
}

LevelSet LevelSet::annulus(const Vec2 &center, double r_inner, double r_outer)
{
  if (!(r_inner > 0) || !(r_inner < r_outer))
    throw GeometryError("LevelSet::annulus: need 0 < r_inner < r_outer");
  std::ostringstream os;
  os << "annulus(" << center.x() << "," << center.y() << ";" << r_inner << "," << r_outer << ")";
  return LevelSet(
      [center, r_inner, r_outer](const Vec2 &x) {
        const double r = (x - center).norm();
        return std::max(r - r_outer, r_inner - r);
      },
      os.str());
}

LevelSet LevelSet::affine(const Vec2 &normal, double offset)
{
  std::ostringstream os;
  os << "affine(" << normal.x() << "," << normal.y() << ";" << offset << ")";
  return LevelSet([normal, offset](const Vec2 &x) { return normal.dot(x) - offset; }, os.str());
}

LevelSet LevelSet::shifted(const Vec2 &offset) const
{
  LevelSet copy = *this;
  copy.offset_ = offset;
  return copy;
}

int BackgroundMesh::locate(const Vec2 &x) const
{
  if (x.x() < box.xmin || x.x() > box.xmax || x.y() < box.ymin || x.y() > box.ymax)
    return -1;
  const double hx = box.width() / cells, hy = box.height() / cells;
  const int i = std::clamp(static_cast<int>(std::floor((x.x() - box.xmin) / hx)), 0, cells - 1);
  const int j = std::clamp(static_cast<int>(std::floor((x.y() - box.ymin) / hy)), 0, cells - 1);
  const double dx = (x.x() - box.xmin) / hx - i, dy = (x.y() - box.ymin) / hy - j;
  return 2 * (j * cells + i) + (dy > dx ? 1 : 0);
}

BackgroundMesh build_background(const Box &box, int m)
{
  if (m < 1)
    throw GeometryError("build_background: need at least one cell per side");
  if (!(box.width() > 0) || !(box.height() > 0))
    throw GeometryError("build_background: degenerate box");
  BackgroundMesh mesh;
  mesh.box = box;
  mesh.cells = m;
  mesh.h = box.width() / m;
  const double hx = box.width() / m, hy = box.height() / m;
  auto vid = [m](int i, int j) { return j * (m + 1) + i; };
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i)
      mesh.vertices.emplace_back(box.xmin + i * hx, box.ymin + j * hy);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
    {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }

  std::map<std::pair<int, int>, int> edge_id;
  mesh.triangle_edges.resize(mesh.triangles.size());
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
  {
    const auto &v = mesh.triangles[t];
    for (int l = 0; l < 3; ++l)
    {
      const int a = v[(l + 1) % 3], b = v[(l + 2) % 3];
      const auto key = std::minmax(a, b);
      auto it = edge_id.find(key);
      if (it == edge_id.end())
      {
        it = edge_id.emplace(key, static_cast<int>(mesh.edges.size())).first;
        mesh.edges.push_back({key.first, key.second});
        mesh.edge_triangles.push_back({t, -1});
      }
      else
      {
        mesh.edge_triangles[it->second][1] = t;
      }
      mesh.triangle_edges[t][l] = it->second;
    }
  }
  return mesh;
}

const char *to_string(CellLabel label)
{
  switch (label)
  {
  case CellLabel::Outside: return "OUTSIDE";
  case CellLabel::Cut: return "CUT";
  case CellLabel::Immersed: return "IMMERSED";
  }
  return "?";
}

int ActiveMesh::count(CellLabel label) const
{
  return static_cast<int>(std::count(labels.begin(), labels.end(), label));
}

StabFacet ActiveMesh::make_facet(int edge) const
{
  const auto &bg = *parent;
  const auto &et = bg.edge_triangles[edge];
  StabFacet f;
  f.edge = edge;
  f.from = std::min(et[0], et[1]);
  f.to = std::max(et[0], et[1]);
  const Vec2 a = bg.vertices[bg.edges[edge][0]], b = bg.vertices[bg.edges[edge][1]];
  const Vec2 t = (b - a).normalized();
  Vec2 n(t.y(), -t.x());
  const auto centroid = [&](int tri) {
    const auto T = bg.triangle(tri);
    return Vec2((T[0] + T[1] + T[2]) / 3.0);
  };
  if (n.dot(centroid(f.to) - centroid(f.from)) < 0)
    n = -n;
  f.normal = n;
  return f;
}

ActiveMesh classify(std::shared_ptr<const BackgroundMesh> background, const LevelSet &phi, int n_max)
{
  ActiveMesh am;
  am.parent = background;
  const auto &bg = *background;
  const int nt = static_cast<int>(bg.triangles.size());

  am.vertex_phi.resize(bg.vertices.size());
  for (std::size_t v = 0; v < bg.vertices.size(); ++v)
    am.vertex_phi[v] = phi(bg.vertices[v]);

  am.labels.assign(nt, CellLabel::Outside);
  am.cut_fraction.assign(nt, 0.0);
  for (int t = 0; t < nt; ++t)
  {
    const auto p = am.phi(t);
    if (!(std::min({p[0], p[1], p[2]}) < 0))
      continue;
    const auto &v = bg.triangles[t];
    bool immersed = p[0] < 0 && p[1] < 0 && p[2] < 0;
    for (int l = 0; l < 3 && immersed; ++l)
      immersed = phi(0.5 * (bg.vertices[v[(l + 1) % 3]] + bg.vertices[v[(l + 2) % 3]])) < 0;
    am.labels[t] = immersed ? CellLabel::Immersed : CellLabel::Cut;
    am.cut_fraction[t] = am.physical_rule(t, 2).measure() / bg.area(t);
    am.active.push_back(t);
  }
  if (am.active.empty())
    throw GeometryError("classify: the level set does not meet the background mesh");

  std::set<int> verts, edges;
  for (int t : am.active)
  {
    for (int v : bg.triangles[t])
      verts.insert(v);
    for (int e : bg.triangle_edges[t])
      edges.insert(e);
  }
  am.active_vertices.assign(verts.begin(), verts.end());
  am.active_edges.assign(edges.begin(), edges.end());

  for (int e : am.active_edges)
  {
    const auto &et = bg.edge_triangles[e];
    if (et[1] < 0 || !am.is_active(et[0]) || !am.is_active(et[1]))
      continue;
    am.interior_edges.push_back(e);
    if (am.labels[et[0]] == CellLabel::Cut || am.labels[et[1]] == CellLabel::Cut)
      am.stab_facets.push_back(am.make_facet(e));
  }

  am.cut_to_uncut = cut_to_uncut(am, n_max, &am.n_realized);
  return am;
}

namespace {

// Multi-source breadth-first search over interior facets of the active mesh.
// Returns (parent triangle, crossing edge, root) per background triangle; -1 where unreached.
struct SearchForest
{
  std::vector<int> parent, via, root, depth;
};

SearchForest breadth_first(const ActiveMesh &am, const std::vector<int> &sources)
{
  const auto &bg = *am.parent;
  const int nt = static_cast<int>(bg.triangles.size());
  SearchForest f{std::vector<int>(nt, -1), std::vector<int>(nt, -1), std::vector<int>(nt, -1),
                 std::vector<int>(nt, -1)};
  std::deque<int> queue;
  for (int s : sources)
  {
    f.root[s] = s;
    f.depth[s] = 0;
    queue.push_back(s);
  }
  while (!queue.empty())
  {
    const int t = queue.front();
    queue.pop_front();
    for (int e : bg.triangle_edges[t])
    {
      const int nb = bg.neighbour(t, e);
      if (nb < 0 || !am.is_active(nb) || f.root[nb] >= 0)
        continue;
      f.root[nb] = f.root[t];
      f.parent[nb] = t;
      f.via[nb] = e;
      f.depth[nb] = f.depth[t] + 1;
      queue.push_back(nb);
    }
  }
  return f;
}

}  // namespace

std::map<int, CutPath> cut_to_uncut(const ActiveMesh &am, int n_max, int *n_realized)
{
  std::vector<int> immersed;
  for (int t : am.active)
    if (am.labels[t] == CellLabel::Immersed)
      immersed.push_back(t);
  std::map<int, CutPath> paths;
  int longest = 0;
  bool any_cut = false;
  for (int t : am.active)
    any_cut = any_cut || am.labels[t] == CellLabel::Cut;
  if (!any_cut)
  {
    if (n_realized)
      *n_realized = 0;
    return paths;
  }
  if (immersed.empty())
    throw GeometryError("cut_to_uncut: no fully immersed triangle at this resolution");

  const SearchForest f = breadth_first(am, immersed);
  for (int t : am.active)
  {
    if (am.labels[t] != CellLabel::Cut)
      continue;
    if (f.root[t] < 0)
      throw GeometryError("cut_to_uncut: cut triangle " + std::to_string(t) +
                          " is not connected to an immersed triangle");
    CutPath path;
    path.target = f.root[t];
    for (int s = t; s >= 0; s = f.parent[s])
    {
      path.triangles.push_back(s);
      if (f.via[s] >= 0)
        path.facets.push_back(f.via[s]);
    }
    const int length = static_cast<int>(path.triangles.size());
    if (length > n_max)
      throw GeometryError("cut_to_uncut: cut triangle " + std::to_string(t) + " needs " +
                          std::to_string(length) + " elements to reach an immersed one (limit " +
                          std::to_string(n_max) + ")");
    longest = std::max(longest, length);
    paths.emplace(t, std::move(path));
  }
  if (n_realized)
    *n_realized = longest;
  return paths;
}

std::vector<StabFacet> macro_facets(const ActiveMesh &am, double delta)
{
  if (!(delta > 0) || delta > 1)
    throw GeometryError("macro_facets: delta must lie in (0, 1]");
  const auto &bg = *am.parent;
  std::vector<int> large;
  bool any_small = false;
  std::vector<char> is_large(bg.triangles.size(), 0);
  for (int t : am.active)
  {
    if (am.labels[t] == CellLabel::Immersed || am.cut_fraction[t] >= delta)
    {
      large.push_back(t);
      is_large[t] = 1;
    }
    else
    {
      any_small = true;
    }
  }
  std::vector<StabFacet> out;
  if (!any_small)
    return out;
  if (large.empty())
    throw GeometryError("macro_facets: no element with cut fraction >= delta");

  const SearchForest f = breadth_first(am, large);
  for (int t : am.active)
    if (!is_large[t] && f.root[t] < 0)
      throw GeometryError("macro_facets: small triangle " + std::to_string(t) +
                          " cannot reach a large element");
  for (int e : am.interior_edges)
  {
    const auto &et = bg.edge_triangles[e];
    if (f.root[et[0]] != f.root[et[1]])
      continue;
    if (is_large[et[0]] && is_large[et[1]])
      continue;
    out.push_back(am.make_facet(e));
  }
  return out;
}

double shape_ratio(const Triangle2<double> &T)
{
  const double a = (T[1] - T[2]).norm(), b = (T[0] - T[2]).norm(), c = (T[0] - T[1]).norm();
  const double area = std::abs(signed_area(T));
  const double inradius = 2.0 * area / (a + b + c);
  return std::max({a, b, c}) / (2.0 * inradius);
}

MeshDiagnostics mesh_diagnostics(const ActiveMesh &am)
{
  const auto &bg = *am.parent;
  MeshDiagnostics d;
  d.n_realized = am.n_realized;
  d.h_min = std::numeric_limits<double>::infinity();
  for (int t : am.active)
  {
    const auto T = bg.triangle(t);
    d.kappa_max = std::max(d.kappa_max, shape_ratio(T));
    const double diam = std::max({(T[1] - T[2]).norm(), (T[0] - T[2]).norm(), (T[0] - T[1]).norm()});
    d.h_min = std::min(d.h_min, diam);
    d.h_max = std::max(d.h_max, diam);
  }
  return d;
}

void write_mesh_dump(std::ostream &os, const ActiveMesh &am, const std::vector<StabFacet> &macro)
{
  const auto &bg = *am.parent;
  std::set<int> macro_edges;
  for (const auto &f : macro)
    macro_edges.insert(f.edge);
  os.precision(17);
  for (const auto &v : bg.vertices)
    os << "v " << v.x() << ' ' << v.y() << '\n';
  for (int t : am.active)
  {
    const auto &v = bg.triangles[t];
    os << "t " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  }
  for (const auto &f : am.stab_facets)
  {
    const auto &e = bg.edges[f.edge];
    os << "f " << e[0] << ' ' << e[1] << ' ' << (macro_edges.count(f.edge) ? "MACRO" : "STAB") << '\n';
  }
}

}  // namespace cutfeec
