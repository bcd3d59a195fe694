// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CUTFEEC_GEOMETRY_HPP
#define CUTFEEC_GEOMETRY_HPP

#include "cutfeec/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cutfeec {

using Vec2 = Eigen::Vector2d;

/// Raised when the cut configuration violates the mesh assumptions
/// (empty active mesh, unreachable immersed element, ...).
class GeometryError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Signed level set, negative inside the physical domain. The offset translates
/// the domain: evaluate(x) = φ(x - offset).
class LevelSet
{
public:
  using Function = std::function<double(const Vec2 &)>;

  LevelSet(Function fn, std::string description);

  static LevelSet circle(const Vec2 &center, double radius);
  /// {r_inner < |x - c| < r_outer}.
  static LevelSet annulus(const Vec2 &center, double r_inner, double r_outer);
  /// Half-plane {normal · x < offset}.
  static LevelSet affine(const Vec2 &normal, double offset);

  double operator()(const Vec2 &x) const { return fn_(x - offset_); }
  double evaluate(const Vec2 &x) const { return (*this)(x); }

  LevelSet shifted(const Vec2 &offset) const;
  const Vec2 &offset() const { return offset_; }
  const std::string &description() const { return description_; }

private:
  Function fn_;
  Vec2 offset_ = Vec2::Zero();
  std::string description_;
};

struct Box
{
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
};

/// Structured triangulation of a rectangle: m x m cells split along the (+1, +1) diagonal.
struct BackgroundMesh
{
  Box box;
  int cells = 0;
  double h = 0;  // box width / m
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<std::array<int, 2>> edges;      // (low, high) vertex index
  std::vector<std::array<int, 2>> edge_triangles;  // second entry -1 on the box boundary
  std::vector<std::array<int, 3>> triangle_edges;  // local edge i is opposite local vertex i

  Triangle2<double> triangle(int t) const
  {
    const auto &v = triangles[t];
    return {vertices[v[0]], vertices[v[1]], vertices[v[2]]};
  }
  double area(int t) const { return std::abs(signed_area(triangle(t))); }
  int neighbour(int t, int e) const
  {
    const auto &et = edge_triangles[e];
    return et[0] == t ? et[1] : et[0];
  }
  /// Triangle containing x (ties resolved to the lower cell and lower triangle), -1 outside the box.
  int locate(const Vec2 &x) const;
};

BackgroundMesh build_background(const Box &box, int m);

enum class CellLabel
{
  Outside,
  Cut,
  Immersed
};

const char *to_string(CellLabel label);

/// Interior facet of the active mesh with a fixed unit normal pointing from `from` into `to`
/// (`from` is the lower background triangle index).
struct StabFacet
{
  int edge = -1;
  int from = -1;
  int to = -1;
  Vec2 normal = Vec2::Zero();
};

struct CutPath
{
  int target = -1;           // immersed triangle reached
  std::vector<int> triangles;  // T_1 = cut triangle, ..., T_N = target
  std::vector<int> facets;     // edges crossed, size N - 1
};

/// Background mesh restricted to the triangles meeting Ω, with cut/immersed labels.
struct ActiveMesh
{
  std::shared_ptr<const BackgroundMesh> parent;
  std::vector<double> vertex_phi;   // φ at every background vertex
  std::vector<CellLabel> labels;    // per background triangle
  std::vector<double> cut_fraction; // |T ∩ Ω_lin| / |T| per background triangle

  std::vector<int> active;          // active background triangles, increasing
  std::vector<int> active_vertices; // background vertices of active triangles, increasing
  std::vector<int> active_edges;    // background edges of active triangles, increasing
  std::vector<int> interior_edges;  // active edges shared by two active triangles
  std::vector<StabFacet> stab_facets;

  std::map<int, CutPath> cut_to_uncut;  // per cut triangle
  int n_realized = 0;                   // longest cut-to-uncut path (number of elements)

  bool is_active(int t) const { return labels[t] != CellLabel::Outside; }
  int count(CellLabel label) const;

  std::array<double, 3> phi(int t) const
  {
    const auto &v = parent->triangles[t];
    return {vertex_phi[v[0]], vertex_phi[v[1]], vertex_phi[v[2]]};
  }

  QuadRule<double> physical_rule(int t, int degree) const
  {
    return cut_rule(parent->triangle(t), phi(t), degree);
  }

  StabFacet make_facet(int edge) const;
};

inline constexpr int kDefaultMaxPath = 10;

/// Labels, active sets, stabilisation facets and cut-to-uncut paths.
/// Throws GeometryError if Ω misses the box or a path exceeds `n_max` elements.
ActiveMesh classify(std::shared_ptr<const BackgroundMesh> background, const LevelSet &phi,
                    int n_max = kDefaultMaxPath);

/// Shortest facet path from every cut triangle to an immersed one, by breadth-first search.
std::map<int, CutPath> cut_to_uncut(const ActiveMesh &am, int n_max, int *n_realized = nullptr);

/// Stabilisation facets restricted to macro patches: triangles with cut fraction
/// below `delta` are attached to a large root through interior facets.
std::vector<StabFacet> macro_facets(const ActiveMesh &am, double delta);

struct MeshDiagnostics
{
  double kappa_max = 0;  // max h_T / ϱ_T
  int n_realized = 0;
  double h_min = 0;
  double h_max = 0;
};

MeshDiagnostics mesh_diagnostics(const ActiveMesh &am);

/// Shape ratio of one triangle: diameter over inscribed-circle diameter.
double shape_ratio(const Triangle2<double> &T);

/// Debug dump: "v x y" per vertex, "t i j k" per active triangle,
/// "f i j LABEL" per stabilisation facet (LABEL is STAB or MACRO).
void write_mesh_dump(std::ostream &os, const ActiveMesh &am, const std::vector<StabFacet> &macro = {});

}  // namespace cutfeec

#endif  // CUTFEEC_GEOMETRY_HPP
