// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CUTFEEC_QUADRATURE_HPP
#define CUTFEEC_QUADRATURE_HPP

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cutfeec {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Triangle2 = std::array<Point2<Scalar>, 3>;

class QuadratureError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Points and positive weights in physical coordinates.
template <typename Scalar>
struct QuadRule
{
  std::vector<Point2<Scalar>> points;
  std::vector<Scalar> weights;
  int degree = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  Scalar measure() const
  {
    Scalar sum(0);
    for (Scalar w : weights)
      sum += w;
    return sum;
  }

  template <typename Fn>
  auto integrate(Fn &&f) const
  {
    decltype(f(points.front())) sum{};
    for (std::size_t q = 0; q < points.size(); ++q)
      sum += weights[q] * f(points[q]);
    return sum;
  }

  void append(const QuadRule &other)
  {
    points.insert(points.end(), other.points.begin(), other.points.end());
    weights.insert(weights.end(), other.weights.begin(), other.weights.end());
  }
};

template <typename Scalar>
Scalar signed_area(const Triangle2<Scalar> &T)
{
  const Point2<Scalar> a = T[1] - T[0], b = T[2] - T[0];
  return Scalar(0.5) * (a.x() * b.y() - a.y() * b.x());
}

namespace detail {

// Symmetric rules on the reference simplex, barycentric orbits with weights summing to one.
struct Orbit
{
  double a;       // (a, a, 1 - 2a) and permutations; a = 1/3 is the centroid
  double weight;  // per point
};

inline const std::vector<Orbit> &triangle_orbits(int degree)
{
  static const std::vector<Orbit> deg1 = {{1.0 / 3.0, 1.0}};
  static const std::vector<Orbit> deg2 = {{1.0 / 6.0, 1.0 / 3.0}};
  // Six-point rule of degree 4 (all weights positive); also used for degree 3.
  static const std::vector<Orbit> deg4 = {
      {0.445948490915964886318329253883, 0.223381589678011465944640202},
      {0.091576213509770743459571463402, 0.109951743655321867388693131}};
  switch (degree)
  {
  case 1: return deg1;
  case 2: return deg2;
  case 3:
  case 4: return deg4;
  default: throw QuadratureError("triangle_rule: supported degrees are 1..4");
  }
}

}  // namespace detail

template <typename Scalar>
QuadRule<Scalar> triangle_rule(const Triangle2<Scalar> &T, int degree)
{
  QuadRule<Scalar> rule;
  rule.degree = degree;
  const Scalar area = std::abs(signed_area(T));
  for (const auto &orbit : detail::triangle_orbits(degree))
  {
    const Scalar a(orbit.a), b = Scalar(1) - Scalar(2) * a;
    std::vector<std::array<Scalar, 3>> bary;
    if (std::abs(orbit.a - 1.0 / 3.0) < 1e-15)
      bary = {{a, a, a}};
    else
      bary = {{b, a, a}, {a, b, a}, {a, a, b}};
    for (const auto &l : bary)
    {
      rule.points.push_back(l[0] * T[0] + l[1] * T[1] + l[2] * T[2]);
      rule.weights.push_back(Scalar(orbit.weight) * area);
    }
  }
  return rule;
}

/// Gauss-Legendre rule on the segment [a, b]; exact up to `degree` (<= 5).
template <typename Scalar>
QuadRule<Scalar> facet_rule(const Point2<Scalar> &a, const Point2<Scalar> &b, int degree)
{
  static const std::vector<std::pair<double, double>> g1 = {{0.0, 2.0}};
  static const std::vector<std::pair<double, double>> g2 = {{-0.577350269189625764509148780502, 1.0},
                                                           {0.577350269189625764509148780502, 1.0}};
  static const std::vector<std::pair<double, double>> g3 = {{-0.774596669241483377035853079956, 5.0 / 9.0},
                                                           {0.0, 8.0 / 9.0},
                                                           {0.774596669241483377035853079956, 5.0 / 9.0}};
  const std::vector<std::pair<double, double>> *g = nullptr;
  if (degree >= 0 && degree <= 1)
    g = &g1;
  else if (degree <= 3 && degree > 1)
    g = &g2;
  else if (degree <= 5 && degree > 3)
    g = &g3;
  else
    throw QuadratureError("facet_rule: supported degrees are 0..5");
  QuadRule<Scalar> rule;
  rule.degree = degree;
  const Scalar length = (b - a).norm();
  for (const auto &[t, w] : *g)
  {
    const Scalar s = Scalar(0.5) * (Scalar(1) + Scalar(t));
    rule.points.push_back((Scalar(1) - s) * a + s * b);
    rule.weights.push_back(Scalar(0.5) * Scalar(w) * length);
  }
  return rule;
}

/// Rule on {φ_lin < 0} ∩ T, where φ_lin interpolates the vertex values `phi`.
template <typename Scalar>
QuadRule<Scalar> cut_rule(const Triangle2<Scalar> &T, const std::array<Scalar, 3> &phi, int degree)
{
  int inside = 0;
  for (Scalar v : phi)
    inside += v < 0;
  if (inside == 3)
    return triangle_rule(T, degree);
  QuadRule<Scalar> rule;
  rule.degree = degree;
  if (inside == 0)
    return rule;

  auto crossing = [&](int i, int j) -> Point2<Scalar> {
    const Scalar s = phi[i] / (phi[i] - phi[j]);
    return T[i] + s * (T[j] - T[i]);
  };
  auto add_piece = [&](const Triangle2<Scalar> &piece) {
    if (std::abs(signed_area(piece)) > Scalar(0))
      rule.append(triangle_rule(piece, degree));
  };

  if (inside == 1)
  {
    int i = 0;
    while (!(phi[i] < 0))
      ++i;
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    add_piece({T[i], crossing(i, j), crossing(i, k)});
  }
  else
  {
    int k = 0;
    while (phi[k] < 0)
      ++k;
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    const Point2<Scalar> pj = crossing(j, k), pi = crossing(i, k);
    add_piece({T[i], T[j], pj});
    add_piece({T[i], pj, pi});
  }
  return rule;
}

}  // namespace cutfeec

#endif  // CUTFEEC_QUADRATURE_HPP
