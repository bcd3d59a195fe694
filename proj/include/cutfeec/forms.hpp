// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CUTFEEC_FORMS_HPP
#define CUTFEEC_FORMS_HPP

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cutfeec {

//
// Pointwise exterior algebra on R^n, n <= 4.
//
// A k-form is stored as a dense coefficient vector over the increasing
// multi-indices of length k, in lexicographic order: for n = 3, k = 2 the
// order is (0,1), (0,2), (1,2). Indices are 0-based (dx^0 = dx, dx^1 = dy).
// Degrees outside [0, n] denote the trivial space Λ^k = {0}; such forms have
// no coefficients and arise only as traces of top-degree forms or normal
// traces of 0-forms.
//

inline constexpr int kMaxDim = 4;

class FormError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Strictly increasing index set {i_1 < ... < i_k} in 0..n-1, stored as a bitmask.
class MultiIndex
{
public:
  constexpr MultiIndex() = default;
  constexpr explicit MultiIndex(unsigned mask) : mask_(mask) {}

  static MultiIndex from_indices(const std::vector<int> &indices)
  {
    unsigned mask = 0;
    int last = -1;
    for (int i : indices)
    {
      if (i <= last || i < 0 || i >= kMaxDim)
        throw FormError("MultiIndex: indices must be strictly increasing in [0, 4)");
      mask |= 1u << i;
      last = i;
    }
    return MultiIndex(mask);
  }

  constexpr unsigned mask() const { return mask_; }
  constexpr int degree() const { return std::popcount(mask_); }
  constexpr bool contains(int i) const { return (mask_ >> i) & 1u; }

  std::vector<int> indices() const
  {
    std::vector<int> out;
    for (int i = 0; i < kMaxDim; ++i)
      if (contains(i))
        out.push_back(i);
    return out;
  }

  friend constexpr bool operator==(MultiIndex a, MultiIndex b) { return a.mask_ == b.mask_; }

private:
  unsigned mask_ = 0;
};

namespace detail {

inline int binomial(int n, int k)
{
  if (k < 0 || k > n)
    return 0;
  int r = 1;
  for (int i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

// Lexicographically ordered multi-indices of degree k in dimension n.
struct IndexTable
{
  std::vector<MultiIndex> basis;      // position -> multi-index
  std::array<int, 1 << kMaxDim> pos;  // mask -> position, -1 if not of degree k
};

inline IndexTable make_table(int n, int k)
{
  IndexTable t;
  t.pos.fill(-1);
  if (k < 0 || k > n)
    return t;
  // Lexicographic enumeration of combinations.
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i)
    c[i] = i;
  while (true)
  {
    unsigned mask = 0;
    for (int i : c)
      mask |= 1u << i;
    t.pos[mask] = static_cast<int>(t.basis.size());
    t.basis.emplace_back(mask);
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i)
      --i;
    if (i < 0)
      break;
    ++c[i];
    for (int j = i + 1; j < k; ++j)
      c[j] = c[j - 1] + 1;
  }
  return t;
}

inline const IndexTable &table(int n, int k)
{
  static const auto tables = [] {
    std::array<std::array<IndexTable, kMaxDim + 3>, kMaxDim + 1> all;
    for (int n = 0; n <= kMaxDim; ++n)
      for (int k = -1; k <= kMaxDim + 1; ++k)
        all[n][k + 1] = make_table(n, k);
    return all;
  }();
  if (n < 0 || n > kMaxDim || k < -1 || k > kMaxDim + 1)
    throw FormError("IndexTable: dimension or degree out of supported range");
  return tables[n][k + 1];
}

// Sign of the permutation sorting the concatenation (I, J) for disjoint I, J.
inline int merge_sign(unsigned I, unsigned J)
{
  int inversions = 0;
  for (int j = 0; j < kMaxDim; ++j)
    if ((J >> j) & 1u)
      inversions += std::popcount(I >> (j + 1));
  return (inversions % 2) ? -1 : 1;
}

}  // namespace detail

template <typename Scalar>
using SmallVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, 6, 1>;

template <typename Scalar>
using SmallMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

template <typename Scalar>
using PointN = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

/// Alternating k-form value at a point of R^n.
template <typename Scalar>
class AltForm
{
public:
  using Coefficients = SmallVector<Scalar>;

  AltForm() : AltForm(0, 0) {}

  AltForm(int dim, int degree) : dim_(dim), degree_(degree)
  {
    if (dim < 0 || dim > kMaxDim)
      throw FormError("AltForm: ambient dimension must lie in [0, 4]");
    coeffs_ = Coefficients::Zero(detail::binomial(dim, degree));
  }

  AltForm(int dim, int degree, const Coefficients &coeffs) : AltForm(dim, degree)
  {
    if (coeffs.size() != coeffs_.size())
      throw FormError("AltForm: coefficient count does not match C(n, k)");
    coeffs_ = coeffs;
  }

  static AltForm zero(int dim, int degree) { return AltForm(dim, degree); }

  /// The basis form dx^I.
  static AltForm basis(int dim, MultiIndex I)
  {
    AltForm a(dim, I.degree());
    a[I] = Scalar(1);
    return a;
  }

  static AltForm scalar(int dim, Scalar value)
  {
    AltForm a(dim, 0);
    a.coeffs_[0] = value;
    return a;
  }

  /// The 1-form with the given components.
  static AltForm covector(const PointN<Scalar> &v)
  {
    AltForm a(static_cast<int>(v.size()), 1);
    a.coeffs_ = v;
    return a;
  }

  static AltForm volume(int dim) { return basis(dim, MultiIndex((1u << dim) - 1u)); }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(coeffs_.size()); }
  bool trivial() const { return coeffs_.size() == 0; }

  const Coefficients &coeffs() const { return coeffs_; }
  Coefficients &coeffs() { return coeffs_; }

  Scalar operator[](MultiIndex I) const { return coeffs_[position(I)]; }
  Scalar &operator[](MultiIndex I) { return coeffs_[position(I)]; }

  const std::vector<MultiIndex> &index_basis() const { return detail::table(dim_, degree_).basis; }

  /// Value a(X_1, ..., X_k) for the columns of `vectors` (n x k).
  template <typename Derived>
  Scalar evaluate(const Eigen::MatrixBase<Derived> &vectors) const
  {
    if (vectors.rows() != dim_ || vectors.cols() != degree_)
      throw FormError("AltForm::evaluate: expected an n x k matrix of vectors");
    if (degree_ == 0)
      return coeffs_[0];
    Scalar value(0);
    const auto &tab = detail::table(dim_, degree_);
    SmallMatrix<Scalar> sub(degree_, degree_);
    for (std::size_t p = 0; p < tab.basis.size(); ++p)
    {
      int row = 0;
      for (int i : tab.basis[p].indices())
        sub.row(row++) = vectors.row(i);
      value += coeffs_[p] * sub.determinant();
    }
    return value;
  }

  AltForm &operator+=(const AltForm &b)
  {
    check_same(b);
    coeffs_ += b.coeffs_;
    return *this;
  }
  AltForm &operator-=(const AltForm &b)
  {
    check_same(b);
    coeffs_ -= b.coeffs_;
    return *this;
  }
  AltForm &operator*=(Scalar s)
  {
    coeffs_ *= s;
    return *this;
  }

  friend AltForm operator+(AltForm a, const AltForm &b) { return a += b; }
  friend AltForm operator-(AltForm a, const AltForm &b) { return a -= b; }
  friend AltForm operator-(AltForm a) { return a *= Scalar(-1); }
  friend AltForm operator*(Scalar s, AltForm a) { return a *= s; }
  friend AltForm operator*(AltForm a, Scalar s) { return a *= s; }

  Scalar max_abs() const { return coeffs_.size() ? coeffs_.cwiseAbs().maxCoeff() : Scalar(0); }

private:
  int position(MultiIndex I) const
  {
    const int p = detail::table(dim_, degree_).pos[I.mask()];
    if (p < 0)
      throw FormError("AltForm: multi-index of wrong degree or dimension");
    return p;
  }

  void check_same(const AltForm &b) const
  {
    if (b.dim_ != dim_ || b.degree_ != degree_)
      throw FormError("AltForm: dimension or degree mismatch");
  }

  int dim_;
  int degree_;
  Coefficients coeffs_;
};

template <typename Scalar>
AltForm<Scalar> wedge(const AltForm<Scalar> &a, const AltForm<Scalar> &b)
{
  if (a.dim() != b.dim())
    throw FormError("wedge: dimension mismatch");
  const int n = a.dim();
  if (a.degree() + b.degree() > n)
    throw FormError("wedge: k + l exceeds the ambient dimension");
  AltForm<Scalar> out(n, a.degree() + b.degree());
  if (a.trivial() || b.trivial())
    return out;
  const auto &ia = a.index_basis();
  const auto &ib = b.index_basis();
  for (std::size_t p = 0; p < ia.size(); ++p)
    for (std::size_t q = 0; q < ib.size(); ++q)
    {
      const unsigned I = ia[p].mask(), J = ib[q].mask();
      if (I & J)
        continue;
      out[MultiIndex(I | J)] += Scalar(detail::merge_sign(I, J)) * a.coeffs()[p] * b.coeffs()[q];
    }
  return out;
}

/// Euclidean Hodge star for the standard orientation; dx^I -> sign(I, I^c) dx^{I^c}.
template <typename Scalar>
AltForm<Scalar> hodge_star(const AltForm<Scalar> &a)
{
  const int n = a.dim();
  AltForm<Scalar> out(n, n - a.degree());
  const unsigned full = (1u << n) - 1u;
  const auto &ia = a.index_basis();
  for (std::size_t p = 0; p < ia.size(); ++p)
  {
    const unsigned I = ia[p].mask();
    out[MultiIndex(full & ~I)] = Scalar(detail::merge_sign(I, full & ~I)) * a.coeffs()[p];
  }
  return out;
}

/// Pointwise L2 integrand: coefficient of a ∧ ★b on the volume form.
template <typename Scalar>
Scalar inner(const AltForm<Scalar> &a, const AltForm<Scalar> &b)
{
  if (a.dim() != b.dim() || a.degree() != b.degree())
    throw FormError("inner: dimension or degree mismatch");
  return a.coeffs().dot(b.coeffs());
}

/// Interior product v ⌐ a.
template <typename Scalar>
AltForm<Scalar> contract(const PointN<Scalar> &v, const AltForm<Scalar> &a)
{
  if (a.degree() < 1)
    throw FormError("contract: degree must be at least 1");
  if (v.size() != a.dim())
    throw FormError("contract: vector dimension mismatch");
  AltForm<Scalar> out(a.dim(), a.degree() - 1);
  const auto &ia = a.index_basis();
  for (std::size_t p = 0; p < ia.size(); ++p)
  {
    int position = 0;
    for (int i : ia[p].indices())
    {
      const Scalar sign = (position % 2) ? Scalar(-1) : Scalar(1);
      out[MultiIndex(ia[p].mask() & ~(1u << i))] += sign * v[i] * a.coeffs()[p];
      ++position;
    }
  }
  return out;
}

/// Pullback A^* a of a form on R^p by the linear map A : R^q -> R^p (a p x q matrix).
template <typename Scalar, typename Derived>
AltForm<Scalar> pullback(const AltForm<Scalar> &a, const Eigen::MatrixBase<Derived> &A)
{
  if (A.rows() != a.dim())
    throw FormError("pullback: matrix rows must match the form dimension");
  const int q = static_cast<int>(A.cols());
  AltForm<Scalar> out(q, a.degree());
  if (out.trivial() || a.trivial())
    return out;
  const int k = a.degree();
  if (k == 0)
  {
    out.coeffs()[0] = a.coeffs()[0];
    return out;
  }
  const auto &ia = a.index_basis();
  const auto &io = out.index_basis();
  SmallMatrix<Scalar> sub(k, k);
  for (std::size_t s = 0; s < io.size(); ++s)
  {
    const auto cols = io[s].indices();
    Scalar value(0);
    for (std::size_t p = 0; p < ia.size(); ++p)
    {
      const auto rows = ia[p].indices();
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c)
          sub(r, c) = A(rows[r], cols[c]);
      value += a.coeffs()[p] * sub.determinant();
    }
    out.coeffs()[s] = value;
  }
  return out;
}

/// Orthonormal frame {normal, tangents} adapted to an affine hyperplane in R^n.
template <typename Scalar>
class FacetFrame
{
public:
  using Point = PointN<Scalar>;
  using Tangents = SmallMatrix<Scalar>;

  FacetFrame(const Point &normal, const Tangents &tangents, const Point &origin)
      : normal_(normal), tangents_(tangents), origin_(origin)
  {
    const int n = static_cast<int>(normal.size());
    if (n < 1 || n > kMaxDim || tangents.rows() != n || tangents.cols() != n - 1 || origin.size() != n)
      throw FormError("FacetFrame: inconsistent dimensions");
    SmallMatrix<Scalar> basis(n, n);
    basis.col(0) = normal_;
    basis.rightCols(n - 1) = tangents_;
    const Scalar defect = (basis.transpose() * basis - SmallMatrix<Scalar>::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(defect < Scalar(1e-10)))
      throw FormError("FacetFrame: {normal, tangents} is not orthonormal");
    orientation_ = basis.determinant() > 0 ? 1 : -1;
  }

  /// Frame of the hyperplane through `vertices` (columns, n x n): tangents by
  /// Gram-Schmidt in vertex order, normal completing the basis so that
  /// `normal` points towards the side of `side_hint` (if nonzero).
  static FacetFrame from_vertices(const SmallMatrix<Scalar> &vertices, const Point &side_hint)
  {
    const int n = static_cast<int>(vertices.rows());
    if (vertices.cols() != n)
      throw FormError("FacetFrame::from_vertices: need n vertices in R^n");
    Tangents t(n, n - 1);
    for (int j = 1; j < n; ++j)
    {
      Point v = vertices.col(j) - vertices.col(0);
      for (int i = 0; i < j - 1; ++i)
        v -= t.col(i).dot(v) * t.col(i);
      const Scalar len = v.norm();
      if (!(len > Scalar(0)))
        throw FormError("FacetFrame::from_vertices: degenerate facet");
      t.col(j - 1) = v / len;
    }
    Point normal = complement(t);
    if (side_hint.size() == n && normal.dot(side_hint) < 0)
      normal = -normal;
    return FacetFrame(normal, t, vertices.col(0));
  }

  /// Frame with the given unit normal; tangents by Gram-Schmidt on the standard basis.
  static FacetFrame from_normal(const Point &normal, const Point &origin)
  {
    const int n = static_cast<int>(normal.size());
    const Point nu = normal / normal.norm();
    Tangents t(n, n - 1);
    int filled = 0;
    for (int e = 0; e < n && filled < n - 1; ++e)
    {
      Point v = Point::Unit(n, e);
      v -= nu.dot(v) * nu;
      for (int i = 0; i < filled; ++i)
        v -= t.col(i).dot(v) * t.col(i);
      if (v.norm() > Scalar(1e-6))
        t.col(filled++) = v / v.norm();
    }
    return FacetFrame(nu, t, origin);
  }

  int dim() const { return static_cast<int>(normal_.size()); }
  const Point &normal() const { return normal_; }
  const Tangents &tangents() const { return tangents_; }
  const Point &origin() const { return origin_; }
  /// Sign of det[normal, tangents]; the facet orientation is the one induced by this ordering.
  int orientation() const { return orientation_; }

  /// Copy with the normal reversed and the facet orientation kept consistent.
  FacetFrame flipped() const
  {
    Tangents t = tangents_;
    if (dim() > 1)
      t.col(0) = -t.col(0);
    return FacetFrame(-normal_, t, origin_);
  }

private:
  static Point complement(const Tangents &t)
  {
    const int n = static_cast<int>(t.rows());
    Point best;
    Scalar best_norm(-1);
    for (int e = 0; e < n; ++e)
    {
      Point v = Point::Unit(n, e);
      for (int i = 0; i < n - 1; ++i)
        v -= t.col(i).dot(v) * t.col(i);
      if (v.norm() > best_norm)
      {
        best_norm = v.norm();
        best = v;
      }
    }
    return best / best_norm;
  }

  Point normal_;
  Tangents tangents_;
  Point origin_;
  int orientation_ = 1;
};

/// Pullback to the facet, expressed in the facet's tangent coordinates.
template <typename Scalar>
AltForm<Scalar> trace(const AltForm<Scalar> &a, const FacetFrame<Scalar> &frame)
{
  if (a.dim() != frame.dim())
    throw FormError("trace: dimension mismatch");
  return pullback(a, frame.tangents());
}

/// Contraction with the facet normal followed by the trace.
template <typename Scalar>
AltForm<Scalar> normal_trace(const AltForm<Scalar> &a, const FacetFrame<Scalar> &frame)
{
  if (a.dim() != frame.dim())
    throw FormError("normal_trace: dimension mismatch");
  if (a.degree() < 1)
    return AltForm<Scalar>(a.dim() - 1, a.degree() - 1);
  return trace(contract(frame.normal(), a), frame);
}

/// Hodge star on the facet for the orientation induced by the frame.
template <typename Scalar>
AltForm<Scalar> facet_star(const AltForm<Scalar> &b, const FacetFrame<Scalar> &frame)
{
  if (b.dim() != frame.dim() - 1)
    throw FormError("facet_star: form must live in facet coordinates");
  if (b.trivial())
    return AltForm<Scalar>(b.dim(), b.dim() - b.degree());
  return Scalar(frame.orientation()) * hodge_star(b);
}

template <typename Scalar>
struct FormParts
{
  AltForm<Scalar> parallel;
  AltForm<Scalar> perpendicular;
};

/// Tangential part (orthogonal-projection pullback of the trace) and normal part.
template <typename Scalar>
FormParts<Scalar> split_parts(const AltForm<Scalar> &a, const FacetFrame<Scalar> &frame)
{
  const AltForm<Scalar> gamma = trace(a, frame);
  AltForm<Scalar> par = gamma.trivial() ? AltForm<Scalar>(a.dim(), a.degree())
                                        : pullback(gamma, frame.tangents().transpose());
  return {par, a - par};
}

//
// Vector proxies in R^3: 0- and 3-forms <-> scalars, 1-forms <-> (v1, v2, v3),
// 2-forms w1 dx²∧dx³ − w2 dx¹∧dx³ + w3 dx¹∧dx² <-> (w1, w2, w3).
//
template <typename Scalar>
SmallVector<Scalar> to_proxy(const AltForm<Scalar> &a)
{
  if (a.dim() != 3)
    throw FormError("to_proxy: vector proxies require n = 3");
  if (a.degree() == 2)
  {
    const auto &c = a.coeffs();  // (0,1), (0,2), (1,2)
    SmallVector<Scalar> w(3);
    w << c[2], -c[1], c[0];
    return w;
  }
  return a.coeffs();
}

template <typename Scalar>
AltForm<Scalar> from_proxy(int degree, const SmallVector<Scalar> &proxy)
{
  AltForm<Scalar> a(3, degree);
  if (proxy.size() != a.size())
    throw FormError("from_proxy: proxy size does not match the form degree");
  if (degree == 2)
    a.coeffs() << proxy[2], -proxy[1], proxy[0];
  else
    a.coeffs() = proxy;
  return a;
}

}  // namespace cutfeec

#endif  // CUTFEEC_FORMS_HPP
