#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "rcpa/errors.hpp"
#include "rcpa/manifold.hpp"

namespace rcpa {

// A d1 x d2 array of points on a manifold, stored row major. Signals use
// d2 == 1.
class ManifoldGrid {
 public:
  ManifoldGrid(Manifold manifold, int d1, int d2, std::vector<Vec> points);
  static ManifoldGrid constant(const Manifold& manifold, int d1, int d2,
                               const Vec& value);

  const Manifold& manifold() const { return manifold_; }
  int rows() const { return d1_; }
  int cols() const { return d2_; }
  std::size_t size() const { return points_.size(); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(d2_) +
           static_cast<std::size_t>(j);
  }

  const Vec& at(int i, int j) const { return points_[index(i, j)]; }
  Vec& at(int i, int j) { return points_[index(i, j)]; }
  const Vec& operator[](std::size_t n) const { return points_[n]; }
  Vec& operator[](std::size_t n) { return points_[n]; }
  const std::vector<Vec>& points() const { return points_; }

  bool same_shape(const ManifoldGrid& other) const {
    return manifold_ == other.manifold_ && d1_ == other.d1_ &&
           d2_ == other.d2_;
  }
  // Throws DomainError naming the first entry that is off the manifold.
  void validate() const;

 private:
  Manifold manifold_;
  int d1_;
  int d2_;
  std::vector<Vec> points_;
};

struct TangentTag {};
struct CotangentTag {};

// d1 x d2 x depth array of (co)tangent vectors, each with its own base point.
// depth == 1 gives a vector per pixel (elements of T_P M^{d1 x d2}), depth ==
// 2 gives the forward-difference fields of the TV operator.
template <class Tag>
class Field {
 public:
  Field(Manifold manifold, int d1, int d2, int depth, std::vector<Vec> bases,
        std::vector<Vec> coords)
      : manifold_(std::move(manifold)),
        d1_(d1),
        d2_(d2),
        depth_(depth),
        bases_(std::move(bases)),
        coords_(std::move(coords)) {
    const auto n = static_cast<std::size_t>(d1) * static_cast<std::size_t>(d2) *
                   static_cast<std::size_t>(depth);
    if (bases_.size() != n || coords_.size() != n)
      throw ContractError("field storage does not match its shape");
  }

  // Zero field with every (i,j,k) entry based at grid(i,j).
  static Field zeros(const ManifoldGrid& grid, int depth) {
    const Manifold& M = grid.manifold();
    std::vector<Vec> bases;
    std::vector<Vec> coords;
    bases.reserve(grid.size() * static_cast<std::size_t>(depth));
    for (std::size_t n = 0; n < grid.size(); ++n)
      for (int k = 0; k < depth; ++k) {
        bases.push_back(grid[n]);
        coords.push_back(M.zero_vector());
      }
    return Field(M, grid.rows(), grid.cols(), depth, std::move(bases),
                 std::move(coords));
  }

  const Manifold& manifold() const { return manifold_; }
  int rows() const { return d1_; }
  int cols() const { return d2_; }
  int depth() const { return depth_; }
  std::size_t size() const { return coords_.size(); }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(d2_) +
            static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(depth_) +
           static_cast<std::size_t>(k);
  }

  const Vec& base(std::size_t n) const { return bases_[n]; }
  const Vec& operator[](std::size_t n) const { return coords_[n]; }
  Vec& operator[](std::size_t n) { return coords_[n]; }
  const Vec& at(int i, int j, int k) const { return coords_[index(i, j, k)]; }
  Vec& at(int i, int j, int k) { return coords_[index(i, j, k)]; }
  const std::vector<Vec>& bases() const { return bases_; }
  const std::vector<Vec>& coords() const { return coords_; }

  bool same_shape(const Field& other) const {
    return manifold_ == other.manifold_ && d1_ == other.d1_ &&
           d2_ == other.d2_ && depth_ == other.depth_;
  }
  bool same_bases(const Field& other) const {
    if (!same_shape(other)) return false;
    for (std::size_t n = 0; n < bases_.size(); ++n)
      if (!(bases_[n].array() == other.bases_[n].array()).all()) return false;
    return true;
  }
  // True when entry (i,j,k) is based at grid(i,j) for every k.
  bool based_at(const ManifoldGrid& grid) const {
    if (grid.manifold() != manifold_ || grid.rows() != d1_ ||
        grid.cols() != d2_)
      return false;
    for (std::size_t n = 0; n < bases_.size(); ++n)
      if (!(bases_[n].array() ==
            grid[n / static_cast<std::size_t>(depth_)].array())
               .all())
        return false;
    return true;
  }

  // Same bases and shape, new coordinates.
  Field with_coords(std::vector<Vec> coords) const {
    return Field(manifold_, d1_, d2_, depth_, bases_, std::move(coords));
  }

  Field& operator+=(const Field& other) {
    require_shape(other);
    for (std::size_t n = 0; n < coords_.size(); ++n) coords_[n] += other[n];
    return *this;
  }
  Field& operator-=(const Field& other) {
    require_shape(other);
    for (std::size_t n = 0; n < coords_.size(); ++n) coords_[n] -= other[n];
    return *this;
  }
  Field& operator*=(double s) {
    for (auto& c : coords_) c *= s;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }

 private:
  void require_shape(const Field& other) const {
    if (!same_shape(other)) throw ContractError("field shape mismatch");
  }

  Manifold manifold_;
  int d1_;
  int d2_;
  int depth_;
  std::vector<Vec> bases_;
  std::vector<Vec> coords_;
};

using TangentField = Field<TangentTag>;
using DualField = Field<CotangentTag>;

// Applies fn(point) -> point to every entry of a grid.
template <class Fn>
ManifoldGrid grid_map(const ManifoldGrid& grid, Fn&& fn) {
  std::vector<Vec> out;
  out.reserve(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) out.push_back(fn(grid[n]));
  return ManifoldGrid(grid.manifold(), grid.rows(), grid.cols(),
                      std::move(out));
}

// Entrywise combination of two same-shape grids into scalars, row major.
template <class Fn>
std::vector<double> grid_zip(const ManifoldGrid& a, const ManifoldGrid& b,
                             Fn&& fn) {
  if (!a.same_shape(b)) throw ContractError("grid shape mismatch");
  std::vector<double> out;
  out.reserve(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) out.push_back(fn(a[n], b[n]));
  return out;
}

// Entrywise combination of two fields with matching shape into a new field of
// the same kind, fn(base, x, y) -> coordinates.
template <class Tag, class Fn>
Field<Tag> field_zip(const Field<Tag>& a, const Field<Tag>& b, Fn&& fn) {
  if (!a.same_shape(b)) throw ContractError("field shape mismatch");
  std::vector<Vec> out;
  out.reserve(a.size());
  for (std::size_t n = 0; n < a.size(); ++n)
    out.push_back(fn(a.base(n), a[n], b[n]));
  return a.with_coords(std::move(out));
}

template <class Tag, class Fn>
Field<Tag> field_map(const Field<Tag>& a, Fn&& fn) {
  std::vector<Vec> out;
  out.reserve(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) out.push_back(fn(a.base(n), a[n]));
  return a.with_coords(std::move(out));
}

// --- power-manifold helpers ---------------------------------------------

// Per-pixel log_m p as a depth-1 tangent field at m.
TangentField grid_log(const ManifoldGrid& m, const ManifoldGrid& p);
// Per-pixel exp; X must be a depth-1 field based at p.
ManifoldGrid grid_exp(const ManifoldGrid& p, const TangentField& X);
// Per-pixel parallel transport of a depth-1 field from its bases to `to`.
TangentField grid_transport(const TangentField& X, const ManifoldGrid& to);
DualField grid_transport(const DualField& xi, const ManifoldGrid& to);
// Squared distance on the power manifold, sum of per-pixel squared distances.
double grid_dist_sq(const ManifoldGrid& a, const ManifoldGrid& b);
double grid_dist(const ManifoldGrid& a, const ManifoldGrid& b);
// Plain coordinate distance, the Euclidean norm over all stored coordinates.
double grid_coord_dist(const ManifoldGrid& a, const ManifoldGrid& b);

DualField flat(const TangentField& X);
TangentField sharp(const DualField& xi);
// Sum over entries of the duality pairing; shapes must agree.
double pairing(const DualField& xi, const TangentField& X);
// Metric inner product summed over entries, both fields at the same bases.
double inner(const TangentField& X, const TangentField& Y);
double norm(const TangentField& X);
double dual_norm(const DualField& xi);

}  // namespace rcpa
