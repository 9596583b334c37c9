#include "rcpa/grid.hpp"

#include <cmath>
#include <string>

namespace rcpa {

ManifoldGrid::ManifoldGrid(Manifold manifold, int d1, int d2,
                           std::vector<Vec> points)
    : manifold_(std::move(manifold)), d1_(d1), d2_(d2),
      points_(std::move(points)) {
  if (d1 < 1 || d2 < 1) throw ContractError("grid dimensions must be >= 1");
  if (points_.size() !=
      static_cast<std::size_t>(d1) * static_cast<std::size_t>(d2))
    throw ContractError("grid storage does not match its shape");
  for (const auto& p : points_)
    if (p.size() != manifold_.coord_size())
      throw ContractError("grid entry has wrong coordinate size");
}

ManifoldGrid ManifoldGrid::constant(const Manifold& manifold, int d1, int d2,
                                    const Vec& value) {
  return ManifoldGrid(
      manifold, d1, d2,
      std::vector<Vec>(static_cast<std::size_t>(d1) *
                           static_cast<std::size_t>(d2),
                       value));
}

void ManifoldGrid::validate() const {
  for (int i = 0; i < d1_; ++i)
    for (int j = 0; j < d2_; ++j)
      if (!manifold_.is_point(at(i, j)))
        throw DomainError("grid entry (" + std::to_string(i) + "," +
                          std::to_string(j) + ") is not a point of " +
                          manifold_.name());
}

TangentField grid_log(const ManifoldGrid& m, const ManifoldGrid& p) {
  if (!m.same_shape(p)) throw ContractError("grid shape mismatch");
  const Manifold& M = m.manifold();
  std::vector<Vec> coords;
  coords.reserve(m.size());
  for (std::size_t n = 0; n < m.size(); ++n) coords.push_back(M.log(m[n], p[n]));
  return TangentField(M, m.rows(), m.cols(), 1, m.points(), std::move(coords));
}

ManifoldGrid grid_exp(const ManifoldGrid& p, const TangentField& X) {
  if (X.depth() != 1 || X.rows() != p.rows() || X.cols() != p.cols())
    throw ContractError("grid_exp: field shape mismatch");
  const Manifold& M = p.manifold();
  std::vector<Vec> out;
  out.reserve(p.size());
  for (std::size_t n = 0; n < p.size(); ++n) out.push_back(M.exp(p[n], X[n]));
  return ManifoldGrid(M, p.rows(), p.cols(), std::move(out));
}

TangentField grid_transport(const TangentField& X, const ManifoldGrid& to) {
  if (X.depth() != 1 || X.rows() != to.rows() || X.cols() != to.cols())
    throw ContractError("grid_transport: field shape mismatch");
  const Manifold& M = X.manifold();
  std::vector<Vec> out;
  out.reserve(X.size());
  for (std::size_t n = 0; n < X.size(); ++n)
    out.push_back(M.transport(X.base(n), to[n], X[n]));
  return TangentField(M, X.rows(), X.cols(), 1, to.points(), std::move(out));
}

DualField grid_transport(const DualField& xi, const ManifoldGrid& to) {
  if (xi.rows() != to.rows() || xi.cols() != to.cols())
    throw ContractError("grid_transport: field shape mismatch");
  const Manifold& M = xi.manifold();
  const auto depth = static_cast<std::size_t>(xi.depth());
  std::vector<Vec> bases;
  std::vector<Vec> out;
  bases.reserve(xi.size());
  out.reserve(xi.size());
  for (std::size_t n = 0; n < xi.size(); ++n) {
    const Vec& from = xi.base(n);
    const Vec& target = to[n / depth];
    const Vec moved = M.transport(from, target, M.sharp(from, xi[n]));
    out.push_back(M.flat(target, moved));
    bases.push_back(target);
  }
  return DualField(M, xi.rows(), xi.cols(), xi.depth(), std::move(bases),
                   std::move(out));
}

double grid_dist_sq(const ManifoldGrid& a, const ManifoldGrid& b) {
  if (!a.same_shape(b)) throw ContractError("grid shape mismatch");
  double acc = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double d = a.manifold().dist(a[n], b[n]);
    acc += d * d;
  }
  return acc;
}

double grid_dist(const ManifoldGrid& a, const ManifoldGrid& b) {
  return std::sqrt(grid_dist_sq(a, b));
}

double grid_coord_dist(const ManifoldGrid& a, const ManifoldGrid& b) {
  if (!a.same_shape(b)) throw ContractError("grid shape mismatch");
  double acc = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) acc += (a[n] - b[n]).squaredNorm();
  return std::sqrt(acc);
}

DualField flat(const TangentField& X) {
  const Manifold& M = X.manifold();
  std::vector<Vec> out;
  out.reserve(X.size());
  for (std::size_t n = 0; n < X.size(); ++n)
    out.push_back(M.flat(X.base(n), X[n]));
  return DualField(M, X.rows(), X.cols(), X.depth(), X.bases(), std::move(out));
}

TangentField sharp(const DualField& xi) {
  const Manifold& M = xi.manifold();
  std::vector<Vec> out;
  out.reserve(xi.size());
  for (std::size_t n = 0; n < xi.size(); ++n)
    out.push_back(M.sharp(xi.base(n), xi[n]));
  return TangentField(M, xi.rows(), xi.cols(), xi.depth(), xi.bases(),
                      std::move(out));
}

double pairing(const DualField& xi, const TangentField& X) {
  if (xi.manifold() != X.manifold() || xi.rows() != X.rows() ||
      xi.cols() != X.cols() || xi.depth() != X.depth())
    throw ContractError("pairing: field shape mismatch");
  double acc = 0.0;
  for (std::size_t n = 0; n < xi.size(); ++n) acc += xi[n].dot(X[n]);
  return acc;
}

double inner(const TangentField& X, const TangentField& Y) {
  if (!X.same_shape(Y)) throw ContractError("inner: field shape mismatch");
  double acc = 0.0;
  for (std::size_t n = 0; n < X.size(); ++n)
    acc += X.manifold().inner(X.base(n), X[n], Y[n]);
  return acc;
}

double norm(const TangentField& X) { return std::sqrt(inner(X, X)); }

double dual_norm(const DualField& xi) {
  double acc = 0.0;
  for (std::size_t n = 0; n < xi.size(); ++n) {
    const double v = xi.manifold().dual_norm(xi.base(n), xi[n]);
    acc += v * v;
  }
  return std::sqrt(acc);
}

}  // namespace rcpa
