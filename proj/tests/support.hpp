#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "rcpa/grid.hpp"
#include "rcpa/manifold.hpp"

namespace test {

using rcpa::Mat;
using rcpa::Vec;

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline Vec mat_vec(const Mat& A) {
  return Eigen::Map<const Vec>(A.data(), A.size());
}

inline Mat vec_mat(const Vec& v, int n) {
  return Eigen::Map<const Mat>(v.data(), n, n);
}

inline Vec identity(int n) { return mat_vec(Mat::Identity(n, n)); }

// The three manifolds every property test runs on.
inline std::vector<rcpa::Manifold> all_manifolds() {
  return {rcpa::Manifold::euclidean(3), rcpa::Manifold::sphere2(),
          rcpa::Manifold::spd(3)};
}

// Random grid with points spread around a common center so that sphere
// neighbours are far from antipodal.
inline rcpa::ManifoldGrid random_grid(const rcpa::Manifold& M, int d1, int d2,
                                      std::mt19937_64& rng,
                                      double spread = 0.5) {
  const Vec center = M.random_point(rng, 0.5);
  std::vector<Vec> pts;
  for (int n = 0; n < d1 * d2; ++n)
    pts.push_back(M.exp(center, M.random_tangent(center, rng, spread)));
  return rcpa::ManifoldGrid(M, d1, d2, std::move(pts));
}

inline rcpa::TangentField random_field(const rcpa::ManifoldGrid& g, int depth,
                                       std::mt19937_64& rng,
                                       double scale = 1.0) {
  auto X = rcpa::TangentField::zeros(g, depth);
  for (std::size_t n = 0; n < X.size(); ++n)
    X[n] = g.manifold().random_tangent(X.base(n), rng, scale);
  return X;
}

}  // namespace test
