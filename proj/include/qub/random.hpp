// Deterministic random instance generation. All randomness flows through
// RngStream (mt19937_64 seeded via splitmix64) with hand-rolled uniform and
// Box-Muller transforms, so identical seeds give identical bytes everywhere;
// std::*_distribution is implementation-defined and deliberately avoided.
#pragma once

#include "operators.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace qub {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive an independent stream seed from a master seed and role indices.
inline std::uint64_t subseed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ b);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  std::uint64_t raw() { return eng_(); }

  double uniform() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  int uniform_int(int lo, int hi) {  // inclusive range, unbiased enough for instance sampling
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(eng_() % span);
  }

  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Complex complex_gaussian() { return Complex(gaussian(), gaussian()); }

 private:
  std::mt19937_64 eng_;
};

inline Matrix random_gaussian_matrix(int rows, int cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.complex_gaussian();
  }
  return m;
}

/// Ginibre construction: G G^dag / Tr with G of shape dim x rank.
inline DensityOperator random_density(int dim, int rank, std::uint64_t seed) {
  if (dim < 1 || rank < 1 || rank > dim) {
    throw std::invalid_argument("random_density: need 1 <= rank <= dim");
  }
  RngStream rng(seed);
  const Matrix g = random_gaussian_matrix(dim, rank, rng);
  Matrix m = g * g.adjoint();
  return DensityOperator(Matrix(m / m.trace().real()));
}

inline PureState random_pure(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("random_pure: dim must be positive");
  RngStream rng(seed);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.complex_gaussian();
  return PureState(Vector(v / v.norm()));
}

/// Projector onto the span of `rank` Haar-ish random orthonormal columns.
inline Projector random_projector(int dim, int rank, std::uint64_t seed) {
  if (dim < 1 || rank < 0 || rank > dim) {
    throw std::invalid_argument("random_projector: need 0 <= rank <= dim");
  }
  if (rank == 0) return Projector::zero(dim);
  if (rank == dim) return Projector::identity(dim);
  RngStream rng(seed);
  const Matrix g = random_gaussian_matrix(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ();
  const Matrix cols = q.leftCols(rank);
  return Projector(Matrix(cols * cols.adjoint()));
}

/// POVM effect with spectrum in [0, 1]: alternates between rank-deficient
/// projectors, rescaled Wishart matrices and convex projector mixtures so the
/// extreme points of the effect polytope all show up in campaigns.
inline MeasurementOperator random_measurement(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("random_measurement: dim must be positive");
  RngStream rng(seed);
  const int kind = rng.uniform_int(0, 2);
  if (kind == 0 && dim >= 2) {
    const int rank = rng.uniform_int(1, dim - 1);
    return random_projector(dim, rank, rng.raw()).base();
  }
  if (kind == 1) {
    const Matrix g = random_gaussian_matrix(dim, dim, rng);
    Matrix s = g * g.adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
    const double top = solver.eigenvalues().maxCoeff();
    const double scale = 0.3 + 0.7 * rng.uniform();
    return MeasurementOperator(Matrix(s * (scale / top)));
  }
  const double a = rng.uniform(), b = rng.uniform();
  const Matrix p1 = random_projector(dim, rng.uniform_int(0, dim), rng.raw()).matrix();
  const Matrix p2 = random_projector(dim, rng.uniform_int(0, dim), rng.raw()).matrix();
  Matrix m = a * p1 + (1.0 - a) * b * p2;
  return MeasurementOperator(std::move(m));
}

/// Random isometry V : in -> out x num_kraus, sliced into Kraus blocks.
inline QuantumChannel random_channel(int dim_in, int dim_out, int num_kraus, std::uint64_t seed) {
  if (dim_in < 1 || dim_out < 1 || num_kraus < 1) {
    throw std::invalid_argument("random_channel: dims and Kraus count must be positive");
  }
  if (static_cast<long long>(dim_out) * num_kraus < dim_in) {
    throw std::invalid_argument("random_channel: dim_out * num_kraus must be >= dim_in");
  }
  RngStream rng(seed);
  const Matrix g = random_gaussian_matrix(dim_out * num_kraus, dim_in, rng);
  // V = G (G^dag G)^{-1/2} is an isometry almost surely.
  Eigen::SelfAdjointEigenSolver<Matrix> solver(Matrix(g.adjoint() * g));
  Matrix inv_sqrt = Matrix::Zero(dim_in, dim_in);
  for (int k = 0; k < dim_in; ++k) {
    const double ev = solver.eigenvalues()[k];
    if (ev <= 0.0) throw std::runtime_error("random_channel: rank-deficient Gaussian draw");
    inv_sqrt += (1.0 / std::sqrt(ev)) * solver.eigenvectors().col(k) *
                solver.eigenvectors().col(k).adjoint();
  }
  const Matrix v = g * inv_sqrt;
  std::vector<Matrix> kraus;
  kraus.reserve(static_cast<size_t>(num_kraus));
  for (int k = 0; k < num_kraus; ++k) {
    kraus.push_back(v.block(static_cast<long long>(k) * dim_out, 0, dim_out, dim_in));
  }
  return QuantumChannel(dim_in, dim_out, std::move(kraus));
}

}  // namespace qub
