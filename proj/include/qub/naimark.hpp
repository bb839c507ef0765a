// Dilation of a POVM effect 0 <= Lambda <= I to a projective measurement on
// system x qubit probe, the induced union bound for sequences of effects, and
// the probe-elided update maps used by the decoding simulator.
//
// With the probe prepared in |0>, the unitary
//   U = sqrt(I - Lambda) x I_2 + sqrt(Lambda) x (|1><0| - |0><1|)
// and the projector Pi = U^dag (I x |1><1|) U satisfy
//   Tr{Pi (rho x |0><0|)} = Tr{Lambda rho}.
#pragma once

#include "operators.hpp"
#include "union_bound.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qub {

inline constexpr long long kDilationDimCap = 4096;

/// Clip spectrum to [0, 1] and take the square root; accepts drift up to 1e-6.
inline Matrix sqrt_clipped01(const HermitianOperator& h) {
  const SpectralDecomposition sd = spectral_decompose(h);
  if (sd.eigenvalues.minCoeff() < -tol::dilate_spectrum ||
      sd.eigenvalues.maxCoeff() > 1.0 + tol::dilate_spectrum) {
    throw std::invalid_argument("sqrt_clipped01: spectrum outside [0, 1] beyond tolerance");
  }
  Matrix out = Matrix::Zero(h.dim(), h.dim());
  for (int k = 0; k < h.dim(); ++k) {
    const double ev = std::min(1.0, std::max(0.0, sd.eigenvalues[k]));
    out += std::sqrt(ev) * sd.projector(k);
  }
  return out;
}

struct NaimarkDilation {
  MeasurementOperator lambda;  // spectrum clipped to [0, 1]
  Matrix unitary;              // on system x probe, dim 2d
  Projector pi;                // U^dag (I x |1><1|) U, "yes" outcome
  Projector pi_hat;            // complement, "no" outcome
};

inline NaimarkDilation dilate(const HermitianOperator& lambda_in) {
  const int d = lambda_in.dim();
  const SpectralDecomposition sd = spectral_decompose(lambda_in);
  if (sd.eigenvalues.minCoeff() < -tol::dilate_spectrum ||
      sd.eigenvalues.maxCoeff() > 1.0 + tol::dilate_spectrum) {
    throw std::invalid_argument("dilate: spectrum outside [0, 1] beyond tolerance");
  }
  Matrix clipped = Matrix::Zero(d, d);
  Matrix sqrt_l = Matrix::Zero(d, d);
  Matrix sqrt_c = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double ev = std::min(1.0, std::max(0.0, sd.eigenvalues[k]));
    const Matrix pk = sd.projector(k);
    clipped += ev * pk;
    sqrt_l += std::sqrt(ev) * pk;
    sqrt_c += std::sqrt(1.0 - ev) * pk;
  }
  Matrix i2 = Matrix::Identity(2, 2);
  Matrix j(2, 2);  // |1><0| - |0><1|
  j << Complex(0, 0), Complex(-1, 0), Complex(1, 0), Complex(0, 0);
  const Matrix u = kron(sqrt_c, i2) + kron(sqrt_l, j);
  const double unit_err = max_abs(u.adjoint() * u - Matrix::Identity(2 * d, 2 * d));
  if (unit_err > tol::idempotent) {
    throw std::runtime_error("dilate: dilation unitary check failed, deviation " +
                             std::to_string(unit_err));
  }
  Matrix one(2, 2);
  one << Complex(0, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0);
  const Matrix pi_m = u.adjoint() * kron(Matrix::Identity(d, d), one) * u;
  NaimarkDilation out{MeasurementOperator(clipped), u, Projector(pi_m),
                      Projector(pi_m).complement()};
  return out;
}

inline NaimarkDilation dilate(const MeasurementOperator& lambda) {
  return dilate(lambda.base());
}

/// Probability-preserving single-effect measurement with the probe traced out
/// analytically. Exact because each probe interacts once and is then measured:
///   accept update: rho -> L rho L + C S rho S C
///   reject update: rho -> (I-L) rho (I-L) + S C rho C S
/// with L = Lambda, S = sqrt(Lambda), C = sqrt(I - Lambda).
struct ProbeElidedMeasurement {
  Matrix lambda;
  Matrix accept_k1, accept_k2;  // Lambda, sqrt(I-Lambda) sqrt(Lambda)
  Matrix reject_k1, reject_k2;  // I - Lambda, sqrt(Lambda) sqrt(I-Lambda)

  static ProbeElidedMeasurement from(const MeasurementOperator& m) {
    const int d = m.dim();
    const SpectralDecomposition sd = spectral_decompose(m.base());
    Matrix lam = Matrix::Zero(d, d), s = Matrix::Zero(d, d), c = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) {
      const double ev = std::min(1.0, std::max(0.0, sd.eigenvalues[k]));
      const Matrix pk = sd.projector(k);
      lam += ev * pk;
      s += std::sqrt(ev) * pk;
      c += std::sqrt(1.0 - ev) * pk;
    }
    ProbeElidedMeasurement out;
    out.lambda = lam;
    out.accept_k1 = lam;
    out.accept_k2 = c * s;
    out.reject_k1 = Matrix::Identity(d, d) - lam;
    out.reject_k2 = s * c;
    return out;
  }

  double accept_prob(const Matrix& rho) const { return (lambda * rho).trace().real(); }

  Matrix accept_update(const Matrix& rho) const {
    return accept_k1 * rho * accept_k1.adjoint() + accept_k2 * rho * accept_k2.adjoint();
  }

  Matrix reject_update(const Matrix& rho) const {
    return reject_k1 * rho * reject_k1.adjoint() + reject_k2 * rho * reject_k2.adjoint();
  }
};

/// Union bound for a sequence of POVM effects, evaluated through the explicit
/// dilation on system x probe^L (dimension d * 2^L, capped at 4096). The LHS
/// is the sequential failure probability of the dilated projectors on
/// rho x |0...0><0...0|; the error terms are a_i = Tr{(I - Lambda_i) rho}.
inline BoundReport povm_union_bound(const DensityOperator& state,
                                    const std::vector<MeasurementOperator>& lambdas, double c) {
  const size_t L = lambdas.size();
  if (L < 2) throw std::invalid_argument("povm_union_bound: need at least two effects");
  if (!(c > 0.0)) throw std::invalid_argument("povm_union_bound: c must be positive");
  const int d = state.dim();
  long long total = d;
  for (size_t i = 0; i < L; ++i) {
    if (lambdas[i].dim() != d) throw std::invalid_argument("povm_union_bound: dim mismatch");
    total *= 2;
    if (total > kDilationDimCap) {
      throw std::invalid_argument("povm_union_bound: dilated dimension exceeds cap 4096");
    }
  }
  std::vector<int> dims(L + 1, 2);
  dims[0] = d;
  std::vector<Matrix> pis;
  pis.reserve(L);
  for (size_t i = 0; i < L; ++i) {
    const NaimarkDilation nd = dilate(lambdas[i]);
    pis.push_back(embed_operator(nd.pi.matrix(), dims, {0, static_cast<int>(i) + 1}));
  }
  // Success probability via the eigenvectors of rho, each padded with probes
  // in |0>: Tr{Pi_L ... Pi_1 omega Pi_1 ... Pi_{L-1}} = sum_j p_j
  // ||Pi_L ... Pi_1 (psi_j x |0...0>)||^2.
  const SpectralDecomposition sd = spectral_decompose(state.base());
  const long long probe_dim = total / d;
  double success = 0.0;
  for (int j = 0; j < d; ++j) {
    const double pj = sd.eigenvalues[j];
    if (pj <= tol::eig_zero) continue;
    Vector v = Vector::Zero(total);
    for (int k = 0; k < d; ++k) v[k * probe_dim] = sd.eigenvectors(k, j);
    for (const Matrix& pi : pis) v = pi * v;
    success += pj * v.squaredNorm();
  }
  std::vector<double> a;
  a.reserve(L);
  for (const MeasurementOperator& lam : lambdas) {
    a.push_back(1.0 - (lam.matrix() * state.matrix()).trace().real());
  }
  return make_bound_report(1.0 - success, std::move(a), c);
}

}  // namespace qub
