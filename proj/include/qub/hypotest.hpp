// One-shot hypothesis testing between density operators.
//
// Central quantity: the hypothesis-testing relative entropy
//   D_H^eps(rho || sigma) = -log2 inf { Tr{Lambda sigma} :
//                                       Tr{Lambda rho} >= 1 - eps, 0 <= Lambda <= I }.
// dh_epsilon returns a rigorous two-sided bracket: the lower end comes from an
// explicit feasible test (a convex combination of two Neyman-Pearson
// projectors tuned so the type-I constraint is tight), the upper end from
// weak duality, max_s [ s (1-eps) - Tr{(s rho - sigma)_+} ].
//
// Also here: the log-likelihood-ratio distribution and its first three
// moments, exact LP solvers for commuting pairs (single copy and i.i.d.
// qubit), and the threshold projector T with Tr{T rho} >= Pr{Z >= log2 g},
// Tr{T sigma} <= 1/g.
#pragma once

#include "operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace qub {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace tol {
inline constexpr double support_mass = 1e-9;   // sigma-null rho-mass treated as support violation
inline constexpr double overlap_cut = 1e-12;   // rank-1 overlap below this is dropped
inline constexpr double kernel_feasible = 1e-12;
}  // namespace tol

// ---------------------------------------------------------------------------
// Log-likelihood-ratio distribution
// ---------------------------------------------------------------------------

struct ZAtom {
  double z;  // log2(lambda_x / mu_y)
  double p;  // lambda_x * |<v_x|w_y>|^2
};

/// Distribution of Z = log2(lambda_x / mu_y) over rank-1 spectral pairs of
/// (rho, sigma). Mass where sigma has no support (z = +inf) is tracked
/// separately. Degenerate eigenvalues stay split; every aggregate over atoms
/// is invariant under the split.
struct ZDistribution {
  std::vector<ZAtom> atoms;
  double sigma_null_mass = 0.0;

  double total_mass() const {
    double s = sigma_null_mass;
    for (const ZAtom& a : atoms) s += a.p;
    return s;
  }

  double tail_prob(double z_min) const {  // Pr{Z >= z_min}, null mass included
    double s = sigma_null_mass;
    for (const ZAtom& a : atoms) {
      if (a.z >= z_min) s += a.p;
    }
    return s;
  }
};

inline ZDistribution z_distribution(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("z_distribution: dim mismatch");
  const SpectralDecomposition sr = spectral_decompose(rho.base());
  const SpectralDecomposition ss = spectral_decompose(sigma.base());
  ZDistribution out;
  for (int x = 0; x < rho.dim(); ++x) {
    const double lam = sr.eigenvalues[x];
    if (lam <= tol::eig_zero) continue;
    for (int y = 0; y < sigma.dim(); ++y) {
      const double overlap = std::norm(ss.eigenvectors.col(y).dot(sr.eigenvectors.col(x)));
      if (overlap <= tol::overlap_cut) continue;
      const double mu = ss.eigenvalues[y];
      if (mu <= tol::eig_zero) {
        out.sigma_null_mass += lam * overlap;
      } else {
        out.atoms.push_back({std::log2(lam / mu), lam * overlap});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Relative-entropy moments
// ---------------------------------------------------------------------------

/// Mean, variance and absolute third central moment of Z. All three are +inf
/// when rho has mass outside the support of sigma.
struct DvtTriple {
  double d = 0.0;
  double v = 0.0;
  double t = 0.0;

  bool finite() const { return std::isfinite(d); }
};

inline DvtTriple dvt(const DensityOperator& rho, const DensityOperator& sigma) {
  const ZDistribution zd = z_distribution(rho, sigma);
  if (zd.sigma_null_mass > tol::support_mass) return {kInf, kInf, kInf};
  DvtTriple out;
  for (const ZAtom& a : zd.atoms) out.d += a.p * a.z;
  for (const ZAtom& a : zd.atoms) out.v += a.p * (a.z - out.d) * (a.z - out.d);
  for (const ZAtom& a : zd.atoms) out.t += a.p * std::abs((a.z - out.d) * (a.z - out.d) * (a.z - out.d));
  return out;
}

// ---------------------------------------------------------------------------
// dh_epsilon: two-sided bracket on D_H^eps
// ---------------------------------------------------------------------------

struct DhBracket {
  double lower = 0.0;
  double upper = 0.0;
  Matrix witness;     // feasible test achieving 2^-lower
  double threshold = 0.0;  // Neyman-Pearson parameter t in rho - t sigma
  double type1 = 0.0;      // Tr{witness rho}
  double type2 = 0.0;      // Tr{witness sigma}
};

namespace detail {

// Projector onto the strictly positive eigenspace of h.
inline Matrix positive_eigenspace(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  const int d = static_cast<int>(h.rows());
  Matrix out = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    if (solver.eigenvalues()[k] > 0.0) {
      out += solver.eigenvectors().col(k) * solver.eigenvectors().col(k).adjoint();
    }
  }
  return out;
}

// Dual objective h(s) = s (1-eps) - Tr{(s rho - sigma)_+}. Weak duality gives
// h(s) <= beta* for every s >= 0, so -log2 of the best h found is a valid
// upper bound on D_H^eps.
inline double dual_value(double s, const Matrix& rho, const Matrix& sigma, double eps) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(Matrix(s * rho - sigma));
  double pos = 0.0;
  for (int k = 0; k < solver.eigenvalues().size(); ++k) {
    pos += std::max(0.0, solver.eigenvalues()[k]);
  }
  return s * (1.0 - eps) - pos;
}

}  // namespace detail

inline DhBracket dh_epsilon(const DensityOperator& rho, const DensityOperator& sigma,
                            double eps) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("dh_epsilon: dim mismatch");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("dh_epsilon: eps must be in (0,1)");
  const int d = rho.dim();
  const Matrix& r = rho.matrix();
  const Matrix& s = sigma.matrix();

  // sigma-kernel fast path: if the kernel of sigma already carries 1 - eps of
  // rho's mass, the kernel projector is a feasible test with zero type-II
  // error and D_H^eps = +inf.
  const SpectralDecomposition ssd = spectral_decompose(sigma.base());
  Matrix kernel = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    if (ssd.eigenvalues[k] <= tol::eig_zero) kernel += ssd.projector(k);
  }
  const double kernel_mass = (kernel * r).trace().real();
  if (kernel_mass >= 1.0 - eps - tol::kernel_feasible) {
    DhBracket out;
    out.lower = kInf;
    out.upper = kInf;
    out.witness = kernel;
    out.threshold = 0.0;
    out.type1 = kernel_mass;
    out.type2 = (kernel * s).trace().real();
    return out;
  }

  auto type1_of = [&](const Matrix& test) { return (test * r).trace().real(); };

  // Bracket the Neyman-Pearson threshold: g(t) = Tr{P_+(rho - t sigma) rho}
  // decreases from 1 and eventually falls below 1 - eps.
  double t_lo = 0.0;
  Matrix test_lo = detail::positive_eigenspace(r);
  double g_lo = type1_of(test_lo);
  double t_hi = 1.0;
  Matrix test_hi = detail::positive_eigenspace(Matrix(r - t_hi * s));
  double g_hi = type1_of(test_hi);
  int guard = 0;
  while (g_hi >= 1.0 - eps) {
    t_hi *= 2.0;
    if (++guard > 200) throw std::runtime_error("dh_epsilon: threshold escalation failed");
    test_hi = detail::positive_eigenspace(Matrix(r - t_hi * s));
    g_hi = type1_of(test_hi);
  }
  for (int iter = 0; iter < 400 && (t_hi - t_lo) > 1e-14 * t_hi; ++iter) {
    const double mid = 0.5 * (t_lo + t_hi);
    Matrix test_mid = detail::positive_eigenspace(Matrix(r - mid * s));
    const double g_mid = type1_of(test_mid);
    if (g_mid >= 1.0 - eps) {
      t_lo = mid;
      test_lo = std::move(test_mid);
      g_lo = g_mid;
    } else {
      t_hi = mid;
      test_hi = std::move(test_mid);
      g_hi = g_mid;
    }
  }

  // Feasible witness with the type-I constraint exactly tight.
  const double gamma = std::clamp((g_lo - (1.0 - eps)) / (g_lo - g_hi), 0.0, 1.0);
  DhBracket out;
  out.witness = (1.0 - gamma) * test_lo + gamma * test_hi;
  out.threshold = 0.5 * (t_lo + t_hi);
  out.type1 = type1_of(out.witness);
  out.type2 = (out.witness * s).trace().real();
  out.lower = out.type2 > 0.0 ? -std::log2(out.type2) : kInf;

  // Dual upper bound, evaluated at s = 1/t near the crossing (where the dual
  // is maximized) plus a couple of safety candidates.
  double best = 0.0;
  const double t_mid = 0.5 * (t_lo + t_hi);
  for (double cand : {t_lo, t_mid, t_hi, 1.0}) {
    if (cand > 0.0) best = std::max(best, detail::dual_value(1.0 / cand, r, s, eps));
  }
  out.upper = best > 0.0 ? -std::log2(best) : kInf;
  if (std::isfinite(out.lower) && std::isfinite(out.upper)) {
    out.upper = std::max(out.upper, out.lower);  // guard against rounding inversion
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact commuting solvers (fractional knapsack on likelihood-ratio classes)
// ---------------------------------------------------------------------------

/// Exact D_H^eps for a commuting pair given as classical distributions over a
/// common eigenbasis. Fill 1 - eps of rho-mass in decreasing likelihood-ratio
/// order (the last class fractionally) and read off the sigma-mass.
inline double dh_commuting_oracle(const std::vector<double>& lambda,
                                  const std::vector<double>& mu, double eps) {
  if (lambda.size() != mu.size() || lambda.empty()) {
    throw std::invalid_argument("dh_commuting_oracle: size mismatch");
  }
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("dh_commuting_oracle: eps must be in (0,1)");
  }
  double sum_l = 0.0, sum_m = 0.0;
  for (size_t i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < -1e-12 || mu[i] < -1e-12) {
      throw std::invalid_argument("dh_commuting_oracle: negative mass");
    }
    sum_l += lambda[i];
    sum_m += mu[i];
  }
  if (std::abs(sum_l - 1.0) > 1e-8 || std::abs(sum_m - 1.0) > 1e-8) {
    throw std::invalid_argument("dh_commuting_oracle: distributions must sum to 1");
  }
  std::vector<size_t> order(lambda.size());
  std::iota(order.begin(), order.end(), size_t{0});
  auto ratio = [&](size_t i) {
    const double l = std::max(lambda[i], 0.0), m = std::max(mu[i], 0.0);
    if (m <= 0.0) return l > 0.0 ? kInf : -kInf;
    return l / m;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return ratio(a) > ratio(b); });
  double need = 1.0 - eps;
  double beta = 0.0;
  for (size_t i : order) {
    if (need <= 0.0) break;
    const double l = std::max(lambda[i], 0.0);
    if (l <= 0.0) continue;
    const double take = std::min(l, need);
    beta += (take / l) * std::max(mu[i], 0.0);
    need -= take;
  }
  return beta > 0.0 ? -std::log2(beta) : kInf;
}

/// Exact D_H^eps(rho^(x)n || sigma^(x)n) for commuting qubit pairs
/// rho = diag(l0, l1), sigma = diag(m0, m1), via the n+1 binomial
/// likelihood-ratio classes. All masses are handled in log space; type-II
/// errors around 2^-3000 are routine at n = 1000.
inline double dh_iid_qubit_exact(double l0, double l1, double m0, double m1, long n,
                                 double eps) {
  if (l0 < 0 || l1 < 0 || m0 < 0 || m1 < 0 || std::abs(l0 + l1 - 1.0) > 1e-12 ||
      std::abs(m0 + m1 - 1.0) > 1e-12) {
    throw std::invalid_argument("dh_iid_qubit_exact: inputs must be probability pairs");
  }
  if (n < 1) throw std::invalid_argument("dh_iid_qubit_exact: n must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("dh_iid_qubit_exact: eps must be in (0,1)");
  }
  auto xlogy = [](double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); };
  struct Cls {
    double log_l, log_m, ratio;
  };
  std::vector<Cls> cls(static_cast<size_t>(n) + 1);
  for (long k = 0; k <= n; ++k) {
    const double log_binom = std::lgamma(static_cast<double>(n) + 1.0) -
                             std::lgamma(static_cast<double>(k) + 1.0) -
                             std::lgamma(static_cast<double>(n - k) + 1.0);
    const double ll = log_binom + xlogy(static_cast<double>(n - k), l0) +
                      xlogy(static_cast<double>(k), l1);
    const double lm = log_binom + xlogy(static_cast<double>(n - k), m0) +
                      xlogy(static_cast<double>(k), m1);
    double ratio;
    if (ll == -kInf) {
      ratio = -kInf;  // no rho-mass, never useful
    } else if (lm == -kInf) {
      ratio = kInf;
    } else {
      ratio = ll - lm;
    }
    cls[static_cast<size_t>(k)] = {ll, lm, ratio};
  }
  std::stable_sort(cls.begin(), cls.end(), [](const Cls& a, const Cls& b) {
    return a.ratio > b.ratio;
  });
  double need = 1.0 - eps;
  std::vector<double> beta_terms;  // log of each selected sigma-mass contribution
  for (const Cls& c : cls) {
    if (need <= 0.0) break;
    if (c.log_l == -kInf) continue;
    const double l_lin = std::exp(c.log_l);
    double log_frac = 0.0;  // full class
    if (l_lin == 0.0) {
      // Mathematically positive but below double range: fills nothing,
      // contributes its full (log-space) sigma-mass.
    } else {
      const double take = std::min(l_lin, need);
      need -= take;
      if (take < l_lin) log_frac = std::log(take) - c.log_l;
    }
    if (c.log_m != -kInf) beta_terms.push_back(c.log_m + log_frac);
  }
  if (beta_terms.empty()) return kInf;
  const double m = *std::max_element(beta_terms.begin(), beta_terms.end());
  double acc = 0.0;
  for (double x : beta_terms) acc += std::exp(x - m);
  const double log_beta = m + std::log(acc);
  return -log_beta / std::log(2.0);
}

// ---------------------------------------------------------------------------
// Threshold projector T
// ---------------------------------------------------------------------------

/// Support projector of T~ = sum_{pairs with lambda_x >= g mu_y} Q_y P_x Q_y.
/// Satisfies Tr{T rho} >= Pr{Z >= log2 g} and Tr{T sigma} <= 1/g, checked
/// numerically with 1e-8 slack.
struct TlReport {
  Projector t_projector;
  double tr_rho = 0.0;
  double tr_sigma = 0.0;
  double z_tail = 0.0;  // Pr{Z >= log2 g} including sigma-null mass
  bool rho_bound_ok = false;
  bool sigma_bound_ok = false;
};

inline TlReport build_TL(const DensityOperator& rho, const DensityOperator& sigma,
                         double threshold) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("build_TL: dim mismatch");
  if (!(threshold > 0.0)) throw std::invalid_argument("build_TL: threshold must be positive");
  const int d = rho.dim();
  const SpectralDecomposition sr = spectral_decompose(rho.base());
  const SpectralDecomposition ss = spectral_decompose(sigma.base());
  const auto included = [&](double lam, double mu) {
    return mu <= tol::eig_zero || lam >= threshold * mu;
  };
  double z_tail = 0.0;
  for (int x = 0; x < d; ++x) {
    const double lam = sr.eigenvalues[x];
    if (lam <= tol::eig_zero) continue;
    for (int y = 0; y < d; ++y) {
      if (!included(lam, ss.eigenvalues[y])) continue;
      z_tail += lam * std::norm(ss.eigenvectors.col(y).dot(sr.eigenvectors.col(x)));
    }
  }
  // Basis from sigma-filtered rho eigenvectors, weakest lambda first: each
  // direction admitted at step x lies inside sigma eigenspaces dominated by
  // lambda_x, which forces Tr{T sigma} <= sum_x lambda_x / threshold <= 1/threshold,
  // while the span still covers the filtered image of every rho eigenvector.
  Matrix basis = Matrix::Zero(d, d);
  int rank = 0;
  for (int x = d - 1; x >= 0; --x) {  // eigenvalues are sorted descending
    const double lam = sr.eigenvalues[x];
    if (lam <= tol::eig_zero) continue;
    Vector u = Vector::Zero(d);
    for (int y = 0; y < d; ++y) {
      if (!included(lam, ss.eigenvalues[y])) continue;
      u += ss.eigenvectors.col(y) * ss.eigenvectors.col(y).dot(sr.eigenvectors.col(x));
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < rank; ++k) u -= basis.col(k) * basis.col(k).dot(u);
    }
    const double nrm = u.norm();
    if (nrm > 1e-11) basis.col(rank++) = u / nrm;
  }
  Matrix t = Matrix::Zero(d, d);
  for (int k = 0; k < rank; ++k) t += basis.col(k) * basis.col(k).adjoint();
  const double tr_rho = (t * rho.matrix()).trace().real();
  const double tr_sigma = (t * sigma.matrix()).trace().real();
  TlReport out{Projector(std::move(t)), tr_rho, tr_sigma, z_tail, false, false};
  out.rho_bound_ok = out.tr_rho >= z_tail - tol::bound_slack;
  out.sigma_bound_ok = out.tr_sigma <= 1.0 / threshold + tol::bound_slack;
  return out;
}

// ---------------------------------------------------------------------------
// Mutual-information quantities for a bipartite state
// ---------------------------------------------------------------------------

inline DensityOperator marginal_product(const DensityOperator& zeta, int dim_c, int dim_d) {
  if (static_cast<long long>(dim_c) * dim_d != zeta.dim()) {
    throw std::invalid_argument("marginal_product: dims do not factor the state");
  }
  const std::vector<int> dims{dim_c, dim_d};
  const Matrix zc = partial_trace(zeta.matrix(), dims, {0});
  const Matrix zd = partial_trace(zeta.matrix(), dims, {1});
  return DensityOperator(kron(zc, zd));
}

/// Moments of Z for zeta_CD against zeta_C x zeta_D: first moment is the
/// mutual information in bits.
inline DvtTriple mutual_information_triple(const DensityOperator& zeta, int dim_c, int dim_d) {
  return dvt(zeta, marginal_product(zeta, dim_c, dim_d));
}

/// Bracket on I_H^eps(C;D) = D_H^eps(zeta_CD || zeta_C x zeta_D).
inline DhBracket mutual_information_dh(const DensityOperator& zeta, int dim_c, int dim_d,
                                       double eps) {
  return dh_epsilon(zeta, marginal_product(zeta, dim_c, dim_d), eps);
}

}  // namespace qub
