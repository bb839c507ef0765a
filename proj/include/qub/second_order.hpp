// Second-order lower bound for i.i.d. hypothesis testing and the derived
// entanglement-assisted rate bounds. The core inequality is
//   D_H^eps(rho^(x)n || sigma^(x)n) >= n D + sqrt(n V) * PhiInv(eps - C T / sqrt(n V^3))
// with (D, V, T) the first three moments of the log-likelihood ratio and C a
// Berry-Esseen constant. Rate bounds subtract the explicit one-shot penalty
// log2(4 eps / eta^2).
#pragma once

#include "hypotest.hpp"
#include "operators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qub {

// Berry-Esseen constant for sums of i.i.d. variables: the best published
// range pins it inside [0.40973, 0.4784]; the upper end keeps the bound valid.
inline constexpr double kBerryEsseenC = 0.4784;

/// Standard normal CDF.
inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Inverse CDF, sup{a : phi(a) <= p}. Bisection plus a guarded Newton polish;
/// |phi(phi_inv(p)) - p| <= 1e-12 across (0, 1).
inline double phi_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("phi_inv: p must be in (0,1)");
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) <= p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 4; ++i) {
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    if (pdf < 1e-300) break;
    const double step = (phi(x) - p) / pdf;
    const double cand = x - step;
    if (std::abs(phi(cand) - p) < std::abs(phi(x) - p)) x = cand;
  }
  return x;
}

namespace detail {

// Smallest n making eps - C T / sqrt(n V^3) positive.
inline long expansion_min_n(double eps, double v, double t, double c) {
  if (t <= 0.0) return 1;
  const double root = c * t / (eps * std::pow(v, 1.5));
  return static_cast<long>(std::floor(root * root)) + 1;
}

}  // namespace detail

/// n D + sqrt(n V) PhiInv(eps - C T / sqrt(n V^3)), in bits. Throws
/// domain_error naming the smallest admissible n when the corrected argument
/// is not positive.
inline double expansion_lower_bound(long n, double eps, const DvtTriple& triple,
                                    double berry_esseen_c = kBerryEsseenC) {
  if (n < 1) throw std::invalid_argument("expansion_lower_bound: n must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("expansion_lower_bound: eps must be in (0,1)");
  }
  if (!triple.finite()) {
    throw std::invalid_argument("expansion_lower_bound: moments must be finite");
  }
  if (triple.v < 0.0 || triple.t < 0.0) {
    throw std::invalid_argument("expansion_lower_bound: negative moments");
  }
  if (triple.v == 0.0) {
    if (triple.t > 0.0) {
      throw std::invalid_argument("expansion_lower_bound: V = 0 with T > 0 is inconsistent");
    }
    return static_cast<double>(n) * triple.d;  // deterministic Z
  }
  const double corr =
      berry_esseen_c * triple.t / std::sqrt(static_cast<double>(n) * triple.v * triple.v * triple.v);
  const double arg = eps - corr;
  if (arg <= 0.0) {
    throw std::domain_error(
        "expansion_lower_bound: n too small for the Berry-Esseen correction, need n >= " +
        std::to_string(detail::expansion_min_n(eps, triple.v, triple.t, berry_esseen_c)));
  }
  return static_cast<double>(n) * triple.d +
         std::sqrt(static_cast<double>(n) * triple.v) * phi_inv(arg);
}

/// A rate statement: total bits over n channel uses split into the
/// hypothesis-testing information term and the explicit penalty.
struct RateBound {
  long n = 1;
  double eps = 0.0;
  double eta = 0.0;
  double ih_bits = 0.0;       // information term, total over the n uses
  double penalty_bits = 0.0;  // log2(4 eps / eta^2)
  double total_bits = 0.0;    // ih_bits - penalty_bits
  double rate_bits_per_use = 0.0;
};

/// One-shot rate: log2 M = ih - log2(4 eps / eta^2) with ih evaluated at
/// failure budget eps - eta.
inline RateBound ea_rate_lower_bound(double ih_bits, double eps, double eta) {
  if (!(eta > 0.0 && eta < eps && eps < 1.0)) {
    throw std::invalid_argument("ea_rate_lower_bound: need 0 < eta < eps < 1");
  }
  RateBound out;
  out.n = 1;
  out.eps = eps;
  out.eta = eta;
  out.ih_bits = ih_bits;
  out.penalty_bits = std::log2(4.0 * eps / (eta * eta));
  out.total_bits = ih_bits - out.penalty_bits;
  out.rate_bits_per_use = out.total_bits;
  return out;
}

/// n-use rate with the standard eta = 1/sqrt(n) split: the information term
/// is the second-order expansion at failure budget eps - eta and the penalty
/// is log2(4 eps n). Converges to D at speed sqrt(V/n) PhiInv(eps) + O(log n / n).
inline RateBound ea_second_order_rate(const DvtTriple& triple, long n, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("ea_second_order_rate: eps must be in (0,1)");
  }
  if (n < 1) throw std::invalid_argument("ea_second_order_rate: n must be >= 1");
  const double eta = 1.0 / std::sqrt(static_cast<double>(n));
  long n_min = static_cast<long>(std::floor(1.0 / (eps * eps))) + 1;
  if (triple.finite() && triple.v > 0.0) {
    n_min = std::max(n_min, detail::expansion_min_n(eps - eta > 0 ? eps - eta : eps, triple.v,
                                                    triple.t, kBerryEsseenC));
  }
  if (eta >= eps) {
    throw std::domain_error("ea_second_order_rate: n too small, need n >= " +
                            std::to_string(n_min));
  }
  RateBound out;
  out.n = n;
  out.eps = eps;
  out.eta = eta;
  out.ih_bits = expansion_lower_bound(n, eps - eta, triple);
  out.penalty_bits = std::log2(4.0 * eps * static_cast<double>(n));
  out.total_bits = out.ih_bits - out.penalty_bits;
  out.rate_bits_per_use = out.total_bits / static_cast<double>(n);
  return out;
}

// ---------------------------------------------------------------------------
// Average energy constraint
// ---------------------------------------------------------------------------

struct EnergyReport {
  bool satisfied = false;
  double average = 0.0;  // per-copy energy, uniform over codewords
  double margin = 0.0;   // power - average
  std::vector<double> per_codeword;
};

/// Check (1/|codewords|) sum_m (1/n_m) sum_i Tr{G rho_m^(i)} <= power, where
/// rho_m^(i) is the i-th single-copy marginal of codeword m on (dim G)^n_m.
inline EnergyReport energy_check(const std::vector<DensityOperator>& codewords,
                                 const HermitianOperator& g, double power) {
  if (codewords.empty()) throw std::invalid_argument("energy_check: no codewords");
  if (power < 0.0) throw std::invalid_argument("energy_check: power must be nonnegative");
  if (g.dim() < 2) throw std::invalid_argument("energy_check: observable dim must be >= 2");
  {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(g.matrix());
    if (solver.eigenvalues().minCoeff() < -tol::measurement_eig) {
      throw std::invalid_argument("energy_check: observable must be positive semi-definite");
    }
  }
  const int dg = g.dim();
  EnergyReport out;
  out.per_codeword.reserve(codewords.size());
  double acc = 0.0;
  for (const DensityOperator& rho : codewords) {
    int n = 0;
    long long total = 1;
    while (total < rho.dim()) {
      total *= dg;
      ++n;
    }
    if (total != rho.dim() || n < 1) {
      throw std::invalid_argument("energy_check: codeword dim is not a power of dim(G)");
    }
    std::vector<int> dims(static_cast<size_t>(n), dg);
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      const Matrix marginal = partial_trace(rho.matrix(), dims, {i});
      e += (g.matrix() * marginal).trace().real();
    }
    e /= static_cast<double>(n);
    out.per_codeword.push_back(e);
    acc += e;
  }
  out.average = acc / static_cast<double>(codewords.size());
  out.margin = power - out.average;
  out.satisfied = out.average <= power + 1e-12;
  return out;
}

}  // namespace qub
