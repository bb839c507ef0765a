// Union bound for sequences of projective measurements with a tunable
// trade-off parameter c > 0, plus the telescoping-identity diagnostics that
// drive its proof and the two comparison bounds (4 * sum a_i, resp.
// 2 * sqrt(sum a_i)).
//
// For projectors P_1..P_L and state rho with a_i = Tr{(I - P_i) rho}, the
// sequential failure probability 1 - Tr{P_L...P_1 rho P_1...P_{L-1}} is at
// most
//   (1+c) a_L + (2+c+1/c) sum_{i=2}^{L-1} a_i + (2+1/c) a_1.
#pragma once

#include "operators.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qub {

/// A state together with an ordered list of projective tests on the same space.
struct UnionBoundInstance {
  DensityOperator state;
  std::vector<Projector> projectors;

  UnionBoundInstance(DensityOperator s, std::vector<Projector> ps)
      : state(std::move(s)), projectors(std::move(ps)) {
    if (projectors.size() < 2) {
      throw std::invalid_argument("UnionBoundInstance: need at least two projectors");
    }
    for (const Projector& p : projectors) {
      if (p.dim() != state.dim()) {
        throw std::invalid_argument("UnionBoundInstance: projector dim mismatch");
      }
    }
  }

  int num_projectors() const { return static_cast<int>(projectors.size()); }

  std::vector<double> individual_errors() const {
    std::vector<double> a;
    a.reserve(projectors.size());
    for (const Projector& p : projectors) {
      a.push_back(1.0 - (p.matrix() * state.matrix()).trace().real());
    }
    return a;
  }
};

/// Tr{P_L ... P_1 rho P_1 ... P_{L-1}}, by direct matrix products.
inline double sequential_success_prob(const UnionBoundInstance& inst) {
  const int L = inst.num_projectors();
  const int d = inst.state.dim();
  Matrix chain = Matrix::Identity(d, d);
  for (int i = 0; i < L - 1; ++i) chain = inst.projectors[static_cast<size_t>(i)].matrix() * chain;
  const Matrix sandwiched = chain * inst.state.matrix() * chain.adjoint();
  return (inst.projectors[static_cast<size_t>(L - 1)].matrix() * sandwiched).trace().real();
}

/// Pure-state specialization: ||P_L ... P_1 |psi>||^2.
inline double sequential_success_prob(const PureState& psi, const std::vector<Projector>& ps) {
  if (ps.size() < 2) throw std::invalid_argument("sequential_success_prob: need >= 2 projectors");
  Vector v = psi.amplitudes();
  for (const Projector& p : ps) {
    if (p.dim() != psi.dim()) throw std::invalid_argument("projector dim mismatch");
    v = p.matrix() * v;
  }
  return v.squaredNorm();
}

/// (1+c) a_L + (2+c+1/c) sum_{i=2}^{L-1} a_i + (2+1/c) a_1 for c > 0.
inline double rhs_theorem1(const std::vector<double>& a, double c) {
  if (a.size() < 2) throw std::invalid_argument("rhs_theorem1: need at least two error terms");
  if (!(c > 0.0)) throw std::invalid_argument("rhs_theorem1: c must be positive");
  const size_t L = a.size();
  double mid = 0.0;
  for (size_t i = 1; i + 1 < L; ++i) mid += a[i];
  return (1.0 + c) * a[L - 1] + (2.0 + c + 1.0 / c) * mid + (2.0 + 1.0 / c) * a[0];
}

inline double gao_rhs(const std::vector<double>& a) {
  double sum = 0.0;
  for (double x : a) sum += x;
  return 4.0 * sum;
}

inline double sen_rhs(const std::vector<double>& a) {
  double sum = 0.0;
  for (double x : a) sum += x;
  return 2.0 * std::sqrt(sum);
}

/// Minimizer of rhs_theorem1 over c > 0. Writing the bound as
/// c*A + B/c + K with A = sum_{i>=2} a_i and B = sum_{i<=L-1} a_i, the
/// interior optimum is c* = sqrt(B/A); if A or B vanishes the infimum is only
/// attained in the limit (c -> infinity, resp. c -> 0+) and c_star is empty.
struct OptimalC {
  enum class Branch { interior, limit_large_c, limit_small_c, all_zero };

  std::optional<double> c_star;
  double rhs_min = 0.0;
  Branch branch = Branch::interior;
};

inline OptimalC optimal_c(const std::vector<double>& a) {
  if (a.size() < 2) throw std::invalid_argument("optimal_c: need at least two error terms");
  for (double x : a) {
    if (x < 0.0) throw std::invalid_argument("optimal_c: error terms must be nonnegative");
  }
  const size_t L = a.size();
  double A = 0.0, B = 0.0, mid = 0.0;
  for (size_t i = 1; i < L; ++i) A += a[i];
  for (size_t i = 0; i + 1 < L; ++i) B += a[i];
  for (size_t i = 1; i + 1 < L; ++i) mid += a[i];
  const double base = 2.0 * a[0] + 2.0 * mid + a[L - 1];  // c-independent part
  OptimalC out;
  if (A == 0.0 && B == 0.0) {
    out.branch = OptimalC::Branch::all_zero;
    out.rhs_min = 0.0;
    return out;
  }
  if (A == 0.0) {
    // c * A drops out; B/c -> 0 as c -> infinity.
    out.branch = OptimalC::Branch::limit_large_c;
    out.rhs_min = base;
    return out;
  }
  if (B == 0.0) {
    out.branch = OptimalC::Branch::limit_small_c;
    out.rhs_min = base;
    return out;
  }
  out.branch = OptimalC::Branch::interior;
  out.c_star = std::sqrt(B / A);
  out.rhs_min = base + 2.0 * std::sqrt(A * B);
  return out;
}

/// Residuals of the three telescoping identities behind the bound, the
/// Cauchy-Schwarz slack, and the second-moment slack. Identities hold as
/// complex equalities; slacks are nonnegative up to rounding.
///
/// With |phi_i> = P_i ... P_1 |psi> (|phi_0> = |psi>) and Q_i = I - P_i:
///   pro1: sum_i <psi| Q_i P_{i-1}...P_1 |psi>            = 1 - <psi|phi_L>
///   pro2: sum_i <psi| P_1...P_{i-1} Q_i |psi>            = 1 - <phi_L|psi>
///   pro3: sum_i <phi_{i-1}| Q_i |phi_{i-1}>              = 1 - ||phi_L||^2
///   pro4: 1 - sqrt(<psi|P_L|psi>) sqrt(||phi_L||^2)
///           <= sum_i sqrt(<psi|Q_i|psi>) sqrt(<phi_{i-1}|Q_i|phi_{i-1}>)
///   second_moment: sum_{i=2}^{L} ||Q_i (I - P_{i-1}...P_1)|psi>||^2
///           <= sum_{i=1}^{L-1} <psi|Q_i|psi>
struct LemmaReport {
  double pro1_residual = 0.0;
  double pro2_residual = 0.0;
  double pro3_residual = 0.0;
  double pro4_slack = 0.0;           // rhs - lhs of the Cauchy-Schwarz step
  double second_moment_slack = 0.0;  // rhs - lhs of the second-moment bound
};

inline LemmaReport check_lemma_identities(const PureState& psi,
                                          const std::vector<Projector>& ps) {
  const size_t L = ps.size();
  if (L < 2) throw std::invalid_argument("check_lemma_identities: need >= 2 projectors");
  for (const Projector& p : ps) {
    if (p.dim() != psi.dim()) throw std::invalid_argument("projector dim mismatch");
  }
  const Vector& v0 = psi.amplitudes();
  std::vector<Vector> phi(L + 1);  // phi[i] = P_i ... P_1 |psi>
  phi[0] = v0;
  for (size_t i = 1; i <= L; ++i) phi[i] = ps[i - 1].matrix() * phi[i - 1];

  Complex sum1(0.0, 0.0), sum2(0.0, 0.0), sum3(0.0, 0.0);
  double cs_sum = 0.0;
  for (size_t i = 1; i <= L; ++i) {
    const Complex overlap_prev = v0.dot(phi[i - 1]);  // <psi|phi_{i-1}>
    const Complex overlap_cur = v0.dot(phi[i]);
    sum1 += overlap_prev - overlap_cur;
    sum2 += std::conj(overlap_prev) - std::conj(overlap_cur);
    const double n_prev = phi[i - 1].squaredNorm();
    const double n_cur = phi[i].squaredNorm();
    sum3 += Complex(n_prev - n_cur, 0.0);
    const double qi = std::max(0.0, 1.0 - (ps[i - 1].matrix() * v0).dot(v0).real());
    cs_sum += std::sqrt(qi) * std::sqrt(std::max(0.0, n_prev - n_cur));
  }
  LemmaReport out;
  const Complex final_overlap = v0.dot(phi[L]);
  out.pro1_residual = std::abs(sum1 - (Complex(1.0, 0.0) - final_overlap));
  out.pro2_residual = std::abs(sum2 - (Complex(1.0, 0.0) - std::conj(final_overlap)));
  out.pro3_residual = std::abs(sum3 - Complex(1.0 - phi[L].squaredNorm(), 0.0));
  const double p_last = std::max(0.0, (ps[L - 1].matrix() * v0).dot(v0).real());
  const double cs_lhs = 1.0 - std::sqrt(p_last) * std::sqrt(phi[L].squaredNorm());
  out.pro4_slack = cs_sum - cs_lhs;

  double sm_lhs = 0.0;
  for (size_t i = 2; i <= L; ++i) {
    const Vector diff = v0 - phi[i - 1];
    sm_lhs += (diff - ps[i - 1].matrix() * diff).squaredNorm();
  }
  double sm_rhs = 0.0;
  for (size_t i = 1; i <= L - 1; ++i) {
    sm_rhs += std::max(0.0, 1.0 - (ps[i - 1].matrix() * v0).dot(v0).real());
  }
  out.second_moment_slack = sm_rhs - sm_lhs;
  return out;
}

/// One evaluated instance of the bound: LHS, the error terms, and all three
/// right-hand sides. `violated` flags lhs > rhs_ours + 1e-8 (never expected).
struct BoundReport {
  double lhs = 0.0;
  std::vector<double> individual_errors;
  double c = 1.0;
  double rhs_ours = 0.0;
  double rhs_gao = 0.0;
  double rhs_sen = 0.0;
  bool violated = false;
  double violation = 0.0;  // max(0, lhs - rhs_ours)
};

inline BoundReport make_bound_report(double lhs, std::vector<double> a, double c) {
  BoundReport r;
  r.lhs = lhs;
  r.c = c;
  r.rhs_ours = rhs_theorem1(a, c);
  r.rhs_gao = gao_rhs(a);
  r.rhs_sen = sen_rhs(a);
  r.violation = std::max(0.0, lhs - r.rhs_ours);
  r.violated = lhs > r.rhs_ours + tol::bound_slack;
  r.individual_errors = std::move(a);
  return r;
}

inline BoundReport verify_union_bound(const UnionBoundInstance& inst, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("verify_union_bound: c must be positive");
  const double lhs = 1.0 - sequential_success_prob(inst);
  return make_bound_report(lhs, inst.individual_errors(), c);
}

inline BoundReport verify_union_bound(const PureState& psi, const std::vector<Projector>& ps,
                                      double c) {
  if (!(c > 0.0)) throw std::invalid_argument("verify_union_bound: c must be positive");
  const double lhs = 1.0 - sequential_success_prob(psi, ps);
  std::vector<double> a;
  a.reserve(ps.size());
  for (const Projector& p : ps) {
    a.push_back(std::max(0.0, 1.0 - (p.matrix() * psi.amplitudes()).dot(psi.amplitudes()).real()));
  }
  return make_bound_report(lhs, std::move(a), c);
}

}  // namespace qub
