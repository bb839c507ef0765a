// Exact simulation of position-based coding with sequential decoding.
//
// The sender shares M copies of a resource state rho_RA with the receiver and
// encodes message m by sending the A share of copy m through the channel. The
// receiver holds R_1 ... R_M B and applies the binary test Lambda (on R_i B)
// for i = 1, 2, ... until it fires. Probe registers from the dilated tests
// are elided analytically, which is exact because each probe is measured
// once. Error probabilities are compared against
//   p_e <= (1+c)(eps-eta) + (2+c+1/c) M beta,   beta = Tr{Lambda (zeta_R x zeta_B)}.
#pragma once

#include "hypotest.hpp"
#include "naimark.hpp"
#include "operators.hpp"
#include "second_order.hpp"
#include "union_bound.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qub {

struct CodingScenario {
  QuantumChannel channel;
  DensityOperator resource;  // on R x A
  int dim_r;
  int dim_a;
  int num_messages;  // M
  double eps;
  double eta;
  double c;  // union-bound parameter; default eta / (2 eps - eta)

  CodingScenario(QuantumChannel ch, DensityOperator res, int dr, int da, int m, double eps_,
                 double eta_, std::optional<double> c_ = std::nullopt)
      : channel(std::move(ch)),
        resource(std::move(res)),
        dim_r(dr),
        dim_a(da),
        num_messages(m),
        eps(eps_),
        eta(eta_),
        c(c_.value_or(eta_ / (2.0 * eps_ - eta_))) {
    if (dim_r < 1 || dim_a < 1 ||
        static_cast<long long>(dim_r) * dim_a != resource.dim()) {
      throw std::invalid_argument("CodingScenario: resource dim must equal dim_r * dim_a");
    }
    if (channel.dim_in() != dim_a) {
      throw std::invalid_argument("CodingScenario: channel input dim must equal dim_a");
    }
    if (num_messages < 1) throw std::invalid_argument("CodingScenario: need M >= 1");
    if (!(eta > 0.0 && eta < eps && eps < 1.0)) {
      throw std::invalid_argument("CodingScenario: need 0 < eta < eps < 1");
    }
    if (!(c > 0.0)) throw std::invalid_argument("CodingScenario: c must be positive");
    long long total = channel.dim_out();
    for (int i = 0; i < num_messages; ++i) {
      total *= dim_r;
      if (total > kDilationDimCap) {
        throw std::invalid_argument("CodingScenario: dim_r^M * dim_b exceeds cap 4096");
      }
    }
  }

  int dim_b() const { return channel.dim_out(); }

  /// (id_R x N)(rho_RA), the single-pair state after transmission.
  DensityOperator zeta_rb() const {
    return apply_channel(channel, resource, 1, {dim_r, dim_a});
  }

  DensityOperator rho_r() const {
    return DensityOperator(partial_trace(resource.matrix(), {dim_r, dim_a}, {0}));
  }

  /// zeta_R x zeta_B, the state Lambda sees at every wrong position.
  DensityOperator product_state() const {
    const DensityOperator z = zeta_rb();
    const std::vector<int> dims{dim_r, dim_b()};
    return DensityOperator(kron(partial_trace(z.matrix(), dims, {0}),
                                partial_trace(z.matrix(), dims, {1})));
  }

  std::vector<int> full_dims() const {
    std::vector<int> dims(static_cast<size_t>(num_messages), dim_r);
    dims.push_back(dim_b());
    return dims;
  }
};

/// Receiver state for message m (1-based): rho_R at every position except m,
/// which holds the R half of zeta_RB; ordering R_1 ... R_M B.
inline DensityOperator bob_marginal(const CodingScenario& sc, int m) {
  if (m < 1 || m > sc.num_messages) throw std::invalid_argument("bob_marginal: bad message index");
  const Matrix rho_r = sc.rho_r().matrix();
  const Matrix zeta = sc.zeta_rb().matrix();
  Matrix acc = Matrix::Identity(1, 1);
  std::vector<int> dims_mid;
  for (int i = 1; i < m; ++i) {
    acc = kron(acc, rho_r);
    dims_mid.push_back(sc.dim_r);
  }
  acc = kron(acc, zeta);
  dims_mid.push_back(sc.dim_r);
  dims_mid.push_back(sc.dim_b());
  for (int i = m + 1; i <= sc.num_messages; ++i) {
    acc = kron(acc, rho_r);
    dims_mid.push_back(sc.dim_r);
  }
  // Move B from position m to the end.
  const int mm = sc.num_messages;
  std::vector<int> perm(static_cast<size_t>(mm) + 1);
  for (int i = 0; i < m; ++i) perm[static_cast<size_t>(i)] = i;
  for (int i = m; i < mm; ++i) perm[static_cast<size_t>(i)] = i + 1;
  perm[static_cast<size_t>(mm)] = m;
  return DensityOperator(permute_subsystems(acc, dims_mid, perm));
}

struct DecodeRow {
  int m_true = 0;
  std::vector<double> outcome_probs;  // Pr{decoder announces i}, i = 1..M
  double no_detect_prob = 0.0;        // counted as an error
  double success = 0.0;
  double p_e = 0.0;
};

/// Exact outcome distribution of the sequential decoder when message m_true
/// was sent. `lambda` acts on R_i B and must obey the one-shot premise
/// Tr{(I - Lambda) zeta_RB} <= eps - eta.
inline DecodeRow sequential_decode(const CodingScenario& sc, const MeasurementOperator& lambda,
                                   int m_true) {
  if (lambda.dim() != static_cast<long long>(sc.dim_r) * sc.dim_b()) {
    throw std::invalid_argument("sequential_decode: lambda must act on R x B");
  }
  const Matrix zeta = sc.zeta_rb().matrix();
  const double alpha = 1.0 - (lambda.matrix() * zeta).trace().real();
  if (alpha > sc.eps - sc.eta + 1e-9) {
    throw std::invalid_argument("sequential_decode: premise violated, Tr{(I-L) zeta} = " +
                                std::to_string(alpha) + " > eps - eta");
  }
  const ProbeElidedMeasurement pem = ProbeElidedMeasurement::from(lambda);
  const std::vector<int> dims = sc.full_dims();
  Matrix state = bob_marginal(sc, m_true).matrix();
  DecodeRow row;
  row.m_true = m_true;
  row.outcome_probs.resize(static_cast<size_t>(sc.num_messages), 0.0);
  for (int i = 0; i < sc.num_messages; ++i) {
    const std::vector<int> sites{i, sc.num_messages};
    const Matrix lam_full = embed_operator(pem.lambda, dims, sites);
    row.outcome_probs[static_cast<size_t>(i)] = (lam_full * state).trace().real();
    const Matrix k1 = embed_operator(pem.reject_k1, dims, sites);
    const Matrix k2 = embed_operator(pem.reject_k2, dims, sites);
    state = k1 * state * k1.adjoint() + k2 * state * k2.adjoint();
  }
  row.no_detect_prob = state.trace().real();
  row.success = row.outcome_probs[static_cast<size_t>(m_true - 1)];
  row.p_e = 1.0 - row.success;
  return row;
}

struct DecodingResult {
  double alpha = 0.0;  // Tr{(I - Lambda) zeta_RB}
  double beta = 0.0;   // Tr{Lambda (zeta_R x zeta_B)}
  double c = 0.0;
  double bound = 0.0;  // (1+c)(eps-eta) + (2+c+1/c) M beta
  std::vector<DecodeRow> rows;
  double max_p_e = 0.0;
  bool all_within_bound = false;
  std::optional<DhBracket> bracket;  // set when the test was derived internally
};

/// Run the decoder for every message. When no test is supplied, the
/// Neyman-Pearson witness for D_H^{eps-eta}(zeta_RB || zeta_R x zeta_B) is
/// used, which satisfies the premise with the constraint tight.
inline DecodingResult run_theorem3_experiment(
    const CodingScenario& sc, std::optional<MeasurementOperator> lambda = std::nullopt) {
  const DensityOperator zeta = sc.zeta_rb();
  const DensityOperator prod = sc.product_state();
  DecodingResult out;
  if (!lambda.has_value()) {
    DhBracket br = dh_epsilon(zeta, prod, sc.eps - sc.eta);
    lambda = MeasurementOperator(br.witness);
    out.bracket = std::move(br);
  }
  out.alpha = 1.0 - (lambda->matrix() * zeta.matrix()).trace().real();
  out.beta = (lambda->matrix() * prod.matrix()).trace().real();
  out.c = sc.c;
  out.bound = (1.0 + sc.c) * (sc.eps - sc.eta) +
              (2.0 + sc.c + 1.0 / sc.c) * static_cast<double>(sc.num_messages) * out.beta;
  for (int m = 1; m <= sc.num_messages; ++m) {
    out.rows.push_back(sequential_decode(sc, *lambda, m));
    out.max_p_e = std::max(out.max_p_e, out.rows.back().p_e);
  }
  out.all_within_bound = out.max_p_e <= out.bound + tol::bound_slack;
  return out;
}

/// Largest M with log2 M <= ih_bits - log2(4 eps / eta^2), floored at 1.
inline long long message_count_for(double ih_bits, double eps, double eta) {
  if (!(eta > 0.0 && eta < eps && eps < 1.0)) {
    throw std::invalid_argument("message_count_for: need 0 < eta < eps < 1");
  }
  const double log2m = ih_bits - std::log2(4.0 * eps / (eta * eta));
  if (log2m >= 62.0) return (1LL << 62);
  return std::max(1LL, static_cast<long long>(std::floor(std::exp2(log2m))));
}

// ---------------------------------------------------------------------------
// Classical-quantum rate points
// ---------------------------------------------------------------------------

/// Ensemble {p(x), rho_A^x}, equivalently the block-diagonal state
/// sum_x p(x) |x><x| x rho_A^x.
struct ClassicalQuantumState {
  std::vector<double> probs;
  std::vector<DensityOperator> states;

  ClassicalQuantumState(std::vector<double> p, std::vector<DensityOperator> s)
      : probs(std::move(p)), states(std::move(s)) {
    if (probs.empty() || probs.size() != states.size()) {
      throw std::invalid_argument("ClassicalQuantumState: need one state per probability");
    }
    double sum = 0.0;
    for (double& x : probs) {
      if (x < -1e-12) throw std::invalid_argument("ClassicalQuantumState: negative probability");
      x = std::max(x, 0.0);
      sum += x;
    }
    if (std::abs(sum - 1.0) > tol::trace_one) {
      throw std::invalid_argument("ClassicalQuantumState: probabilities must sum to 1");
    }
    for (const DensityOperator& st : states) {
      if (st.dim() != states.front().dim()) {
        throw std::invalid_argument("ClassicalQuantumState: state dims differ");
      }
    }
  }

  int num_symbols() const { return static_cast<int>(probs.size()); }
  int dim_a() const { return states.front().dim(); }

  Matrix joint_matrix() const {
    const int nx = num_symbols(), da = dim_a();
    Matrix out = Matrix::Zero(static_cast<long long>(nx) * da, static_cast<long long>(nx) * da);
    for (int x = 0; x < nx; ++x) {
      out.block(static_cast<long long>(x) * da, static_cast<long long>(x) * da, da, da) =
          probs[static_cast<size_t>(x)] * states[static_cast<size_t>(x)].matrix();
    }
    return out;
  }

  /// Parse a block-diagonal X x A matrix; off-diagonal blocks must vanish.
  static ClassicalQuantumState from_matrix(const Matrix& m, int num_x, int dim_a) {
    if (num_x < 1 || dim_a < 1 || m.rows() != static_cast<long long>(num_x) * dim_a ||
        m.rows() != m.cols()) {
      throw std::invalid_argument("ClassicalQuantumState: dim mismatch");
    }
    for (int x = 0; x < num_x; ++x) {
      for (int y = 0; y < num_x; ++y) {
        if (x == y) continue;
        const double off = m.block(static_cast<long long>(x) * dim_a,
                                   static_cast<long long>(y) * dim_a, dim_a, dim_a)
                               .cwiseAbs()
                               .maxCoeff();
        if (off > 1e-10) {
          throw std::invalid_argument("ClassicalQuantumState: input is not block-diagonal");
        }
      }
    }
    std::vector<double> probs;
    std::vector<DensityOperator> states;
    for (int x = 0; x < num_x; ++x) {
      const Matrix block =
          m.block(static_cast<long long>(x) * dim_a, static_cast<long long>(x) * dim_a, dim_a,
                  dim_a);
      const double p = block.trace().real();
      probs.push_back(p);
      states.push_back(p > 1e-12 ? DensityOperator(Matrix(block / p))
                                 : DensityOperator::maximally_mixed(dim_a));
    }
    return ClassicalQuantumState(std::move(probs), std::move(states));
  }
};

namespace detail {

/// Joint eigenvalue pairs of a commuting Hermitian pair (a, b): diagonalize b,
/// group nearly equal eigenvalues, rediagonalize a inside each group. Returns
/// false (and leaves `pairs` empty) if the refinement fails to reproduce a.
inline bool joint_eigenvalues(const Matrix& a, const Matrix& b,
                              std::vector<std::pair<double, double>>& pairs) {
  pairs.clear();
  if (max_abs(a * b - b * a) > 1e-10) return false;
  const int d = static_cast<int>(a.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> sb(b);
  const double scale = std::max(1.0, sb.eigenvalues().cwiseAbs().maxCoeff());
  Matrix recon_a = Matrix::Zero(d, d);
  int start = 0;
  while (start < d) {
    int stop = start + 1;
    while (stop < d &&
           std::abs(sb.eigenvalues()[stop] - sb.eigenvalues()[stop - 1]) <= 1e-9 * scale) {
      ++stop;
    }
    const Matrix w = sb.eigenvectors().middleCols(start, stop - start);
    Eigen::SelfAdjointEigenSolver<Matrix> sa(Matrix(w.adjoint() * a * w));
    const Matrix refined = w * sa.eigenvectors();
    for (int k = 0; k < stop - start; ++k) {
      pairs.emplace_back(sa.eigenvalues()[k], sb.eigenvalues()[start]);
      recon_a += sa.eigenvalues()[k] * refined.col(k) * refined.col(k).adjoint();
    }
    start = stop;
  }
  if (max_abs(recon_a - a) > tol::reconstruction) {
    pairs.clear();
    return false;
  }
  return true;
}

}  // namespace detail

struct CqRatePoint {
  RateBound rate;      // built from the achievable (lower) information value
  double ih_lower = 0.0;
  double ih_upper = 0.0;
  bool exact_lp = false;  // true when the block-structured LP applied
};

/// One-shot rate point for an ensemble sent through a channel:
/// I_H^{eps-eta}(X;B) - log2(4 eps / eta^2). Per-block commuting outputs are
/// solved exactly by the likelihood-ratio LP; otherwise dh_epsilon supplies a
/// bracket and the achievable end is used.
inline CqRatePoint cq_rate_point(const ClassicalQuantumState& cq, const QuantumChannel& channel,
                                 double eps, double eta) {
  if (channel.dim_in() != cq.dim_a()) {
    throw std::invalid_argument("cq_rate_point: channel input dim mismatch");
  }
  if (!(eta > 0.0 && eta < eps && eps < 1.0)) {
    throw std::invalid_argument("cq_rate_point: need 0 < eta < eps < 1");
  }
  const int nx = cq.num_symbols();
  const int db = channel.dim_out();
  std::vector<Matrix> outs;
  Matrix avg = Matrix::Zero(db, db);
  for (int x = 0; x < nx; ++x) {
    outs.push_back(channel.apply(cq.states[static_cast<size_t>(x)].matrix()));
    avg += cq.probs[static_cast<size_t>(x)] * outs.back();
  }
  const double eps_eff = eps - eta;

  // Exact path: every output block commutes with the average output.
  bool lp_ok = true;
  std::vector<double> lam, mu;
  for (int x = 0; x < nx && lp_ok; ++x) {
    const double p = cq.probs[static_cast<size_t>(x)];
    std::vector<std::pair<double, double>> pairs;
    if (!detail::joint_eigenvalues(outs[static_cast<size_t>(x)], avg, pairs)) {
      lp_ok = false;
      break;
    }
    for (const auto& [a_v, b_v] : pairs) {
      lam.push_back(p * std::max(a_v, 0.0));
      mu.push_back(p * std::max(b_v, 0.0));
    }
  }

  CqRatePoint out;
  if (lp_ok) {
    const double ih = dh_commuting_oracle(lam, mu, eps_eff);
    out.ih_lower = ih;
    out.ih_upper = ih;
    out.exact_lp = true;
  } else {
    Matrix joint = Matrix::Zero(static_cast<long long>(nx) * db, static_cast<long long>(nx) * db);
    Matrix prod = joint;
    for (int x = 0; x < nx; ++x) {
      const double p = cq.probs[static_cast<size_t>(x)];
      joint.block(static_cast<long long>(x) * db, static_cast<long long>(x) * db, db, db) =
          p * outs[static_cast<size_t>(x)];
      prod.block(static_cast<long long>(x) * db, static_cast<long long>(x) * db, db, db) =
          p * avg;
    }
    const DhBracket br = dh_epsilon(DensityOperator(joint), DensityOperator(prod), eps_eff);
    out.ih_lower = br.lower;
    out.ih_upper = br.upper;
    out.exact_lp = false;
  }
  out.rate = ea_rate_lower_bound(out.ih_lower, eps, eta);
  return out;
}

}  // namespace qub
