#include <catch2/catch_amalgamated.hpp>

#include <qub/coding_sim.hpp>
#include <qub/random.hpp>

using namespace qub;

namespace {

DensityOperator max_entangled(int d) {
  Vector v = Vector::Zero(static_cast<long long>(d) * d);
  for (int i = 0; i < d; ++i) v[static_cast<long long>(i) * d + i] = 1.0;
  return PureState::unnormalized(v).density();
}

Matrix bell_projector() { return max_entangled(2).matrix(); }

CodingScenario bell_scenario(int m, double eps, double eta) {
  return CodingScenario(QuantumChannel::identity(2), max_entangled(2), 2, 2, m, eps, eta);
}

// decoder outcome distribution computed on the full system x probe^M space,
// with every probe explicit and each slot measured projectively
std::vector<double> explicit_probe_outcomes(const CodingScenario& sc,
                                            const MeasurementOperator& lambda, int m_true,
                                            double* no_detect) {
  std::vector<int> dims = sc.full_dims();
  for (int i = 0; i < sc.num_messages; ++i) dims.push_back(2);
  const NaimarkDilation nd = dilate(lambda);

  Matrix omega = bob_marginal(sc, m_true).matrix();
  Matrix zero = Matrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  for (int i = 0; i < sc.num_messages; ++i) omega = kron(omega, zero);

  std::vector<double> probs;
  Matrix state = omega;
  for (int i = 0; i < sc.num_messages; ++i) {
    const std::vector<int> sites{i, sc.num_messages, sc.num_messages + 1 + i};
    const Matrix yes = embed_operator(nd.pi.matrix(), dims, sites);
    probs.push_back((yes * state).trace().real());
    const Matrix no = embed_operator(nd.pi_hat.matrix(), dims, sites);
    state = no * state * no;
  }
  if (no_detect) *no_detect = state.trace().real();
  return probs;
}

}  // namespace

TEST_CASE("scenario construction and derived states") {
  CodingScenario sc = bell_scenario(2, 0.3, 0.1);
  REQUIRE(sc.c == Catch::Approx(0.1 / 0.5).margin(1e-15));  // eta / (2 eps - eta)
  REQUIRE(sc.dim_b() == 2);

  // identity channel: zeta_RB is the resource itself
  REQUIRE(max_abs(sc.zeta_rb().matrix() - max_entangled(2).matrix()) < 1e-12);
  REQUIRE(max_abs(sc.rho_r().matrix() - 0.5 * Matrix::Identity(2, 2)) < 1e-12);
  REQUIRE(max_abs(sc.product_state().matrix() - 0.25 * Matrix::Identity(4, 4)) < 1e-12);

  SECTION("explicit c overrides the default") {
    CodingScenario sc2(QuantumChannel::identity(2), max_entangled(2), 2, 2, 2, 0.3, 0.1, 1.7);
    REQUIRE(sc2.c == 1.7);
  }
  SECTION("validation") {
    REQUIRE_THROWS_AS(CodingScenario(QuantumChannel::identity(2), max_entangled(2), 2, 3, 2,
                                     0.3, 0.1),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(CodingScenario(QuantumChannel::identity(3), max_entangled(2), 2, 2, 2,
                                     0.3, 0.1),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(bell_scenario(2, 0.3, 0.3), std::invalid_argument);
    REQUIRE_THROWS_AS(bell_scenario(2, 0.3, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(bell_scenario(0, 0.3, 0.1), std::invalid_argument);
    // 8^4 * 8 = 32768 blows the dilation cap
    REQUIRE_THROWS_AS(CodingScenario(QuantumChannel::identity(8), random_density(64, 4, 3100),
                                     8, 8, 4, 0.3, 0.1),
                      std::invalid_argument);
  }
}

TEST_CASE("bob marginal") {
  SECTION("single message: the pair state itself") {
    CodingScenario sc = bell_scenario(1, 0.3, 0.1);
    REQUIRE(max_abs(bob_marginal(sc, 1).matrix() - sc.zeta_rb().matrix()) < 1e-12);
  }
  SECTION("product resource: position independent") {
    DensityOperator res(kron(random_density(2, 2, 3201).matrix(),
                             random_density(2, 1, 3202).matrix()));
    CodingScenario sc(QuantumChannel::identity(2), res, 2, 2, 2, 0.3, 0.1);
    REQUIRE(max_abs(bob_marginal(sc, 1).matrix() - bob_marginal(sc, 2).matrix()) < 1e-12);
  }
  SECTION("bell resource, M = 2: direct index oracle") {
    CodingScenario sc = bell_scenario(2, 0.3, 0.1);
    const Matrix phi = bell_projector();
    for (int m : {1, 2}) {
      const Matrix got = bob_marginal(sc, m).matrix();
      REQUIRE(got.rows() == 8);
      for (int r1 = 0; r1 < 2; ++r1)
        for (int r2 = 0; r2 < 2; ++r2)
          for (int b = 0; b < 2; ++b)
            for (int s1 = 0; s1 < 2; ++s1)
              for (int s2 = 0; s2 < 2; ++s2)
                for (int t = 0; t < 2; ++t) {
                  const int row = r1 * 4 + r2 * 2 + b, col = s1 * 4 + s2 * 2 + t;
                  const Complex want =
                      (m == 1) ? phi(r1 * 2 + b, s1 * 2 + t) * (r2 == s2 ? 0.5 : 0.0)
                               : phi(r2 * 2 + b, s2 * 2 + t) * (r1 == s1 ? 0.5 : 0.0);
                  REQUIRE(std::abs(got(row, col) - want) < 1e-12);
                }
    }
  }
  SECTION("always a valid state") {
    CodingScenario sc(random_channel(2, 2, 2, 3301), random_density(4, 2, 3302), 2, 2, 3, 0.4,
                      0.15);
    for (int m = 1; m <= 3; ++m) {
      DensityOperator w = bob_marginal(sc, m);
      REQUIRE(w.matrix().trace().real() == Catch::Approx(1.0).margin(1e-10));
    }
    REQUIRE_THROWS_AS(bob_marginal(sc, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(bob_marginal(sc, 4), std::invalid_argument);
  }
}

TEST_CASE("sequential decoding") {
  SECTION("single message reduces to one test") {
    CodingScenario sc = bell_scenario(1, 0.3, 0.1);
    MeasurementOperator lam(Matrix(0.9 * bell_projector() + 0.1 * Matrix::Identity(4, 4)));
    DecodeRow row = sequential_decode(sc, lam, 1);
    const double p_yes = (lam.matrix() * sc.zeta_rb().matrix()).trace().real();
    REQUIRE(row.outcome_probs.size() == 1);
    REQUIRE(row.outcome_probs[0] == Catch::Approx(p_yes).margin(1e-12));
    REQUIRE(row.p_e == Catch::Approx(1.0 - p_yes).margin(1e-12));
    REQUIRE(row.no_detect_prob == Catch::Approx(1.0 - p_yes).margin(1e-10));
  }
  SECTION("identity test fires at the first slot") {
    CodingScenario sc = bell_scenario(3, 0.3, 0.1);
    MeasurementOperator lam(Matrix(Matrix::Identity(4, 4)));
    for (int m = 1; m <= 3; ++m) {
      DecodeRow row = sequential_decode(sc, lam, m);
      REQUIRE(row.outcome_probs[0] == Catch::Approx(1.0).margin(1e-10));
      REQUIRE(row.p_e == Catch::Approx(m == 1 ? 0.0 : 1.0).margin(1e-10));
    }
  }
  SECTION("projective test on the bell scenario") {
    CodingScenario sc = bell_scenario(2, 0.3, 0.1);
    MeasurementOperator lam((bell_projector()));
    DecodeRow r1 = sequential_decode(sc, lam, 1);
    REQUIRE(r1.p_e == Catch::Approx(0.0).margin(1e-10));
    DecodeRow r2 = sequential_decode(sc, lam, 2);
    // wrong slot fires with Tr{Phi (I/2 x I/2)} = 1/4
    REQUIRE(r2.outcome_probs[0] == Catch::Approx(0.25).margin(1e-10));
    REQUIRE(r2.success <= 1.0);
  }
  SECTION("outcomes plus no-detection add to one") {
    CodingScenario sc(random_channel(2, 2, 2, 3401), random_density(4, 3, 3402), 2, 2, 3, 0.8,
                      0.2);
    DhBracket br = dh_epsilon(sc.zeta_rb(), sc.product_state(), sc.eps - sc.eta);
    MeasurementOperator lam(br.witness);
    for (int m = 1; m <= 3; ++m) {
      DecodeRow row = sequential_decode(sc, lam, m);
      double total = row.no_detect_prob;
      for (double p : row.outcome_probs) {
        REQUIRE(p >= -1e-12);
        total += p;
      }
      REQUIRE(total == Catch::Approx(1.0).margin(1e-9));
    }
  }
  SECTION("premise violations are rejected") {
    CodingScenario sc = bell_scenario(2, 0.3, 0.1);
    REQUIRE_THROWS_AS(sequential_decode(sc, MeasurementOperator(Matrix(Matrix::Zero(4, 4))), 1),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(sequential_decode(sc, MeasurementOperator(Matrix(Matrix::Zero(8, 8))), 1),
                      std::invalid_argument);  // wrong dims
  }
}

TEST_CASE("probe elision agrees with explicit probes") {
  CodingScenario sc = bell_scenario(2, 0.3, 0.1);
  MeasurementOperator lam(Matrix(0.9 * bell_projector() + 0.1 * Matrix::Identity(4, 4)));
  for (int m : {1, 2}) {
    DecodeRow row = sequential_decode(sc, lam, m);
    double no_detect = 0.0;
    std::vector<double> want = explicit_probe_outcomes(sc, lam, m, &no_detect);
    for (size_t i = 0; i < want.size(); ++i) {
      INFO("m " << m << " slot " << i);
      REQUIRE(row.outcome_probs[i] == Catch::Approx(want[i]).margin(1e-10));
    }
    REQUIRE(row.no_detect_prob == Catch::Approx(no_detect).margin(1e-10));
  }

  // a genuinely random effect, forced feasible by mixing with the identity
  CodingScenario sc2(random_channel(2, 2, 2, 3501), random_density(4, 2, 3502), 2, 2, 2, 0.6,
                     0.2);
  Matrix raw = random_measurement(4, 3503).matrix();
  MeasurementOperator lam2(Matrix(0.25 * raw + 0.75 * Matrix::Identity(4, 4)));
  const double alpha = 1.0 - (lam2.matrix() * sc2.zeta_rb().matrix()).trace().real();
  REQUIRE(alpha <= sc2.eps - sc2.eta);  // mixing weight chosen to keep this feasible
  for (int m : {1, 2}) {
    DecodeRow row = sequential_decode(sc2, lam2, m);
    double no_detect = 0.0;
    std::vector<double> want = explicit_probe_outcomes(sc2, lam2, m, &no_detect);
    for (size_t i = 0; i < want.size(); ++i) {
      REQUIRE(row.outcome_probs[i] == Catch::Approx(want[i]).margin(1e-10));
    }
    REQUIRE(row.no_detect_prob == Catch::Approx(no_detect).margin(1e-10));
  }
}

TEST_CASE("decoding experiment against the error bound") {
  SECTION("bell scenario with the derived test") {
    CodingScenario sc = bell_scenario(3, 0.3, 0.1);
    DecodingResult res = run_theorem3_experiment(sc);
    REQUIRE(res.bracket.has_value());
    REQUIRE(res.alpha <= sc.eps - sc.eta + 1e-9);
    REQUIRE(res.beta == Catch::Approx(res.bracket->type2).margin(1e-12));
    REQUIRE(res.c == Catch::Approx(0.2).margin(1e-12));
    REQUIRE(res.rows.size() == 3);
    REQUIRE(res.all_within_bound);
    const double want_bound =
        (1.0 + res.c) * 0.2 + (2.0 + res.c + 1.0 / res.c) * 3.0 * res.beta;
    REQUIRE(res.bound == Catch::Approx(want_bound).margin(1e-12));
  }
  SECTION("message count from the rate formula keeps p_e below eps") {
    // maximally entangled resource on 4 x 4, eps = 0.9, eta = 0.6
    const double eps = 0.9, eta = 0.6;
    DhBracket br = dh_epsilon(max_entangled(4), DensityOperator::maximally_mixed(16),
                              eps - eta);
    REQUIRE(br.lower == Catch::Approx(4.0 - std::log2(0.7)).margin(1e-6));
    const long long m_count = message_count_for(br.lower, eps, eta);
    REQUIRE(m_count == 2);
    CodingScenario sc(QuantumChannel::identity(4), max_entangled(4), 4, 4,
                      static_cast<int>(m_count), eps, eta);
    DecodingResult res = run_theorem3_experiment(sc, MeasurementOperator(br.witness));
    REQUIRE(res.bound <= eps + 1e-9);
    REQUIRE(res.max_p_e <= res.bound + 1e-9);
    REQUIRE(res.max_p_e <= eps + 1e-9);
  }
  SECTION("random scenarios stay within the bound") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      CodingScenario sc(random_channel(2, 2, 2, subseed(0x3601ULL, s)),
                        random_density(4, 1 + static_cast<int>(s % 3), subseed(0x3602ULL, s)),
                        2, 2, 2, 0.5, 0.15);
      DecodingResult res = run_theorem3_experiment(sc);
      INFO("seed " << s << " max_p_e " << res.max_p_e << " bound " << res.bound);
      REQUIRE(res.alpha <= sc.eps - sc.eta + 1e-9);
      REQUIRE(res.all_within_bound);
    }
  }
}

TEST_CASE("message count formula") {
  REQUIRE(message_count_for(10.0, 0.4, 0.1) == 6);  // floor(2^(10 - log2 160))
  REQUIRE(message_count_for(0.0, 0.4, 0.1) == 1);
  REQUIRE(message_count_for(200.0, 0.4, 0.1) == (1LL << 62));
  REQUIRE_THROWS_AS(message_count_for(10.0, 0.4, 0.5), std::invalid_argument);
}

TEST_CASE("classical-quantum states") {
  std::vector<double> probs{0.5, 0.5};
  Matrix zero = Matrix::Zero(2, 2), one = Matrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  one(1, 1) = 1.0;
  ClassicalQuantumState cq(probs, {DensityOperator(zero), DensityOperator(one)});

  SECTION("joint matrix layout and round trip") {
    Matrix j = cq.joint_matrix();
    REQUIRE(j.rows() == 4);
    REQUIRE(j(0, 0).real() == Catch::Approx(0.5));
    REQUIRE(j(3, 3).real() == Catch::Approx(0.5));
    ClassicalQuantumState back = ClassicalQuantumState::from_matrix(j, 2, 2);
    REQUIRE(back.probs[0] == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(max_abs(back.states[1].matrix() - one) < 1e-12);

    Matrix off = j;
    off(0, 2) = 0.1;
    off(2, 0) = 0.1;
    REQUIRE_THROWS_AS(ClassicalQuantumState::from_matrix(off, 2, 2), std::invalid_argument);
  }
  SECTION("validation") {
    REQUIRE_THROWS_AS(ClassicalQuantumState({0.7, 0.7}, {DensityOperator(zero),
                                                         DensityOperator(one)}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(ClassicalQuantumState({1.0}, {}), std::invalid_argument);
  }
}

TEST_CASE("cq rate points") {
  Matrix zero = Matrix::Zero(2, 2), one = Matrix::Zero(2, 2), plus(2, 2);
  zero(0, 0) = 1.0;
  one(1, 1) = 1.0;
  plus << Complex(0.5, 0), Complex(0.5, 0), Complex(0.5, 0), Complex(0.5, 0);
  ClassicalQuantumState flip({0.5, 0.5}, {DensityOperator(zero), DensityOperator(one)});

  SECTION("orthogonal outputs, exact path") {
    CqRatePoint pt = cq_rate_point(flip, QuantumChannel::identity(2), 0.3, 0.1);
    REQUIRE(pt.exact_lp);
    const double want = 1.0 - std::log2(0.8);  // one bit plus the eps-effective boost
    REQUIRE(pt.ih_lower == Catch::Approx(want).margin(1e-10));
    REQUIRE(pt.ih_upper == Catch::Approx(want).margin(1e-10));
    REQUIRE(pt.rate.total_bits ==
            Catch::Approx(want - std::log2(4.0 * 0.3 / 0.01)).margin(1e-10));

    // cross-route: the generic solver on the explicit block-diagonal pair
    DhBracket br = dh_epsilon(DensityOperator(flip.joint_matrix()),
                              DensityOperator(Matrix(0.25 * Matrix::Identity(4, 4))), 0.2);
    REQUIRE(br.lower == Catch::Approx(want).margin(1e-6));
  }
  SECTION("useless channel carries no information") {
    CqRatePoint pt = cq_rate_point(flip, QuantumChannel::completely_depolarizing(2), 0.3, 0.1);
    REQUIRE(pt.exact_lp);
    REQUIRE(pt.ih_lower == Catch::Approx(-std::log2(0.8)).margin(1e-10));
  }
  SECTION("non-commuting outputs fall back to the bracket") {
    ClassicalQuantumState tilted({0.5, 0.5}, {DensityOperator(zero), DensityOperator(plus)});
    CqRatePoint pt = cq_rate_point(tilted, QuantumChannel::identity(2), 0.3, 0.1);
    REQUIRE_FALSE(pt.exact_lp);
    REQUIRE(pt.ih_lower <= pt.ih_upper + 1e-12);
    REQUIRE(pt.ih_lower > 0.0);
    REQUIRE(pt.rate.ih_bits == Catch::Approx(pt.ih_lower).margin(1e-15));
  }
  SECTION("validation") {
    REQUIRE_THROWS_AS(cq_rate_point(flip, QuantumChannel::identity(3), 0.3, 0.1),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(cq_rate_point(flip, QuantumChannel::identity(2), 0.3, 0.3),
                      std::invalid_argument);
  }
}
