#include <catch2/catch_amalgamated.hpp>

#include <qub/naimark.hpp>
#include <qub/random.hpp>

using namespace qub;

namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

DensityOperator plus_state() {
  Vector v(2);
  v << Complex(1, 0), Complex(1, 0);
  return PureState::unnormalized(v).density();
}

double dilated_accept_prob(const NaimarkDilation& nd, const DensityOperator& rho) {
  Matrix zero = Matrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  const Matrix omega = kron(rho.matrix(), zero);
  return (nd.pi.matrix() * omega).trace().real();
}

}  // namespace

TEST_CASE("dilation of a diagonal effect, hand construction") {
  MeasurementOperator lambda(diag2(0.25, 1.0));
  NaimarkDilation nd = dilate(lambda);

  // U = sqrt(I - L) x I + sqrt(L) x (|1><0| - |0><1|), all blocks diagonal here
  Matrix j(2, 2);
  j << Complex(0, 0), Complex(-1, 0), Complex(1, 0), Complex(0, 0);
  Matrix want = kron(diag2(std::sqrt(0.75), 0.0), Matrix::Identity(2, 2)) +
                kron(diag2(0.5, 1.0), j);
  REQUIRE(max_abs(nd.unitary - want) < 1e-12);

  DensityOperator rho = plus_state();
  const double direct = (lambda.matrix() * rho.matrix()).trace().real();
  REQUIRE(direct == Catch::Approx(0.625).margin(1e-14));
  REQUIRE(dilated_accept_prob(nd, rho) == Catch::Approx(0.625).margin(1e-12));
}

TEST_CASE("dilation invariants on random effects") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const int d = 2 + static_cast<int>(s % 4);
    MeasurementOperator lambda = random_measurement(d, subseed(0x77aaULL, s));
    NaimarkDilation nd = dilate(lambda);

    REQUIRE(max_abs(nd.unitary.adjoint() * nd.unitary - Matrix::Identity(2 * d, 2 * d)) < 1e-10);
    REQUIRE(max_abs(nd.pi.matrix() * nd.pi.matrix() - nd.pi.matrix()) < 1e-10);
    REQUIRE(max_abs(nd.pi.matrix() + nd.pi_hat.matrix() - Matrix::Identity(2 * d, 2 * d)) <
            1e-12);

    DensityOperator rho = random_density(d, 1 + static_cast<int>(s % d), subseed(0x77abULL, s));
    const double direct = (lambda.matrix() * rho.matrix()).trace().real();
    REQUIRE(dilated_accept_prob(nd, rho) == Catch::Approx(direct).margin(1e-10));
  }
}

TEST_CASE("dilation edge cases") {
  SECTION("zero and identity effects") {
    NaimarkDilation z = dilate(MeasurementOperator(Matrix(Matrix::Zero(2, 2))));
    NaimarkDilation i = dilate(MeasurementOperator(Matrix(Matrix::Identity(2, 2))));
    DensityOperator rho = random_density(2, 2, 5);
    REQUIRE(dilated_accept_prob(z, rho) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(dilated_accept_prob(i, rho) == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("projector effects reproduce projective statistics") {
    Projector p = random_projector(3, 2, 6);
    DensityOperator rho = random_density(3, 3, 7);
    NaimarkDilation nd = dilate(MeasurementOperator(p.matrix()));
    REQUIRE(dilated_accept_prob(nd, rho) ==
            Catch::Approx((p.matrix() * rho.matrix()).trace().real()).margin(1e-10));
  }
  SECTION("slight spectrum drift is clipped, large drift rejected") {
    NaimarkDilation nd = dilate(HermitianOperator(diag2(1.0 + 5e-7, 0.5)));
    SpectralDecomposition sd = spectral_decompose(nd.lambda.base());
    REQUIRE(sd.eigenvalues.maxCoeff() <= 1.0);
    REQUIRE_THROWS_AS(dilate(HermitianOperator(diag2(1.1, 0.5))), std::invalid_argument);
    REQUIRE_THROWS_AS(dilate(HermitianOperator(diag2(-0.1, 0.5))), std::invalid_argument);
  }
}

TEST_CASE("probe elision matches the explicit probe") {
  Matrix zero = Matrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  for (std::uint64_t s = 0; s < 25; ++s) {
    const int d = 2 + static_cast<int>(s % 3);
    MeasurementOperator lambda = random_measurement(d, subseed(0x88aaULL, s));
    DensityOperator rho = random_density(d, d, subseed(0x88abULL, s));
    NaimarkDilation nd = dilate(lambda);
    ProbeElidedMeasurement pem = ProbeElidedMeasurement::from(lambda);

    const Matrix omega = kron(rho.matrix(), zero);
    const Matrix yes = nd.pi.matrix() * omega * nd.pi.matrix();
    const Matrix no = nd.pi_hat.matrix() * omega * nd.pi_hat.matrix();
    const Matrix yes_sys = partial_trace(yes, {d, 2}, {0});
    const Matrix no_sys = partial_trace(no, {d, 2}, {0});

    REQUIRE(pem.accept_prob(rho.matrix()) ==
            Catch::Approx(yes.trace().real()).margin(1e-10));
    REQUIRE(max_abs(pem.accept_update(rho.matrix()) - yes_sys) < 1e-9);
    REQUIRE(max_abs(pem.reject_update(rho.matrix()) - no_sys) < 1e-9);
    // the two branches together preserve trace
    const double total = pem.accept_update(rho.matrix()).trace().real() +
                         pem.reject_update(rho.matrix()).trace().real();
    REQUIRE(total == Catch::Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("povm union bound") {
  SECTION("projector effects agree with the projective evaluation") {
    const int d = 3;
    std::vector<Projector> ps{random_projector(d, 2, 901), random_projector(d, 1, 902),
                              random_projector(d, 2, 903)};
    std::vector<MeasurementOperator> ms;
    for (const Projector& p : ps) ms.emplace_back(p.matrix());
    DensityOperator rho = random_density(d, 2, 904);

    BoundReport via_povm = povm_union_bound(rho, ms, 1.0);
    BoundReport via_proj = verify_union_bound(UnionBoundInstance(rho, ps), 1.0);
    REQUIRE(via_povm.lhs == Catch::Approx(via_proj.lhs).margin(1e-9));
    REQUIRE(via_povm.rhs_ours == Catch::Approx(via_proj.rhs_ours).margin(1e-12));
    REQUIRE_FALSE(via_povm.violated);
  }
  SECTION("identity effects always succeed") {
    std::vector<MeasurementOperator> ms(3, MeasurementOperator(Matrix(Matrix::Identity(2, 2))));
    BoundReport rep = povm_union_bound(random_density(2, 2, 905), ms, 0.5);
    REQUIRE(rep.lhs == Catch::Approx(0.0).margin(1e-10));
  }
  SECTION("random effects satisfy the bound") {
    for (std::uint64_t s = 0; s < 15; ++s) {
      const int d = 2;
      const int L = 3;
      std::vector<MeasurementOperator> ms;
      for (int i = 0; i < L; ++i) {
        ms.push_back(random_measurement(d, subseed(0x99aaULL, s, static_cast<std::uint64_t>(i))));
      }
      DensityOperator rho = random_density(d, 2, subseed(0x99abULL, s));
      for (double c : {0.1, 1.0, 10.0}) {
        BoundReport rep = povm_union_bound(rho, ms, c);
        INFO("seed " << s << " c " << c);
        REQUIRE_FALSE(rep.violated);
        REQUIRE(rep.lhs >= -1e-10);
        REQUIRE(rep.lhs <= 1.0 + 1e-10);
      }
    }
  }
  SECTION("chain evaluation matches direct dilated projector products") {
    const int d = 2, L = 2;
    std::vector<MeasurementOperator> ms{random_measurement(d, 906), random_measurement(d, 907)};
    DensityOperator rho = random_density(d, 2, 908);
    BoundReport rep = povm_union_bound(rho, ms, 1.0);

    // direct evaluation on the d * 2^L space
    std::vector<int> dims{d, 2, 2};
    Matrix omega = rho.matrix();
    Matrix zero = Matrix::Zero(2, 2);
    zero(0, 0) = 1.0;
    omega = kron(kron(omega, zero), zero);
    Matrix chain = Matrix::Identity(d * 4, d * 4);
    for (int i = 0; i < L; ++i) {
      NaimarkDilation nd = dilate(ms[static_cast<size_t>(i)]);
      chain = embed_operator(nd.pi.matrix(), dims, {0, i + 1}) * chain;
    }
    const double success = (chain * omega * chain.adjoint()).trace().real();
    REQUIRE(rep.lhs == Catch::Approx(1.0 - success).margin(1e-10));
  }
  SECTION("dimension cap") {
    std::vector<MeasurementOperator> ms(10, MeasurementOperator(Matrix(Matrix::Identity(8, 8))));
    REQUIRE_THROWS_AS(povm_union_bound(DensityOperator::maximally_mixed(8), ms, 1.0),
                      std::invalid_argument);
  }
}
