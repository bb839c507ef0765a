#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <qub/io.hpp>
#include <qub/random.hpp>

using namespace qub;

TEST_CASE("matrix json round trip") {
  RngStream rng(808);
  Matrix g = random_gaussian_matrix(3, 3, rng);
  Matrix h = g + g.adjoint();
  Json j = matrix_to_json(h);
  REQUIRE(j.at("dim").get<int>() == 3);
  Matrix back = matrix_from_json(j);
  REQUIRE(max_abs(back - h) == 0.0);  // doubles survive json round trips exactly

  SECTION("malformed inputs") {
    REQUIRE_THROWS_AS(matrix_from_json(Json{{"dim", 2}}), std::invalid_argument);
    Json bad = matrix_to_json(h);
    bad["re"] = Json::array({Json::array({1.0})});
    REQUIRE_THROWS_AS(matrix_from_json(bad), std::invalid_argument);
  }
}

TEST_CASE("density and channel json round trips") {
  DensityOperator rho = random_density(4, 2, 809);
  DensityOperator rho2 = density_from_json(density_to_json(rho));
  // the constructor renormalizes the trace, so expect rounding-level drift
  REQUIRE(max_abs(rho.matrix() - rho2.matrix()) < 1e-14);

  QuantumChannel ch = random_channel(2, 3, 2, 810);
  QuantumChannel ch2 = channel_from_json(channel_to_json(ch));
  REQUIRE(ch2.dim_in() == 2);
  REQUIRE(ch2.dim_out() == 3);
  REQUIRE(ch2.kraus().size() == ch.kraus().size());
  for (size_t k = 0; k < ch.kraus().size(); ++k) {
    REQUIRE(max_abs(ch.kraus()[k] - ch2.kraus()[k]) == 0.0);
  }

  REQUIRE_THROWS_AS(channel_from_json(Json{{"dim_in", 2}, {"dim_out", 2}}),
                    std::invalid_argument);
}

TEST_CASE("scenario json round trip") {
  Vector v = Vector::Zero(4);
  v[0] = v[3] = 1.0;
  CodingScenario sc(QuantumChannel::identity(2), PureState::unnormalized(v).density(), 2, 2, 2,
                    0.3, 0.1);
  MeasurementOperator lam(Matrix(Matrix::Identity(4, 4)));
  Json j = scenario_to_json(sc, lam);
  ScenarioFile sf = scenario_from_json(j);
  REQUIRE(sf.scenario.num_messages == 2);
  REQUIRE(sf.scenario.eps == 0.3);
  REQUIRE(sf.scenario.c == Catch::Approx(0.2).margin(1e-15));
  REQUIRE(sf.lambda.has_value());
  REQUIRE(max_abs(sf.lambda->matrix() - lam.matrix()) == 0.0);

  j.erase("lambda");
  REQUIRE_FALSE(scenario_from_json(j).lambda.has_value());
  j.erase("eps");
  REQUIRE_THROWS_AS(scenario_from_json(j), std::invalid_argument);
}

TEST_CASE("ensemble json") {
  Json j{{"probs", {0.5, 0.5}},
         {"states", Json::array({matrix_to_json(Matrix(Matrix::Identity(2, 2) * 0.5)),
                                 matrix_to_json(Matrix(Matrix::Identity(2, 2) * 0.5))})}};
  ClassicalQuantumState cq = cq_from_json(j);
  REQUIRE(cq.num_symbols() == 2);
  REQUIRE(cq.dim_a() == 2);
  REQUIRE_THROWS_AS(cq_from_json(Json{{"probs", {1.0}}}), std::invalid_argument);
}

TEST_CASE("fixed-precision formatting") {
  REQUIRE(g17(0.25) == "0.25");
  REQUIRE(g17(1.0 / 3.0) == "0.33333333333333331");
  // round trip through the printed form
  for (double x : {1e-300, 3.141592653589793, 0.1, 123456789.123456789}) {
    REQUIRE(std::stod(g17(x)) == x);
  }
}

TEST_CASE("fnv1a64 digest") {
  // frozen reference values for the 64-bit FNV-1a parameters
  REQUIRE(fnv1a64("") == 0xcbf29ce484222325ULL);
  REQUIRE(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  REQUIRE(hex64(0xcbf29ce484222325ULL) == "cbf29ce484222325");

  const std::string path = "io_test_digest.tmp";
  write_text_file(path, "a");
  REQUIRE(fnv1a64_file(path) == fnv1a64("a"));
  std::remove(path.c_str());
}

TEST_CASE("json file io and manifest shape") {
  const std::string path = "io_test_manifest.tmp.json";
  RunManifest mf;
  mf.command = "dh --eps 0.5";
  mf.version = "1.0.0";
  mf.master_seed = 42;
  mf.config = Json{{"eps", 0.5}};
  mf.started_at = "2000-01-01T00:00:00Z";
  mf.finished_at = "2000-01-01T00:00:01Z";
  mf.outputs.emplace_back("out.json", hex64(123));
  write_json_file(path, mf.to_json());
  Json j = load_json_file(path);
  REQUIRE(j.at("command") == "dh --eps 0.5");
  REQUIRE(j.at("master_seed").get<std::uint64_t>() == 42);
  REQUIRE(j.at("outputs").size() == 1);
  REQUIRE(j.at("outputs").at(0).at("path") == "out.json");
  std::remove(path.c_str());

  REQUIRE_THROWS_AS(load_json_file("definitely_missing_file.json"), std::runtime_error);
}

TEST_CASE("csv writer emits plain rows") {
  const std::string path = "io_test_rows.tmp.csv";
  {
    CsvWriter csv(path);
    csv.row({"a", "b"});
    csv.row({g17(0.5), g17(0.25)});
  }
  std::ifstream in(path);
  std::string line1, line2;
  std::getline(in, line1);
  std::getline(in, line2);
  REQUIRE(line1 == "a,b");
  REQUIRE(line2 == "0.5,0.25");
  in.close();
  std::remove(path.c_str());
}
