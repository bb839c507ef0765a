// Serialization and reporting: the JSON operator/channel/scenario formats,
// CSV emission at 17 significant digits, FNV-1a file digests, and the run
// manifest written next to every CLI output.
#pragma once

#include "coding_sim.hpp"
#include "operators.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qub {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Matrices and operator types
// ---------------------------------------------------------------------------
// An operator is {"dim": d, "re": [[...]], "im": [[...]]} with d x d arrays.

inline Json matrix_to_json(const Matrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json rrow = Json::array(), irow = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rrow.push_back(m(i, j).real());
      irow.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  return Json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re") || !j.contains("im")) {
    throw std::invalid_argument("operator JSON needs fields dim, re, im");
  }
  const long long d = j.at("dim").get<long long>();
  if (d < 1) throw std::invalid_argument("operator JSON: dim must be positive");
  const Json& re = j.at("re");
  const Json& im = j.at("im");
  if (!re.is_array() || !im.is_array() || static_cast<long long>(re.size()) != d ||
      static_cast<long long>(im.size()) != d) {
    throw std::invalid_argument("operator JSON: re/im must be dim x dim arrays");
  }
  Matrix m(d, d);
  for (long long i = 0; i < d; ++i) {
    const Json& rrow = re.at(static_cast<size_t>(i));
    const Json& irow = im.at(static_cast<size_t>(i));
    if (static_cast<long long>(rrow.size()) != d || static_cast<long long>(irow.size()) != d) {
      throw std::invalid_argument("operator JSON: ragged rows");
    }
    for (long long k = 0; k < d; ++k) {
      m(i, k) = Complex(rrow.at(static_cast<size_t>(k)).get<double>(),
                        irow.at(static_cast<size_t>(k)).get<double>());
    }
  }
  return m;
}

inline Json density_to_json(const DensityOperator& rho) { return matrix_to_json(rho.matrix()); }

inline DensityOperator density_from_json(const Json& j) {
  return DensityOperator(matrix_from_json(j));
}

// A channel is {"dim_in": a, "dim_out": b, "kraus": [{"re": .., "im": ..}, ..]}
// with each Kraus block shaped dim_out x dim_in.

inline Json channel_to_json(const QuantumChannel& ch) {
  Json kraus = Json::array();
  for (const Matrix& k : ch.kraus()) {
    Json re = Json::array(), im = Json::array();
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      Json rrow = Json::array(), irow = Json::array();
      for (Eigen::Index j = 0; j < k.cols(); ++j) {
        rrow.push_back(k(i, j).real());
        irow.push_back(k(i, j).imag());
      }
      re.push_back(std::move(rrow));
      im.push_back(std::move(irow));
    }
    kraus.push_back(Json{{"re", std::move(re)}, {"im", std::move(im)}});
  }
  return Json{{"dim_in", ch.dim_in()}, {"dim_out", ch.dim_out()}, {"kraus", std::move(kraus)}};
}

inline QuantumChannel channel_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dim_in") || !j.contains("dim_out") || !j.contains("kraus")) {
    throw std::invalid_argument("channel JSON needs fields dim_in, dim_out, kraus");
  }
  const int din = j.at("dim_in").get<int>();
  const int dout = j.at("dim_out").get<int>();
  const Json& kraus = j.at("kraus");
  if (!kraus.is_array() || kraus.empty()) {
    throw std::invalid_argument("channel JSON: kraus must be a non-empty array");
  }
  std::vector<Matrix> ks;
  for (const Json& kj : kraus) {
    if (!kj.contains("re") || !kj.contains("im")) {
      throw std::invalid_argument("channel JSON: each Kraus entry needs re and im");
    }
    const Json& re = kj.at("re");
    const Json& im = kj.at("im");
    if (static_cast<int>(re.size()) != dout || static_cast<int>(im.size()) != dout) {
      throw std::invalid_argument("channel JSON: Kraus rows must equal dim_out");
    }
    Matrix k(dout, din);
    for (int i = 0; i < dout; ++i) {
      const Json& rrow = re.at(static_cast<size_t>(i));
      const Json& irow = im.at(static_cast<size_t>(i));
      if (static_cast<int>(rrow.size()) != din || static_cast<int>(irow.size()) != din) {
        throw std::invalid_argument("channel JSON: Kraus cols must equal dim_in");
      }
      for (int c = 0; c < din; ++c) {
        k(i, c) = Complex(rrow.at(static_cast<size_t>(c)).get<double>(),
                          irow.at(static_cast<size_t>(c)).get<double>());
      }
    }
    ks.push_back(std::move(k));
  }
  return QuantumChannel(din, dout, std::move(ks));
}

// A decoding scenario bundles channel, resource and protocol parameters:
// {"channel": .., "resource": .., "dim_r": .., "dim_a": .., "num_messages": ..,
//  "eps": .., "eta": .., optional "c", optional "lambda"}.

struct ScenarioFile {
  CodingScenario scenario;
  std::optional<MeasurementOperator> lambda;
};

inline ScenarioFile scenario_from_json(const Json& j) {
  for (const char* field : {"channel", "resource", "dim_r", "dim_a", "num_messages", "eps", "eta"}) {
    if (!j.contains(field)) {
      throw std::invalid_argument(std::string("scenario JSON missing field ") + field);
    }
  }
  std::optional<double> c;
  if (j.contains("c")) c = j.at("c").get<double>();
  CodingScenario sc(channel_from_json(j.at("channel")), density_from_json(j.at("resource")),
                    j.at("dim_r").get<int>(), j.at("dim_a").get<int>(),
                    j.at("num_messages").get<int>(), j.at("eps").get<double>(),
                    j.at("eta").get<double>(), c);
  std::optional<MeasurementOperator> lambda;
  if (j.contains("lambda")) lambda = MeasurementOperator(matrix_from_json(j.at("lambda")));
  return ScenarioFile{std::move(sc), std::move(lambda)};
}

inline Json scenario_to_json(const CodingScenario& sc,
                             const std::optional<MeasurementOperator>& lambda = std::nullopt) {
  Json j{{"channel", channel_to_json(sc.channel)},
         {"resource", density_to_json(sc.resource)},
         {"dim_r", sc.dim_r},
         {"dim_a", sc.dim_a},
         {"num_messages", sc.num_messages},
         {"eps", sc.eps},
         {"eta", sc.eta},
         {"c", sc.c}};
  if (lambda.has_value()) j["lambda"] = matrix_to_json(lambda->matrix());
  return j;
}

// An ensemble is {"probs": [..], "states": [operator, ..]}.

inline ClassicalQuantumState cq_from_json(const Json& j) {
  if (!j.contains("probs") || !j.contains("states")) {
    throw std::invalid_argument("ensemble JSON needs fields probs and states");
  }
  std::vector<double> probs = j.at("probs").get<std::vector<double>>();
  std::vector<DensityOperator> states;
  for (const Json& sj : j.at("states")) states.push_back(density_from_json(sj));
  return ClassicalQuantumState(std::move(probs), std::move(states));
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

inline void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// CSV at fixed precision
// ---------------------------------------------------------------------------

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path);
  }

  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Digests and run manifests
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a64(ss.str());
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

/// Every CLI invocation writes <first output>.manifest.json describing the
/// run: command line, version, master seed, the effective configuration, wall
/// times, and an FNV-1a digest per output file. Timestamps live only in the
/// manifest so the data files stay byte-identical across reruns.
struct RunManifest {
  std::string command;
  std::string version;
  std::uint64_t master_seed = 0;
  Json config;
  std::string started_at;
  std::string finished_at;
  std::vector<std::pair<std::string, std::string>> outputs;  // path, digest

  Json to_json() const {
    Json outs = Json::array();
    for (const auto& [path, digest] : outputs) {
      outs.push_back(Json{{"path", path}, {"fnv1a64", digest}});
    }
    return Json{{"command", command},       {"version", version},
                {"master_seed", master_seed}, {"config", config},
                {"started_at", started_at}, {"finished_at", finished_at},
                {"outputs", std::move(outs)}};
  }
};

}  // namespace qub
