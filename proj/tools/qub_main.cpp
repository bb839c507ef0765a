// qub: command-line front end for the union-bound / hypothesis-testing
// library. Every subcommand writes its data file(s) plus a
// <output>.manifest.json recording command, seed, configuration and FNV-1a
// digests. Exit codes: 0 success, 1 usage or runtime error, 2 falsified
// invariant (a counterexample file is written and its path printed to
// stderr).
#include <qub/qub.hpp>

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

int g_exit = 0;

std::string iso_now() {
  const std::time_t tt = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

void parallel_run(long n, int threads, const std::function<void(long)>& fn) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
  }
  if (threads == 1 || n < 2) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (const std::exception& e) {
          std::scoped_lock lock(error_mu);
          failed = true;
          if (error.empty()) error = e.what();
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (failed) throw std::runtime_error(error);
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

std::string g_command;

void write_manifest(const std::string& started, std::uint64_t seed, const qub::Json& config,
                    const std::vector<std::string>& outputs) {
  qub::RunManifest mf;
  mf.command = g_command;
  mf.version = qub::kVersion;
  mf.master_seed = seed;
  mf.config = config;
  mf.started_at = started;
  mf.finished_at = iso_now();
  for (const std::string& path : outputs) {
    mf.outputs.emplace_back(path, qub::hex64(qub::fnv1a64_file(path)));
  }
  qub::write_json_file(outputs.front() + ".manifest.json", mf.to_json());
}

void report_violation(const std::string& out_path, const qub::Json& payload) {
  const std::string path = out_path + ".counterexample.json";
  qub::write_json_file(path, payload);
  std::cerr << "counterexample: " << path << "\n";
  g_exit = 2;
}

qub::Json num_or_inf(double v) {
  if (std::isfinite(v)) return qub::Json(v);
  return qub::Json(v > 0 ? "inf" : "-inf");
}

std::vector<double> c_grid(std::optional<double> fixed_c, const std::vector<double>& a) {
  if (fixed_c.has_value()) return {*fixed_c};
  std::vector<double> cs{0.01, 0.1, 1.0, 10.0};
  const qub::OptimalC oc = qub::optimal_c(a);
  if (oc.c_star.has_value()) cs.push_back(*oc.c_star);
  return cs;
}

struct NRange {
  long lo = 0, hi = 0, step = 1;
};

NRange parse_n_range(const std::string& s) {
  NRange r;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.step) || c1 != ':' || c2 != ':' || r.lo < 1 ||
      r.hi < r.lo || r.step < 1) {
    throw std::invalid_argument("bad --n-range, expected LO:HI:STEP");
  }
  return r;
}

qub::DvtTriple parse_triple(const std::string& s) {
  qub::DvtTriple t;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> t.d >> c1 >> t.v >> c2 >> t.t) || c1 != ',' || c2 != ',') {
    throw std::invalid_argument("bad --triple, expected D,V,T");
  }
  return t;
}

// ---------------------------------------------------------------------------
// verify-union-bound
// ---------------------------------------------------------------------------

struct UnionArgs {
  int dim = 4;
  int num_projectors = 4;
  long trials = 1000;
  std::uint64_t seed = 12345;
  double c = 0.0;
  bool c_set = false;
  std::string state_kind = "both";
  int threads = 0;
  std::string out = "union_bound.csv";
};

void run_union(const UnionArgs& a) {
  const std::string started = iso_now();
  std::vector<std::string> rows(static_cast<size_t>(a.trials));
  std::mutex viol_mu;
  std::optional<qub::Json> violation;
  parallel_run(a.trials, a.threads, [&](long t) {
    const bool pure = a.state_kind == "pure" || (a.state_kind == "both" && t % 2 == 1);
    qub::RngStream meta(qub::subseed(a.seed, static_cast<std::uint64_t>(t), 0));
    std::vector<qub::Projector> ps;
    for (int i = 0; i < a.num_projectors; ++i) {
      const int rank = meta.uniform_int(1, a.dim - 1);
      ps.push_back(qub::random_projector(
          a.dim, rank, qub::subseed(a.seed, static_cast<std::uint64_t>(t), 10 + i)));
    }
    std::optional<qub::PureState> psi;
    std::optional<qub::DensityOperator> rho;
    if (pure) {
      psi = qub::random_pure(a.dim, qub::subseed(a.seed, static_cast<std::uint64_t>(t), 1));
    } else {
      const int rank = meta.uniform_int(1, a.dim);
      rho = qub::random_density(a.dim, rank,
                                qub::subseed(a.seed, static_cast<std::uint64_t>(t), 1));
    }
    std::string chunk;
    const std::vector<double> errs =
        pure ? qub::verify_union_bound(*psi, ps, 1.0).individual_errors
             : qub::UnionBoundInstance(*rho, ps).individual_errors();
    for (double c : c_grid(a.c_set ? std::optional<double>(a.c) : std::nullopt, errs)) {
      const qub::BoundReport r = pure ? qub::verify_union_bound(*psi, ps, c)
                                      : qub::verify_union_bound(qub::UnionBoundInstance(*rho, ps), c);
      chunk += std::to_string(t) + ',' + (pure ? "pure" : "mixed") + ',' +
               std::to_string(a.dim) + ',' + std::to_string(a.num_projectors) + ',' +
               qub::g17(c) + ',' + qub::g17(r.lhs) + ',' + qub::g17(r.rhs_ours) + ',' +
               qub::g17(r.rhs_gao) + ',' + qub::g17(r.rhs_sen) + ',' +
               qub::g17(r.rhs_ours - r.lhs) + ',' + (r.violated ? "1" : "0") + '\n';
      if (r.violated) {
        std::scoped_lock lock(viol_mu);
        if (!violation.has_value()) {
          qub::Json j{{"trial", t},
                      {"c", c},
                      {"lhs", r.lhs},
                      {"rhs", r.rhs_ours},
                      {"individual_errors", r.individual_errors},
                      {"state", pure ? qub::matrix_to_json(psi->projector())
                                     : qub::density_to_json(*rho)}};
          qub::Json pjs = qub::Json::array();
          for (const qub::Projector& p : ps) pjs.push_back(qub::matrix_to_json(p.matrix()));
          j["projectors"] = std::move(pjs);
          violation = std::move(j);
        }
      }
    }
    rows[static_cast<size_t>(t)] = std::move(chunk);
  });
  {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + a.out);
    out << "trial,state_kind,dim,num_projectors,c,lhs,rhs,rhs_gao,rhs_sen,margin,violated\n";
    for (const std::string& r : rows) out << r;
  }
  qub::Json config{{"dim", a.dim},        {"num_projectors", a.num_projectors},
                   {"trials", a.trials},  {"seed", a.seed},
                   {"state_kind", a.state_kind}, {"threads", a.threads},
                   {"out", a.out}};
  if (a.c_set) config["c"] = a.c;
  write_manifest(started, a.seed, config, {a.out});
  if (violation.has_value()) report_violation(a.out, *violation);
}

// ---------------------------------------------------------------------------
// verify-lemmas
// ---------------------------------------------------------------------------

struct LemmaArgs {
  int dim = 4;
  int num_projectors = 4;
  long trials = 1000;
  std::uint64_t seed = 12345;
  int threads = 0;
  std::string out = "lemmas.csv";
};

void run_lemmas(const LemmaArgs& a) {
  const std::string started = iso_now();
  constexpr double kResidualTol = 1e-9;
  std::vector<std::string> rows(static_cast<size_t>(a.trials));
  std::mutex viol_mu;
  std::optional<qub::Json> violation;
  parallel_run(a.trials, a.threads, [&](long t) {
    qub::RngStream meta(qub::subseed(a.seed, static_cast<std::uint64_t>(t), 0));
    std::vector<qub::Projector> ps;
    for (int i = 0; i < a.num_projectors; ++i) {
      ps.push_back(qub::random_projector(
          a.dim, meta.uniform_int(1, a.dim - 1),
          qub::subseed(a.seed, static_cast<std::uint64_t>(t), 10 + i)));
    }
    const qub::PureState psi =
        qub::random_pure(a.dim, qub::subseed(a.seed, static_cast<std::uint64_t>(t), 1));
    const qub::LemmaReport r = qub::check_lemma_identities(psi, ps);
    const bool ok = r.pro1_residual <= kResidualTol && r.pro2_residual <= kResidualTol &&
                    r.pro3_residual <= kResidualTol && r.pro4_slack >= -kResidualTol &&
                    r.second_moment_slack >= -kResidualTol;
    rows[static_cast<size_t>(t)] =
        std::to_string(t) + ',' + std::to_string(a.dim) + ',' +
        std::to_string(a.num_projectors) + ',' + qub::g17(r.pro1_residual) + ',' +
        qub::g17(r.pro2_residual) + ',' + qub::g17(r.pro3_residual) + ',' +
        qub::g17(r.pro4_slack) + ',' + qub::g17(r.second_moment_slack) + ',' +
        (ok ? "1" : "0") + '\n';
    if (!ok) {
      std::scoped_lock lock(viol_mu);
      if (!violation.has_value()) {
        qub::Json j{{"trial", t},
                    {"pro1_residual", r.pro1_residual},
                    {"pro2_residual", r.pro2_residual},
                    {"pro3_residual", r.pro3_residual},
                    {"pro4_slack", r.pro4_slack},
                    {"second_moment_slack", r.second_moment_slack},
                    {"state", qub::matrix_to_json(psi.projector())}};
        qub::Json pjs = qub::Json::array();
        for (const qub::Projector& p : ps) pjs.push_back(qub::matrix_to_json(p.matrix()));
        j["projectors"] = std::move(pjs);
        violation = std::move(j);
      }
    }
  });
  {
    std::ofstream out(a.out, std::ios::binary);
    out << "trial,dim,num_projectors,pro1,pro2,pro3,pro4_slack,second_moment_slack,ok\n";
    for (const std::string& r : rows) out << r;
  }
  write_manifest(started, a.seed,
                 qub::Json{{"dim", a.dim},
                           {"num_projectors", a.num_projectors},
                           {"trials", a.trials},
                           {"seed", a.seed},
                           {"threads", a.threads},
                           {"out", a.out}},
                 {a.out});
  if (violation.has_value()) report_violation(a.out, *violation);
}

// ---------------------------------------------------------------------------
// povm-bound
// ---------------------------------------------------------------------------

struct PovmArgs {
  int dim = 2;
  int num_operators = 3;
  long trials = 200;
  std::uint64_t seed = 12345;
  double c = 0.0;
  bool c_set = false;
  int threads = 0;
  std::string out = "povm_bound.csv";
};

void run_povm(const PovmArgs& a) {
  const std::string started = iso_now();
  std::vector<std::string> rows(static_cast<size_t>(a.trials));
  std::mutex viol_mu;
  std::optional<qub::Json> violation;
  parallel_run(a.trials, a.threads, [&](long t) {
    qub::RngStream meta(qub::subseed(a.seed, static_cast<std::uint64_t>(t), 0));
    const int rank = meta.uniform_int(1, a.dim);
    const qub::DensityOperator rho =
        qub::random_density(a.dim, rank, qub::subseed(a.seed, static_cast<std::uint64_t>(t), 1));
    std::vector<qub::MeasurementOperator> lambdas;
    for (int i = 0; i < a.num_operators; ++i) {
      lambdas.push_back(qub::random_measurement(
          a.dim, qub::subseed(a.seed, static_cast<std::uint64_t>(t), 10 + i)));
    }
    std::vector<double> errs;
    for (const qub::MeasurementOperator& lam : lambdas) {
      errs.push_back(1.0 - (lam.matrix() * rho.matrix()).trace().real());
    }
    std::string chunk;
    for (double c : c_grid(a.c_set ? std::optional<double>(a.c) : std::nullopt, errs)) {
      const qub::BoundReport r = qub::povm_union_bound(rho, lambdas, c);
      chunk += std::to_string(t) + ',' + std::to_string(a.dim) + ',' +
               std::to_string(a.num_operators) + ',' + qub::g17(c) + ',' + qub::g17(r.lhs) +
               ',' + qub::g17(r.rhs_ours) + ',' + qub::g17(r.rhs_ours - r.lhs) + ',' +
               (r.violated ? "1" : "0") + '\n';
      if (r.violated) {
        std::scoped_lock lock(viol_mu);
        if (!violation.has_value()) {
          qub::Json j{{"trial", t}, {"c", c},   {"lhs", r.lhs},
                      {"rhs", r.rhs_ours},      {"state", qub::density_to_json(rho)}};
          qub::Json ljs = qub::Json::array();
          for (const qub::MeasurementOperator& lam : lambdas) {
            ljs.push_back(qub::matrix_to_json(lam.matrix()));
          }
          j["effects"] = std::move(ljs);
          violation = std::move(j);
        }
      }
    }
    rows[static_cast<size_t>(t)] = std::move(chunk);
  });
  {
    std::ofstream out(a.out, std::ios::binary);
    out << "trial,dim,num_operators,c,lhs,rhs,margin,violated\n";
    for (const std::string& r : rows) out << r;
  }
  qub::Json config{{"dim", a.dim},       {"num_operators", a.num_operators},
                   {"trials", a.trials}, {"seed", a.seed},
                   {"threads", a.threads}, {"out", a.out}};
  if (a.c_set) config["c"] = a.c;
  write_manifest(started, a.seed, config, {a.out});
  if (violation.has_value()) report_violation(a.out, *violation);
}

// ---------------------------------------------------------------------------
// dh / dvt / tl-check
// ---------------------------------------------------------------------------

struct DhArgs {
  std::string rho, sigma;
  double eps = 0.25;
  std::string out = "dh.json";
  std::string witness_out;
};

void run_dh(const DhArgs& a) {
  const std::string started = iso_now();
  const qub::DensityOperator rho = qub::density_from_json(qub::load_json_file(a.rho));
  const qub::DensityOperator sigma = qub::density_from_json(qub::load_json_file(a.sigma));
  const qub::DhBracket br = qub::dh_epsilon(rho, sigma, a.eps);
  qub::Json j{{"eps", a.eps},
              {"lower", num_or_inf(br.lower)},
              {"upper", num_or_inf(br.upper)},
              {"threshold", br.threshold},
              {"type1", br.type1},
              {"type2", br.type2}};
  std::vector<std::string> outputs{a.out};
  if (!a.witness_out.empty()) {
    qub::write_json_file(a.witness_out, qub::matrix_to_json(br.witness));
    j["witness_path"] = a.witness_out;
    outputs.push_back(a.witness_out);
  }
  qub::write_json_file(a.out, j);
  write_manifest(started, 0,
                 qub::Json{{"rho", a.rho}, {"sigma", a.sigma}, {"eps", a.eps}, {"out", a.out}},
                 outputs);
}

struct DvtArgs {
  std::string rho, sigma;
  std::string out = "dvt.json";
};

void run_dvt(const DvtArgs& a) {
  const std::string started = iso_now();
  const qub::DensityOperator rho = qub::density_from_json(qub::load_json_file(a.rho));
  const qub::DensityOperator sigma = qub::density_from_json(qub::load_json_file(a.sigma));
  const qub::DvtTriple t = qub::dvt(rho, sigma);
  qub::write_json_file(a.out, qub::Json{{"d", num_or_inf(t.d)},
                                        {"v", num_or_inf(t.v)},
                                        {"t", num_or_inf(t.t)},
                                        {"finite", t.finite()}});
  write_manifest(started, 0, qub::Json{{"rho", a.rho}, {"sigma", a.sigma}, {"out", a.out}},
                 {a.out});
}

struct TlArgs {
  std::string rho, sigma;
  double threshold = 2.0;
  std::string out = "tl_check.json";
};

void run_tl(const TlArgs& a) {
  const std::string started = iso_now();
  const qub::DensityOperator rho = qub::density_from_json(qub::load_json_file(a.rho));
  const qub::DensityOperator sigma = qub::density_from_json(qub::load_json_file(a.sigma));
  const qub::TlReport r = qub::build_TL(rho, sigma, a.threshold);
  qub::write_json_file(a.out, qub::Json{{"threshold", a.threshold},
                                        {"tr_rho", r.tr_rho},
                                        {"tr_sigma", r.tr_sigma},
                                        {"z_tail", r.z_tail},
                                        {"rho_bound_ok", r.rho_bound_ok},
                                        {"sigma_bound_ok", r.sigma_bound_ok},
                                        {"rank", r.t_projector.rank()}});
  write_manifest(
      started, 0,
      qub::Json{
          {"rho", a.rho}, {"sigma", a.sigma}, {"threshold", a.threshold}, {"out", a.out}},
      {a.out});
  if (!r.rho_bound_ok || !r.sigma_bound_ok) {
    report_violation(a.out, qub::Json{{"threshold", a.threshold},
                                      {"tr_rho", r.tr_rho},
                                      {"tr_sigma", r.tr_sigma},
                                      {"z_tail", r.z_tail},
                                      {"rho", qub::density_to_json(rho)},
                                      {"sigma", qub::density_to_json(sigma)}});
  }
}

// ---------------------------------------------------------------------------
// second-order / rate / simulate-decoding
// ---------------------------------------------------------------------------

struct SecondOrderArgs {
  std::string triple = "1,1,1";
  double eps = 0.5;
  std::string n_range = "100:1000:100";
  std::string out = "second_order.csv";
};

void run_second_order(const SecondOrderArgs& a) {
  const std::string started = iso_now();
  const qub::DvtTriple triple = parse_triple(a.triple);
  const NRange nr = parse_n_range(a.n_range);
  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + a.out);
  out << "n,lower_bound_bits,per_use_rate\n";
  for (long n = nr.lo; n <= nr.hi; n += nr.step) {
    std::string lower, rate;
    try {
      lower = qub::g17(qub::expansion_lower_bound(n, a.eps, triple));
    } catch (const std::exception&) {
      lower.clear();  // n below the Berry-Esseen threshold: leave blank
    }
    try {
      rate = qub::g17(qub::ea_second_order_rate(triple, n, a.eps).rate_bits_per_use);
    } catch (const std::exception&) {
      rate.clear();
    }
    out << n << ',' << lower << ',' << rate << '\n';
  }
  out.close();
  write_manifest(started, 0,
                 qub::Json{{"triple", a.triple},
                           {"eps", a.eps},
                           {"n_range", a.n_range},
                           {"out", a.out}},
                 {a.out});
}

struct RateArgs {
  std::string mode = "ea";
  double ih = 0.0;
  double eps = 0.1;
  double eta = 0.05;
  std::string ensemble, channel;
  std::string out = "rate.json";
};

qub::Json rate_bound_json(const qub::RateBound& r) {
  return qub::Json{{"n", r.n},
                   {"eps", r.eps},
                   {"eta", r.eta},
                   {"ih_bits", num_or_inf(r.ih_bits)},
                   {"penalty_bits", r.penalty_bits},
                   {"total_bits", num_or_inf(r.total_bits)},
                   {"rate_bits_per_use", num_or_inf(r.rate_bits_per_use)}};
}

void run_rate(const RateArgs& a) {
  const std::string started = iso_now();
  qub::Json j;
  if (a.mode == "ea") {
    const qub::RateBound r = qub::ea_rate_lower_bound(a.ih, a.eps, a.eta);
    j = qub::Json{{"mode", "ea"}, {"bound", rate_bound_json(r)}};
  } else if (a.mode == "unassisted") {
    if (a.ensemble.empty() || a.channel.empty()) {
      throw std::invalid_argument("rate --mode unassisted needs --ensemble and --channel");
    }
    const qub::ClassicalQuantumState cq = qub::cq_from_json(qub::load_json_file(a.ensemble));
    const qub::QuantumChannel ch = qub::channel_from_json(qub::load_json_file(a.channel));
    const qub::CqRatePoint r = qub::cq_rate_point(cq, ch, a.eps, a.eta);
    j = qub::Json{{"mode", "unassisted"},
                  {"exact_lp", r.exact_lp},
                  {"ih_lower", num_or_inf(r.ih_lower)},
                  {"ih_upper", num_or_inf(r.ih_upper)},
                  {"bound", rate_bound_json(r.rate)}};
  } else {
    throw std::invalid_argument("rate: --mode must be ea or unassisted");
  }
  qub::write_json_file(a.out, j);
  write_manifest(started, 0,
                 qub::Json{{"mode", a.mode},
                           {"ih", a.ih},
                           {"eps", a.eps},
                           {"eta", a.eta},
                           {"ensemble", a.ensemble},
                           {"channel", a.channel},
                           {"out", a.out}},
                 {a.out});
}

struct SimArgs {
  std::string scenario;
  std::string out = "decoding.json";
};

void run_simulate(const SimArgs& a) {
  const std::string started = iso_now();
  const qub::ScenarioFile sf = qub::scenario_from_json(qub::load_json_file(a.scenario));
  const qub::DecodingResult res = qub::run_theorem3_experiment(sf.scenario, sf.lambda);
  qub::Json rows = qub::Json::array();
  for (const qub::DecodeRow& row : res.rows) {
    rows.push_back(qub::Json{{"m", row.m_true},
                             {"outcome_probs", row.outcome_probs},
                             {"no_detect_prob", row.no_detect_prob},
                             {"success", row.success},
                             {"p_e", row.p_e}});
  }
  qub::Json j{{"alpha", res.alpha},
              {"beta", res.beta},
              {"c", res.c},
              {"bound", res.bound},
              {"max_p_e", res.max_p_e},
              {"all_within_bound", res.all_within_bound},
              {"rows", std::move(rows)}};
  if (res.bracket.has_value()) {
    j["ih_bracket"] = qub::Json{{"lower", num_or_inf(res.bracket->lower)},
                                {"upper", num_or_inf(res.bracket->upper)}};
  }
  qub::write_json_file(a.out, j);
  write_manifest(started, 0, qub::Json{{"scenario", a.scenario}, {"out", a.out}}, {a.out});
  if (!res.all_within_bound) {
    report_violation(a.out, qub::Json{{"scenario", a.scenario},
                                      {"max_p_e", res.max_p_e},
                                      {"bound", res.bound}});
  }
}

}  // namespace

int main(int argc, char** argv) {
  g_command = join_args(argc, argv);
  CLI::App app{"union-bound and one-shot hypothesis-testing toolkit"};
  app.require_subcommand(1);

  UnionArgs ua;
  auto* sub_union = app.add_subcommand("verify-union-bound",
                                       "randomized campaign checking the sequential bound");
  sub_union->add_option("--dim", ua.dim, "Hilbert-space dimension")->check(CLI::Range(2, 64));
  sub_union->add_option("--num-projectors", ua.num_projectors, "chain length L")
      ->check(CLI::Range(2, 64));
  sub_union->add_option("--trials", ua.trials, "number of random instances")
      ->check(CLI::PositiveNumber);
  sub_union->add_option("--seed", ua.seed, "master seed");
  sub_union->add_option("--c", ua.c, "fixed trade-off parameter (default: a small grid)")
      ->check(CLI::PositiveNumber);
  sub_union->add_option("--state-kind", ua.state_kind, "pure, mixed or both")
      ->check(CLI::IsMember({"pure", "mixed", "both"}));
  sub_union->add_option("--threads", ua.threads, "worker threads (0 = auto)");
  sub_union->add_option("--out", ua.out, "output CSV path");
  sub_union->callback([&] {
    ua.c_set = sub_union->count("--c") > 0;
    run_union(ua);
  });

  LemmaArgs la;
  auto* sub_lemmas =
      app.add_subcommand("verify-lemmas", "telescoping-identity residuals on random instances");
  sub_lemmas->add_option("--dim", la.dim)->check(CLI::Range(2, 64));
  sub_lemmas->add_option("--num-projectors", la.num_projectors)->check(CLI::Range(2, 64));
  sub_lemmas->add_option("--trials", la.trials)->check(CLI::PositiveNumber);
  sub_lemmas->add_option("--seed", la.seed);
  sub_lemmas->add_option("--threads", la.threads);
  sub_lemmas->add_option("--out", la.out);
  sub_lemmas->callback([&] { run_lemmas(la); });

  PovmArgs pa;
  auto* sub_povm =
      app.add_subcommand("povm-bound", "sequential bound for general effects via dilation");
  sub_povm->add_option("--dim", pa.dim)->check(CLI::Range(2, 64));
  sub_povm->add_option("--num-operators", pa.num_operators)->check(CLI::Range(2, 11));
  sub_povm->add_option("--trials", pa.trials)->check(CLI::PositiveNumber);
  sub_povm->add_option("--seed", pa.seed);
  sub_povm->add_option("--c", pa.c)->check(CLI::PositiveNumber);
  sub_povm->add_option("--threads", pa.threads);
  sub_povm->add_option("--out", pa.out);
  sub_povm->callback([&] {
    pa.c_set = sub_povm->count("--c") > 0;
    run_povm(pa);
  });

  DhArgs da;
  auto* sub_dh = app.add_subcommand("dh", "hypothesis-testing relative entropy bracket");
  sub_dh->add_option("--rho", da.rho)->required();
  sub_dh->add_option("--sigma", da.sigma)->required();
  sub_dh->add_option("--eps", da.eps)->check(CLI::Range(1e-12, 1.0));
  sub_dh->add_option("--out", da.out);
  sub_dh->add_option("--witness-out", da.witness_out, "write the feasible test here");
  sub_dh->callback([&] { run_dh(da); });

  DvtArgs va;
  auto* sub_dvt = app.add_subcommand("dvt", "log-likelihood-ratio moments (D, V, T)");
  sub_dvt->add_option("--rho", va.rho)->required();
  sub_dvt->add_option("--sigma", va.sigma)->required();
  sub_dvt->add_option("--out", va.out);
  sub_dvt->callback([&] { run_dvt(va); });

  TlArgs ta;
  auto* sub_tl = app.add_subcommand("tl-check", "threshold projector two-sided check");
  sub_tl->add_option("--rho", ta.rho)->required();
  sub_tl->add_option("--sigma", ta.sigma)->required();
  sub_tl->add_option("--threshold", ta.threshold)->check(CLI::PositiveNumber);
  sub_tl->add_option("--out", ta.out);
  sub_tl->callback([&] { run_tl(ta); });

  SecondOrderArgs sa;
  auto* sub_so = app.add_subcommand("second-order", "expansion lower bounds over a range of n");
  sub_so->add_option("--triple", sa.triple, "moments as D,V,T");
  sub_so->add_option("--eps", sa.eps)->check(CLI::Range(1e-12, 1.0));
  sub_so->add_option("--n-range", sa.n_range, "LO:HI:STEP inclusive");
  sub_so->add_option("--out", sa.out);
  sub_so->callback([&] { run_second_order(sa); });

  RateArgs ra;
  auto* sub_rate = app.add_subcommand("rate", "one-shot rate bounds");
  sub_rate->add_option("--mode", ra.mode)->check(CLI::IsMember({"ea", "unassisted"}));
  sub_rate->add_option("--ih", ra.ih, "information term in bits (mode ea)");
  sub_rate->add_option("--eps", ra.eps)->check(CLI::Range(1e-12, 1.0));
  sub_rate->add_option("--eta", ra.eta)->check(CLI::PositiveNumber);
  sub_rate->add_option("--ensemble", ra.ensemble, "ensemble JSON (mode unassisted)");
  sub_rate->add_option("--channel", ra.channel, "channel JSON (mode unassisted)");
  sub_rate->add_option("--out", ra.out);
  sub_rate->callback([&] { run_rate(ra); });

  SimArgs ma;
  auto* sub_sim = app.add_subcommand("simulate-decoding", "exact sequential-decoder simulation");
  sub_sim->add_option("--scenario", ma.scenario)->required();
  sub_sim->add_option("--out", ma.out);
  sub_sim->callback([&] { run_simulate(ma); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return g_exit;
}
