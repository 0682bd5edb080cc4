// Batch front end: synth, recover, factor, verify, strata, tables.
// Exit status: 0 all checks pass, 1 an identity is violated, 2 input or configuration error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "loopfactor/factorization.hpp"
#include "loopfactor/io.hpp"
#include "loopfactor/loops.hpp"
#include "loopfactor/operators.hpp"
#include "loopfactor/symbolic.hpp"

using namespace loopfactor;
namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string cmd;
  std::string in, out;
  int N = 64;
  int grid_m = 10;
  int exp_trunc = 0;  // 0: chosen from the chi norm
  double tol = 0.0;   // 0: per-identity defaults
  std::string suite = "all";
  unsigned seed = 20240601;
  int jobs = 1;
  std::string format = "json";
  int order = 6;
  int n_max = 3;
  bool synth = false;
  int epsilon = 0, n = 0;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int log_level() {
  const char* v = std::getenv("LOOPFACTOR_LOG");
  if (!v) return 0;
  const std::string s(v);
  if (s == "debug" || s == "2") return 2;
  if (s == "info" || s == "1") return 1;
  return 0;
}

void log(int level, const std::string& msg) {
  if (log_level() >= level) std::cerr << "[loopfactor] " << msg << "\n";
}

double pick(double override_tol, double dflt) { return override_tol > 0.0 ? override_tol : dflt; }

int exp_trunc_for(const RunConfig& c, const RootParams& p) {
  if (c.exp_trunc > 0) return c.exp_trunc;
  double l1 = 0.0;
  for (const cplx& x : p.chi.chis) l1 += 2.0 * std::abs(x);
  return std::max(p.chi.support(), p.chi.support() * std::max(1, exp_terms_needed(l1)));
}

io::json input_json(const RunConfig& c) {
  if (c.in.empty()) throw ConfigError(c.cmd + ": --in is required");
  try {
    return io::read_json_file(c.in);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RootParams input_params(const RunConfig& c, bool required) {
  if (c.in.empty() && !required) return {};
  try {
    io::json j = input_json(c);
    return io::params_from_json(j.contains("params") ? j["params"] : j);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

MatrixLaurent input_loop(const RunConfig& c) {
  try {
    io::json j = input_json(c);
    return io::loop_from_json(j.contains("loop") ? j["loop"] : j);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void emit(const RunConfig& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(c.out);
  if (!os) throw ConfigError("cannot write " + c.out);
  os << text;
}

std::string render_reports(const RunConfig& c, std::vector<IdentityReport> reports) {
  io::sort_reports(reports);
  std::ostringstream os;
  if (c.format == "csv") io::write_reports_csv(os, reports);
  else io::write_reports_jsonl(os, reports);
  return os.str();
}

int status_of(const std::vector<IdentityReport>& reports) {
  for (const IdentityReport& r : reports)
    if (!r.pass) {
      std::cerr << "loopfactor: identity " << r.id << " violated at N=" << r.N << " (rel_err " << io::format_real(r.rel_err)
                << " > tol " << io::format_real(r.tol) << ")\n";
      return 1;
    }
  return 0;
}

// --- commands ---------------------------------------------------------------------------------------------------

int cmd_synth(const RunConfig& c) {
  const RootParams p = input_params(c, true);
  const MatrixLaurent g = assemble(p, exp_trunc_for(c, p));
  emit(c, io::loop_to_json(g).dump(2) + "\n");
  return 0;
}

int cmd_factor(const RunConfig& c) {
  const MatrixLaurent g = input_loop(c);
  TriangularFactors f;
  try {
    f = triangular_factor_numeric(g, c.N);
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("factor: ") + e.what() + " at N=" + std::to_string(c.N));
  }
  const IdentityReport r = make_report("factor.multiply_back", c.N, f.residual, 0.0, pick(c.tol, 1e-8));
  io::json out = io::factors_to_json(f);
  out["reports"] = io::json::array({io::report_to_json(r)});
  emit(c, out.dump(2) + "\n");
  return status_of({r});
}

int cmd_recover(const RunConfig& c) {
  const MatrixLaurent g = input_loop(c);
  TriangularFactors f;
  try {
    f = triangular_factor_numeric(g, c.N);
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("recover: ") + e.what() + " at N=" + std::to_string(c.N));
  }
  const RecoveredParams rp = recover_params_from_factors(f, c.grid_m, pick(c.tol, 1e-9));
  const MatrixLaurent back = assemble(rp.params, exp_trunc_for(c, rp.params));
  const IdentityReport r = make_report("recover.reassemble", c.N, grid_residual(back, g), 0.0, pick(c.tol, 1e-6));
  io::json out = io::recovered_to_json(rp);
  out["reports"] = io::json::array({io::report_to_json(r)});
  emit(c, out.dump(2) + "\n");
  return status_of({r});
}

std::vector<IdentityReport> suite_appendix2(const RunConfig& c) {
  const long long t0 = now_ns();
  std::mt19937 rng(c.seed);
  std::normal_distribution<double> nd(0.0, 0.3);
  std::map<int, Mat2> theta;
  for (int d : {1, 2, 3}) {
    Mat2 m;
    for (int t = 0; t < 4; ++t) m(t / 2, t % 2) = cplx(nd(rng), nd(rng));
    theta[d] = m;
  }
  std::vector<IdentityReport> out;
  const WBlocksNumeric wn = W_blocks_numeric(theta, 3, 3, std::max(c.N, 4));
  out.push_back(make_report("appendix2.W_numeric", c.N, wn.max_diff, 0.0, pick(c.tol, 1e-8), seconds_since(t0)));
  const WBlocksSymbolic ws = W_blocks_symbolic({1, 2, 3, 4, 5}, 5, 5);
  out.push_back(make_report("appendix2.W_symbolic", 6, ws.agree ? 0.0 : 1.0, 0.0, 0.0, seconds_since(t0)));
  std::map<int, Rational> scalars;
  std::set<int> degrees;
  for (int i = 1; i <= 8; ++i) {
    scalars[i] = Rational(i % 3 - 1, i + 1);
    scalars[i].canonicalize();
    degrees.insert(i);
  }
  const std::vector<NCPoly> g = gplus_series(degrees, 8);
  const std::vector<Rational> e = scalar_exp_series(scalars, 8);
  int mismatches = 0;
  for (int d = 0; d <= 8; ++d) mismatches += g[static_cast<size_t>(d)].evaluate(scalars) != e[static_cast<size_t>(d)];
  out.push_back(make_report("appendix2.gplus_exp", 8, mismatches, 0.0, 0.0, seconds_since(t0)));
  return out;
}

int cmd_verify(const RunConfig& c) {
  const RootParams p = input_params(c, false);
  static const std::vector<std::string> all{"planch", "toeplitz", "opfact", "keyid", "rh", "appendix2"};
  std::vector<std::string> suites;
  if (c.suite == "all") suites = all;
  else {
    std::stringstream ss(c.suite);
    for (std::string s; std::getline(ss, s, ',');) {
      if (std::find(all.begin(), all.end(), s) == all.end()) throw ConfigError("verify: unknown suite '" + s + "'");
      suites.push_back(s);
    }
  }
  const int trunc = exp_trunc_for(c, p);
  auto run_suite = [&](const std::string& s) -> std::vector<IdentityReport> {
    log(1, "suite " + s + " N=" + std::to_string(c.N));
    if (s == "planch") {
      std::vector<IdentityReport> r = verify_planch(p.zeta, Side::zeta, c.N, pick(c.tol, 1e-6));
      std::vector<IdentityReport> e = verify_planch(p.eta, Side::eta, c.N, pick(c.tol, 1e-6));
      r.insert(r.end(), e.begin(), e.end());
      return r;
    }
    if (s == "toeplitz") return verify_toeplitz_identities(p, c.N, trunc, pick(c.tol, 1e-5));
    if (s == "opfact") return verify_operator_factorization(p, c.N, trunc, pick(c.tol, 1e-6), pick(c.tol, 1e-8));
    if (s == "keyid") return verify_keyidentities(p.zeta, c.N, pick(c.tol, 1e-8));
    if (s == "rh") {
      const long long t0 = now_ns();
      const RiemannHilbert rh = riemann_hilbert_WZ(assemble(p, trunc), c.N, true, 1e12, pick(c.tol, 1e-6));
      IdentityReport r = rh.det;
      r.seconds = seconds_since(t0);
      return {r};
    }
    return suite_appendix2(c);
  };
  std::vector<IdentityReport> reports;
  if (c.jobs > 1) {
    std::vector<std::future<std::vector<IdentityReport>>> fut;
    for (const std::string& s : suites) fut.push_back(std::async(std::launch::async, run_suite, s));
    for (auto& f : fut) {
      std::vector<IdentityReport> r = f.get();
      reports.insert(reports.end(), r.begin(), r.end());
    }
  } else {
    for (const std::string& s : suites) {
      std::vector<IdentityReport> r = run_suite(s);
      reports.insert(reports.end(), r.begin(), r.end());
    }
  }
  emit(c, render_reports(c, reports));
  return status_of(reports);
}

int cmd_strata(const RunConfig& c) {
  if (c.synth) {
    if (c.epsilon != 0 && c.epsilon != 1) throw ConfigError("strata: --epsilon must be 0 or 1");
    const RootParams p = input_params(c, false);
    MatrixLaurent g;
    try {
      g = stratum_synthesize({c.epsilon, c.n}, p, exp_trunc_for(c, p));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("strata: ") + e.what());
    }
    io::json out{{"label", io::label_to_json({c.epsilon, c.n})}, {"loop", io::loop_to_json(g)}};
    emit(c, out.dump(2) + "\n");
    return 0;
  }
  const MatrixLaurent g = input_loop(c);
  const Classification cl = classify_stratum(g, c.N, c.n_max);
  emit(c, io::classification_to_json(cl).dump(2) + "\n");
  if (!cl.found) std::cerr << "loopfactor: strata: no label confirmed (" << cl.diagnostic << ")\n";
  return cl.found ? 0 : 1;
}

int cmd_tables(const RunConfig& c) {
  if (c.order < 1 || c.order > kSymbolicBound)
    throw ConfigError("tables: --order must be in 1.." + std::to_string(kSymbolicBound));
  CoefficientTable pnk, cij;
  // p_{n,k} for n <= order; C from the order-factor expansion.
  for (int n = 1; n <= c.order; ++n) {
    const PnkResult r = extract_pnk(n);
    pnk.rows.insert(pnk.rows.end(), r.table.rows.begin(), r.table.rows.end());
    pnk.violations.insert(pnk.violations.end(), r.table.violations.begin(), r.table.violations.end());
    pnk.all_positive_integer = pnk.all_positive_integer && r.table.all_positive_integer;
  }
  cij = x_star_symbolic(c.order).table;
  if (c.out.empty()) {
    std::ostringstream os;
    if (c.format == "csv") {
      io::write_table_csv(os, pnk);
      io::write_table_csv(os, cij);
    } else {
      os << io::json{{"p", io::table_to_json(pnk)}, {"C", io::table_to_json(cij)}}.dump(2) << "\n";
    }
    std::cout << os.str();
  } else {
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec) throw ConfigError("cannot create " + c.out);
    const std::string ext = c.format == "csv" ? ".csv" : ".json";
    for (const auto& [name, t] : {std::pair<std::string, const CoefficientTable*>{"pnk", &pnk}, {"C", &cij}}) {
      std::ofstream os(fs::path(c.out) / (name + ext));
      if (!os) throw ConfigError("cannot write into " + c.out);
      if (c.format == "csv") io::write_table_csv(os, *t);
      else os << io::table_to_json(*t).dump(2) << "\n";
    }
  }
  for (const std::string& v : pnk.violations) std::cerr << "loopfactor: tables: " << v << "\n";
  for (const std::string& v : cij.violations) std::cerr << "loopfactor: tables: " << v << "\n";
  return pnk.all_positive_integer && cij.all_positive_integer ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loopfactor: root subgroup and triangular factorization of SU(2) loops"};
  RunConfig c;
  app.add_option("cmd,--cmd", c.cmd, "synth | recover | factor | verify | strata | tables")
      ->required()
      ->check(CLI::IsMember({"synth", "recover", "factor", "verify", "strata", "tables"}));
  app.add_option("--in", c.in, "input JSON (params or loop)");
  app.add_option("--out", c.out, "output file (tables: directory); stdout when omitted");
  app.add_option("--N", c.N, "truncation size")->capture_default_str();
  app.add_option("--grid-m", c.grid_m, "grid exponent, 2^m samples")->capture_default_str();
  app.add_option("--exp-trunc", c.exp_trunc, "exponential truncation; 0 picks from the chi norm")->capture_default_str();
  app.add_option("--tol", c.tol, "tolerance override for every identity");
  app.add_option("--suite", c.suite, "verify suites: all or a comma list of planch,toeplitz,opfact,keyid,rh,appendix2")
      ->capture_default_str();
  app.add_option("--seed", c.seed, "seed for randomized checks")->capture_default_str();
  app.add_option("--jobs", c.jobs, "parallel verify suites")->capture_default_str();
  app.add_option("--format", c.format, "report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--order", c.order, "tables: expansion order")->capture_default_str();
  app.add_option("--n-max", c.n_max, "strata: largest |n| scored")->capture_default_str();
  app.add_flag("--synth", c.synth, "strata: synthesize a loop of label (--epsilon, --n) from --in params");
  app.add_option("--epsilon", c.epsilon, "strata: label epsilon");
  app.add_option("--n", c.n, "strata: label n");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c.N < 1) throw ConfigError("--N must be >= 1");
    if (c.grid_m < 4) throw ConfigError("--grid-m must be >= 4");
    if (c.tol < 0.0) throw ConfigError("--tol must be positive");
    if (c.jobs < 1) throw ConfigError("--jobs must be >= 1");
    if (c.exp_trunc < 0) throw ConfigError("--exp-trunc must be >= 0");
    log(2, "cmd=" + c.cmd + " N=" + std::to_string(c.N) + " grid_m=" + std::to_string(c.grid_m));
    if (c.cmd == "synth") return cmd_synth(c);
    if (c.cmd == "recover") return cmd_recover(c);
    if (c.cmd == "factor") return cmd_factor(c);
    if (c.cmd == "verify") return cmd_verify(c);
    if (c.cmd == "strata") return cmd_strata(c);
    return cmd_tables(c);
  } catch (const ConfigError& e) {
    std::cerr << "loopfactor: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "loopfactor: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "loopfactor: " << e.what() << " at N=" << c.N << "\n";
    return 1;
  }
}
