#include "loopfactor/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace loopfactor::io {

namespace {

json cplx_json(cplx c) { return json::array({c.real(), c.imag()}); }

cplx cplx_from(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::invalid_argument(where + ": expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<cplx> cplx_list(const json& j, const std::string& key) {
  std::vector<cplx> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_array()) throw std::invalid_argument("params: '" + key + "' must be an array");
  for (size_t i = 0; i < j[key].size(); ++i) out.push_back(cplx_from(j[key][i], key + "[" + std::to_string(i) + "]"));
  return out;
}

json list_json(const std::vector<cplx>& v) {
  json a = json::array();
  for (const cplx& c : v) a.push_back(cplx_json(c));
  return a;
}

}  // namespace

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json loop_to_json(const MatrixLaurent& g) {
  json coeffs = json::object();
  for (int d = g.min_deg(); d <= g.max_deg(); ++d) {
    const Mat2 m = g.coeff(d);
    coeffs[std::to_string(d)] = json::array({cplx_json(m(0, 0)), cplx_json(m(0, 1)), cplx_json(m(1, 0)), cplx_json(m(1, 1))});
  }
  return {{"min_deg", g.min_deg()}, {"max_deg", g.max_deg()}, {"coeffs", coeffs}};
}

MatrixLaurent loop_from_json(const json& j) {
  if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_object())
    throw std::invalid_argument("loop: expected an object with 'coeffs'");
  MatrixLaurent g;
  for (const auto& [key, v] : j["coeffs"].items()) {
    int d = 0;
    try {
      size_t pos = 0;
      d = std::stoi(key, &pos);
      if (pos != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw std::invalid_argument("loop: degree key '" + key + "' is not an integer");
    }
    if (!v.is_array() || v.size() != 4) throw std::invalid_argument("loop: degree " + key + " needs 4 entries");
    Mat2 m;
    for (int t = 0; t < 4; ++t) m(t / 2, t % 2) = cplx_from(v[static_cast<size_t>(t)], "loop[" + key + "]");
    g.set(d, m);
  }
  if (j.contains("min_deg") && j.contains("max_deg") && !g.empty()) {
    const int lo = j["min_deg"].get<int>(), hi = j["max_deg"].get<int>();
    if (g.min_deg() < lo || g.max_deg() > hi) throw std::invalid_argument("loop: coefficients outside [min_deg, max_deg]");
    g.reserve_support(lo, hi);
  }
  return g;
}

json scalar_to_json(const ScalarLaurent& f) {
  json coeffs = json::object();
  for (int d = f.min_deg(); d <= f.max_deg(); ++d) coeffs[std::to_string(d)] = cplx_json(f.coeff(d));
  return {{"min_deg", f.min_deg()}, {"max_deg", f.max_deg()}, {"coeffs", coeffs}};
}

json params_to_json(const RootParams& p) {
  return {{"eta", list_json(p.eta)}, {"chi0", p.chi.chi0_im}, {"chi", list_json(p.chi.chis)}, {"zeta", list_json(p.zeta)}};
}

RootParams params_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("params: expected an object");
  RootParams p;
  p.eta = cplx_list(j, "eta");
  p.zeta = cplx_list(j, "zeta");
  p.chi.chis = cplx_list(j, "chi");
  if (j.contains("chi0")) {
    if (!j["chi0"].is_number()) throw std::invalid_argument("params: 'chi0' must be a number");
    p.chi.chi0_im = j["chi0"].get<double>();
  }
  return p;
}

json factors_to_json(const TriangularFactors& f) {
  return {{"l", loop_to_json(f.l)},
          {"u", loop_to_json(f.u)},
          {"m0", cplx_json(f.m0)},
          {"a0", f.a0},
          {"a1", f.a1},
          {"a2", f.a2},
          {"residual", f.residual}};
}

json recovered_to_json(const RecoveredParams& r) {
  return {{"a1", r.a1}, {"a2", r.a2}, {"params", params_to_json(r.params)}};
}

json label_to_json(StratumLabel w) { return {{"epsilon", w.epsilon}, {"n", w.n}}; }

StratumLabel label_from_json(const json& j) {
  if (!j.is_object() || !j.contains("epsilon") || !j.contains("n"))
    throw std::invalid_argument("label: expected {\"epsilon\", \"n\"}");
  StratumLabel w{j["epsilon"].get<int>(), j["n"].get<int>()};
  if (w.epsilon != 0 && w.epsilon != 1) throw std::invalid_argument("label: epsilon must be 0 or 1");
  return w;
}

json classification_to_json(const Classification& c) {
  json scores = json::array();
  for (const StratumScore& s : c.scores)
    scores.push_back({{"label", label_to_json(s.label)},
                      {"side", s.left ? "left" : "right"},
                      {"sigma_N", s.sigma_N},
                      {"sigma_2N", s.sigma_2N},
                      {"pass", s.pass}});
  return {{"found", c.found},
          {"label", label_to_json(c.label)},
          {"position", {{"valid", c.position.valid}, {"pi0", c.position.pi0}, {"pi1", c.position.pi1}}},
          {"diagnostic", c.diagnostic},
          {"scores", scores}};
}

json report_to_json(const IdentityReport& r) {
  return {{"id", r.id},         {"N", r.N},         {"lhs", r.lhs}, {"rhs", r.rhs},
          {"abs_err", r.abs_err}, {"rel_err", r.rel_err}, {"seconds", r.seconds}, {"tol", r.tol}, {"pass", r.pass}};
}

void sort_reports(std::vector<IdentityReport>& reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const IdentityReport& a, const IdentityReport& b) { return a.id != b.id ? a.id < b.id : a.N < b.N; });
}

void write_reports_jsonl(std::ostream& os, const std::vector<IdentityReport>& reports) {
  for (const IdentityReport& r : reports) os << report_to_json(r).dump() << "\n";
}

void write_reports_csv(std::ostream& os, const std::vector<IdentityReport>& reports) {
  os << "id,N,lhs,rhs,abs_err,rel_err,seconds,tol,pass\n";
  for (const IdentityReport& r : reports)
    os << r.id << "," << r.N << "," << format_real(r.lhs) << "," << format_real(r.rhs) << "," << format_real(r.abs_err)
       << "," << format_real(r.rel_err) << "," << format_real(r.seconds) << "," << format_real(r.tol) << ","
       << (r.pass ? "true" : "false") << "\n";
}

void write_table_csv(std::ostream& os, const CoefficientTable& t) {
  os << "table,n,k,monomial,coefficient,positive_integer\n";
  for (const CoefficientEntry& e : t.rows)
    os << e.table << "," << e.n << "," << e.k << "," << e.monomial << "," << e.value.get_str() << ","
       << (e.positive_integer ? "true" : "false") << "\n";
}

json table_to_json(const CoefficientTable& t) {
  json rows = json::array();
  for (const CoefficientEntry& e : t.rows)
    rows.push_back({{"table", e.table},
                    {"n", e.n},
                    {"k", e.k},
                    {"monomial", e.monomial},
                    {"coefficient", e.value.get_str()},
                    {"positive_integer", e.positive_integer}});
  return {{"all_positive_integer", t.all_positive_integer}, {"violations", t.violations}, {"rows", rows}};
}

std::string multi_index_key(const MultiIndex& I) {
  std::string s;
  for (size_t t = 0; t < I.parts.size(); ++t) s += (t ? "-" : "") + std::to_string(I.parts[t]);
  return s;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace loopfactor::io
