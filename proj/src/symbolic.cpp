#include "loopfactor/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "loopfactor/factorization.hpp"

namespace loopfactor {

namespace {

void check_bound(const char* who, int n, int bound) {
  if (n < 1) throw std::invalid_argument(std::string(who) + ": order must be positive");
  if (n > bound)
    throw std::invalid_argument(std::string(who) + ": order " + std::to_string(n) + " exceeds bound " +
                                std::to_string(bound));
}

std::string rational_str(const Rational& q) { return q.get_str(); }

bool positive_integer(const Rational& q) { return q > 0 && q.get_den() == 1; }

void add_series(PolySeries& a, const PolySeries& b) {
  for (const auto& [d, p] : b) {
    a[d] += p;
    if (a[d].is_zero()) a.erase(d);
  }
}

PolySeries mul_series(const PolySeries& a, const PolySeries& b) {
  PolySeries out;
  for (const auto& [da, pa] : a)
    for (const auto& [db, pb] : b) {
      CommPoly& t = out[da + db];
      t += pa * pb;
      if (t.is_zero()) out.erase(da + db);
    }
  return out;
}

struct PolyMat {
  PolySeries e[2][2];
};

PolyMat mul(const PolyMat& x, const PolyMat& y) {
  PolyMat r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) add_series(r.e[i][j], mul_series(x.e[i][k], y.e[k][j]));
  return r;
}

void tabulate(CoefficientTable& t, const std::string& name, int n, int k, const CommPoly& p) {
  for (const auto& [m, q] : p.terms()) {
    CoefficientEntry e{name, n, k, monomial_str(m), q, positive_integer(q)};
    if (!e.positive_integer) {
      t.all_positive_integer = false;
      t.violations.push_back(name + "_{" + std::to_string(n) + "," + std::to_string(k) + "}: " + e.monomial +
                             " has coefficient " + rational_str(q));
    }
    t.rows.push_back(std::move(e));
  }
}

// Enumerates strictly increasing index sequences in 1..n, alternating signs from `first`.
void alternating_sum(int n, int d, ZetaSign first, Convention c, bool odd_length, CommPoly& out) {
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    const int len = __builtin_popcount(mask);
    if ((len % 2 == 1) != odd_length) continue;
    Monomial m;
    int deg = 0, sign = 1;
    ZetaSign s = first;
    for (int k = 1; k <= n; ++k) {
      if (!(mask & (1u << (k - 1)))) continue;
      m.emplace_back(zeta_key(k, s), 1);
      if (s == ZetaSign::plus) {
        deg += k;
        s = ZetaSign::minus;
      } else {
        deg -= k;
        if (c == Convention::complex) sign = -sign;
        s = ZetaSign::plus;
      }
    }
    if (deg != d) continue;
    std::sort(m.begin(), m.end());
    out.add_term(m, Rational(sign));
  }
}

}  // namespace

// ---------------------------------------------------------------------------------------------------------------
// CommPoly

CommPoly CommPoly::constant(const Rational& q) {
  CommPoly p;
  p.add_term({}, q);
  return p;
}

CommPoly CommPoly::var(int k, ZetaSign s) {
  if (k < 1) throw std::invalid_argument("CommPoly::var: index must be >= 1");
  CommPoly p;
  p.add_term({{zeta_key(k, s), 1}}, 1);
  return p;
}

Rational CommPoly::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

void CommPoly::add_term(const Monomial& m, const Rational& q) {
  if (q == 0) return;
  auto [it, inserted] = terms_.emplace(m, q);
  if (inserted) return;
  it->second += q;
  if (it->second == 0) terms_.erase(it);
}

CommPoly& CommPoly::operator+=(const CommPoly& o) {
  for (const auto& [m, q] : o.terms_) add_term(m, q);
  return *this;
}

CommPoly& CommPoly::operator-=(const CommPoly& o) {
  for (const auto& [m, q] : o.terms_) add_term(m, -q);
  return *this;
}

CommPoly CommPoly::operator+(const CommPoly& o) const {
  CommPoly r = *this;
  return r += o;
}

CommPoly CommPoly::operator-(const CommPoly& o) const {
  CommPoly r = *this;
  return r -= o;
}

CommPoly CommPoly::operator-() const { return *this * Rational(-1); }

CommPoly CommPoly::operator*(const CommPoly& o) const {
  CommPoly r;
  for (const auto& [ma, qa] : terms_)
    for (const auto& [mb, qb] : o.terms_) r.add_term(monomial_product(ma, mb), qa * qb);
  return r;
}

CommPoly CommPoly::operator*(const Rational& q) const {
  CommPoly r;
  if (q == 0) return r;
  for (const auto& [m, c] : terms_) r.terms_.emplace(m, c * q);
  return r;
}

cplx CommPoly::evaluate(const std::vector<cplx>& minus, const std::vector<cplx>& plus) const {
  cplx total = 0.0;
  for (const auto& [m, q] : terms_) {
    cplx t = q.get_d();
    for (const auto& [key, e] : m) {
      const size_t k = static_cast<size_t>(key / 2);
      const std::vector<cplx>& v = (key % 2) ? plus : minus;
      const cplx x = k - 1 < v.size() ? v[k - 1] : cplx(0.0);
      t *= std::pow(x, e);
    }
    total += t;
  }
  return total;
}

CommPoly CommPoly::shifted(int shift) const {
  CommPoly r;
  for (const auto& [m, q] : terms_) {
    Monomial s = m;
    for (auto& [key, e] : s) {
      key += 2 * shift;
      if (key < 2) throw std::invalid_argument("CommPoly::shifted: index below 1");
    }
    r.terms_.emplace(std::move(s), q);
  }
  return r;
}

std::string CommPoly::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, q] : terms_) {
    if (!first) os << (q > 0 ? " + " : " - ");
    else if (q < 0) os << "-";
    first = false;
    const Rational a = abs(q);
    if (m.empty()) os << rational_str(a);
    else {
      if (a != 1) os << rational_str(a) << "*";
      os << monomial_str(m);
    }
  }
  return os.str();
}

Monomial monomial_product(const Monomial& a, const Monomial& b) {
  Monomial r;
  r.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) r.push_back(a[i++]);
    else if (i == a.size() || b[j].first < a[i].first) r.push_back(b[j++]);
    else {
      r.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return r;
}

std::string monomial_str(const Monomial& m) {
  if (m.empty()) return "1";
  std::ostringstream os;
  for (size_t t = 0; t < m.size(); ++t) {
    if (t) os << "*";
    os << "z" << (m[t].first % 2 ? "p" : "m") << m[t].first / 2;
    if (m[t].second != 1) os << "^" << m[t].second;
  }
  return os.str();
}

int monomial_min_index(const Monomial& m) { return m.empty() ? 0 : m.front().first / 2; }
int monomial_max_index(const Monomial& m) { return m.empty() ? 0 : m.back().first / 2; }

bool divide_by_var(const CommPoly& p, int k, ZetaSign s, CommPoly& q) {
  q = CommPoly();
  const int key = zeta_key(k, s);
  for (const auto& [m, c] : p.terms()) {
    Monomial r = m;
    auto it = std::find_if(r.begin(), r.end(), [&](const auto& pe) { return pe.first == key; });
    if (it == r.end()) return false;
    if (--it->second == 0) r.erase(it);
    q.add_term(r, c);
  }
  return true;
}

bool divide_by_one_plus(const CommPoly& p, int j, CommPoly& q) {
  // Split each monomial as base * t^e with t = zeta_j^- zeta_j^+ and e = min of the two exponents,
  // then divide each univariate polynomial in t by 1 + t.
  const int km = zeta_key(j, ZetaSign::minus), kp = zeta_key(j, ZetaSign::plus);
  std::map<Monomial, std::vector<Rational>> by_base;
  for (const auto& [m, c] : p.terms()) {
    int em = 0, ep = 0;
    Monomial rest;
    for (const auto& [key, e] : m) {
      if (key == km) em = e;
      else if (key == kp) ep = e;
      else rest.emplace_back(key, e);
    }
    const int t = std::min(em, ep);
    Monomial base = rest;
    if (em > t) base.emplace_back(km, em - t);
    if (ep > t) base.emplace_back(kp, ep - t);
    std::sort(base.begin(), base.end());
    std::vector<Rational>& v = by_base[base];
    if (static_cast<int>(v.size()) <= t) v.resize(static_cast<size_t>(t) + 1, Rational(0));
    v[static_cast<size_t>(t)] += c;
  }
  q = CommPoly();
  for (const auto& [base, c] : by_base) {
    const int deg = static_cast<int>(c.size()) - 1;
    if (deg < 1) return false;
    std::vector<Rational> r(static_cast<size_t>(deg));
    Rational prev = 0;
    for (int i = 0; i < deg; ++i) {
      r[static_cast<size_t>(i)] = c[static_cast<size_t>(i)] - prev;
      prev = r[static_cast<size_t>(i)];
    }
    if (c[static_cast<size_t>(deg)] != prev) return false;
    for (int i = 0; i < deg; ++i) {
      if (r[static_cast<size_t>(i)] == 0) continue;
      Monomial m = base;
      if (i > 0) m = monomial_product(m, {{km, i}, {kp, i}});
      q.add_term(m, r[static_cast<size_t>(i)]);
    }
  }
  return true;
}

// ---------------------------------------------------------------------------------------------------------------
// root-subgroup products

std::pair<std::vector<cplx>, std::vector<cplx>> su2_specialization(const std::vector<cplx>& zeta, Convention c) {
  std::vector<cplx> minus(zeta.size()), plus(zeta.size());
  for (size_t k = 0; k < zeta.size(); ++k) {
    minus[k] = c == Convention::su2 ? zeta[k] : -zeta[k];
    plus[k] = -std::conj(zeta[k]);
  }
  return {minus, plus};
}

ProductExpansion product_expand(int n, Convention c, int bound) {
  check_bound("product_expand", n, bound);
  PolyMat g;
  g.e[0][0][0] = CommPoly::constant(1);
  g.e[1][1][0] = CommPoly::constant(1);
  for (int k = 1; k <= n; ++k) {
    PolyMat f;
    f.e[0][0][0] = CommPoly::constant(1);
    f.e[1][1][0] = CommPoly::constant(1);
    const CommPoly zm = CommPoly::var(k, ZetaSign::minus);
    f.e[0][1][-k] = c == Convention::su2 ? zm : -zm;
    f.e[1][0][k] = CommPoly::var(k, ZetaSign::plus);
    g = mul(f, g);
  }
  ProductExpansion out;
  out.n = n;
  out.convention = c;
  out.alpha = g.e[0][0];
  out.beta = g.e[0][1];
  out.gamma = g.e[1][0];
  out.delta = g.e[1][1];
  return out;
}

CommPoly gamma_multi_index_sum(int n, int d, Convention c) {
  CommPoly out;
  alternating_sum(n, d, ZetaSign::plus, c, true, out);
  return out;
}

CommPoly delta_multi_index_sum(int n, int d, Convention c) {
  CommPoly out;
  alternating_sum(n, d, ZetaSign::minus, c, false, out);
  return out;
}

PolySeries series_divide(const PolySeries& p, const PolySeries& q, int order) {
  auto q0 = q.find(0);
  if (q0 == q.end() || !(q0->second == CommPoly::constant(1)))
    throw std::invalid_argument("series_divide: denominator must have constant term 1");
  if (!q.empty() && q.begin()->first < 0) throw std::invalid_argument("series_divide: denominator not a power series");
  PolySeries r;
  for (int d = 0; d <= order; ++d) {
    CommPoly t;
    if (auto it = p.find(d); it != p.end()) t = it->second;
    for (int k = 1; k <= d; ++k) {
      auto qi = q.find(k);
      auto ri = r.find(d - k);
      if (qi != q.end() && ri != r.end()) t -= qi->second * ri->second;
    }
    if (!t.is_zero()) r[d] = std::move(t);
  }
  return r;
}

std::vector<long long> partitions_by_length(int n) {
  if (n < 0) throw std::invalid_argument("partitions_by_length: n must be >= 0");
  std::vector<long long> out(static_cast<size_t>(n) + 1, 0);
  std::function<void(int, int, int)> rec = [&](int rest, int maxpart, int len) {
    if (rest == 0) {
      ++out[static_cast<size_t>(len)];
      return;
    }
    for (int p = std::min(rest, maxpart); p >= 1; --p) rec(rest - p, p, len + 1);
  };
  rec(n, n, 0);
  return out;
}

IdentityReport partition_bound_check(int n, const std::vector<cplx>& zeta) {
  check_bound("partition_bound_check", n, kSymbolicBound);
  const int factors = std::max<int>(1, static_cast<int>(zeta.size()));
  if (factors > 16) throw std::invalid_argument("partition_bound_check: at most 16 factors");
  const CommPoly delta = delta_multi_index_sum(factors, n, Convention::su2);
  const auto [minus, plus] = su2_specialization(zeta, Convention::su2);
  const double lhs = std::abs(delta.evaluate(minus, plus));
  double norm2 = 0.0;
  for (const cplx& z : zeta) norm2 += std::norm(z);
  const std::vector<long long> counts = partitions_by_length(n);
  double rhs = 0.0;
  for (int l = 1; l <= n; ++l) rhs += static_cast<double>(counts[static_cast<size_t>(l)]) * std::pow(norm2, l);
  IdentityReport r;
  r.id = "symbolic.partition_bound";
  r.N = n;
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_err = std::max(0.0, lhs - rhs);
  r.rel_err = rhs > 0.0 ? r.abs_err / rhs : r.abs_err;
  r.tol = 1e-12;
  r.pass = lhs <= rhs * (1.0 + 1e-12) + 1e-300;
  return r;
}

// ---------------------------------------------------------------------------------------------------------------
// Taylor and x^* coefficient tables (complex convention)

PnkResult extract_pnk(int n, int bound) {
  check_bound("extract_pnk", n, bound);
  const ProductExpansion e = product_expand(n, Convention::complex, bound);
  const PolySeries ratio = series_divide(e.gamma, e.delta, n);
  PnkResult out;
  out.n = n;
  if (auto it = ratio.find(n); it != ratio.end()) out.xi = it->second;
  std::vector<CommPoly> part(static_cast<size_t>(n));
  for (const auto& [m, q] : out.xi.terms()) {
    const int k = monomial_max_index(m);
    if (k < 1) {
      out.exact = false;
      out.table.violations.push_back("xi_" + std::to_string(n) + " has a constant term");
      continue;
    }
    part[static_cast<size_t>(k - 1)].add_term(m, q);
  }
  out.p.resize(static_cast<size_t>(n));
  for (int k = 1; k <= n; ++k) {
    CommPoly cur;
    if (!divide_by_var(part[static_cast<size_t>(k - 1)], k, ZetaSign::plus, cur)) {
      out.exact = false;
      out.table.violations.push_back("p_{" + std::to_string(n) + "," + std::to_string(k) + "}: zeta+_" +
                                     std::to_string(k) + " does not divide");
      continue;
    }
    bool ok = true;
    for (int j = 1; j < k && ok; ++j) {
      CommPoly next;
      ok = divide_by_one_plus(cur, j, next);
      cur = std::move(next);
      if (!ok)
        out.table.violations.push_back("p_{" + std::to_string(n) + "," + std::to_string(k) + "}: 1 + zeta-_" +
                                       std::to_string(j) + " zeta+_" + std::to_string(j) + " does not divide");
    }
    if (!ok) {
      out.exact = false;
      continue;
    }
    out.p[static_cast<size_t>(k - 1)] = cur;
    tabulate(out.table, "p", n, k, cur);
  }
  out.leading_ok = out.p[static_cast<size_t>(n - 1)] == CommPoly::constant(1);
  if (!out.exact) out.table.all_positive_integer = false;
  return out;
}

XStarResult x_star_symbolic(int order, int bound) {
  check_bound("x_star_symbolic", order, bound);
  const ProductExpansion e = product_expand(order, Convention::complex, bound);
  PolySeries unit;
  unit[0] = CommPoly::constant(1);
  const PolySeries dinv = series_divide(unit, e.delta, order);
  XStarResult out;
  out.order = order;
  for (int d = 1; d <= order; ++d) {
    CommPoly t;
    for (const auto& [k, q] : dinv) {
      auto b = e.beta.find(-d - k);
      if (b != e.beta.end()) t += b->second * q;
    }
    if (!t.is_zero()) out.x[-d] = std::move(t);
  }
  if (auto it = out.x.find(-1); it != out.x.end()) out.x1 = it->second;

  // x_{-d} against x_1 evaluated at (zeta_d, zeta_{d+1}, ...): truncating x_1 to indices <= order - d + 1.
  for (int d = 2; d <= order; ++d) {
    CommPoly expect;
    for (const auto& [m, q] : out.x1.terms())
      if (monomial_max_index(m) <= order - d + 1) expect.add_term(m, q);
    CommPoly got;
    if (auto it = out.x.find(-d); it != out.x.end()) got = it->second;
    if (!(got == expect.shifted(d - 1))) out.shift_ok = false;
  }

  std::vector<CommPoly> part(static_cast<size_t>(order));
  for (const auto& [m, q] : out.x1.terms()) {
    const int mi = monomial_min_index(m);
    if (mi < 1) {
      out.exact = false;
      continue;
    }
    part[static_cast<size_t>(mi - 1)].add_term(m, q);
  }
  out.s.resize(static_cast<size_t>(order));
  for (int m = 1; m <= order; ++m) {
    const std::string tag = "s_" + std::to_string(m);
    CommPoly cur;
    // The leading factor is zeta_m = -zeta_m^- in the main-text variables.
    if (!divide_by_var(part[static_cast<size_t>(m - 1)] * Rational(-1), m, ZetaSign::minus, cur)) {
      out.exact = false;
      out.table.violations.push_back(tag + ": zeta-_" + std::to_string(m) + " does not divide");
      continue;
    }
    bool ok = true;
    for (int j = m + 1; j <= order && ok; ++j) {
      CommPoly next;
      ok = divide_by_one_plus(cur, j, next);
      if (!ok) out.table.violations.push_back(tag + ": 1 + zeta-_" + std::to_string(j) + " zeta+_" +
                                              std::to_string(j) + " does not divide");
      cur = std::move(next);
    }
    if (!ok) {
      out.exact = false;
      continue;
    }
    out.s[static_cast<size_t>(m - 1)] = cur;
    tabulate(out.table, "C", order, m, cur);
    if (m == 1) {
      out.subsum.push_back({1, 1, cur.coeff({})});
      continue;
    }
    for (int k = m; k + m - 1 <= order; ++k) {
      const Monomial mono{{zeta_key(k, ZetaSign::minus), 1}, {zeta_key(k + m - 1, ZetaSign::plus), 1}};
      out.subsum.push_back({m, k, cur.coeff(mono)});
    }
  }
  if (!out.exact) out.table.all_positive_integer = false;
  return out;
}

// ---------------------------------------------------------------------------------------------------------------
// multi-indices

int MultiIndex::order() const {
  int s = 0;
  for (int i : parts) s += i;
  return s;
}

bool MultiIndex::valid() const {
  return !parts.empty() && std::all_of(parts.begin(), parts.end(), [](int i) { return i >= 1; });
}

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << "(";
  for (size_t t = 0; t < parts.size(); ++t) os << (t ? "," : "") << parts[t];
  os << ")";
  return os.str();
}

std::vector<MultiIndex> compositions(int n) {
  if (n < 1) throw std::invalid_argument("compositions: n must be positive");
  std::vector<MultiIndex> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int rest) {
    if (rest == 0) {
      out.push_back({cur});
      return;
    }
    for (int p = 1; p <= rest; ++p) {
      cur.push_back(p);
      rec(rest - p);
      cur.pop_back();
    }
  };
  rec(n);
  return out;
}

Rational c_of(const MultiIndex& I) {
  if (!I.valid()) throw std::invalid_argument("c_of: invalid multi-index " + I.str());
  Rational c = 1;
  int partial = 0;
  for (int i : I.parts) {
    partial += i;
    c /= partial;
  }
  return c;
}

std::vector<SubsetPair> subset_bijection(int n) {
  if (n < 1 || n > 16) throw std::invalid_argument("subset_bijection: n must be in 1..16");
  Rational nfact = 1;
  for (int k = 2; k <= n; ++k) nfact *= k;
  std::vector<SubsetPair> out;
  for (const MultiIndex& I : compositions(n)) {
    SubsetPair sp;
    sp.I = I;
    std::vector<bool> is_sum(static_cast<size_t>(n) + 1, false);
    int partial = 0;
    for (int i : I.parts) is_sum[static_cast<size_t>(partial += i)] = true;
    Rational prod = 1;
    for (int s = 1; s <= n; ++s)
      if (!is_sum[static_cast<size_t>(s)]) {
        sp.S.push_back(s);
        prod *= s;
      }
    sp.c = c_of(I);
    sp.via_subset = prod / nfact;
    // j-th gap: elements of S strictly between lambda_{j-1} and lambda_j.
    int prev = 0;
    size_t j = 0;
    for (int s = 1; s <= n; ++s) {
      if (!is_sum[static_cast<size_t>(s)]) continue;
      if (I.parts[j] != s - prev) sp.components_ok = false;
      prev = s;
      ++j;
    }
    out.push_back(std::move(sp));
  }
  return out;
}

// ---------------------------------------------------------------------------------------------------------------
// NCPoly

NCPoly NCPoly::constant(const Rational& q) {
  NCPoly p;
  p.add_term({}, q);
  return p;
}

NCPoly NCPoly::letter(int i) {
  NCPoly p;
  p.add_term({i}, 1);
  return p;
}

Rational NCPoly::coeff(const Word& w) const {
  auto it = terms_.find(w);
  return it == terms_.end() ? Rational(0) : it->second;
}

void NCPoly::add_term(const Word& w, const Rational& q) {
  if (q == 0) return;
  auto [it, inserted] = terms_.emplace(w, q);
  if (inserted) return;
  it->second += q;
  if (it->second == 0) terms_.erase(it);
}

NCPoly& NCPoly::operator+=(const NCPoly& o) {
  for (const auto& [w, q] : o.terms_) add_term(w, q);
  return *this;
}

NCPoly& NCPoly::operator-=(const NCPoly& o) {
  for (const auto& [w, q] : o.terms_) add_term(w, -q);
  return *this;
}

NCPoly NCPoly::operator+(const NCPoly& o) const {
  NCPoly r = *this;
  return r += o;
}

NCPoly NCPoly::operator-(const NCPoly& o) const {
  NCPoly r = *this;
  return r -= o;
}

NCPoly NCPoly::operator*(const NCPoly& o) const {
  NCPoly r;
  for (const auto& [wa, qa] : terms_)
    for (const auto& [wb, qb] : o.terms_) {
      Word w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      r.add_term(w, qa * qb);
    }
  return r;
}

NCPoly NCPoly::operator*(const Rational& q) const {
  NCPoly r;
  if (q == 0) return r;
  for (const auto& [w, c] : terms_) r.terms_.emplace(w, c * q);
  return r;
}

Mat2 NCPoly::evaluate(const std::map<int, Mat2>& theta) const {
  Mat2 total = Mat2::Zero();
  for (const auto& [w, q] : terms_) {
    Mat2 t = Mat2::Identity() * q.get_d();
    for (int i : w) {
      auto it = theta.find(i);
      if (it == theta.end()) {
        t.setZero();
        break;
      }
      t = t * it->second;
    }
    total += t;
  }
  return total;
}

Rational NCPoly::evaluate(const std::map<int, Rational>& theta) const {
  Rational total = 0;
  for (const auto& [w, q] : terms_) {
    Rational t = q;
    for (int i : w) {
      auto it = theta.find(i);
      t *= it == theta.end() ? Rational(0) : it->second;
    }
    total += t;
  }
  return total;
}

std::string NCPoly::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [w, q] : terms_) {
    if (!first) os << (q > 0 ? " + " : " - ");
    else if (q < 0) os << "-";
    first = false;
    const Rational a = abs(q);
    if (w.empty()) {
      os << rational_str(a);
      continue;
    }
    if (a != 1) os << rational_str(a) << "*";
    for (size_t t = 0; t < w.size(); ++t) os << (t ? "*" : "") << "t" << w[t];
  }
  return os.str();
}

// ---------------------------------------------------------------------------------------------------------------
// iterated integrals

namespace {

bool uses_only(const MultiIndex& I, const std::set<int>& degrees) {
  return std::all_of(I.parts.begin(), I.parts.end(), [&](int i) { return degrees.count(i) > 0; });
}

NCPoly word_of(const MultiIndex& I, const Rational& q) {
  NCPoly p;
  p.add_term(I.parts, q);
  return p;
}

}  // namespace

std::vector<NCPoly> gplus_series(const std::set<int>& degrees, int order) {
  check_bound("gplus_series", order, kSymbolicBound);
  std::vector<NCPoly> g(static_cast<size_t>(order) + 1);
  g[0] = NCPoly::constant(1);
  for (int n = 1; n <= order; ++n)
    for (const MultiIndex& I : compositions(n))
      if (uses_only(I, degrees)) g[static_cast<size_t>(n)] += word_of(I, c_of(I));
  return g;
}

std::vector<Mat2> gplus_series(const std::map<int, Mat2>& theta, int order) {
  check_bound("gplus_series", order, kSymbolicBound);
  std::set<int> degrees;
  for (const auto& [d, m] : theta) degrees.insert(d);
  const std::vector<NCPoly> sym = gplus_series(degrees, order);
  std::vector<Mat2> g;
  g.reserve(sym.size());
  for (const NCPoly& p : sym) g.push_back(p.evaluate(theta));
  return g;
}

std::vector<Rational> scalar_exp_series(const std::map<int, Rational>& theta, int order) {
  // exp(A) = sum_k A^k / k!, A = sum theta_i z^i / i, truncated at z^order.
  std::vector<Rational> a(static_cast<size_t>(order) + 1, Rational(0));
  for (const auto& [i, t] : theta)
    if (i >= 1 && i <= order) a[static_cast<size_t>(i)] = t / i;
  std::vector<Rational> out(static_cast<size_t>(order) + 1, Rational(0)), power(out);
  power[0] = 1;
  Rational kfact = 1;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) {
      std::vector<Rational> next(static_cast<size_t>(order) + 1, Rational(0));
      for (int x = 0; x <= order; ++x)
        for (int y = 1; x + y <= order; ++y) next[static_cast<size_t>(x + y)] += power[static_cast<size_t>(x)] * a[static_cast<size_t>(y)];
      power = std::move(next);
      kfact *= k;
    }
    for (int d = 0; d <= order; ++d) out[static_cast<size_t>(d)] += power[static_cast<size_t>(d)] / kfact;
  }
  return out;
}

std::vector<NCPoly> ginv_series(const std::vector<NCPoly>& g, int order) {
  check_bound("ginv_series", order, kSymbolicBound);
  if (g.empty() || !(g[0] == NCPoly::constant(1))) throw std::invalid_argument("ginv_series: g_0 must be 1");
  std::vector<NCPoly> inv(static_cast<size_t>(order) + 1);
  inv[0] = NCPoly::constant(1);
  for (int n = 1; n <= order; ++n)
    for (const MultiIndex& I : compositions(n)) {
      NCPoly t = NCPoly::constant(I.length() % 2 ? -1 : 1);
      for (int i : I.parts) t = t * (static_cast<size_t>(i) < g.size() ? g[static_cast<size_t>(i)] : NCPoly());
      inv[static_cast<size_t>(n)] += t;
    }
  return inv;
}

std::vector<Mat2> ginv_series(const std::vector<Mat2>& g, int order) {
  check_bound("ginv_series", order, kSymbolicBound);
  if (g.empty() || !g[0].isApprox(Mat2::Identity())) throw std::invalid_argument("ginv_series: g_0 must be 1");
  std::vector<Mat2> inv(static_cast<size_t>(order) + 1, Mat2::Zero());
  inv[0] = Mat2::Identity();
  for (int n = 1; n <= order; ++n)
    for (const MultiIndex& I : compositions(n)) {
      Mat2 t = Mat2::Identity() * (I.length() % 2 ? -1.0 : 1.0);
      for (int i : I.parts) t = t * (static_cast<size_t>(i) < g.size() ? g[static_cast<size_t>(i)] : Mat2::Zero());
      inv[static_cast<size_t>(n)] += t;
    }
  return inv;
}

Rational C_of(const MultiIndex& I, int j) {
  if (!I.valid()) throw std::invalid_argument("C_of: invalid multi-index " + I.str());
  const int l = I.length();
  Rational total = 0;
  // Bit b set: cut between parts b and b + 1.
  for (unsigned mask = 0; mask < (1u << (l - 1)); ++mask) {
    Rational prod = 1;
    int blocks = 0, last_order = 0;
    MultiIndex cur;
    for (int t = 0; t < l; ++t) {
      cur.parts.push_back(I.parts[static_cast<size_t>(t)]);
      if (t == l - 1 || (mask & (1u << t))) {
        prod *= c_of(cur);
        ++blocks;
        last_order = cur.order();
        cur.parts.clear();
      }
    }
    if (last_order < j) continue;
    total += blocks % 2 ? prod : -prod;
  }
  return total;
}

WBlocksSymbolic W_blocks_symbolic(const std::set<int>& degrees, int i_max, int j_max, int bound) {
  if (i_max < 0 || j_max < 1) throw std::invalid_argument("W_blocks_symbolic: need i_max >= 0, j_max >= 1");
  check_bound("W_blocks_symbolic", i_max + j_max, bound);
  const std::vector<NCPoly> g = gplus_series(degrees, i_max + j_max);
  WBlocksSymbolic out;
  for (int i = 0; i <= i_max; ++i)
    for (int j = 1; j <= j_max; ++j) {
      NCPoly via_c, via_g;
      for (const MultiIndex& I : compositions(i + j)) {
        if (uses_only(I, degrees)) via_c += word_of(I, C_of(I, j));
        if (I.parts.back() < j) continue;
        NCPoly t = NCPoly::constant(I.length() % 2 ? 1 : -1);
        for (int p : I.parts) t = t * g[static_cast<size_t>(p)];
        via_g += t;
      }
      if (!(via_c == via_g)) out.agree = false;
      out.via_C[{i, j}] = std::move(via_c);
      out.via_g[{i, j}] = std::move(via_g);
    }
  return out;
}

WBlocksNumeric W_blocks_numeric(const std::map<int, Mat2>& theta, int i_max, int j_max, int N) {
  if (N <= i_max || N < j_max) throw std::invalid_argument("W_blocks_numeric: N too small for the block range");
  std::set<int> degrees;
  for (const auto& [d, m] : theta) degrees.insert(d);
  const WBlocksSymbolic sym = W_blocks_symbolic(degrees, i_max, j_max);
  const int K = i_max + j_max;
  const std::vector<Mat2> g = gplus_series(theta, K);
  MatrixLaurent gp(0, K);
  for (int d = 0; d <= K; ++d) gp.at(d) = g[static_cast<size_t>(d)];
  const RiemannHilbert rh = riemann_hilbert_WZ(gp, N, false);
  WBlocksNumeric out;
  for (const auto& [key, p] : sym.via_C) {
    const auto [i, j] = key;
    const Mat2 f = p.evaluate(theta);
    const Mat2 w = rh.W.block<2, 2>(2 * i, 2 * (j - 1));
    out.formula[key] = f;
    out.rh[key] = w;
    out.max_diff = std::max(out.max_diff, (f - w).cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace loopfactor
