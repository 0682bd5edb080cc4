// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "loopfactor/factorization.hpp"
#include "loopfactor/laurent.hpp"
#include "loopfactor/loops.hpp"
#include "loopfactor/operators.hpp"
#include "loopfactor/symbolic.hpp"

using namespace loopfactor;

namespace {

// Pinned tolerances.
constexpr double kPlanchUnitTol = 1e-12;
constexpr double kPlanchRandomTol = 1e-6;
constexpr double kToeplitzTol = 1e-5;
constexpr double kA0Tol = 1e-6;
constexpr double kCentralTol = 1e-6;
constexpr double kHankelTol = 1e-8;
constexpr double kMultiplyBackTol = 1e-8;
constexpr double kRecoveryTol = 1e-6;
constexpr double kKDenseTol = 1e-9;
constexpr double kSingleFactorTol = 1e-10;
constexpr double kRankOneTol = 1e-13;
constexpr double kRhDetTol = 1e-6;
constexpr double kSingularTol = 1e-6;
constexpr double kSpecializationTol = 1e-10;
constexpr double kWNumericTol = 1e-8;
constexpr double kInnerTol = 1e-6;

constexpr unsigned kSeed = 20240601;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", x);
  return b;
}

std::vector<cplx> random_coords(std::mt19937& rng, int n, double radius) {
  std::uniform_real_distribution<double> r(0.0, radius), th(0.0, 2.0 * M_PI);
  std::vector<cplx> v(static_cast<size_t>(n));
  for (cplx& c : v) c = std::polar(r(rng), th(rng));
  return v;
}

double coord_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double e = 0.0;
  for (size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    const cplx x = i < a.size() ? a[i] : 0.0, y = i < b.size() ? b[i] : 0.0;
    e = std::max(e, std::abs(x - y));
  }
  return e;
}

RootParams random_params(std::mt19937& rng, int neta, int nchi, int nzeta, double radius) {
  RootParams p;
  p.eta = random_coords(rng, neta, radius);
  p.zeta = random_coords(rng, nzeta, radius);
  p.chi.chis = random_coords(rng, nchi, 0.25);
  p.chi.chi0_im = 0.3;
  return p;
}

int trunc_for(const RootParams& p) { return std::max(40, 16 * p.chi.support()); }

double worst_rel(const std::vector<IdentityReport>& reps, const std::string& prefix = "") {
  double e = 0.0;
  for (const IdentityReport& r : reps)
    if (r.id.rfind(prefix, 0) == 0) e = std::max(e, r.rel_err);
  return e;
}

// 1
Outcome plancherel() {
  Outcome o;
  double unit = 0.0;
  const MatrixLaurent k = build_k2({1.0});
  for (int N = 1; N <= 128; ++N) unit = std::max(unit, std::abs(gram_det(k, N) - 0.5));
  std::mt19937 rng(kSeed);
  double rnd = 0.0;
  for (int len = 1; len <= 8; ++len)
    for (int t = 0; t < 3; ++t) rnd = std::max(rnd, worst_rel(verify_planch(random_coords(rng, len, 0.8), Side::zeta, 128)));
  o.pass = unit <= kPlanchUnitTol && rnd <= kPlanchRandomTol;
  o.detail = "zeta=(1) max|det-0.5| over N<=128 " + fmt(unit) + "; random rel " + fmt(rnd);
  return o;
}

// 2
Outcome toeplitz_triple() {
  Outcome o;
  std::mt19937 rng(kSeed + 2);
  double worst = 0.0, a0 = 0.0;
  for (int t = 0; t < 4; ++t) {
    const RootParams p = random_params(rng, 1 + t, 1 + t % 3, 4 - t, 0.7);
    const std::vector<IdentityReport> reps = verify_toeplitz_identities(p, 128, trunc_for(p), kToeplitzTol);
    worst = std::max(worst, worst_rel(reps));
    const TriangularFactors f = triangular_factor_numeric(assemble(p, trunc_for(p)), 128);
    const double rhs = toeplitz_rhs(p).a0sq;
    a0 = std::max(a0, std::abs(f.a0 * f.a0 - rhs) / rhs);
  }
  o.pass = worst <= kToeplitzTol && a0 <= kA0Tol;
  o.detail = "det A, det A1, ratio at N=128,256 rel " + fmt(worst) + "; a0^2 from factors rel " + fmt(a0);
  return o;
}

// 3
Outcome operator_factorization() {
  Outcome o;
  std::mt19937 rng(kSeed + 3);
  double central = 0.0, hankel = 0.0;
  bool all = true;
  for (int t = 0; t < 3; ++t) {
    const RootParams p = random_params(rng, 2, 2, 3, 0.6);
    for (const IdentityReport& r : verify_operator_factorization(p, 128, trunc_for(p), kCentralTol, kHankelTol)) {
      if (r.id.rfind("opfact.central", 0) == 0) central = std::max(central, r.abs_err);
      if (r.id == "opfact.hankel_product") hankel = std::max(hankel, r.abs_err);
      all = all && r.pass;
    }
  }
  o.pass = all && central <= kCentralTol && hankel <= kHankelTol;
  o.detail = "central residual " + fmt(central) + "; Hankel product " + fmt(hankel);
  return o;
}

// 4
Outcome triangular_roundtrip() {
  Outcome o;
  std::mt19937 rng(kSeed + 4);
  double mb = 0.0, rec = 0.0;
  for (int t = 0; t < 3; ++t) {
    const RootParams p = random_params(rng, 2, 2, 3, 0.5);
    const TriangularFactors closed = tri_factor_from_params(p, trunc_for(p));
    mb = std::max(mb, closed.residual);
    const TriangularFactors f = triangular_factor_numeric(assemble(p, trunc_for(p)), 96);
    mb = std::max(mb, f.residual);
    const RecoveredParams r = recover_params_from_factors(f);
    rec = std::max({rec, std::abs(r.a1 - closed.a1), std::abs(r.a2 - closed.a2), coord_diff(r.params.eta, p.eta),
                    coord_diff(r.params.zeta, p.zeta), coord_diff(r.params.chi.chis, p.chi.chis),
                    std::abs(r.params.chi.chi0_im - p.chi.chi0_im)});
  }
  o.pass = mb <= kMultiplyBackTol && rec <= kRecoveryTol;
  o.detail = "multiply-back " + fmt(mb) + "; recovery of (a1, a2, chi, zeta, eta) " + fmt(rec);
  return o;
}

// 5
Outcome inverse_lemma() {
  Outcome o;
  auto get = [](const std::vector<IdentityReport>& reps, const std::string& id) {
    for (const IdentityReport& r : reps)
      if (r.id == id) return r.abs_err;
    return std::numeric_limits<double>::infinity();
  };
  std::mt19937 rng(kSeed + 5);
  double dense = 0.0, single = 0.0, rank = 0.0;
  for (int t = 0; t < 3; ++t) dense = std::max(dense, get(verify_keyidentities(random_coords(rng, 4, 0.8), 64), "keyid.K_vs_dense"));
  for (int k = 1; k <= 4; ++k) {
    std::vector<cplx> z(static_cast<size_t>(k), 0.0);
    z.back() = std::polar(0.7, 0.3 * k);
    const std::vector<IdentityReport> reps = verify_keyidentities(z, 64);
    single = std::max({single, get(reps, "keyid.diagonal"), get(reps, "keyid.K_one")});
  }
  for (int len : {1, 4, 8, 16}) rank = std::max(rank, get(verify_keyidentities(random_coords(rng, len, 0.6), 64), "keyid.rank_one"));
  o.pass = dense <= kKDenseTol && single <= kSingleFactorTol && rank <= kRankOneTol;
  o.detail = "K vs dense " + fmt(dense) + "; single-factor diagonal/K(1) " + fmt(single) + "; rank one " + fmt(rank);
  return o;
}

// 6
Outcome riemann_hilbert() {
  Outcome o;
  std::mt19937 rng(kSeed + 6);
  double worst = 0.0;
  for (int t = 0; t < 4; ++t) {
    const RootParams p = random_params(rng, 2, 1, 3, 0.6);
    worst = std::max(worst, riemann_hilbert_WZ(assemble(p, trunc_for(p)), 64, true, 1e12, kRhDetTol).det.rel_err);
  }
  o.pass = worst <= kRhDetTol;
  o.detail = "det(A A(g^-1)) vs det(1+WW*)^-1 rel " + fmt(worst);
  return o;
}

// 7
Outcome strata() {
  Outcome o;
  std::mt19937 rng(kSeed + 7);
  int ok = 0, total = 0, cond_ok = 0;
  std::string bad;
  for (int e = 0; e <= 1; ++e)
    for (int n = -3; n <= 3; ++n) {
      const StratumLabel w{e, n};
      const ZeroConditions z = stratum_zero_conditions(w);
      RootParams p;
      p.eta = random_coords(rng, 3, 0.4);
      p.zeta = random_coords(rng, 3, 0.4);
      std::vector<cplx>& side = z.side == Side::zeta ? p.zeta : p.eta;
      const std::vector<cplx> tail = random_coords(rng, 2, 0.4);
      side.assign(static_cast<size_t>(z.count), 0.0);
      side.insert(side.end(), tail.begin(), tail.end());
      const MatrixLaurent g = stratum_synthesize(w, p, 16);
      const Classification c = classify_stratum(g, 24, 4, kSingularTol);
      ++total;
      if (c.found && c.label == w) ++ok;
      else bad += " (" + std::to_string(e) + "," + std::to_string(n) + ")";
      // Off the top stratum A_N(g) is singular; for w = J (constant) A(J) is invertible and the obstruction to a
      // triangular factorization is the shifted operator A_1, so there A_1 must be singular and A invertible.
      auto smin = [&](bool shifted) {
        double v = std::numeric_limits<double>::infinity();
        for (int N : {24, 48})
          v = std::min(v, sigma_min(shifted ? shifted_toeplitz_trunc(g, N).entries : toeplitz_rect(g, N, N)));
        return v;
      };
      const double sa = smin(false), sa1 = smin(true);
      bool predicted = false;
      if (w == StratumLabel{0, 0}) predicted = sa >= kSingularTol && sa1 >= kSingularTol;
      else if (w == StratumLabel{1, 0}) predicted = sa >= kSingularTol && sa1 < kSingularTol;
      else predicted = sa < kSingularTol;
      bool confirmed = false;
      for (const StratumScore& sc : c.scores)
        if (sc.label == w && sc.pass) confirmed = true;
      if (confirmed && predicted) ++cond_ok;
      else bad += " cond(" + std::to_string(e) + "," + std::to_string(n) + ": sigma A " + fmt(sa) + ", A1 " + fmt(sa1) + ")";
    }
  o.pass = ok == total && cond_ok == total;
  o.detail = std::to_string(ok) + "/" + std::to_string(total) + " labels round-trip, " + std::to_string(cond_ok) + "/" +
             std::to_string(total) +
             " with A_N(g) (A_1 for w = J) singular and the w-side factor well-conditioned" + bad;
  return o;
}

// 8
Outcome degree_index() {
  Outcome o;
  int ok = 0;
  for (int d = -5; d <= 5; ++d) {
    const ScalarLaurent l = ScalarLaurent::monomial(d, 1.0);
    ok += scalar_degree(l, 6) == d && toeplitz_index(l, 64) == -d;
  }
  const double t = 0.5;
  ScalarLaurent b(0, 60);
  for (int n = 0; n <= 60; ++n) b.at(n) = n == 0 ? -t : std::pow(t, n - 1) * (1.0 - t * t);
  const int bd = scalar_degree(b, 8);
  o.pass = ok == 11 && bd == 1;
  o.detail = std::to_string(ok) + "/11 monomials with degree d and index -d; Blaschke degree " + std::to_string(bd);
  return o;
}

// 9
Outcome symbolic_integrality() {
  Outcome o;
  bool pnk = true, cij = true;
  size_t rows = 0;
  std::string first;
  for (int n = 1; n <= 8; ++n) {
    const PnkResult r = extract_pnk(n);
    pnk = pnk && r.exact && r.leading_ok && r.table.all_positive_integer;
    rows += r.table.rows.size();
    if (!r.table.violations.empty() && first.empty()) first = r.table.violations.front();
  }
  for (int order = 1; order <= 6; ++order) {
    const XStarResult x = x_star_symbolic(order);
    cij = cij && x.exact && x.shift_ok && x.table.all_positive_integer;
    rows += x.table.rows.size();
    if (!x.table.violations.empty() && first.empty()) first = x.table.violations.front();
  }
  std::mt19937 rng(kSeed + 9);
  const std::vector<cplx> zeta = random_coords(rng, 5, 0.7);
  const ProductExpansion e = product_expand(5, Convention::complex);
  const auto [minus, plus] = su2_specialization(zeta, Convention::complex);
  const MatrixLaurent k2 = build_k2(zeta);
  double a = 1.0;
  for (const cplx& z : zeta) a *= a_factor(z);
  double spec = 0.0;
  const PolySeries* ent[2][2] = {{&e.alpha, &e.beta}, {&e.gamma, &e.delta}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int d = k2.min_deg(); d <= k2.max_deg(); ++d) {
        auto it = ent[i][j]->find(d);
        const cplx s = it == ent[i][j]->end() ? cplx(0.0) : it->second.evaluate(minus, plus);
        spec = std::max(spec, std::abs(k2.coeff(d)(i, j) / a - s));
      }
  const XStarResult x = x_star_symbolic(5);
  const XFromK2 num = x_from_k2(k2, 32);
  for (int d = 1; d <= 5; ++d) {
    auto it = x.x.find(-d);
    const cplx s = it == x.x.end() ? cplx(0.0) : it->second.evaluate(minus, plus);
    spec = std::max(spec, std::abs(num.x.coeff(d) - std::conj(s)));
  }
  o.pass = pnk && cij && spec <= kSpecializationTol;
  o.detail = std::string("p_{n,k} n<=8 ") + (pnk ? "positive integers" : "VIOLATION") + ", C order<=6 " +
             (cij ? "positive integers" : "VIOLATION") + " (" + std::to_string(rows) + " coefficients); su2 specialization " +
             fmt(spec) + (first.empty() ? "" : "; first violation: " + first);
  return o;
}

// 10
Outcome w_blocks() {
  Outcome o;
  const std::set<int> deg{1, 2, 3, 4, 5, 6};
  const WBlocksSymbolic a = W_blocks_symbolic(deg, 5, 5);
  const WBlocksSymbolic b = W_blocks_symbolic(deg, 0, 6);
  bool exact = true;
  for (const WBlocksSymbolic* w : {&a, &b})
    for (const auto& [key, p] : w->via_C)
      if (key.first + key.second <= 6) exact = exact && p == w->via_g.at(key);
  std::mt19937 rng(kSeed + 10);
  std::normal_distribution<double> nd(0.0, 0.3);
  std::map<int, Mat2> theta;
  for (int d : {1, 2, 4}) {
    Mat2 m;
    for (int t = 0; t < 4; ++t) m(t / 2, t % 2) = cplx(nd(rng), nd(rng));
    theta[d] = m;
  }
  const WBlocksNumeric wn = W_blocks_numeric(theta, 3, 3, 128);
  std::uniform_int_distribution<int> ud(-4, 4);
  std::map<int, Rational> scal;
  std::set<int> all;
  for (int i = 1; i <= 8; ++i) {
    Rational q(ud(rng), 1 + std::abs(ud(rng)));
    q.canonicalize();
    scal[i] = q;
    all.insert(i);
  }
  const std::vector<NCPoly> g = gplus_series(all, 8);
  const std::vector<Rational> ex = scalar_exp_series(scal, 8);
  bool comm = true;
  for (int n = 0; n <= 8; ++n) comm = comm && g[static_cast<size_t>(n)].evaluate(scal) == ex[static_cast<size_t>(n)];
  o.pass = exact && wn.max_diff <= kWNumericTol && comm;
  o.detail = std::string("C(I) vs enumeration i+j<=6 ") + (exact ? "exact" : "MISMATCH") + "; A^-1 B at N=128 " +
             fmt(wn.max_diff) + "; scalar exponential " + (comm ? "exact" : "MISMATCH");
  return o;
}

// 11
Outcome singular_inner_demo() {
  Outcome o;
  const std::vector<cplx> z = {0.4, cplx(0.1, 0.2), -0.3};
  const MatrixLaurent k2 = build_k2(z);
  RecoverOptions opt;
  opt.unitarity_tol = -1.0;
  opt.n_max = static_cast<int>(z.size());
  double worst = 0.0;
  for (const SingularInnerSpec& s : {SingularInnerSpec{{{0.7, 0.3}}}, SingularInnerSpec{{{0.2, 0.5}, {2.5, 0.2}}}})
    worst = std::max(worst, coord_diff(recover_zeta(twist_by_inner(k2, s, 80), opt), z));
  o.pass = worst <= kInnerTol;
  o.detail = "zeta recovered from diag(lambda^*, lambda) k2 within " + fmt(worst);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"plancherel", plancherel},
      {"toeplitz determinant triple", toeplitz_triple},
      {"operator factorization", operator_factorization},
      {"triangular factorization roundtrip", triangular_roundtrip},
      {"inverse operator identities", inverse_lemma},
      {"Riemann-Hilbert determinant", riemann_hilbert},
      {"strata classify/synthesize", strata},
      {"degree and index", degree_index},
      {"symbolic integrality", symbolic_integrality},
      {"W-blocks", w_blocks},
      {"singular inner non-uniqueness", singular_inner_demo},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
