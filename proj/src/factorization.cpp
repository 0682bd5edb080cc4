#include "loopfactor/factorization.hpp"

#include <algorithm>
#include <limits>

namespace loopfactor {

namespace {

MatrixLaurent upper_unipotent(const ScalarLaurent& t) {
  return from_entries(ScalarLaurent::one(), t, ScalarLaurent(), ScalarLaurent::one());
}

MatrixLaurent lower_unipotent(const ScalarLaurent& t) {
  return from_entries(ScalarLaurent::one(), ScalarLaurent(), t, ScalarLaurent::one());
}

MatrixLaurent constant_diag(cplx s) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = s;
  m(1, 1) = 1.0 / s;
  return constant_matrix(m);
}

// Adjugate of a 2x2 loop; the inverse when det = 1.
MatrixLaurent adjugate(const MatrixLaurent& g) {
  return from_entries(entry(g, 1, 1), -entry(g, 0, 1), -entry(g, 1, 0), entry(g, 0, 0));
}

int span_of(const MatrixLaurent& g) { return g.empty() ? 0 : g.max_deg() - g.min_deg(); }

std::vector<cplx> pointwise(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> r(a.size());
  for (size_t k = 0; k < a.size(); ++k) r[k] = a[k] * b[k];
  return r;
}

std::vector<cplx> column(const std::vector<Mat2>& v, int i, int j) {
  std::vector<cplx> r(v.size());
  for (size_t k = 0; k < v.size(); ++k) r[k] = v[k](i, j);
  return r;
}

// Analytic coefficients of grid samples, dropping trailing noise below cut.
ScalarLaurent analytic_from_samples(const std::vector<cplx>& v, double cut) {
  const int n = static_cast<int>(v.size());
  return part(from_samples(v, -n / 2, n / 2 - 1), Part::zero_plus).trimmed(cut);
}

double max_abs(const VecX& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

VecX coeff_vector(const ScalarLaurent& f, int lo, int n) {
  VecX v(n);
  for (int i = 0; i < n; ++i) v(i) = f.coeff(lo + i);
  return v;
}

}  // namespace

K2Data k2_data(const MatrixLaurent& k2) {
  const ScalarLaurent c = entry(k2, 1, 0), d = entry(k2, 1, 1);
  const cplx d0 = d.coeff(0);
  if (std::abs(d0) < 1e-13 || std::abs(d0.imag()) > 1e-10 * std::abs(d0) || d0.real() <= 0.0)
    throw std::domain_error("k2_data: d2(0) must be positive");
  K2Data r;
  r.a2 = 1.0 / d0.real();
  r.gamma = r.a2 * c;
  r.delta = r.a2 * d;
  r.x = x_of_k2(k2);
  const ScalarLaurent xs = star(r.x);
  r.alpha = (1.0 / r.a2) * part(star(d) - xs * c, Part::zero_plus);
  r.beta = (1.0 / r.a2) * part(-star(c) - xs * d, Part::zero_plus);
  return r;
}

K1Data k1_data(const MatrixLaurent& k1) {
  const ScalarLaurent a = entry(k1, 0, 0), b = entry(k1, 0, 1);
  const cplx a0 = a.coeff(0);
  if (std::abs(a0) < 1e-13 || std::abs(a0.imag()) > 1e-10 * std::abs(a0) || a0.real() <= 0.0)
    throw std::domain_error("k1_data: a1(0) must be positive");
  K1Data r;
  r.a1 = a0.real();
  r.alpha = (1.0 / r.a1) * a;
  r.beta = (1.0 / r.a1) * b;
  r.y = y_of_k1(k1);
  const ScalarLaurent ys = star(r.y);
  r.gamma = r.a1 * part(-star(b) - ys * a, Part::zero_plus);
  r.delta = r.a1 * part(star(a) - ys * b, Part::zero_plus);
  return r;
}

MatrixLaurent multiply_back(const TriangularFactors& f) { return f.l * constant_diag(f.m0 * f.a0) * f.u; }

double grid_residual(const MatrixLaurent& a, const MatrixLaurent& b, int min_m) {
  const MatrixLaurent d = a - b;
  if (d.empty()) return 0.0;
  double r = 0.0;
  for (const Mat2& v : sample_grid(d, grid_exponent_for(span_of(d), min_m))) {
    if (!v.allFinite()) return std::numeric_limits<double>::infinity();
    r = std::max(r, v.cwiseAbs().maxCoeff());
  }
  return r;
}

TriangularFactors tri_factor_from_params(const RootParams& p, int trunc) {
  const int T = std::max(trunc, p.chi.support());
  TriangularFactors f;
  f.k1 = k1_data(build_k1(p.eta));
  f.k2 = k2_data(build_k2(p.zeta));
  f.chi = p.chi;
  f.a1 = f.k1.a1;
  f.a2 = f.k2.a2;
  f.a0 = f.a1 * f.a2;
  f.m0 = std::exp(cplx(0.0, p.chi.chi0_im));
  f.x = f.k2.x;
  f.y = f.k1.y;
  f.X = (1.0 / (f.a2 * f.a2)) * f.x;
  f.Y = (f.a1 * f.a1) * f.y;

  const ScalarLaurent cp = p.chi.plus();
  const ScalarLaurent ep = exp_scalar(cp, T), em = exp_scalar(-cp, T);
  const ScalarLaurent e2p = exp_scalar(2.0 * cp, T);
  const cplx A = f.a0 * f.m0;
  const ScalarLaurent Xs = star(f.X);
  f.M = (1.0 / (A * A)) * (star(e2p) * f.Y) + e2p * Xs;

  const K2Data& d2 = f.k2;
  const MatrixLaurent U2 = from_entries(ScalarLaurent::one() - part(Xs * d2.gamma, Part::plus),
                                        -part(Xs * d2.delta, Part::zero_plus), d2.gamma, d2.delta);
  const K1Data& d1 = f.k1;
  const MatrixLaurent U1 = from_entries(d1.alpha, d1.beta, d1.gamma, d1.delta);

  f.u = upper_unipotent(part(f.M, Part::zero_plus)) * diag(ep, em) * U2;
  f.l = star(U1) * diag(star(em), star(ep)) * upper_unipotent((A * A) * part(f.M, Part::minus));
  f.residual = grid_residual(multiply_back(f), assemble(p, T));
  return f;
}

TriangularFactors triangular_factor_numeric(const MatrixLaurent& g, int N) {
  if (N < 1) throw std::invalid_argument("triangular_factor_numeric: N must be positive");
  const MatX a = toeplitz_trunc(g, N).entries;
  Eigen::PartialPivLU<MatX> lu(a);
  if (!(lu.rcond() > 1e-12))
    throw std::domain_error("triangular_factor_numeric: A_N(g) is near-singular (lower stratum?)");
  const MatX sol = lu.solve(MatX::Identity(2 * N, 2));

  // F = u^{-1} D^{-1} l(inf)^{-1} with D = diag(m0 a0, 1/(m0 a0)).
  MatrixLaurent F(0, N - 1);
  for (int k = 0; k < N; ++k) F.at(k) = sol.block<2, 2>(2 * k, 0);
  const Mat2 F0 = F.coeff(0);
  const cplx t = F0(1, 1);
  if (std::abs(t) < 1e-13) throw std::domain_error("triangular_factor_numeric: degenerate constant term");
  const cplx q = F0(1, 0) / t, p = F0(0, 1) / t, s = F0(0, 0) - p * t * q;
  Mat2 linf = Mat2::Identity();
  linf(1, 0) = -q;
  const cplx dm = 1.0 / s;

  TriangularFactors f;
  f.a0 = std::abs(dm);
  f.m0 = dm / f.a0;
  const MatrixLaurent uinv = F * constant_matrix(linf) * constant_diag(dm);
  f.u = adjugate(uinv);
  f.l = part(g * uinv * constant_diag(1.0 / dm), Part::minus_zero);
  f.residual = grid_residual(multiply_back(f), g);
  if (!std::isfinite(f.residual)) throw std::domain_error("triangular_factor_numeric: non-finite factors");
  return f;
}

RecoveredParams recover_params_from_factors(const TriangularFactors& f, int grid_m, double tol) {
  const int m = std::max({grid_m, grid_exponent_for(span_of(f.u)), grid_exponent_for(span_of(f.l))});
  const auto su = sample_grid(f.u, m), sl = sample_grid(f.l, m);
  const size_t n = su.size();
  std::vector<cplx> lu(n), ll(n);
  double mean_u = 0.0, mean_l = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const double vu = std::norm(su[k](1, 0)) + std::norm(su[k](1, 1));
    const double vl = std::norm(sl[k](0, 0)) + std::norm(sl[k](1, 0));
    if (!(vu > 1e-300) || !(vl > 1e-300) || !std::isfinite(vu) || !std::isfinite(vl))
      throw std::invalid_argument("recover_params_from_factors: log of a vanishing column norm on the grid");
    lu[k] = std::log(vu);
    ll[k] = std::log(vl);
    mean_u += lu[k].real();
    mean_l += ll[k].real();
  }
  mean_u /= static_cast<double>(n);
  mean_l /= static_cast<double>(n);

  RecoveredParams r;
  r.a2 = std::exp(0.5 * mean_u);
  r.a1 = std::exp(-0.5 * mean_l);
  const ScalarLaurent logu = from_samples(lu, 0, static_cast<int>(n) / 2 - 1);
  int top = 0;
  for (int j = 1; j <= logu.max_deg(); ++j)
    if (std::abs(logu.coeff(j)) > 1e-13) top = j;
  r.chi.chis.resize(static_cast<size_t>(top));
  for (int j = 1; j <= top; ++j) r.chi.chis[static_cast<size_t>(j - 1)] = -logu.coeff(j);
  r.chi.chi0_im = std::arg(f.m0);

  std::vector<cplx> ecp = sample_grid(r.chi.plus(), m);
  for (auto& v : ecp) v = std::exp(v);
  std::vector<cplx> ecp_conj(n);
  for (size_t k = 0; k < n; ++k) ecp_conj[k] = std::conj(ecp[k]);

  const double cut = 1e-14;
  const ScalarLaurent gamma = analytic_from_samples(pointwise(column(su, 1, 0), ecp), cut);
  const ScalarLaurent delta = analytic_from_samples(pointwise(column(su, 1, 1), ecp), cut);
  // l11 = alpha1^* e^{chi_-}, l21 = beta1^* e^{chi_-}, and e^{-chi_-} = conj(e^{chi_+}) on the circle.
  std::vector<cplx> al = pointwise(column(sl, 0, 0), ecp_conj), be = pointwise(column(sl, 1, 0), ecp_conj);
  for (size_t k = 0; k < n; ++k) {
    al[k] = std::conj(al[k]);
    be[k] = std::conj(be[k]);
  }
  const ScalarLaurent alpha = analytic_from_samples(al, cut), beta = analytic_from_samples(be, cut);

  const double ia2 = 1.0 / r.a2;
  r.k2 = from_entries(ia2 * star(delta), -ia2 * star(gamma), ia2 * gamma, ia2 * delta);
  r.k1 = from_entries(r.a1 * alpha, r.a1 * beta, -r.a1 * star(beta), r.a1 * star(alpha));

  RecoverOptions opt;
  opt.tol = tol;
  opt.unitarity_tol = 1e3 * tol;
  r.params.zeta = recover_zeta(r.k2, opt);
  r.params.eta = recover_eta(r.k1, opt);
  r.params.chi = r.chi;
  return r;
}

std::vector<IdentityReport> unitarity_residuals(const K2Data& d, int grid_m, double tol) {
  const double a = d.a2, ia = 1.0 / d.a2;
  const ScalarLaurent xs = star(d.x);
  const ScalarLaurent e1 = a * d.alpha + ia * (xs * d.gamma) - ia * star(d.delta);
  const ScalarLaurent e2 = a * d.beta + ia * (xs * d.delta) + ia * star(d.gamma);
  const ScalarLaurent e3 = (ia * ia) * (star(d.gamma) * d.gamma + star(d.delta) * d.delta) - ScalarLaurent::one();
  const ScalarLaurent e4 = star(d.alpha) * d.alpha + star(d.beta) * d.beta -
                           (ia * ia) * (ScalarLaurent::one() + star(d.x) * d.x);
  auto gridmax = [&](const ScalarLaurent& e) {
    if (e.empty()) return 0.0;
    double r = 0.0;
    for (cplx v : sample_grid(e, std::max(grid_m, grid_exponent_for(e.max_deg() - e.min_deg())))) r = std::max(r, std::abs(v));
    return r;
  };
  return {make_report("unitarity.first_row_alpha", 0, gridmax(e1), 0.0, tol),
          make_report("unitarity.first_row_beta", 0, gridmax(e2), 0.0, tol),
          make_report("unitarity.bottom_row_norm", 0, gridmax(e3), 0.0, tol),
          make_report("unitarity.top_row_norm", 0, gridmax(e4), 0.0, tol)};
}

RiemannHilbert riemann_hilbert_WZ(const MatrixLaurent& g, int N, bool with_det, double max_cond, double tol) {
  const long long t0 = now_ns();
  const MatX a = toeplitz_trunc(g, N).entries;
  Eigen::BDCSVD<MatX> svd(a);
  const auto& sv = svd.singularValues();
  RiemannHilbert r;
  r.cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(r.cond <= max_cond))
    throw std::domain_error("riemann_hilbert_WZ: A_N(g) near-singular (cond " + std::to_string(r.cond) +
                            "); g is close to a lower stratum");
  Eigen::PartialPivLU<MatX> lu(a);
  r.W = lu.solve(hankel_trunc(g, N, HankelSide::B).entries);
  r.Z = hankel_trunc(g, N, HankelSide::C).entries * lu.inverse();
  if (with_det) {
    const int s = std::max(0, -g.min_deg());
    const MatX prod = toeplitz_rect(g, N, N + s) * toeplitz_rect(star(g), N + s, N);
    const double lhs = det_trunc(prod).value.real();
    const double rhs = 1.0 / det_trunc(MatX::Identity(2 * N, 2 * N) + r.W * r.W.adjoint()).value.real();
    r.det = make_report("rh.det_identity", N, lhs, rhs, tol, seconds_since(t0));
  }
  return r;
}

XFromK2 x_from_k2(const MatrixLaurent& k2, int N) {
  const RiemannHilbert rh = riemann_hilbert_WZ(k2, N, false);
  XFromK2 r;
  r.x = ScalarLaurent(1, N);
  for (int j = 1; j <= N; ++j) r.x.at(j) = std::conj(rh.Z(2 * (j - 1), 1));
  const MatrixLaurent h = upper_unipotent(-star(r.x)) * k2;
  r.analytic_residual = part(h, Part::minus).max_norm();
  return r;
}

ScalarLaurent inverse_op_apply(const ScalarLaurent& c2, const ScalarLaurent& d2, const ScalarLaurent& f) {
  return c2 * part(star(c2) * f, Part::zero_plus) + d2 * part(star(d2) * f, Part::zero_plus);
}

MatX inverse_op_matrix(const ScalarLaurent& c2, const ScalarLaurent& d2, int N) {
  MatX k(N, N);
  for (int j = 0; j < N; ++j) k.col(j) = coeff_vector(inverse_op_apply(c2, d2, ScalarLaurent::monomial(j, 1.0)), 0, N);
  return k;
}

std::vector<IdentityReport> verify_keyidentities(const std::vector<cplx>& zeta, int N, double tol) {
  const long long t0 = now_ns();
  const MatrixLaurent k2 = build_k2(zeta);
  const K2Data d = k2_data(k2);
  const ScalarLaurent c2 = entry(k2, 1, 0), d2 = entry(k2, 1, 1);
  const double a2sq = d.a2 * d.a2;
  const MatX I = MatX::Identity(N, N);

  const MatX H = scalar_hankel_product_trunc(d.x, N).entries;
  const MatX Kd = (I + H).inverse();
  const ScalarLaurent zx = d.x.shifted(-1);
  const MatX H1 = scalar_hankel_product_trunc(zx, N).entries;

  // Bdot^* Bdot on z^{-m}, m = 1..N.
  MatX G(N, N);
  for (int m = 1; m <= N; ++m)
    for (int mp = 1; mp <= N; ++mp) {
      cplx s = 0.0;
      for (int i = 0; i + std::max(m, mp) <= d.x.max_deg(); ++i) s += std::conj(d.x.coeff(i + m)) * d.x.coeff(i + mp);
      G(m - 1, mp - 1) = s;
    }
  VecX xs(N), gs(N);
  for (int m = 1; m <= N; ++m) {
    xs(m - 1) = std::conj(d.x.coeff(m));
    gs(m - 1) = std::conj(d.gamma.coeff(m));
  }
  const VecX gsol = -a2sq * (I + G).lu().solve(xs);

  double prodz = 1.0;
  for (cplx z : zeta) prodz *= 1.0 + std::norm(z);

  const MatX K = inverse_op_matrix(c2, d2, N);
  const ScalarLaurent k1 = inverse_op_apply(c2, d2, ScalarLaurent::one());
  const ScalarLaurent kzx = inverse_op_apply(c2, d2, zx);

  VecX diag_formula(N);
  double acc = 0.0;
  for (int n = 0; n < N; ++n) {
    acc += std::norm(d.gamma.coeff(n)) + std::norm(d.delta.coeff(n));
    diag_formula(n) = acc / a2sq;
  }
  VecX v(N);
  for (int i = 0; i < N; ++i) v(i) = d.x.coeff(i + 1);

  const double det_ratio = det_trunc(I + H).value.real() / det_trunc(I + H1).value.real();
  const double inner = 1.0 + (v.adjoint() * (I + H1).lu().solve(v))(0, 0).real();
  const double secs = seconds_since(t0);

  return {make_report("keyid.a2_squared_product", N, a2sq, prodz, tol, secs),
          make_report("keyid.a2_squared_cramer", N, 1.0 / Kd(0, 0).real(), a2sq, tol, secs),
          make_report("keyid.delta2", N, max_abs(a2sq * Kd.col(0) - coeff_vector(d.delta, 0, N)), 0.0, tol, secs),
          make_report("keyid.gamma2_star", N, max_abs(gsol - gs), 0.0, tol, secs),
          make_report("keyid.K_vs_dense", N, (K - Kd).cwiseAbs().maxCoeff(), 0.0, tol, secs),
          make_report("keyid.K_one", N, (k1 - (1.0 / a2sq) * d.delta).max_norm(), 0.0, tol, secs),
          make_report("keyid.K_zinv_x", N, (kzx + (1.0 / a2sq) * d.gamma.shifted(-1)).max_norm(), 0.0, tol, secs),
          make_report("keyid.diagonal", N, max_abs(Kd.diagonal() - diag_formula), 0.0, tol, secs),
          make_report("keyid.rank_one", N, (H - H1 - v * v.adjoint()).cwiseAbs().maxCoeff(), 0.0, tol, secs),
          make_report("keyid.det_ratio", N, det_ratio, a2sq, tol, secs),
          make_report("keyid.rank_one_inner", N, inner, a2sq, tol, secs)};
}

MatrixLaurent w_loop(StratumLabel w) {
  MatrixLaurent t = diag(ScalarLaurent::monomial(w.n, 1.0), ScalarLaurent::monomial(-w.n, 1.0));
  if (w.epsilon == 0) return t;
  Mat2 J;
  J << 0.0, 1.0, -1.0, 0.0;
  return constant_matrix(J) * t;
}

MatrixLaurent w_inverse(StratumLabel w) {
  MatrixLaurent t = diag(ScalarLaurent::monomial(-w.n, 1.0), ScalarLaurent::monomial(w.n, 1.0));
  if (w.epsilon == 0) return t;
  Mat2 Jinv;
  Jinv << 0.0, -1.0, 1.0, 0.0;
  return t * constant_matrix(Jinv);
}

ZeroConditions stratum_zero_conditions(StratumLabel w) {
  if (w.epsilon != 0 && w.epsilon != 1) throw std::invalid_argument("stratum label: epsilon must be 0 or 1");
  const int m = std::abs(w.n);
  if (w.epsilon == 0) {
    if (w.n > 0) return {Side::zeta, 1, 2 * m};
    if (w.n < 0) return {Side::eta, 0, 2 * m};
    return {Side::zeta, 1, 0};
  }
  if (w.n > 0) return {Side::zeta, 1, 2 * m - 1};
  return {Side::eta, 0, 2 * m + 1};
}

int stratum_length(StratumLabel w) { return stratum_zero_conditions(w).count; }

std::pair<MatrixLaurent, MatrixLaurent> nplus_decompose(const MatrixLaurent& u, StratumLabel w, bool minus_first) {
  if (part(u, Part::minus).max_norm() > 1e-12) throw std::invalid_argument("nplus_decompose: u must be analytic");
  const Mat2 u0 = u.coeff(0);
  if (std::abs(u0(0, 0) - 1.0) > 1e-12 || std::abs(u0(1, 1) - 1.0) > 1e-12 || std::abs(u0(1, 0)) > 1e-12)
    throw std::invalid_argument("nplus_decompose: u(0) must be unipotent upper triangular");
  const ScalarLaurent u11 = entry(u, 0, 0), u12 = entry(u, 0, 1), u21 = entry(u, 1, 0), u22 = entry(u, 1, 1);
  const int m = std::abs(w.n);
  if (w.epsilon == 0 && w.n == 0) return {MatrixLaurent::one(), u};

  MatrixLaurent um;
  if (w.epsilon == 0 && w.n > 0) {
    um = upper_unipotent(series_div(u12, minus_first ? u22 : u11, 2 * m - 1).restrict(0, 2 * m - 1));
  } else if (w.epsilon == 0) {
    um = lower_unipotent(series_div(u21, minus_first ? u11 : u22, 2 * m).restrict(1, 2 * m));
  } else if (w.n > 0) {
    um = lower_unipotent(series_div(u21, minus_first ? u11 : u22, 2 * m - 1).restrict(1, 2 * m - 1));
  } else {
    um = upper_unipotent(series_div(u12, minus_first ? u22 : u11, 2 * m).restrict(0, 2 * m));
  }
  const MatrixLaurent inv = adjugate(um);
  return {um, minus_first ? MatrixLaurent(inv * u) : MatrixLaurent(u * inv)};
}

MatrixLaurent stratum_synthesize(StratumLabel w, const RootParams& p, int trunc, StratumForm form) {
  const ZeroConditions z = stratum_zero_conditions(w);
  const std::vector<cplx>& v = z.side == Side::zeta ? p.zeta : p.eta;
  for (int k = 0; k < z.count && k < static_cast<int>(v.size()); ++k)
    if (v[static_cast<size_t>(k)] != cplx(0.0))
      throw std::invalid_argument(std::string("stratum_synthesize: ") + (z.side == Side::zeta ? "zeta_" : "eta_") +
                                  std::to_string(z.first + k) + " must vanish on stratum (" +
                                  std::to_string(w.epsilon) + ", " + std::to_string(w.n) + ")");
  const MatrixLaurent k1s = star(build_k1(p.eta)), k2 = build_k2(p.zeta);
  const MatrixLaurent e = p.chi.is_zero() ? MatrixLaurent::one() : build_diag(p.chi, std::max(trunc, p.chi.support()));
  if (form == StratumForm::literal || (w.epsilon == 0 && w.n <= 0)) return k1s * w_loop(w) * e * k2;
  if (w.epsilon == 0) return star(k1s * w_inverse(w) * e * k2);
  if (w.n <= 0) return w_loop(w) * k1s * e * k2;
  return k1s * e * k2 * w_loop(w);
}

namespace {

// P_{>=r} M_g P_{>=c} on columns c..c+2N-1, all reachable rows kept.
MatX shifted_section(const MatrixLaurent& g, int r, int c, int N) {
  const int cols = 2 * N;
  const int top = std::max(r, c + cols - 1 + 2 * std::max(0, g.max_deg()) + 2);
  const int rows = top - r + 1;
  MatX t = MatX::Zero(rows, cols);
  auto comp = [](int k) { return (k % 2 + 2) % 2 == 0 ? 1 : 0; };
  auto deg = [](int k) { return k >= 0 ? k / 2 : -((-k + 1) / 2); };
  for (int b = 0; b < cols; ++b) {
    const int k = c + b;
    for (int a = 0; a < rows; ++a) {
      const int kp = r + a;
      t(a, b) = g.coeff(deg(kp) - deg(k))(comp(kp), comp(k));
    }
  }
  return t;
}

int kernel_dim(const MatX& t, double rel_tol) {
  Eigen::BDCSVD<MatX> svd(t);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return static_cast<int>(t.cols());
  const double cut = rel_tol * std::max(1.0, sv(0));
  int k = static_cast<int>(t.cols()) - static_cast<int>(sv.size());
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) <= cut) ++k;
  return k;
}

}  // namespace

RelativePosition relative_position(const MatrixLaurent& g, int N, int window, double rel_tol) {
  RelativePosition p;
  int pis[2];
  for (int c = 0; c <= 1; ++c) {
    pis[c] = std::numeric_limits<int>::min();
    for (int r = c - window; r <= c + window + 1; ++r) {
      const int d = kernel_dim(shifted_section(g, r, c, N), rel_tol) -
                    kernel_dim(shifted_section(g, r, c + 1, N), rel_tol);
      if (d == 1) {
        pis[c] = r - 1;
        break;
      }
    }
    if (pis[c] == std::numeric_limits<int>::min()) return p;
  }
  p.pi0 = pis[0];
  p.pi1 = pis[1];
  p.valid = p.pi1 - 1 == -p.pi0 || p.pi1 == 1 - p.pi0;
  return p;
}

RelativePosition label_position(StratumLabel w) {
  RelativePosition p;
  p.valid = true;
  if (w.epsilon == 0) {
    p.pi0 = -2 * w.n;
    p.pi1 = 2 * w.n + 1;
  } else {
    p.pi0 = 1 - 2 * w.n;
    p.pi1 = 2 * w.n;
  }
  return p;
}

Classification classify_stratum(const MatrixLaurent& g, int N, int n_max, double sigma_tol) {
  auto sig = [](const MatrixLaurent& h, int n) {
    const MatrixLaurent h1 = shift_conjugate(h);
    return std::min(sigma_min(toeplitz_rect(h, n + std::max(0, h.max_deg()), n)),
                    sigma_min(toeplitz_rect(h1, n + std::max(0, h1.max_deg()), n)));
  };
  Classification c;
  bool confirmed = false;
  c.position = relative_position(g, N, 2 * n_max + 2);
  StratumLabel cand{};
  if (c.position.valid) {
    const int p0 = c.position.pi0;
    cand = (p0 % 2 + 2) % 2 == 0 ? StratumLabel{0, -p0 / 2} : StratumLabel{1, (1 - p0) / 2};
  }
  for (int e = 0; e <= 1; ++e)
    for (int n = -n_max; n <= n_max; ++n) {
      const StratumLabel w{e, n};
      for (bool left : {true, false}) {
        const MatrixLaurent h = left ? MatrixLaurent(w_inverse(w) * g) : MatrixLaurent(g * w_inverse(w));
        StratumScore s;
        s.label = w;
        s.left = left;
        s.sigma_N = sig(h, N);
        s.sigma_2N = sig(h, 2 * N);
        s.pass = s.sigma_N >= sigma_tol && s.sigma_2N >= sigma_tol && s.sigma_2N >= 0.5 * s.sigma_N;
        if (s.pass && c.position.valid && w == cand) confirmed = true;
        c.scores.push_back(s);
      }
    }
  if (!c.position.valid) {
    c.diagnostic = "classify_stratum: relative position not resolved within the window; loop unclassified";
  } else if (std::abs(cand.n) > n_max) {
    c.diagnostic = "classify_stratum: stratum (" + std::to_string(cand.epsilon) + ", " + std::to_string(cand.n) +
                   ") lies outside |n| <= " + std::to_string(n_max);
  } else if (!confirmed) {
    c.diagnostic = "classify_stratum: w^{-1} g and g w^{-1} are both ill-conditioned for the rank-selected label";
  } else {
    c.found = true;
    c.label = cand;
  }
  return c;
}

}  // namespace loopfactor
