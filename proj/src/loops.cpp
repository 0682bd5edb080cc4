#include "loopfactor/loops.hpp"

#include <string>

namespace loopfactor {

ScalarLaurent DiagExponent::plus() const {
  ScalarLaurent p(1, support());
  for (int j = 1; j <= support(); ++j) p.at(j) = chis[static_cast<size_t>(j - 1)];
  return p;
}

ScalarLaurent DiagExponent::minus() const { return -star(plus()); }

ScalarLaurent DiagExponent::laurent() const {
  ScalarLaurent c = ScalarLaurent::constant(cplx(0.0, chi0_im));
  c += plus();
  c += minus();
  return c;
}

bool DiagExponent::is_zero() const {
  if (chi0_im != 0.0) return false;
  for (const auto& c : chis)
    if (c != cplx(0.0)) return false;
  return true;
}

double a_factor(cplx zeta) { return 1.0 / std::sqrt(1.0 + std::norm(zeta)); }

MatrixLaurent zeta_factor(cplx zeta, int k) {
  const double a = a_factor(zeta);
  MatrixLaurent f(-k, k);
  f.at(0) += a * Mat2::Identity();
  f.at(-k)(0, 1) += a * zeta;
  f.at(k)(1, 0) += -a * std::conj(zeta);
  return f;
}

MatrixLaurent eta_factor(cplx eta, int i) {
  const double a = a_factor(eta);
  MatrixLaurent f(-i, i);
  f.at(0) += a * Mat2::Identity();
  f.at(i)(0, 1) += -a * std::conj(eta);
  f.at(-i)(1, 0) += a * eta;
  return f;
}

MatrixLaurent build_k2(const std::vector<cplx>& zeta) {
  MatrixLaurent g = MatrixLaurent::one();
  for (size_t k = 1; k <= zeta.size(); ++k) g = zeta_factor(zeta[k - 1], static_cast<int>(k)) * g;
  return g;
}

MatrixLaurent build_k1(const std::vector<cplx>& eta) {
  MatrixLaurent g = MatrixLaurent::one();
  for (size_t i = 0; i < eta.size(); ++i) g = eta_factor(eta[i], static_cast<int>(i)) * g;
  return g;
}

MatrixLaurent build_diag(const DiagExponent& chi, int trunc) {
  if (trunc < chi.support())
    throw std::invalid_argument("build_diag: truncation " + std::to_string(trunc) + " below chi support " +
                                std::to_string(chi.support()));
  const ScalarLaurent c = chi.laurent();
  return diag(exp_scalar(c, trunc), exp_scalar(-c, trunc));
}

MatrixLaurent assemble(const RootParams& p, int trunc) {
  MatrixLaurent g = star(build_k1(p.eta));
  if (!p.chi.is_zero()) g = g * build_diag(p.chi, std::max(trunc, p.chi.support()));
  return g * build_k2(p.zeta);
}

namespace {

void check_unitary(const MatrixLaurent& g, double tol, const char* who) {
  if (tol < 0.0 || g.empty()) return;
  const int m = grid_exponent_for(g.max_deg() - g.min_deg(), 6);
  const Su2Residual r = su2_residual(g, m);
  if (r.max() > tol)
    throw std::invalid_argument(std::string(who) + ": input is not SU(2)-valued (grid residual " +
                                std::to_string(r.max()) + ")");
}

// Leading coefficient of num/den at degree k, with den analytic and den(0) bounded away from 0.
cplx leading_ratio(const ScalarLaurent& num, const ScalarLaurent& den, int k, const char* who) {
  if (std::abs(den.coeff(0)) < 1e-13)
    throw std::domain_error(std::string(who) + ": denominator vanishes at z = 0");
  if (k < 0) return 0.0;
  return series_div(num.restrict(0, k), den.restrict(0, k), k).coeff(k);
}

}  // namespace

std::vector<cplx> recover_zeta(const MatrixLaurent& k2, const RecoverOptions& opt) {
  check_unitary(k2, opt.unitarity_tol, "recover_zeta");
  std::vector<cplx> zeta;
  MatrixLaurent cur = k2;
  for (int k = 1; k <= opt.n_max; ++k) {
    const ScalarLaurent c = part(entry(cur, 1, 0), Part::zero_plus);
    const ScalarLaurent d = part(entry(cur, 1, 1), Part::zero_plus);
    if (std::abs(d.coeff(0)) < 1e-13) throw std::domain_error("recover_zeta: d(0) vanishes");
    if (c.max_norm() < opt.tol) break;
    const cplx xi = leading_ratio(c, d, k, "recover_zeta");
    const cplx z = std::abs(xi) < opt.tol ? cplx(0.0) : -std::conj(xi);
    zeta.push_back(z);
    if (z != cplx(0.0)) cur = cur * star(zeta_factor(z, k));
  }
  return zeta;
}

std::vector<cplx> recover_eta(const MatrixLaurent& k1, const RecoverOptions& opt) {
  check_unitary(k1, opt.unitarity_tol, "recover_eta");
  std::vector<cplx> eta;
  MatrixLaurent cur = k1;
  for (int i = 0; i < opt.n_max; ++i) {
    const ScalarLaurent a = part(entry(cur, 0, 0), Part::zero_plus);
    const ScalarLaurent b = part(entry(cur, 0, 1), Part::zero_plus);
    if (std::abs(a.coeff(0)) < 1e-13) throw std::domain_error("recover_eta: a(0) vanishes");
    if (b.max_norm() < opt.tol) break;
    const cplx xi = leading_ratio(b, a, i, "recover_eta");
    const cplx e = std::abs(xi) < opt.tol ? cplx(0.0) : -std::conj(xi);
    eta.push_back(e);
    if (e != cplx(0.0)) cur = cur * star(eta_factor(e, i));
  }
  return eta;
}

ScalarLaurent x_of_k2(const MatrixLaurent& k2) {
  const ScalarLaurent c = entry(k2, 1, 0), d = entry(k2, 1, 1);
  const int n = std::max(0, c.max_deg());
  const ScalarLaurent q = star(c) * series_inv(part(d, Part::zero_plus), n);
  return star(-part(q, Part::minus));
}

ScalarLaurent y_of_k1(const MatrixLaurent& k1) {
  const ScalarLaurent a = entry(k1, 0, 0), b = entry(k1, 0, 1);
  const int n = std::max(0, b.max_deg());
  const ScalarLaurent q = star(b) * series_inv(part(a, Part::zero_plus), n);
  return star(-part(q, Part::minus_zero));
}

cplx singular_inner(const SingularInnerSpec& spec, cplx z, bool normalized) {
  if (std::abs(z) >= 1.0) throw std::domain_error("singular_inner: |z| must be < 1");
  cplx s = 0.0, s0 = 0.0;
  for (const auto& [theta, nu] : spec.atoms) {
    if (nu <= 0.0) throw std::invalid_argument("singular_inner: masses must be positive");
    const cplx e = std::polar(1.0, theta);
    s += nu * (z + e) / (z - e);
    s0 += -nu;
  }
  return normalized ? std::exp(s - s0) : std::exp(s);
}

ScalarLaurent singular_inner_taylor(const SingularInnerSpec& spec, int order) {
  // (z + e)/(z - e) = -1 - 2 sum_{n>=1} (z/e)^n
  ScalarLaurent phi(0, order);
  for (const auto& [theta, nu] : spec.atoms)
    for (int n = 1; n <= order; ++n) phi.at(n) += -2.0 * nu * std::polar(1.0, -n * theta);
  return series_exp(phi, order);
}

MatrixLaurent twist_by_inner(const MatrixLaurent& k2, const SingularInnerSpec& spec, int order) {
  const ScalarLaurent lam = singular_inner_taylor(spec, order);
  return diag(star(lam), lam) * k2;
}

}  // namespace loopfactor
