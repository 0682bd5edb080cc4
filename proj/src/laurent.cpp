#include "loopfactor/laurent.hpp"

#include <fftw3.h>

#include <mutex>

namespace loopfactor {

namespace {

// Plan creation in FFTW is not thread safe; execution on distinct arrays is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

// In-place DFT of length n; sign = FFTW_BACKWARD computes sum_j x_j e^{+2 pi i jk/n}.
void dft(std::vector<cplx>& x, int sign) {
  const int n = static_cast<int>(x.size());
  auto* p = reinterpret_cast<fftw_complex*>(x.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft_1d(n, p, p, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(fftw_mutex());
  fftw_destroy_plan(plan);
}

int wrap(int d, int n) { return ((d % n) + n) % n; }

}  // namespace

ScalarLaurent entry(const MatrixLaurent& g, int i, int j) {
  ScalarLaurent s(g.min_deg(), g.max_deg());
  for (int d = g.min_deg(); d <= g.max_deg(); ++d) s.at(d) = g.coeff(d)(i, j);
  return s;
}

MatrixLaurent from_entries(const ScalarLaurent& a, const ScalarLaurent& b, const ScalarLaurent& c,
                           const ScalarLaurent& d) {
  const ScalarLaurent* e[4] = {&a, &b, &c, &d};
  int lo = 1 << 29, hi = -(1 << 29);
  for (auto* p : e) {
    if (p->empty()) continue;
    lo = std::min(lo, p->min_deg());
    hi = std::max(hi, p->max_deg());
  }
  if (hi < lo) return MatrixLaurent();
  MatrixLaurent g(lo, hi);
  for (int k = lo; k <= hi; ++k) {
    Mat2& m = g.at(k);
    m(0, 0) = a.coeff(k);
    m(0, 1) = b.coeff(k);
    m(1, 0) = c.coeff(k);
    m(1, 1) = d.coeff(k);
  }
  return g;
}

MatrixLaurent diag(const ScalarLaurent& a, const ScalarLaurent& d) {
  return from_entries(a, ScalarLaurent(), ScalarLaurent(), d);
}

MatrixLaurent scalar_times(const ScalarLaurent& s, const MatrixLaurent& g) {
  if (s.empty() || g.empty()) return MatrixLaurent();
  MatrixLaurent r(s.min_deg() + g.min_deg(), s.max_deg() + g.max_deg());
  for (int i = s.min_deg(); i <= s.max_deg(); ++i)
    for (int j = g.min_deg(); j <= g.max_deg(); ++j) r.at(i + j) += s.coeff(i) * g.coeff(j);
  return r;
}

MatrixLaurent constant_matrix(const Mat2& m) { return MatrixLaurent::constant(m); }

ScalarLaurent det(const MatrixLaurent& g) {
  return entry(g, 0, 0) * entry(g, 1, 1) - entry(g, 0, 1) * entry(g, 1, 0);
}

cplx evaluate(const ScalarLaurent& f, cplx z) {
  cplx s = 0.0;
  for (int d = f.max_deg(); d >= f.min_deg(); --d) s = s * z + f.coeff(d);
  return f.empty() ? cplx(0.0) : s * std::pow(z, f.min_deg());
}

Mat2 evaluate(const MatrixLaurent& g, cplx z) {
  Mat2 s = Mat2::Zero();
  for (int d = g.max_deg(); d >= g.min_deg(); --d) s = s * z + g.coeff(d);
  return g.empty() ? Mat2::Zero() : Mat2(s * std::pow(z, g.min_deg()));
}

std::vector<cplx> sample_grid(const ScalarLaurent& f, int m) {
  if (m < 0 || m > 26) throw std::invalid_argument("sample_grid: grid exponent out of range");
  const int n = 1 << m;
  if (!f.empty() && n <= f.max_deg() - f.min_deg())
    throw std::invalid_argument("sample_grid: grid of 2^" + std::to_string(m) + " points too small for support [" +
                                std::to_string(f.min_deg()) + ", " + std::to_string(f.max_deg()) + "]");
  std::vector<cplx> x(static_cast<size_t>(n), cplx(0.0));
  for (int d = f.min_deg(); d <= f.max_deg(); ++d) x[static_cast<size_t>(wrap(d, n))] += f.coeff(d);
  dft(x, FFTW_BACKWARD);
  return x;
}

std::vector<Mat2> sample_grid(const MatrixLaurent& g, int m) {
  std::vector<Mat2> out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      auto v = sample_grid(entry(g, i, j), m);
      if (out.empty()) out.assign(v.size(), Mat2::Zero());
      for (size_t k = 0; k < v.size(); ++k) out[k](i, j) = v[k];
    }
  return out;
}

ScalarLaurent from_samples(const std::vector<cplx>& values, int lo, int hi) {
  const int n = static_cast<int>(values.size());
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("from_samples: sample count must be a power of two");
  if (hi >= lo && hi - lo >= n) throw std::invalid_argument("from_samples: support wider than grid");
  std::vector<cplx> x = values;
  dft(x, FFTW_FORWARD);
  ScalarLaurent f(lo, hi);
  for (int d = lo; d <= hi; ++d) f.at(d) = x[static_cast<size_t>(wrap(d, n))] / static_cast<double>(n);
  return f;
}

MatrixLaurent from_samples(const std::vector<Mat2>& values, int lo, int hi) {
  ScalarLaurent e[2][2];
  std::vector<cplx> v(values.size());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      for (size_t k = 0; k < values.size(); ++k) v[k] = values[k](i, j);
      e[i][j] = from_samples(v, lo, hi);
    }
  MatrixLaurent g = from_entries(e[0][0], e[0][1], e[1][0], e[1][1]);
  if (g.empty() && hi >= lo) g = MatrixLaurent(lo, hi);
  return g;
}

int exp_terms_needed(double l1, double bound) {
  if (l1 <= 0.0) return 0;
  // log of exp(L) L^{K+1} / (K+1)!
  const double logl = std::log(l1);
  for (int K = 0; K < 100000; ++K) {
    double lt = l1 + (K + 1) * logl - std::lgamma(static_cast<double>(K + 2));
    if (lt <= std::log(bound)) return K;
  }
  throw std::invalid_argument("exp_terms_needed: exponent norm too large");
}

ScalarLaurent exp_scalar(const ScalarLaurent& chi, int trunc_order) {
  if (trunc_order < 0) throw std::invalid_argument("exp_scalar: negative truncation order");
  if (!chi.all_finite()) throw std::invalid_argument("exp_scalar: non-finite coefficient");
  const int K = exp_terms_needed(chi.l1_norm());
  const int width = std::max(std::abs(chi.min_deg()), std::abs(chi.max_deg()));
  ScalarLaurent sum = ScalarLaurent::constant(1.0);
  ScalarLaurent term = sum;
  for (int k = 1; k <= K; ++k) {
    term = (1.0 / k) * (term * chi);
    // Degrees outside this window cannot re-enter [-trunc, trunc] in the remaining K-k factors.
    const int reach = trunc_order + (K - k) * width;
    term = term.restrict(-reach, reach);
    sum += term;
  }
  return sum.restrict(-trunc_order, trunc_order);
}

ScalarLaurent series_exp(const ScalarLaurent& phi, int order) {
  if (phi.min_deg() < 0 && part(phi, Part::minus).max_norm() > 0.0)
    throw std::invalid_argument("series_exp: argument must be analytic");
  ScalarLaurent e(0, order);
  e.at(0) = std::exp(phi.coeff(0));
  // n e_n = sum_{k=1}^n k phi_k e_{n-k}
  for (int n = 1; n <= order; ++n) {
    cplx s = 0.0;
    for (int k = 1; k <= n; ++k) s += static_cast<double>(k) * phi.coeff(k) * e.coeff(n - k);
    e.at(n) = s / static_cast<double>(n);
  }
  return e;
}

ScalarLaurent series_inv(const ScalarLaurent& den, int order) {
  const cplx d0 = den.coeff(0);
  if (std::abs(d0) < 1e-13) throw std::domain_error("series_inv: denominator constant term vanishes");
  const double neg = part(den, Part::minus).max_norm();
  if (neg > 1e-10 * std::max(1.0, den.max_norm()))
    throw std::invalid_argument("series_inv: denominator must be analytic");
  ScalarLaurent q(0, order);
  for (int n = 0; n <= order; ++n) {
    cplx s = (n == 0) ? cplx(1.0) : cplx(0.0);
    for (int k = 1; k <= n; ++k) s -= den.coeff(k) * q.coeff(n - k);
    q.at(n) = s / d0;
  }
  return q;
}

ScalarLaurent series_div(const ScalarLaurent& num, const ScalarLaurent& den, int order) {
  if (num.empty()) return ScalarLaurent();
  const int lo = num.min_deg();
  if (order < lo) return ScalarLaurent();
  ScalarLaurent inv = series_inv(den, order - lo);
  return (num * inv).restrict(lo, order);
}

Su2Residual su2_residual(const MatrixLaurent& g, int m) {
  Su2Residual r;
  for (const Mat2& v : sample_grid(g, m)) {
    r.unitarity = std::max(r.unitarity, (v.adjoint() * v - Mat2::Identity()).cwiseAbs().maxCoeff());
    r.determinant = std::max(r.determinant, std::abs(v.determinant() - 1.0));
  }
  return r;
}

int grid_exponent_for(int span, int min_m) {
  int m = min_m;
  while ((1 << m) <= span) ++m;
  return m;
}

}  // namespace loopfactor
