#include "loopfactor/operators.hpp"

#include <chrono>
#include <limits>

namespace loopfactor {

namespace {

double fro(const MatX& m) { return m.size() == 0 ? 0.0 : m.norm(); }

// Scalar Toeplitz section: entry (i, j) = f_{i-j}.
MatX scalar_toeplitz_rect(const ScalarLaurent& f, int rows, int cols) {
  MatX t = MatX::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) t(i, j) = f.coeff(i - j);
  return t;
}

// C(g) P_N with all of its nonzero rows z^{-1}, ..., z^{-r}, r = max(0, -min_deg).
MatX hankel_C_rect(const MatrixLaurent& g, int rows, int cols) {
  MatX c = MatX::Zero(2 * rows, 2 * cols);
  for (int i = 1; i <= rows; ++i)
    for (int j = 0; j < cols; ++j) c.block<2, 2>(2 * (i - 1), 2 * j) = g.coeff(-i - j);
  return c;
}

double real_det(const MatX& m) { return m.rows() == 0 ? 1.0 : det_trunc(m).value.real(); }

}  // namespace

long long now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double seconds_since(long long start_ns) { return static_cast<double>(now_ns() - start_ns) * 1e-9; }

IdentityReport make_report(std::string id, int N, double lhs, double rhs, double tol, double seconds) {
  IdentityReport r;
  r.id = std::move(id);
  r.N = N;
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_err = std::abs(lhs - rhs);
  r.rel_err = std::abs(rhs) > 1e-300 ? r.abs_err / std::abs(rhs) : r.abs_err;
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) r.abs_err = r.rel_err = std::numeric_limits<double>::infinity();
  r.tol = tol;
  r.pass = r.rel_err <= tol;
  r.seconds = seconds;
  return r;
}

MatX toeplitz_rect(const MatrixLaurent& g, int rows, int cols) {
  MatX t = MatX::Zero(2 * rows, 2 * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = std::max(0, i - g.max_deg()); j < cols && i - j >= g.min_deg(); ++j)
      t.block<2, 2>(2 * i, 2 * j) = g.coeff(i - j);
  return t;
}

OperatorTrunc toeplitz_trunc(const MatrixLaurent& g, int N) {
  if (N < 1) throw std::invalid_argument("toeplitz_trunc: N must be positive");
  return {OpKind::toeplitz, N, toeplitz_rect(g, N, N)};
}

MatrixLaurent shift_conjugate(const MatrixLaurent& g) {
  return from_entries(entry(g, 0, 0), entry(g, 0, 1).shifted(1), entry(g, 1, 0).shifted(-1), entry(g, 1, 1));
}

OperatorTrunc shifted_toeplitz_trunc(const MatrixLaurent& g, int N) {
  if (N < 1) throw std::invalid_argument("shifted_toeplitz_trunc: N must be positive");
  return {OpKind::shifted_toeplitz, N, toeplitz_rect(shift_conjugate(g), N, N)};
}

OperatorTrunc hankel_trunc(const MatrixLaurent& g, int N, HankelSide which) {
  if (N < 1) throw std::invalid_argument("hankel_trunc: N must be positive");
  if (which == HankelSide::C) return {OpKind::hankel_C, N, hankel_C_rect(g, N, N)};
  MatX b = MatX::Zero(2 * N, 2 * N);
  for (int i = 0; i < N; ++i)
    for (int j = 1; j <= N; ++j) b.block<2, 2>(2 * i, 2 * (j - 1)) = g.coeff(i + j);
  return {OpKind::hankel_B, N, b};
}

OperatorTrunc scalar_hankel_product_trunc(const ScalarLaurent& x, int N) {
  if (N < 1) throw std::invalid_argument("scalar_hankel_product_trunc: N must be positive");
  if (part(x, Part::minus).max_norm() > 0.0)
    throw std::invalid_argument("scalar_hankel_product_trunc: symbol must be analytic");
  const int top = x.max_deg();
  MatX m = MatX::Zero(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      cplx s = 0.0;
      for (int n = 1; i + n <= top && j + n <= top; ++n) s += x.coeff(i + n) * std::conj(x.coeff(j + n));
      m(i, j) = s;
    }
  return {OpKind::scalar_hankel, N, m};
}

DetResult det_trunc(const MatX& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("det_trunc: matrix must be square");
  DetResult r;
  if (m.rows() == 0) {
    r.value = 1.0;
    return r;
  }
  Eigen::PartialPivLU<MatX> lu(m);
  const MatX& f = lu.matrixLU();
  double log_abs = 0.0;
  cplx phase = static_cast<double>(lu.permutationP().determinant());
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const cplx p = f(i, i);
    if (p == cplx(0.0)) {
      r.value = 0.0;
      r.log_abs = -std::numeric_limits<double>::infinity();
      r.phase = 1.0;
      return r;
    }
    log_abs += std::log(std::abs(p));
    phase *= p / std::abs(p);
  }
  r.log_abs = log_abs;
  r.phase = phase;
  r.value = phase * std::exp(log_abs);
  return r;
}

DetResult det_trunc(const OperatorTrunc& t) { return det_trunc(t.entries); }

double gram_det(const MatrixLaurent& g, int N) {
  const MatX t = toeplitz_rect(g, N + std::max(0, g.max_deg()), N);
  return real_det(t.adjoint() * t);
}

double shifted_gram_det(const MatrixLaurent& g, int N) { return gram_det(shift_conjugate(g), N); }

double hankel_defect_det(const MatrixLaurent& g, int N) {
  const int r = std::max(0, -g.min_deg());
  const MatX c = hankel_C_rect(g, r, N);
  return real_det(MatX::Identity(2 * N, 2 * N) - c.adjoint() * c);
}

std::vector<IdentityReport> verify_planch(const std::vector<cplx>& params, Side side, int N, double tol) {
  const long long t0 = now_ns();
  const bool zeta = side == Side::zeta;
  const MatrixLaurent k = zeta ? build_k2(params) : build_k1(params);
  double rhs = 1.0;
  for (size_t i = 0; i < params.size(); ++i) {
    const int power = zeta ? static_cast<int>(i) + 1 : static_cast<int>(i);
    rhs *= std::pow(1.0 + std::norm(params[i]), -power);
  }
  const ScalarLaurent s = zeta ? x_of_k2(k) : y_of_k1(k);
  const OperatorTrunc h = scalar_hankel_product_trunc(s, N);
  const double bdet = real_det(MatX::Identity(N, N) + h.entries);
  const std::string pre = zeta ? "planch.zeta." : "planch.eta.";
  const double secs = seconds_since(t0);
  return {make_report(pre + "gram", N, gram_det(k, N), rhs, tol, secs),
          make_report(pre + "hankel_defect", N, hankel_defect_det(k, N), rhs, tol, secs),
          make_report(pre + "scalar_hankel", N, 1.0 / bdet, rhs, tol, secs)};
}

ToeplitzRhs toeplitz_rhs(const RootParams& p) {
  ToeplitzRhs r;
  for (size_t i = 0; i < p.eta.size(); ++i) {
    const double t = 1.0 + std::norm(p.eta[i]);
    r.det_a *= std::pow(t, -static_cast<double>(i));
    r.det_a1 *= std::pow(t, -static_cast<double>(i + 1));
    r.a0sq /= t;
  }
  for (size_t j = 0; j < p.chi.chis.size(); ++j) {
    const double e = std::exp(-2.0 * static_cast<double>(j + 1) * std::norm(p.chi.chis[j]));
    r.det_a *= e;
    r.det_a1 *= e;
  }
  for (size_t k = 0; k < p.zeta.size(); ++k) {
    const double t = 1.0 + std::norm(p.zeta[k]);
    r.det_a *= std::pow(t, -static_cast<double>(k + 1));
    r.det_a1 *= std::pow(t, -static_cast<double>(k));
    r.a0sq *= t;
  }
  return r;
}

std::vector<IdentityReport> verify_toeplitz_identities(const RootParams& p, int N, int exp_trunc, double tol) {
  const MatrixLaurent g = assemble(p, exp_trunc);
  const ToeplitzRhs rhs = toeplitz_rhs(p);
  std::vector<IdentityReport> out;
  for (int n : {N, 2 * N}) {
    const long long t0 = now_ns();
    const double da = gram_det(g, n), da1 = shifted_gram_det(g, n);
    const double secs = seconds_since(t0);
    out.push_back(make_report("toeplitz.det_A", n, da, rhs.det_a, tol, secs));
    out.push_back(make_report("toeplitz.det_A1", n, da1, rhs.det_a1, tol, secs));
    out.push_back(make_report("toeplitz.a0_squared", n, da1 / da, rhs.a0sq, tol, secs));
  }
  return out;
}

double sigma_min(const MatX& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<MatX> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

std::vector<IdentityReport> verify_operator_factorization(const RootParams& p, int N, int exp_trunc,
                                                          double tol_central, double tol_hankel) {
  const long long t0 = now_ns();
  const int T = std::max(exp_trunc, p.chi.support());
  const ScalarLaurent cm = p.chi.minus(), cp = p.chi.plus();
  const cplx e0 = std::exp(cplx(0.0, p.chi.chi0_im));
  const MatrixLaurent f = star(build_k1(p.eta)) * diag(exp_scalar(cm, T), exp_scalar(-cm, T));
  const MatrixLaurent m = diag(ScalarLaurent::constant(e0), ScalarLaurent::constant(1.0 / e0));
  const MatrixLaurent k2 = build_k2(p.zeta);
  const MatrixLaurent h = diag(exp_scalar(cp, T), exp_scalar(-cp, T)) * k2;
  const MatrixLaurent g = assemble(p, T);

  std::vector<IdentityReport> out;
  auto central = [&](const MatrixLaurent& gg, const MatrixLaurent& ff, const MatrixLaurent& hh, const char* id) {
    const int margin = std::max({std::abs(std::min(0, ff.min_deg())), std::max(0, hh.max_deg()),
                                 std::max(std::abs(gg.min_deg()), std::abs(gg.max_deg()))});
    const int c = N - margin;
    double res = 0.0;
    if (c > 0) {
      const MatX lhs = toeplitz_rect(gg, N, N);
      const MatX rhs = toeplitz_rect(ff, N, N) * toeplitz_rect(m, N, N) * toeplitz_rect(hh, N, N);
      res = fro((lhs - rhs).topLeftCorner(2 * c, 2 * c));
    } else {
      res = std::numeric_limits<double>::infinity();
    }
    out.push_back(make_report(id, N, res, 0.0, tol_central, seconds_since(t0)));
  };
  central(g, f, h, "opfact.central_A");
  central(shift_conjugate(g), shift_conjugate(f), shift_conjugate(h), "opfact.central_A1");

  const MatrixLaurent mh = m * h;
  const MatX bc = hankel_trunc(f, N, HankelSide::B).entries * hankel_trunc(mh, N, HankelSide::C).entries;
  out.push_back(make_report("opfact.hankel_product", N, fro(bc), 0.0, tol_hankel, seconds_since(t0)));

  const double s1 = sigma_min(toeplitz_rect(mh, N, N)), s2 = sigma_min(toeplitz_rect(mh, 2 * N, 2 * N));
  IdentityReport inj = make_report("opfact.injective_sigma_min", 2 * N, s2, s1, 1e-2, seconds_since(t0));
  inj.pass = inj.pass && s2 >= 1e-6;
  out.push_back(inj);
  return out;
}

int degree_from_samples(const std::vector<cplx>& v, double unimodular_tol, double max_step) {
  if (v.size() < 2) throw std::invalid_argument("degree_from_samples: need at least two samples");
  double total = 0.0;
  for (size_t k = 0; k < v.size(); ++k) {
    if (std::abs(std::abs(v[k]) - 1.0) > unimodular_tol)
      throw std::invalid_argument("degree_from_samples: symbol is not unimodular on the grid");
    const double step = std::arg(v[(k + 1) % v.size()] / v[k]);
    if (std::abs(step) >= max_step) throw std::invalid_argument("degree_from_samples: grid too coarse");
    total += step;
  }
  return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

int scalar_degree(const ScalarLaurent& lambda, int m) { return degree_from_samples(sample_grid(lambda, m)); }

int toeplitz_index(const ScalarLaurent& lambda, int N, double rel_tol) {
  auto kernel_dim = [&](const ScalarLaurent& f) {
    const MatX t = scalar_toeplitz_rect(f, N + std::max(0, f.max_deg()), N);
    Eigen::BDCSVD<MatX> svd(t);
    const auto& s = svd.singularValues();
    const double top = s.size() ? s(0) : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > rel_tol * top) ++rank;
    return N - rank;
  };
  return kernel_dim(lambda) - kernel_dim(star(lambda));
}

double psd_range_residual(const MatX& A, const MatX& B, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<MatX> es(A + B);
  const auto& ev = es.eigenvalues();
  const double top = ev.size() ? std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1))) : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > rel_tol * top) keep.push_back(i);
  const Eigen::Index n = A.rows(), r = static_cast<Eigen::Index>(keep.size());
  MatX q(n, r);
  for (Eigen::Index k = 0; k < r; ++k) q.col(k) = es.eigenvectors().col(keep[static_cast<size_t>(k)]);
  MatX span(n, 2 * r);
  span << q, A * q;
  Eigen::ColPivHouseholderQR<MatX> qr(span);
  qr.setThreshold(rel_tol);
  const Eigen::Index rank = qr.rank();
  const MatX basis = MatX(qr.householderQ()).leftCols(rank);
  const MatX resid = A - basis * (basis.adjoint() * A);
  return resid.size() ? resid.cwiseAbs().maxCoeff() : 0.0;
}

std::vector<double> inverse_hankel_spectrum(const ScalarLaurent& x, int N) {
  const MatX h = scalar_hankel_product_trunc(x, N).entries;
  Eigen::SelfAdjointEigenSolver<MatX> es(MatX::Identity(N, N) + h, Eigen::EigenvaluesOnly);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(1.0 / es.eigenvalues()(i));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace loopfactor
