#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace loopfactor {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

template <class T>
struct CoeffTraits;

template <>
struct CoeffTraits<cplx> {
  static cplx zero() { return {0.0, 0.0}; }
  static cplx one() { return {1.0, 0.0}; }
  static cplx adjoint(const cplx& c) { return std::conj(c); }
  static double norm(const cplx& c) { return std::abs(c); }
  static bool finite(const cplx& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }
};

template <>
struct CoeffTraits<Mat2> {
  static Mat2 zero() { return Mat2::Zero(); }
  static Mat2 one() { return Mat2::Identity(); }
  static Mat2 adjoint(const Mat2& m) { return m.adjoint(); }
  static double norm(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }
  static bool finite(const Mat2& m) { return m.allFinite(); }
};

/// Laurent polynomial sum_{n=lo}^{hi} c_n z^n with dense storage over its declared support.
/// An empty support denotes the zero function.
template <class T>
class Laurent {
 public:
  using Traits = CoeffTraits<T>;

  Laurent() = default;

  /// Zero-filled polynomial with declared support [lo, hi]; hi < lo gives the empty support.
  Laurent(int lo, int hi) : lo_(lo) {
    if (hi >= lo) c_.assign(static_cast<size_t>(hi - lo + 1), Traits::zero());
  }

  static Laurent constant(const T& v) {
    Laurent f(0, 0);
    f.c_[0] = v;
    return f;
  }

  static Laurent monomial(int d, const T& v) {
    Laurent f(d, d);
    f.c_[0] = v;
    return f;
  }

  static Laurent one() { return constant(Traits::one()); }

  bool empty() const { return c_.empty(); }
  int min_deg() const { return empty() ? 0 : lo_; }
  int max_deg() const { return empty() ? -1 : lo_ + static_cast<int>(c_.size()) - 1; }
  int size() const { return static_cast<int>(c_.size()); }
  bool in_support(int d) const { return !empty() && d >= lo_ && d <= max_deg(); }

  /// Coefficient of z^d; zero outside the support.
  T coeff(int d) const { return in_support(d) ? c_[static_cast<size_t>(d - lo_)] : Traits::zero(); }

  /// Mutable access inside the declared support.
  T& at(int d) {
    if (!in_support(d)) throw std::out_of_range("Laurent::at: degree " + std::to_string(d) + " outside support");
    return c_[static_cast<size_t>(d - lo_)];
  }

  /// Widens the declared support to contain [lo, hi].
  void reserve_support(int lo, int hi) {
    if (hi < lo) return;
    if (empty()) {
      *this = Laurent(lo, hi);
      return;
    }
    int nlo = std::min(lo, lo_), nhi = std::max(hi, max_deg());
    if (nlo == lo_ && nhi == max_deg()) return;
    Laurent g(nlo, nhi);
    for (int d = lo_; d <= max_deg(); ++d) g.at(d) = coeff(d);
    *this = std::move(g);
  }

  void set(int d, const T& v) {
    reserve_support(d, d);
    at(d) = v;
  }

  /// Restriction to degrees in [lo, hi] (support intersected).
  Laurent restrict(int lo, int hi) const {
    int a = std::max(lo, min_deg()), b = std::min(hi, max_deg());
    Laurent g(a, b);
    for (int d = a; d <= b; ++d) g.at(d) = coeff(d);
    return g;
  }

  /// Drops leading/trailing coefficients with norm <= tol.
  Laurent trimmed(double tol = 0.0) const {
    int a = min_deg(), b = max_deg();
    while (a <= b && Traits::norm(coeff(a)) <= tol) ++a;
    while (b >= a && Traits::norm(coeff(b)) <= tol) --b;
    return restrict(a, b);
  }

  /// Largest coefficient norm.
  double max_norm() const {
    double m = 0.0;
    for (const auto& v : c_) m = std::max(m, Traits::norm(v));
    return m;
  }

  /// Sum of coefficient norms.
  double l1_norm() const {
    double m = 0.0;
    for (const auto& v : c_) m += Traits::norm(v);
    return m;
  }

  bool all_finite() const {
    return std::all_of(c_.begin(), c_.end(), [](const T& v) { return Traits::finite(v); });
  }

  template <class F>
  Laurent map(F&& f) const {
    Laurent g(min_deg(), max_deg());
    for (int d = min_deg(); d <= max_deg(); ++d) g.at(d) = f(coeff(d));
    return g;
  }

  Laurent& operator+=(const Laurent& o) {
    if (o.empty()) return *this;
    reserve_support(o.min_deg(), o.max_deg());
    for (int d = o.min_deg(); d <= o.max_deg(); ++d) at(d) += o.coeff(d);
    return *this;
  }

  Laurent& operator-=(const Laurent& o) {
    if (o.empty()) return *this;
    reserve_support(o.min_deg(), o.max_deg());
    for (int d = o.min_deg(); d <= o.max_deg(); ++d) at(d) -= o.coeff(d);
    return *this;
  }

  Laurent operator-() const {
    return map([](const T& v) { return T(-v); });
  }

  friend Laurent operator+(Laurent a, const Laurent& b) { return a += b; }
  friend Laurent operator-(Laurent a, const Laurent& b) { return a -= b; }

  /// Coefficient convolution; support is the sum of supports.
  friend Laurent operator*(const Laurent& a, const Laurent& b) {
    if (a.empty() || b.empty()) return Laurent();
    Laurent r(a.min_deg() + b.min_deg(), a.max_deg() + b.max_deg());
    for (int i = a.min_deg(); i <= a.max_deg(); ++i) {
      const T ai = a.coeff(i);
      for (int j = b.min_deg(); j <= b.max_deg(); ++j) r.at(i + j) += ai * b.coeff(j);
    }
    return r;
  }

  friend Laurent operator*(const cplx& s, const Laurent& a) {
    return a.map([&](const T& v) { return T(s * v); });
  }

  /// Multiplication by z^k.
  Laurent shifted(int k) const {
    Laurent g = *this;
    g.lo_ += k;
    return g;
  }

 private:
  int lo_ = 0;
  std::vector<T> c_;
};

using ScalarLaurent = Laurent<cplx>;
using MatrixLaurent = Laurent<Mat2>;

enum class Part { minus, zero, plus, zero_plus, minus_zero };

/// f*(z) = sum (f_{-n})^* z^n; for matrices the coefficient adjoint (pointwise adjoint on |z|=1).
template <class T>
Laurent<T> star(const Laurent<T>& f) {
  Laurent<T> g(-f.max_deg(), -f.min_deg());
  for (int d = f.min_deg(); d <= f.max_deg(); ++d) g.at(-d) = CoeffTraits<T>::adjoint(f.coeff(d));
  return g;
}

/// Fourier projection onto negative, zero, positive (or combined) degrees.
template <class T>
Laurent<T> part(const Laurent<T>& f, Part which) {
  constexpr int big = 1 << 29;
  switch (which) {
    case Part::minus: return f.restrict(-big, -1);
    case Part::zero: return f.restrict(0, 0);
    case Part::plus: return f.restrict(1, big);
    case Part::zero_plus: return f.restrict(0, big);
    case Part::minus_zero: return f.restrict(-big, 0);
  }
  return f;
}

/// max_n |a_n - b_n| over the union of supports.
template <class T>
double max_coeff_diff(const Laurent<T>& a, const Laurent<T>& b) {
  return (a - b).max_norm();
}

// Scalar/matrix glue.
ScalarLaurent entry(const MatrixLaurent& g, int i, int j);
MatrixLaurent from_entries(const ScalarLaurent& a, const ScalarLaurent& b, const ScalarLaurent& c,
                           const ScalarLaurent& d);
MatrixLaurent diag(const ScalarLaurent& a, const ScalarLaurent& d);
MatrixLaurent scalar_times(const ScalarLaurent& s, const MatrixLaurent& g);
MatrixLaurent constant_matrix(const Mat2& m);
ScalarLaurent det(const MatrixLaurent& g);

/// Value at a point z != 0.
cplx evaluate(const ScalarLaurent& f, cplx z);
Mat2 evaluate(const MatrixLaurent& g, cplx z);

/// Values at the 2^m roots of unity exp(2 pi i k / 2^m), k = 0..2^m-1, via FFT.
/// Throws std::invalid_argument when 2^m <= max_deg - min_deg.
std::vector<cplx> sample_grid(const ScalarLaurent& f, int m);
std::vector<Mat2> sample_grid(const MatrixLaurent& g, int m);

/// Inverse of sample_grid: coefficients on [lo, hi] from 2^m samples.
ScalarLaurent from_samples(const std::vector<cplx>& values, int lo, int hi);
MatrixLaurent from_samples(const std::vector<Mat2>& values, int lo, int hi);

/// Number of exponential-series terms K with exp(L) L^{K+1}/(K+1)! <= bound, L = ||chi||_1.
int exp_terms_needed(double l1, double bound = 1e-14);

/// Partial exponential series of a Laurent polynomial, degrees |n| > trunc_order discarded.
ScalarLaurent exp_scalar(const ScalarLaurent& chi, int trunc_order);

/// Power-series exponential of an analytic phi, degrees 0..order.
ScalarLaurent series_exp(const ScalarLaurent& phi, int order);

/// Power-series reciprocal of an analytic den (den(0) must not vanish), degrees 0..order.
ScalarLaurent series_inv(const ScalarLaurent& den, int order);

/// Formal division num/den with den analytic and den(0) != 0; result on [num.min_deg, order].
ScalarLaurent series_div(const ScalarLaurent& num, const ScalarLaurent& den, int order);

/// Grid residuals of the SU(2) conditions: max ||g^* g - I|| and max |det g - 1|.
struct Su2Residual {
  double unitarity = 0.0;
  double determinant = 0.0;
  double max() const { return std::max(unitarity, determinant); }
};
Su2Residual su2_residual(const MatrixLaurent& g, int m);

/// Sufficient grid exponent m for a support (2^m > span), at least min_m.
int grid_exponent_for(int span, int min_m = 4);

}  // namespace loopfactor
