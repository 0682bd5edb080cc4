#pragma once

#include <gmpxx.h>

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "loopfactor/laurent.hpp"
#include "loopfactor/operators.hpp"

namespace loopfactor {

using Rational = mpq_class;

/// Default cap on n / order for exact expansions.
inline constexpr int kSymbolicBound = 10;

enum class ZetaSign { minus, plus };

/// Monomial in commuting zeta_k^-, zeta_k^+: sorted (key, exponent) pairs, key = 2k + (plus ? 1 : 0).
using Monomial = std::vector<std::pair<int, int>>;

inline int zeta_key(int k, ZetaSign s) { return 2 * k + (s == ZetaSign::plus ? 1 : 0); }

class CommPoly {
 public:
  CommPoly() = default;
  static CommPoly constant(const Rational& q);
  static CommPoly var(int k, ZetaSign s);

  const std::map<Monomial, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  size_t size() const { return terms_.size(); }
  Rational coeff(const Monomial& m) const;
  void add_term(const Monomial& m, const Rational& q);

  CommPoly& operator+=(const CommPoly& o);
  CommPoly& operator-=(const CommPoly& o);
  CommPoly operator+(const CommPoly& o) const;
  CommPoly operator-(const CommPoly& o) const;
  CommPoly operator-() const;
  CommPoly operator*(const CommPoly& o) const;
  CommPoly operator*(const Rational& q) const;
  bool operator==(const CommPoly& o) const { return terms_ == o.terms_; }

  /// Value with zeta_k^- = minus[k - 1], zeta_k^+ = plus[k - 1] (missing indices are zero).
  cplx evaluate(const std::vector<cplx>& minus, const std::vector<cplx>& plus) const;

  /// Index relabelling k -> k + shift.
  CommPoly shifted(int shift) const;

  std::string str() const;

 private:
  std::map<Monomial, Rational> terms_;
};

Monomial monomial_product(const Monomial& a, const Monomial& b);
std::string monomial_str(const Monomial& m);
int monomial_min_index(const Monomial& m);
int monomial_max_index(const Monomial& m);

/// Exact quotient p / (zeta_k^s); false if some monomial lacks the factor.
bool divide_by_var(const CommPoly& p, int k, ZetaSign s, CommPoly& q);

/// Exact quotient p / (1 + zeta_j^- zeta_j^+); false if the division leaves a remainder.
bool divide_by_one_plus(const CommPoly& p, int j, CommPoly& q);

/// su2:     F_k = [[1, zeta_k^- z^-k], [zeta_k^+ z^k, 1]], main text at zeta^- = zeta, zeta^+ = -conj(zeta).
/// complex: F_k = [[1, -zeta_k^- z^-k], [zeta_k^+ z^k, 1]], main text at zeta^- = -zeta, zeta^+ = -conj(zeta).
enum class Convention { su2, complex };

/// zeta^- and zeta^+ values that reproduce the main-text factors a(zeta_k)^{-1} zeta_factor(zeta_k, k).
std::pair<std::vector<cplx>, std::vector<cplx>> su2_specialization(const std::vector<cplx>& zeta, Convention c);

/// Laurent polynomial in z with CommPoly coefficients.
using PolySeries = std::map<int, CommPoly>;

struct ProductExpansion {
  int n = 0;
  Convention convention = Convention::su2;
  PolySeries alpha, beta, gamma, delta;  // entries of F_n ... F_1
};

/// Throws std::invalid_argument when n exceeds bound.
ProductExpansion product_expand(int n, Convention c, int bound = kSymbolicBound);

/// gamma_{2,d}: zeta^+_{i1} zeta^-_{j1} ... zeta^+_{i_{r+1}} over 0 < i1 < j1 < ... < i_{r+1} <= n, sum(i) - sum(j) = d.
CommPoly gamma_multi_index_sum(int n, int d, Convention c);

/// delta_{2,d}: zeta^-_{j1} zeta^+_{i1} ... over 0 < j1 < i1 < ... <= n, sum(i - j) = d.
CommPoly delta_multi_index_sum(int n, int d, Convention c);

/// Coefficients of z^0 .. z^order of p / q for power series p, q with q_0 = 1.
PolySeries series_divide(const PolySeries& p, const PolySeries& q, int order);

/// |delta_{2,n}| of build_k2(zeta) Pi a^{-1} against sum over partitions of n of ||zeta||^{2l}.
IdentityReport partition_bound_check(int n, const std::vector<cplx>& zeta);

/// Number of partitions of n with l parts, l = 0..n.
std::vector<long long> partitions_by_length(int n);

struct CoefficientEntry {
  std::string table;  // "p" or "C"
  int n = 0, k = 0;
  std::string monomial;
  Rational value;
  bool positive_integer = true;
};

struct CoefficientTable {
  std::vector<CoefficientEntry> rows;
  bool all_positive_integer = true;
  std::vector<std::string> violations;
};

struct PnkResult {
  int n = 0;
  CommPoly xi;               // coefficient of z^n in gamma_2 / delta_2
  std::vector<CommPoly> p;   // p[k - 1] = p_{n,k}
  bool exact = true;         // every quotient exact
  bool leading_ok = true;    // p_{n,n} = 1
  CoefficientTable table;
};

/// xi_n = sum_k zeta_k^+ prod_{j<k}(1 + zeta_j^- zeta_j^+) p_{n,k}(zeta_1..zeta_k), complex convention.
PnkResult extract_pnk(int n, int bound = kSymbolicBound);

struct SubsumCheck {
  int n = 0, m = 0;
  Rational coeff;  // coefficient of zeta^-_m zeta^+_{m+n-1} in s_n
};

struct XStarResult {
  int order = 0;
  PolySeries x;             // degree -d -> coefficient, d = 1..order
  CommPoly x1;
  std::vector<CommPoly> s;  // s[m - 1] = s_m
  bool exact = true;
  bool shift_ok = true;     // x_{-d} = x_1 with indices shifted by d - 1
  std::vector<SubsumCheck> subsum;
  CoefficientTable table;
};

/// x^* = (beta-entry / delta-entry)_- of F_order ... F_1 in the complex convention,
/// x_1^* = sum_m zeta^-_m prod_{m<j<=order}(1 + zeta_j^- zeta_j^+) s_m(zeta_m, ..., zeta_order).
XStarResult x_star_symbolic(int order, int bound = kSymbolicBound);

struct MultiIndex {
  std::vector<int> parts;
  int order() const;
  int length() const { return static_cast<int>(parts.size()); }
  bool valid() const;
  std::string str() const;
  bool operator<(const MultiIndex& o) const { return parts < o.parts; }
  bool operator==(const MultiIndex& o) const = default;
};

/// Ordered compositions of n in lexicographic order.
std::vector<MultiIndex> compositions(int n);

/// prod_j 1 / (i_1 + ... + i_j); throws on an invalid multi-index.
Rational c_of(const MultiIndex& I);

struct SubsetPair {
  MultiIndex I;
  std::vector<int> S;  // {1..n} minus the partial sums
  Rational c, via_subset;
  bool components_ok = true;  // i_j = 1 + size of the j-th gap of S
};

/// Throws std::invalid_argument for n < 1 or n > 16.
std::vector<SubsetPair> subset_bijection(int n);

/// Words in noncommuting theta_i; the letter of theta_i is i.
using Word = std::vector<int>;

class NCPoly {
 public:
  NCPoly() = default;
  static NCPoly constant(const Rational& q);
  static NCPoly letter(int i);

  const std::map<Word, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  Rational coeff(const Word& w) const;
  void add_term(const Word& w, const Rational& q);

  NCPoly& operator+=(const NCPoly& o);
  NCPoly& operator-=(const NCPoly& o);
  NCPoly operator+(const NCPoly& o) const;
  NCPoly operator-(const NCPoly& o) const;
  NCPoly operator*(const NCPoly& o) const;
  NCPoly operator*(const Rational& q) const;
  bool operator==(const NCPoly& o) const { return terms_ == o.terms_; }

  Mat2 evaluate(const std::map<int, Mat2>& theta) const;
  /// Commutative scalar specialization.
  Rational evaluate(const std::map<int, Rational>& theta) const;

  std::string str() const;

 private:
  std::map<Word, Rational> terms_;
};

/// g_0 .. g_order, g_n = sum over |I| = n of c(I) theta_{i1} ... theta_{il}; letters outside degrees vanish.
std::vector<NCPoly> gplus_series(const std::set<int>& degrees, int order);
std::vector<Mat2> gplus_series(const std::map<int, Mat2>& theta, int order);

/// Coefficients of exp(sum theta_i z^i / i) through z^order.
std::vector<Rational> scalar_exp_series(const std::map<int, Rational>& theta, int order);

/// (g^{-1})_n = sum over |I| = n of (-1)^l g_{i1} ... g_{il}; g[0] must be the identity.
std::vector<NCPoly> ginv_series(const std::vector<NCPoly>& g, int order);
std::vector<Mat2> ginv_series(const std::vector<Mat2>& g, int order);

/// C(I) = sum over splittings of I into consecutive blocks I_1 .. I_l with |I_l| >= j of
/// (-1)^{l+1} c(I_1) ... c(I_l).
Rational C_of(const MultiIndex& I, int j);

struct WBlocksSymbolic {
  std::map<std::pair<int, int>, NCPoly> via_C, via_g;  // key (i, j) for W_{i,-j}
  bool agree = true;
};

/// i >= 0, j >= 1, i + j <= i_max + j_max restricted to i <= i_max, j <= j_max.
WBlocksSymbolic W_blocks_symbolic(const std::set<int>& degrees, int i_max, int j_max,
                                  int bound = kSymbolicBound);

struct WBlocksNumeric {
  std::map<std::pair<int, int>, Mat2> formula, rh;
  double max_diff = 0.0;
};

/// Formula blocks evaluated at theta against (A_N^{-1} B_N)(g_+) with g_+ truncated at degree i_max + j_max.
WBlocksNumeric W_blocks_numeric(const std::map<int, Mat2>& theta, int i_max, int j_max, int N);

}  // namespace loopfactor
