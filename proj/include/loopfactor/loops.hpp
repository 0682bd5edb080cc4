#pragma once

#include <utility>
#include <vector>

#include "loopfactor/laurent.hpp"

namespace loopfactor {

/// chi = chi_0 + sum_{j>=1} (chi_j z^j - conj(chi_j) z^{-j}), chi_0 = i * chi0_im.
struct DiagExponent {
  double chi0_im = 0.0;
  std::vector<cplx> chis;  // chis[j-1] = chi_j

  ScalarLaurent laurent() const;
  ScalarLaurent plus() const;   // chi_+
  ScalarLaurent minus() const;  // chi_- = -star(chi_+)
  int support() const { return static_cast<int>(chis.size()); }
  bool is_zero() const;
};

/// Root subgroup coordinates (eta, chi, zeta); eta[i] = eta_i (i >= 0), zeta[k-1] = zeta_k (k >= 1).
struct RootParams {
  std::vector<cplx> eta;
  DiagExponent chi;
  std::vector<cplx> zeta;
};

struct SingularInnerSpec {
  std::vector<std::pair<double, double>> atoms;  // (angle, mass)
};

/// (1 + |zeta|^2)^{-1/2}
double a_factor(cplx zeta);

/// a(zeta) [[1, zeta z^{-k}], [-conj(zeta) z^k, 1]]
MatrixLaurent zeta_factor(cplx zeta, int k);

/// a(eta) [[1, -conj(eta) z^i], [eta z^{-i}, 1]]
MatrixLaurent eta_factor(cplx eta, int i);

/// Ordered product F_n ... F_1 of zeta factors.
MatrixLaurent build_k2(const std::vector<cplx>& zeta);

/// Ordered product G_n ... G_0 of eta factors.
MatrixLaurent build_k1(const std::vector<cplx>& eta);

/// diag(e^chi, e^{-chi}) with the exponential series truncated to |degree| <= trunc.
MatrixLaurent build_diag(const DiagExponent& chi, int trunc);

/// g = star(k1(eta)) diag(e^chi, e^{-chi}) k2(zeta).
MatrixLaurent assemble(const RootParams& p, int trunc);

struct RecoverOptions {
  int n_max = 256;
  double tol = 1e-12;            // coefficients below tol are treated as zero
  double unitarity_tol = 1e-8;   // negative disables the SU(2) input check
};

/// Recovers zeta by reading the leading Taylor coefficient of c/d and peeling one factor at a time.
std::vector<cplx> recover_zeta(const MatrixLaurent& k2, const RecoverOptions& opt = {});

/// Mirror of recover_zeta using the b/a expansion of the first row.
std::vector<cplx> recover_eta(const MatrixLaurent& k1, const RecoverOptions& opt = {});

/// x (analytic, x(0) = 0) with x^* = -(star(c2)/d2)_-, the upper-right symbol of k2 = [[1, x^*],[0, 1]] (analytic).
ScalarLaurent x_of_k2(const MatrixLaurent& k2);

/// y (analytic) with y^* = -(star(b1)/a1)_{-0} read from the first row of k1.
ScalarLaurent y_of_k1(const MatrixLaurent& k1);

/// exp(sum nu_k (z + e^{i theta_k}) / (z - e^{i theta_k})) for |z| < 1; normalized divides by the value at 0.
cplx singular_inner(const SingularInnerSpec& spec, cplx z, bool normalized = false);

/// Taylor coefficients 0..order of the normalized singular inner function.
ScalarLaurent singular_inner_taylor(const SingularInnerSpec& spec, int order);

/// diag(lambda^*, lambda) k2 with lambda the normalized singular inner function truncated at order;
/// the second row lambda (c, d) stays analytic, so the root coordinates are unchanged.
MatrixLaurent twist_by_inner(const MatrixLaurent& k2, const SingularInnerSpec& spec, int order);

}  // namespace loopfactor
