#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "loopfactor/laurent.hpp"
#include "loopfactor/loops.hpp"

namespace loopfactor {

using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

enum class OpKind { toeplitz, shifted_toeplitz, hankel_B, hankel_C, scalar_hankel };

/// Finite section of one block of the multiplication operator M_g.
struct OperatorTrunc {
  OpKind kind = OpKind::toeplitz;
  int N = 0;
  MatX entries;
};

/// One identity check: lhs against rhs at truncation N.
struct IdentityReport {
  std::string id;
  int N = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  double seconds = 0.0;
  double tol = 0.0;  // pass iff rel_err <= tol (abs_err when rhs == 0)
  bool pass = true;
};

/// Builds a report from lhs/rhs and a tolerance on the relative error (absolute when |rhs| is tiny).
IdentityReport make_report(std::string id, int N, double lhs, double rhs, double tol, double seconds = 0.0);

/// Block Toeplitz section: block (i, j) = g_{i - j}, i < rows, j < cols, basis order e1 z^j, e2 z^j.
MatX toeplitz_rect(const MatrixLaurent& g, int rows, int cols);

/// A_N(g), 2N x 2N.
OperatorTrunc toeplitz_trunc(const MatrixLaurent& g, int N);

/// A_{1,N}(g): compression to span{e1 z^j, e2 z^{j+1} : 0 <= j < N}, computed as A_N(diag(1, z^-1) g diag(1, z)).
OperatorTrunc shifted_toeplitz_trunc(const MatrixLaurent& g, int N);

/// diag(1, z^-1) g diag(1, z).
MatrixLaurent shift_conjugate(const MatrixLaurent& g);

enum class HankelSide { B, C };

/// B_N: rows z^i (i = 0..N-1), columns z^{-j} (j = 1..N), block g_{i+j}.
/// C_N: rows z^{-i} (i = 1..N), columns z^j (j = 0..N-1), block g_{-i-j}.
OperatorTrunc hankel_trunc(const MatrixLaurent& g, int N, HankelSide which);

/// N x N section of Bdot(x) Bdot(x)^*: entry (i, j) = sum_{n >= 1} x_{i+n} conj(x_{j+n}).
OperatorTrunc scalar_hankel_product_trunc(const ScalarLaurent& x, int N);

struct DetResult {
  cplx value = 0.0;
  double log_abs = 0.0;  // -inf for singular input
  cplx phase = 1.0;
};

/// Determinant by LU with partial pivoting.
DetResult det_trunc(const MatX& m);
DetResult det_trunc(const OperatorTrunc& t);

/// det P_N A(g)^* A(g) P_N, from the exact tall section of A(g) P_N (finite support).
double gram_det(const MatrixLaurent& g, int N);

/// Same for the shifted compression A_1(g).
double shifted_gram_det(const MatrixLaurent& g, int N);

/// det(1 - C_N^* C_N) with C_N the full column section of C(g) P_N.
double hankel_defect_det(const MatrixLaurent& g, int N);

enum class Side { eta, zeta };

/// Plancherel identities for k1(eta) or k2(zeta): Gram determinant, Hankel defect determinant, and the
/// scalar Hankel determinant of the off-diagonal symbol, each against the closed-form product.
std::vector<IdentityReport> verify_planch(const std::vector<cplx>& params, Side side, int N, double tol = 1e-6);

/// Closed-form right-hand sides; rhs_a0sq is the squared diagonal ratio.
struct ToeplitzRhs {
  double det_a = 1.0, det_a1 = 1.0, a0sq = 1.0;
};
ToeplitzRhs toeplitz_rhs(const RootParams& p);

/// det(A^*A), det(A_1^*A_1) and their ratio for g = assemble(p) at N and 2N; the 2N value is compared.
std::vector<IdentityReport> verify_toeplitz_identities(const RootParams& p, int N, int exp_trunc, double tol = 1e-5);

/// Central-block residual of A(g) - A(k1^* e^{chi_-}) A(e^{chi_0}) A(e^{chi_+} k2) and its A_1 analogue, the Hankel
/// product B(k1^* e^{chi_-}) C(e^{chi_0 + chi_+} k2), and smallest singular values of A_N(e^{chi_0 + chi_+} k2) at N, 2N.
std::vector<IdentityReport> verify_operator_factorization(const RootParams& p, int N, int exp_trunc,
                                                          double tol_central = 1e-6, double tol_hankel = 1e-8);

/// Smallest singular value.
double sigma_min(const MatX& m);

/// Winding number of unimodular samples on a uniform grid (phase increments summed).
/// Throws if some |value| deviates from 1 by more than unimodular_tol or an increment exceeds max_step.
int degree_from_samples(const std::vector<cplx>& v, double unimodular_tol = 1e-6, double max_step = M_PI / 2);
int scalar_degree(const ScalarLaurent& lambda, int m);

/// dim ker - dim coker of the scalar Toeplitz operator T(lambda), from singular values of tall sections of
/// T(lambda) and T(conj lambda) with N columns; rel_tol relative to the largest singular value.
int toeplitz_index(const ScalarLaurent& lambda, int N, double rel_tol = 1e-8);

/// || (1 - P_S) A ||_max with S = ker(A+B)^perp + A ker(A+B)^perp, for Hermitian positive semidefinite A, B.
double psd_range_residual(const MatX& A, const MatX& B, double rel_tol = 1e-10);

/// Eigenvalues (ascending) of (1 + Bdot(x) Bdot(x)^*)^{-1} on the N x N section.
std::vector<double> inverse_hankel_spectrum(const ScalarLaurent& x, int N);

/// Time measurement helper for reports.
double seconds_since(long long start_ns);
long long now_ns();

}  // namespace loopfactor
