#pragma once

#include <string>
#include <utility>
#include <vector>

#include "loopfactor/laurent.hpp"
#include "loopfactor/loops.hpp"
#include "loopfactor/operators.hpp"

namespace loopfactor {

/// k2 = [[1, x^*],[0, 1]] diag(a2, 1/a2) [[alpha2, beta2],[gamma2, delta2]].
struct K2Data {
  double a2 = 1.0;
  ScalarLaurent x, alpha, beta, gamma, delta;
};

/// k1 = [[1, 0],[y^*, 1]] diag(a1, 1/a1) [[alpha1, beta1],[gamma1, delta1]].
struct K1Data {
  double a1 = 1.0;
  ScalarLaurent y, alpha, beta, gamma, delta;
};

K2Data k2_data(const MatrixLaurent& k2);
K1Data k1_data(const MatrixLaurent& k1);

/// g = l diag(m0, 1/m0) diag(a0, 1/a0) u.
struct TriangularFactors {
  MatrixLaurent l, u;
  cplx m0 = 1.0;
  double a0 = 1.0;
  // Root-subgroup side data (filled by tri_factor_from_params).
  double a1 = 1.0, a2 = 1.0;
  ScalarLaurent x, y, X, Y, M;
  K1Data k1;
  K2Data k2;
  DiagExponent chi;
  double residual = 0.0;  // grid max-entry residual of l m a u - g
};

/// l m a u from the product form.
MatrixLaurent multiply_back(const TriangularFactors& f);

/// Grid max-entry norm of a - b on a grid that resolves both supports.
double grid_residual(const MatrixLaurent& a, const MatrixLaurent& b, int min_m = 6);

/// Closed-form factors of g = k1(eta)^* e^chi k2(zeta); exponentials truncated at trunc.
TriangularFactors tri_factor_from_params(const RootParams& p, int trunc);

/// Factors of an arbitrary loop with invertible A_N(g), read from the first block column of A_N(g)^{-1}.
TriangularFactors triangular_factor_numeric(const MatrixLaurent& g, int N);

struct RecoveredParams {
  double a1 = 1.0, a2 = 1.0;
  DiagExponent chi;
  MatrixLaurent k1, k2;
  RootParams params;
};

/// a1, a2 from log integrals, chi_+ from the Fourier series of log(|u21|^2 + |u22|^2), chi_0 from m0,
/// then k1, k2 rebuilt on the 2^grid_m grid and peeled.
RecoveredParams recover_params_from_factors(const TriangularFactors& f, int grid_m = 10, double tol = 1e-9);

/// Grid residuals of the k2 unitarity relations.
std::vector<IdentityReport> unitarity_residuals(const K2Data& d, int grid_m = 10, double tol = 1e-9);

struct RiemannHilbert {
  MatX W, Z;
  double cond = 1.0;
  IdentityReport det;  // det P_N A(g) A(g^-1) P_N against det(1 + W W^*)^{-1}
};

/// W_N = A_N^{-1} B_N and Z_N = C_N A_N^{-1}; g^{-1} = star(g) in the determinant report.
/// Throws std::domain_error when cond(A_N) exceeds max_cond.
RiemannHilbert riemann_hilbert_WZ(const MatrixLaurent& g, int N, bool with_det = true, double max_cond = 1e12,
                                  double tol = 1e-6);

struct XFromK2 {
  ScalarLaurent x;                // degrees 1..N
  double analytic_residual = 0.0;  // max negative coefficient of [[1, -x^*],[0, 1]] k2
};

/// x read from the e2 z^0 column of Z_N(k2) at rows e1 z^{-j}.
XFromK2 x_from_k2(const MatrixLaurent& k2, int N);

/// K f = c2 (c2^* f)_{0+} + d2 (d2^* f)_{0+}.
ScalarLaurent inverse_op_apply(const ScalarLaurent& c2, const ScalarLaurent& d2, const ScalarLaurent& f);

/// Dense N x N matrix of K on z^0..z^{N-1}.
MatX inverse_op_matrix(const ScalarLaurent& c2, const ScalarLaurent& d2, int N);

/// Identities tying a2, gamma2, delta2 to the Hankel calculus of x.
std::vector<IdentityReport> verify_keyidentities(const std::vector<cplx>& zeta, int N, double tol = 1e-8);

struct StratumLabel {
  int epsilon = 0;
  int n = 0;
  bool operator==(const StratumLabel&) const = default;
};

/// J^epsilon diag(z^n, z^-n), J = [[0, 1],[-1, 0]].
MatrixLaurent w_loop(StratumLabel w);
MatrixLaurent w_inverse(StratumLabel w);

/// Number of coordinates that vanish on the stratum and which side they sit on.
struct ZeroConditions {
  Side side = Side::zeta;
  int first = 0;  // first index (zeta_k: k >= 1; eta_i: i >= 0)
  int count = 0;
};
ZeroConditions stratum_zero_conditions(StratumLabel w);

/// Bruhat length of w (dimension of N^+ cap w N^- w^{-1}).
int stratum_length(StratumLabel w);

/// u = u_minus u_plus (minus_first) or u = u_plus u_minus, u_minus in N^+ cap w N^- w^{-1},
/// u_plus in N^+ cap w N^+ w^{-1}; series quotients computed through the needed degree.
std::pair<MatrixLaurent, MatrixLaurent> nplus_decompose(const MatrixLaurent& u, StratumLabel w,
                                                        bool minus_first = true);

/// literal: k1^* w e^chi k2 for every label. adapted: the placement of w that lands in the w stratum,
///   (0, n < 0): k1^* w e^chi k2        (1, n <= 0): w k1^* e^chi k2
///   (0, n > 0): star(k1^* w^{-1} e^chi k2)   (1, n > 0): k1^* e^chi k2 w
/// The literal form leaves the w stratum for n > 0 or epsilon = 1 unless the opposite side also vanishes.
enum class StratumForm { adapted, literal };

/// Rejects parameters violating the zero conditions.
MatrixLaurent stratum_synthesize(StratumLabel w, const RootParams& p, int trunc,
                                 StratumForm form = StratumForm::adapted);

struct StratumScore {
  StratumLabel label;
  bool left = true;  // true: w^{-1} g, false: g w^{-1}
  double sigma_N = 0.0, sigma_2N = 0.0;
  bool pass = false;
};

/// Relative position of g: pi(c) for c = 0, 1, where basis index 2j is e2 z^j and 2j + 1 is e1 z^j, read from
/// dim ker P_{>=r} M_g P_{>=c} - dim ker P_{>=r} M_g P_{>=c+1} = [pi(c) < r]. These ranks are invariant under
/// g -> l g u (l in N^-, u in N^+), so (pi(0), pi(1)) equals that of w for g in the w stratum.
struct RelativePosition {
  bool valid = false;
  int pi0 = 0, pi1 = 0;
};
RelativePosition relative_position(const MatrixLaurent& g, int N, int window, double rel_tol = 1e-8);

/// (pi(0), pi(1)) of w: (-2n, 2n + 1) for epsilon = 0, (1 - 2n, 2n) for epsilon = 1.
RelativePosition label_position(StratumLabel w);

struct Classification {
  bool found = false;
  StratumLabel label;
  RelativePosition position;
  std::vector<StratumScore> scores;
  std::string diagnostic;
};

/// Label from relative_position, confirmed by A and A_1 of w^{-1} g (or g w^{-1}) having smallest singular value
/// >= sigma_tol at N and 2N. scores lists the conditioning of every label with |n| <= n_max on both sides;
/// several labels may be well-conditioned there, so conditioning alone does not select the stratum.
Classification classify_stratum(const MatrixLaurent& g, int N, int n_max, double sigma_tol = 1e-6);

}  // namespace loopfactor
