#include <gtest/gtest.h>

#include <random>

#include "loopfactor/factorization.hpp"

using namespace loopfactor;

namespace {

const cplx I1(0.0, 1.0);

RootParams mixed(cplx eta, cplx chi1, cplx zeta) {
  RootParams p;
  p.eta = {eta};
  p.chi.chis = {chi1};
  p.zeta = {zeta};
  return p;
}

std::vector<cplx> random_coords(std::mt19937& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<cplx> v(static_cast<size_t>(n));
  for (auto& c : v) c = cplx(u(rng), u(rng));
  return v;
}

void expect_coords(const std::vector<cplx>& got, const std::vector<cplx>& want, double tol) {
  ASSERT_GE(got.size(), want.size());
  for (size_t k = 0; k < want.size(); ++k) EXPECT_LT(std::abs(got[k] - want[k]), tol) << "index " << k;
  for (size_t k = want.size(); k < got.size(); ++k) EXPECT_LT(std::abs(got[k]), tol) << "index " << k;
}

}  // namespace

TEST(K2Data, SingleUnitZeta) {
  const K2Data d = k2_data(build_k2({1.0}));
  EXPECT_NEAR(d.a2 * d.a2, 2.0, 1e-14);
  EXPECT_LT((d.gamma - ScalarLaurent::monomial(1, -1.0)).max_norm(), 1e-14);
  EXPECT_LT((d.delta - ScalarLaurent::one()).max_norm(), 1e-14);
  EXPECT_LT((d.x - ScalarLaurent::monomial(1, 1.0)).max_norm(), 1e-14);
  EXPECT_LT((d.alpha - ScalarLaurent::one()).max_norm(), 1e-14);
  EXPECT_LT(d.beta.max_norm(), 1e-14);
}

TEST(K2Data, ReconstructsK2) {
  for (const auto& z : std::vector<std::vector<cplx>>{{0.4, -0.3 * I1, 0.1}, {0.0, 0.7}, {0.2 + 0.5 * I1}}) {
    const MatrixLaurent k2 = build_k2(z);
    const K2Data d = k2_data(k2);
    const MatrixLaurent rebuilt = from_entries(ScalarLaurent::one(), star(d.x), ScalarLaurent(), ScalarLaurent::one()) *
                                  diag(ScalarLaurent::constant(d.a2), ScalarLaurent::constant(1.0 / d.a2)) *
                                  from_entries(d.alpha, d.beta, d.gamma, d.delta);
    EXPECT_LT(grid_residual(rebuilt, k2), 1e-12);
  }
}

TEST(K1Data, ReconstructsK1) {
  const MatrixLaurent k1 = build_k1({0.3, -0.2 * I1, 0.25});
  const K1Data d = k1_data(k1);
  const MatrixLaurent rebuilt = from_entries(ScalarLaurent::one(), ScalarLaurent(), star(d.y), ScalarLaurent::one()) *
                                diag(ScalarLaurent::constant(d.a1), ScalarLaurent::constant(1.0 / d.a1)) *
                                from_entries(d.alpha, d.beta, d.gamma, d.delta);
  EXPECT_LT(grid_residual(rebuilt, k1), 1e-12);
  const Mat2 u0 = from_entries(d.alpha, d.beta, d.gamma, d.delta).coeff(0);
  EXPECT_NEAR(std::abs(u0(0, 0) - 1.0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(u0(1, 1) - 1.0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(u0(1, 0)), 0.0, 1e-13);
}

TEST(Unitarity, ResidualsVanish) {
  std::mt19937 rng(7);
  for (int n : {1, 3, 6}) {
    const K2Data d = k2_data(build_k2(random_coords(rng, n, 0.6)));
    for (const auto& r : unitarity_residuals(d)) EXPECT_TRUE(r.pass) << r.id << " " << r.lhs;
  }
}

TEST(TriangularFactors, MixedMultiplyBack) {
  const TriangularFactors f = tri_factor_from_params(mixed(0.3, 0.1 * I1, 0.2), 32);
  EXPECT_LE(f.residual, 1e-8);
  EXPECT_LT(part(f.l, Part::plus).max_norm(), 1e-15);
  EXPECT_LT(part(f.u, Part::minus).max_norm(), 1e-15);
  const Mat2 l0 = f.l.coeff(0), u0 = f.u.coeff(0);
  EXPECT_NEAR(std::abs(l0(0, 0) - 1.0) + std::abs(l0(1, 1) - 1.0) + std::abs(l0(0, 1)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(u0(0, 0) - 1.0) + std::abs(u0(1, 1) - 1.0) + std::abs(u0(1, 0)), 0.0, 1e-12);
}

TEST(TriangularFactors, RandomPropertyMultiplyBack) {
  std::mt19937 rng(11);
  for (int t = 0; t < 6; ++t) {
    RootParams p;
    p.eta = random_coords(rng, 1 + t % 3, 0.5);
    p.zeta = random_coords(rng, 1 + (t + 1) % 3, 0.5);
    p.chi.chis = random_coords(rng, t % 3, 0.15);
    for (auto& c : p.chi.chis) c = cplx(0.0, c.real());
    p.chi.chi0_im = 0.1 * t;
    const TriangularFactors f = tri_factor_from_params(p, 40);
    EXPECT_LE(f.residual, 1e-10) << "trial " << t;
    EXPECT_NEAR(f.a0, f.a1 * f.a2, 1e-15);
  }
}

TEST(TriangularFactors, NumericMatchesClosedForm) {
  const RootParams p = mixed(0.3, 0.1 * I1, 0.2);
  const TriangularFactors c = tri_factor_from_params(p, 40);
  const TriangularFactors n = triangular_factor_numeric(assemble(p, 40), 64);
  EXPECT_NEAR(n.a0, c.a0, 1e-10);
  EXPECT_LT(std::abs(n.m0 - c.m0), 1e-10);
  EXPECT_LT(grid_residual(n.u, c.u), 1e-9);
  EXPECT_LT(grid_residual(n.l, c.l), 1e-9);
  EXPECT_LT(n.residual, 1e-9);
}

TEST(TriangularFactors, InversionSymmetry) {
  RootParams p = mixed(0.4, 0.15 * I1, 0.3);
  p.chi.chi0_im = 0.2;
  const MatrixLaurent g = assemble(p, 40);
  const TriangularFactors f = triangular_factor_numeric(g, 64);
  const TriangularFactors fs = triangular_factor_numeric(star(g), 64);
  EXPECT_LT(grid_residual(fs.l, star(f.u)), 1e-9);
  EXPECT_LT(grid_residual(fs.u, star(f.l)), 1e-9);
  EXPECT_LT(std::abs(fs.m0 - std::conj(f.m0)), 1e-10);
  EXPECT_NEAR(fs.a0, f.a0, 1e-10);
}

TEST(Recovery, RoundTripMixed) {
  const RootParams p = mixed(0.4, 0.15 * I1, 0.3);
  const TriangularFactors f = tri_factor_from_params(p, 40);
  const RecoveredParams r = recover_params_from_factors(f);
  EXPECT_NEAR(r.a1, f.a1, 1e-10);
  EXPECT_NEAR(r.a2, f.a2, 1e-10);
  expect_coords(r.params.eta, p.eta, 1e-7);
  expect_coords(r.params.zeta, p.zeta, 1e-7);
  expect_coords(r.params.chi.chis, p.chi.chis, 1e-7);
  EXPECT_NEAR(r.params.chi.chi0_im, 0.0, 1e-12);
}

TEST(Recovery, RoundTripFromNumericFactors) {
  RootParams p;
  p.eta = {0.2, -0.1 * I1};
  p.zeta = {0.25, 0.0, 0.1 * I1};
  p.chi.chis = {0.1 * I1, -0.05 * I1};
  p.chi.chi0_im = -0.3;
  const TriangularFactors f = triangular_factor_numeric(assemble(p, 40), 96);
  const RecoveredParams r = recover_params_from_factors(f);
  expect_coords(r.params.eta, p.eta, 1e-7);
  expect_coords(r.params.zeta, p.zeta, 1e-7);
  expect_coords(r.params.chi.chis, p.chi.chis, 1e-7);
  EXPECT_NEAR(r.params.chi.chi0_im, -0.3, 1e-10);
}

TEST(RiemannHilbert, SingleUnitZeta) {
  const RiemannHilbert rh = riemann_hilbert_WZ(build_k2({1.0}), 8);
  EXPECT_NEAR(rh.det.lhs, 0.5, 1e-12);
  EXPECT_NEAR(rh.det.rhs, 0.5, 1e-12);
  EXPECT_TRUE(rh.det.pass);
}

TEST(RiemannHilbert, MixedLoop) {
  const MatrixLaurent g = assemble(mixed(0.3, 0.1 * I1, 0.2), 40);
  for (int N : {32, 64}) {
    const RiemannHilbert rh = riemann_hilbert_WZ(g, N);
    EXPECT_TRUE(rh.det.pass) << N << " " << rh.det.lhs << " " << rh.det.rhs;
  }
}

TEST(RiemannHilbert, SingularThrows) {
  // z^{-1} diag(z, z^{-1})-type loop: A_N(diag(z^{-1}, z)) has a kernel.
  const MatrixLaurent g = diag(ScalarLaurent::monomial(-1, 1.0), ScalarLaurent::monomial(1, 1.0));
  EXPECT_THROW(riemann_hilbert_WZ(g, 8), std::domain_error);
}

TEST(XFromK2, HalfZeta) {
  const XFromK2 r = x_from_k2(build_k2({0.5}), 16);
  EXPECT_LT((r.x - ScalarLaurent::monomial(1, 0.5)).max_norm(), 1e-12);
  EXPECT_LT(r.analytic_residual, 1e-12);
}

TEST(XFromK2, AgreesWithDivision) {
  const MatrixLaurent k2 = build_k2({0.4, -0.3 * I1, 0.1});
  const XFromK2 r = x_from_k2(k2, 32);
  EXPECT_LT((r.x - k2_data(k2).x).max_norm(), 1e-10);
  EXPECT_LT(r.analytic_residual, 1e-10);
}

TEST(InverseOperator, OneForUnitZeta) {
  const MatrixLaurent k2 = build_k2({1.0});
  const ScalarLaurent k = inverse_op_apply(entry(k2, 1, 0), entry(k2, 1, 1), ScalarLaurent::one());
  EXPECT_LT((k - ScalarLaurent::constant(0.5)).max_norm(), 1e-14);
}

TEST(InverseOperator, DenseAgreement) {
  const MatrixLaurent k2 = build_k2({0.4, -0.3 * I1, 0.1});
  const K2Data d = k2_data(k2);
  const int N = 64;
  const MatX K = inverse_op_matrix(entry(k2, 1, 0), entry(k2, 1, 1), N);
  const MatX H = scalar_hankel_product_trunc(d.x, N).entries;
  const MatX Kd = (MatX::Identity(N, N) + H).inverse();
  EXPECT_LT((K - Kd).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(KeyIdentities, ThreeTermZeta) {
  for (const auto& r : verify_keyidentities({0.4, -0.3 * I1, 0.1}, 128)) EXPECT_TRUE(r.pass) << r.id << " " << r.rel_err;
}

TEST(KeyIdentities, RandomZeta) {
  std::mt19937 rng(3);
  for (int n : {1, 2, 5, 8}) {
    for (const auto& r : verify_keyidentities(random_coords(rng, n, 0.7), 64))
      EXPECT_TRUE(r.pass) << "n=" << n << " " << r.id << " " << r.rel_err;
  }
}

TEST(Strata, WLoopCases) {
  const MatrixLaurent w1 = w_loop({1, 0});
  Mat2 J;
  J << 0.0, 1.0, -1.0, 0.0;
  EXPECT_LT((w1 - constant_matrix(J)).max_norm(), 1e-15);
  const MatrixLaurent w2 = w_loop({0, 2});
  EXPECT_LT((w2 - diag(ScalarLaurent::monomial(2, 1.0), ScalarLaurent::monomial(-2, 1.0))).max_norm(), 1e-15);
  for (StratumLabel w : {StratumLabel{0, -3}, StratumLabel{1, 2}, StratumLabel{1, -1}})
    EXPECT_LT((w_loop(w) * w_inverse(w) - MatrixLaurent::one()).max_norm(), 1e-15);
}

TEST(Strata, NplusExamples) {
  const ScalarLaurent o = ScalarLaurent::one(), e;
  const auto [m1, p1] = nplus_decompose(from_entries(o, ScalarLaurent::monomial(1, 1.0), e, o), {0, 1});
  EXPECT_LT((m1 - from_entries(o, ScalarLaurent::monomial(1, 1.0), e, o)).max_norm(), 1e-15);
  EXPECT_LT((p1 - MatrixLaurent::one()).max_norm(), 1e-15);

  const ScalarLaurent zz3 = ScalarLaurent::monomial(1, 1.0) + ScalarLaurent::monomial(3, 1.0);
  const auto [m2, p2] = nplus_decompose(from_entries(o, zz3, e, o), {0, 1});
  EXPECT_LT((m2 - from_entries(o, ScalarLaurent::monomial(1, 1.0), e, o)).max_norm(), 1e-15);
  EXPECT_LT((p2 - from_entries(o, ScalarLaurent::monomial(3, 1.0), e, o)).max_norm(), 1e-15);
}

TEST(Strata, NplusMembership) {
  // u = u_- u_+ with w^{-1} u_- w in N^- and w^{-1} u_+ w in N^+, for every case and order.
  std::mt19937 rng(5);
  const MatrixLaurent k2 = build_k2(random_coords(rng, 6, 0.5));
  const TriangularFactors f = triangular_factor_numeric(k2, 48);
  for (StratumLabel w : {StratumLabel{0, 1}, StratumLabel{0, 2}, StratumLabel{0, -1}, StratumLabel{0, -2},
                         StratumLabel{1, 1}, StratumLabel{1, 2}, StratumLabel{1, 0}, StratumLabel{1, -1}}) {
    for (bool mf : {true, false}) {
      const auto [um, up] = nplus_decompose(f.u.restrict(0, 24), w, mf);
      const MatrixLaurent prod = mf ? MatrixLaurent(um * up) : MatrixLaurent(up * um);
      EXPECT_LT(grid_residual(prod, f.u.restrict(0, 24)), 1e-12);
      const MatrixLaurent cm = w_inverse(w) * um * w_loop(w), cp = w_inverse(w) * up * w_loop(w);
      EXPECT_LT(part(cm, Part::plus).max_norm(), 1e-10) << w.epsilon << "," << w.n;
      EXPECT_LT(std::abs(cm.coeff(0)(0, 1)), 1e-10) << w.epsilon << "," << w.n;
      EXPECT_LT(part(cp, Part::minus).max_norm(), 1e-10) << w.epsilon << "," << w.n;
      EXPECT_LT(std::abs(cp.coeff(0)(1, 0)), 1e-10) << w.epsilon << "," << w.n;
    }
  }
}

TEST(Strata, ZeroConditionsMatchLength) {
  EXPECT_EQ(stratum_length({0, 0}), 0);
  EXPECT_EQ(stratum_length({0, 2}), 4);
  EXPECT_EQ(stratum_length({0, -2}), 4);
  EXPECT_EQ(stratum_length({1, 0}), 1);
  EXPECT_EQ(stratum_length({1, 1}), 1);
  EXPECT_EQ(stratum_length({1, -1}), 3);
  const ZeroConditions z = stratum_zero_conditions({1, 0});
  EXPECT_EQ(z.side, Side::eta);
  EXPECT_EQ(z.first, 0);
}

TEST(Strata, SynthesizeRejectsViolations) {
  RootParams p;
  p.zeta = {0.1, 0.2};
  EXPECT_THROW(stratum_synthesize({0, 1}, p, 16), std::invalid_argument);
  p.zeta = {0.0, 0.0, 0.2};
  EXPECT_NO_THROW(stratum_synthesize({0, 1}, p, 16));
}

TEST(Strata, ClassifyRoundTrip) {
  std::mt19937 rng(13);
  for (int e = 0; e <= 1; ++e)
    for (int n = -3; n <= 3; ++n) {
      const StratumLabel w{e, n};
      const ZeroConditions z = stratum_zero_conditions(w);
      RootParams p;
      p.eta = random_coords(rng, 3, 0.4);
      p.zeta = random_coords(rng, 3, 0.4);
      std::vector<cplx>& side = z.side == Side::zeta ? p.zeta : p.eta;
      std::vector<cplx> tail = random_coords(rng, 2, 0.4);
      side.assign(static_cast<size_t>(z.count), 0.0);
      side.insert(side.end(), tail.begin(), tail.end());
      const Classification c = classify_stratum(stratum_synthesize(w, p, 16), 24, 4);
      ASSERT_TRUE(c.found) << e << "," << n << " " << c.diagnostic;
      EXPECT_EQ(c.label, w) << "synth (" << e << "," << n << ") got (" << c.label.epsilon << "," << c.label.n << ")";
    }
}

TEST(Strata, TopStratumGeneric) {
  const Classification c = classify_stratum(assemble(mixed(0.3, 0.1 * I1, 0.2), 32), 24, 3);
  ASSERT_TRUE(c.found);
  EXPECT_EQ(c.label, (StratumLabel{0, 0}));
}

TEST(Strata, SpecZetaExample) {
  RootParams p;
  p.eta = {0.1};
  p.zeta = {0.0, 0.0, 0.2};
  const Classification c = classify_stratum(stratum_synthesize({0, 1}, p, 16), 24, 3);
  ASSERT_TRUE(c.found) << c.diagnostic;
  EXPECT_EQ(c.label, (StratumLabel{0, 1}));
}

TEST(Strata, LiteralFormLeavesStratum) {
  // k1^* w k2 with zeta_1 = zeta_2 = 0 but eta_0 != 0: w^{-1} g factors with w l w^{-1} in N^- only for (1, 1).
  RootParams p;
  p.eta = {0.1};
  p.zeta = {0.0, 0.0, 0.2};
  const MatrixLaurent g = stratum_synthesize({0, 1}, p, 16, StratumForm::literal);
  const Classification c = classify_stratum(g, 24, 3);
  ASSERT_TRUE(c.found);
  EXPECT_EQ(c.label, (StratumLabel{1, 1}));
  p.eta = {0.0, 0.0, 0.1};
  EXPECT_EQ(classify_stratum(stratum_synthesize({0, 1}, p, 16, StratumForm::literal), 24, 3).label,
            (StratumLabel{0, 1}));
}

TEST(Strata, ConditionedFactorAgreesWithClassifier) {
  // Independent check: g in the w stratum iff w^{-1} g = l m a u with w l w^{-1} in N^-.
  std::mt19937 rng(17);
  for (StratumLabel w : {StratumLabel{0, 2}, StratumLabel{0, -1}, StratumLabel{1, 1}, StratumLabel{1, -1}}) {
    const ZeroConditions z = stratum_zero_conditions(w);
    RootParams p;
    p.eta = random_coords(rng, 2, 0.3);
    p.zeta = random_coords(rng, 2, 0.3);
    std::vector<cplx>& side = z.side == Side::zeta ? p.zeta : p.eta;
    side.insert(side.begin(), static_cast<size_t>(z.count), 0.0);
    const MatrixLaurent g = stratum_synthesize(w, p, 16);
    const TriangularFactors f = triangular_factor_numeric(w_inverse(w) * g, 64);
    EXPECT_LT(f.residual, 1e-9);
    const MatrixLaurent c = w_loop(w) * f.l * w_inverse(w);
    const Mat2 c0 = c.coeff(0);
    EXPECT_LT(part(c, Part::plus).max_norm(), 1e-9) << w.epsilon << "," << w.n;
    EXPECT_LT(std::abs(c0(0, 1)) + std::abs(c0(0, 0) - 1.0) + std::abs(c0(1, 1) - 1.0), 1e-9);
  }
}

TEST(Strata, RelativePositionOfW) {
  for (int e = 0; e <= 1; ++e)
    for (int n = -3; n <= 3; ++n) {
      const RelativePosition r = relative_position(w_loop({e, n}), 16, 10), q = label_position({e, n});
      ASSERT_TRUE(r.valid);
      EXPECT_EQ(r.pi0, q.pi0);
      EXPECT_EQ(r.pi1, q.pi1);
    }
}

TEST(Strata, EtaExampleOnLengthOneStratum) {
  // eta_0 = 0, eta_1 = 0.2 lies on the (1, 0) stratum.
  RootParams p;
  p.eta = {0.0, 0.2};
  const Classification c = classify_stratum(stratum_synthesize({1, 0}, p, 16), 24, 3);
  ASSERT_TRUE(c.found);
  EXPECT_EQ(c.label, (StratumLabel{1, 0}));
}
