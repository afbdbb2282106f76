#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "mapfilt/allpass.hpp"
#include "mapfilt/error.hpp"
#include "mapfilt/sim_models.hpp"
#include "oracles.hpp"

using namespace mapfilt;
using cd = std::complex<double>;

namespace {

CepstralParams random_theta(Index n, int r, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Eigen::VectorXd v(CepstralParams::count(n, r));
  for (Index i = 0; i < v.size(); ++i) v(i) = nd(gen);
  return CepstralParams(n, r, v);
}

// Spectral roots of a VAR(1) spectrum factored at q = 24.
RootGrid var_roots(const FreqGrid& g) {
  const VarModel m = paper_var1();
  const auto lags = oracle::var1_acvf(m.coeffs[0].topLeftCorner(2, 2), m.noise_cov.topLeftCorner(2, 2), 24);
  return spectral_root_grid(bauer_factorize(AcvfSeq(lags), 24), g);
}

}  // namespace

TEST(Cepstral, CountAndLayout) {
  EXPECT_EQ(CepstralParams::count(2, 0), 1);
  EXPECT_EQ(CepstralParams::count(2, 1), 5);
  EXPECT_EQ(CepstralParams::count(4, 2), 38);
  EXPECT_EQ(CepstralParams::count(1, 0), 0);

  const CepstralMatrices m = unpack(CepstralParams(2, 0, Eigen::VectorXd::Constant(1, 0.7)));
  Mat expected(2, 2);
  expected << 0.0, -0.7, 0.7, 0.0;
  EXPECT_EQ((m.omega0 - expected).norm(), 0.0);

  const CepstralMatrices z = unpack(CepstralParams::zeros(2, 1));
  EXPECT_EQ(z.omega0.norm() + z.omega[0].norm(), 0.0);

  Eigen::VectorXd v(5);
  v << 1, 2, 3, 4, 5;
  const CepstralMatrices w = unpack(CepstralParams(2, 1, v));
  Mat om1(2, 2);
  om1 << 2, 3, 4, 5;
  EXPECT_EQ((w.omega[0] - om1).norm(), 0.0);

  EXPECT_THROW(CepstralParams(2, 1, Eigen::VectorXd::Zero(4)), Error);
}

TEST(Cepstral, PackRoundtrip) {
  std::mt19937_64 gen(1);
  for (Index n : {1, 2, 3, 4})
    for (int r : {0, 1, 2}) {
      const CepstralParams t = random_theta(n, r, gen);
      EXPECT_EQ((pack(unpack(t)).values() - t.values()).norm(), 0.0);
    }
}

TEST(Unitary, ZeroIsIdentity) {
  for (double lam : {-3.0, 0.0, 1.1}) EXPECT_LT((unitary_at(CepstralParams::zeros(3, 2), lam) - CMat::Identity(3, 3)).norm(), 1e-15);
}

TEST(Unitary, PlanarRotation) {
  const CepstralParams t(2, 0, Eigen::VectorXd::Constant(1, std::numbers::pi / 2));
  CMat expected(2, 2);
  expected << 0.0, -1.0, 1.0, 0.0;
  for (double lam : {-2.0, 0.5}) EXPECT_LT((unitary_at(t, lam) - expected).norm(), 1e-14);
}

TEST(Unitary, UnitaryAndMatchesTaylorOracle) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> ud(-std::numbers::pi, std::numbers::pi);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 2 + trial % 3;
    const int r = trial % 3;
    const CepstralParams t = random_theta(n, r, gen);
    const double lam = ud(gen);
    const CMat u = unitary_at(t, lam);
    EXPECT_LT((u * u.adjoint() - CMat::Identity(n, n)).norm(), 1e-10);
    const CMat om = oracle::omega(t.values(), n, r, lam);
    EXPECT_LT((om + om.adjoint()).norm(), 1e-14);
    EXPECT_LT((u - oracle::expm(om)).norm(), 1e-10);
  }
}

TEST(Unitary, GroupPropertyTwoByTwo) {
  const CepstralParams a(2, 0, Eigen::VectorXd::Constant(1, 0.4));
  const CepstralParams b(2, 0, Eigen::VectorXd::Constant(1, -1.3));
  const CepstralParams ab(2, 0, Eigen::VectorXd::Constant(1, 0.4 - 1.3));
  EXPECT_LT((unitary_at(ab, 0.3) - unitary_at(a, 0.3) * unitary_at(b, 0.3)).norm(), 1e-14);
}

TEST(MapFrf, IdentityCases) {
  const FreqGrid g(64);
  const RootGrid roots = var_roots(g);
  const SpectralGrid psi = map_frf(CepstralParams::zeros(2, 1), roots);
  for (Index j = 0; j < 64; ++j) EXPECT_LT((psi[j] - CMat::Identity(2, 2)).norm(), 1e-12);

  RootGrid white{g, std::vector<CMat>(64, CMat::Identity(2, 2)), std::vector<CMat>(64, CMat::Identity(2, 2)), 1.0};
  std::mt19937_64 gen(3);
  const CepstralParams t = random_theta(2, 1, gen);
  const SpectralGrid u = map_frf(t, white);
  for (Index j = 0; j < 64; ++j) EXPECT_LT((u[j] - unitary_at(t, g.lambda(j))).norm(), 1e-15);
}

TEST(MapFrf, ScalarModulusOne) {
  const FreqGrid g(64);
  VmaFactor f;
  f.q = 1;
  f.theta = {Mat::Identity(1, 1), Mat::Constant(1, 1, 0.6)};
  f.sigma = Mat::Constant(1, 1, 2.0);
  const RootGrid roots = spectral_root_grid(f, g);
  const SpectralGrid psi = map_frf(CepstralParams(1, 2, Eigen::Vector2d(0.8, -0.3)), roots);
  for (Index j = 0; j < 64; ++j) EXPECT_NEAR(std::abs(psi[j](0, 0)), 1.0, 1e-14);
}

TEST(VerifySmap, HandCases) {
  const FreqGrid g(8);
  const SpectralGrid s(g, std::vector<CMat>(8, CMat::Identity(2, 2)), SpectralKind::marginal);
  const SpectralGrid id(g, std::vector<CMat>(8, CMat::Identity(2, 2)), SpectralKind::frf);
  EXPECT_EQ(verify_smap(id, s), 0.0);
  const SpectralGrid two(g, std::vector<CMat>(8, 2.0 * CMat::Identity(2, 2)), SpectralKind::frf);
  EXPECT_DOUBLE_EQ(verify_smap(two, s), 3.0);
}

TEST(VerifySmap, ClassMembersAreAllPass) {
  const FreqGrid g(128);
  const RootGrid roots = var_roots(g);
  const SpectralGrid s = root_product(roots);
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 20; ++trial) {
    const SpectralGrid psi = map_frf(random_theta(2, 1 + trial % 2, gen), roots);
    EXPECT_LT(verify_smap(psi, s), 1e-8);
    EXPECT_LT(psi.conjugate_residual(), 1e-10);
  }
}

TEST(FrfToCoeffs, IdentityAndDelay) {
  const FreqGrid g(64);
  const MapFilter id = frf_to_coeffs(SpectralGrid(g, std::vector<CMat>(64, CMat::Identity(2, 2)), SpectralKind::frf));
  EXPECT_EQ(id.halfwidth, 0);
  EXPECT_LT((id.at(0) - Mat::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LT(id.tail_norm, 1e-12);

  std::vector<CMat> delay;
  for (Index j = 0; j < 64; ++j) delay.push_back(std::polar(1.0, -g.lambda(j)) * CMat::Identity(2, 2));
  const MapFilter d = frf_to_coeffs(SpectralGrid(g, delay, SpectralKind::frf));
  ASSERT_EQ(d.halfwidth, 1);
  EXPECT_LT((d.at(1) - Mat::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LT(d.at(0).norm() + d.at(-1).norm(), 1e-12);
}

TEST(FrfToCoeffs, ForwardTransformOracle) {
  const FreqGrid g(512);
  const RootGrid roots = var_roots(g);
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 5; ++trial) {
    const SpectralGrid psi = map_frf(random_theta(2, 1, gen, 0.5), roots);
    const MapFilter f = frf_to_coeffs(psi);
    EXPECT_LT(f.halfwidth, 255);
    for (Index j = 0; j < g.size(); j += 7) {
      CMat ref = CMat::Zero(2, 2);
      for (int k = -f.halfwidth; k <= f.halfwidth; ++k) ref += std::polar(1.0, -g.lambda(j) * k) * f.at(k).cast<cd>();
      EXPECT_LT((ref - psi[j]).cwiseAbs().maxCoeff(), static_cast<double>(2 * (256 - f.halfwidth)) * kDefaultTailTol + 1e-9);
      EXPECT_LT((filter_response(f, g.lambda(j)) - ref).norm(), 1e-13);
    }
  }
}

TEST(FrfToCoeffs, SymmetryViolationRejected) {
  const FreqGrid g(16);
  std::vector<CMat> bad(16, CMat::Identity(1, 1));
  bad[3](0, 0) = cd(0.0, 1.0);
  try {
    frf_to_coeffs(SpectralGrid(g, bad, SpectralKind::frf));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::symmetry);
  }
}

TEST(FilterJson, Roundtrip) {
  const FreqGrid g(64);
  std::mt19937_64 gen(6);
  const CepstralParams t = random_theta(2, 1, gen, 0.3);
  const MapFilter f = frf_to_coeffs(map_frf(t, var_roots(g)));
  const MapFilter back = filter_from_json(filter_to_json(f, 1e-12, t));
  ASSERT_EQ(back.halfwidth, f.halfwidth);
  for (int k = -f.halfwidth; k <= f.halfwidth; ++k) EXPECT_EQ((back.at(k) - f.at(k)).norm(), 0.0);
  EXPECT_THROW(filter_from_json("{\"halfwidth\": 1, \"coeffs\": []}"), Error);
}
