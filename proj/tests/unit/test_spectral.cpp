#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "mapfilt/error.hpp"
#include "mapfilt/privacy.hpp"
#include "mapfilt/sim_models.hpp"
#include "mapfilt/spectral.hpp"
#include "oracles.hpp"

using namespace mapfilt;
using cd = std::complex<double>;

TEST(FreqGrid, SymmetricAndValidated) {
  const FreqGrid g(16);
  EXPECT_DOUBLE_EQ(g.lambda(0), -std::numbers::pi);
  EXPECT_DOUBLE_EQ(g.lambda(8), 0.0);
  for (Index j = 1; j < 16; ++j) EXPECT_NEAR(g.lambda(g.mirror(j)), -g.lambda(j), 1e-15);
  EXPECT_THROW(FreqGrid(6), Error);
  EXPECT_THROW(FreqGrid(15), Error);
}

TEST(FlatTop, WeightShape) {
  EXPECT_EQ(flat_top_weight(0.0), 1.0);
  EXPECT_EQ(flat_top_weight(1.0), 1.0);
  EXPECT_DOUBLE_EQ(flat_top_weight(1.5), 0.5);
  EXPECT_DOUBLE_EQ(flat_top_weight(-1.5), 0.5);
  EXPECT_EQ(flat_top_weight(2.0), 0.0);
  EXPECT_EQ(flat_top_weight(3.0), 0.0);
}

TEST(FlatTop, WhiteNoiseIsFlat) {
  std::vector<Mat> lags{Mat::Identity(3, 3), Mat::Zero(3, 3), Mat::Zero(3, 3)};
  const SpectralGrid s = flat_top_estimate(AcvfSeq(lags), FreqGrid(32), TaperSpec{1, 0.01});
  for (Index j = 0; j < 32; ++j) EXPECT_LT((s[j] - CMat::Identity(3, 3)).norm(), 1e-15);
  EXPECT_LT((grid_average(s) - CMat::Identity(3, 3)).norm(), 1e-10);
}

TEST(FlatTop, CosineSumAtZero) {
  std::vector<Mat> lags{Mat::Constant(1, 1, 1.25), Mat::Constant(1, 1, 0.5)};
  const FreqGrid g(64);
  const SpectralGrid s = flat_top_estimate(AcvfSeq(lags), g, TaperSpec{1, 0.01});
  EXPECT_NEAR(s[32](0, 0).real(), 2.25, 1e-14);
  EXPECT_NEAR(s[0](0, 0).real(), 0.25, 1e-14);
}

TEST(FlatTop, MatchesDirectTaperedSum) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd;
  std::vector<Mat> lags;
  for (int h = 0; h <= 6; ++h) {
    Mat m(2, 2);
    m << nd(gen), nd(gen), nd(gen), nd(gen);
    lags.push_back(m);
  }
  lags[0] = lags[0] * lags[0].transpose();
  const FreqGrid g(32);
  const TaperSpec taper{2, 0.01};
  const SpectralGrid s = flat_top_estimate(AcvfSeq(lags), g, taper);
  for (Index j = 0; j < 32; ++j) {
    CMat ref = lags[0].cast<cd>();
    for (int h = 1; h <= 6; ++h) {
      const double u = h / 2.0;
      const double w = u <= 1.0 ? 1.0 : std::max(0.0, 2.0 - u);
      ref += w * (std::polar(1.0, -g.lambda(j) * h) * lags[static_cast<std::size_t>(h)].cast<cd>() +
                  std::polar(1.0, g.lambda(j) * h) * lags[static_cast<std::size_t>(h)].transpose().cast<cd>());
    }
    EXPECT_LT((s[j] - ref).norm(), 1e-13);
  }
  EXPECT_LT(s.conjugate_residual(), 1e-13);
  EXPECT_LT(s.hermitian_residual(), 1e-15);
}

TEST(PdTruncate, ClampsEigenvalues) {
  CMat m(2, 2);
  m << 2.0, 0.0, 0.0, -0.1;
  const SpectralGrid s(FreqGrid(8), std::vector<CMat>(8, m), SpectralKind::joint);
  const SpectralGrid t = pd_truncate(s, 0.01);
  Eigen::SelfAdjointEigenSolver<CMat> es(t[3]);
  EXPECT_NEAR(es.eigenvalues()(0), 0.01, 1e-15);
  EXPECT_NEAR(es.eigenvalues()(1), 2.0, 1e-15);
}

TEST(PdTruncate, LeavesPdInputAndIsIdempotent) {
  std::mt19937_64 gen(3);
  const FreqGrid g(64);
  const SpectralGrid s(g, oracle::random_pd_grid(3, 64, gen), SpectralKind::joint);
  const SpectralGrid t = pd_truncate(s, 1e-3);
  for (Index j = 0; j < 64; ++j) EXPECT_LT((t[j] - s[j]).norm(), 1e-12);

  // random Hermitian (indefinite) grid: output - input is PSD, and repeat is a no-op
  std::normal_distribution<double> nd;
  std::vector<CMat> mats;
  for (Index j = 0; j < 64; ++j) {
    CMat a(3, 3);
    for (Index r = 0; r < 3; ++r)
      for (Index c = 0; c < 3; ++c) a(r, c) = cd(nd(gen), nd(gen));
    mats.push_back(0.5 * (a + a.adjoint()));
  }
  const SpectralGrid h(g, mats, SpectralKind::joint);
  const SpectralGrid once = pd_truncate(h, 0.05);
  const SpectralGrid twice = pd_truncate(once, 0.05);
  EXPECT_GE(once.min_eigenvalue(), 0.05 - 1e-12);
  for (Index j = 0; j < 64; ++j) {
    Eigen::SelfAdjointEigenSolver<CMat> es(once[j] - h[j]);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
    EXPECT_LT((twice[j] - once[j]).norm(), 1e-12);
  }
}

TEST(ConditionalSpectrum, ScalarSchur) {
  CMat m(2, 2);
  m << 4.0, 1.0, 1.0, 2.0;
  const SpectralGrid s(FreqGrid(8), std::vector<CMat>(8, m), SpectralKind::joint);
  const SpectralGrid c = conditional_spectrum(s, 1);
  EXPECT_NEAR(c[5](0, 0).real(), 3.5, 1e-14);
}

TEST(ConditionalSpectrum, BlockDiagonalGivesMarginal) {
  std::mt19937_64 gen(5);
  const FreqGrid g(16);
  const auto x = oracle::random_pd_grid(2, 16, gen);
  const auto z = oracle::random_pd_grid(2, 16, gen);
  std::vector<CMat> joint;
  for (Index j = 0; j < 16; ++j) {
    CMat m = CMat::Zero(4, 4);
    m.topLeftCorner(2, 2) = x[static_cast<std::size_t>(j)];
    m.bottomRightCorner(2, 2) = z[static_cast<std::size_t>(j)];
    joint.push_back(m);
  }
  const SpectralGrid c = conditional_spectrum(SpectralGrid(g, joint, SpectralKind::joint), 2);
  for (Index j = 0; j < 16; ++j) EXPECT_EQ((c[j] - x[static_cast<std::size_t>(j)]).norm(), 0.0);
}

TEST(ConditionalSpectrum, PdPreservedAndSingularRejected) {
  std::mt19937_64 gen(6);
  const FreqGrid g(32);
  const SpectralGrid s(g, oracle::random_pd_grid(4, 32, gen), SpectralKind::joint);
  EXPECT_GT(conditional_spectrum(s, 2).min_eigenvalue(), 0.0);

  CMat m = CMat::Identity(3, 3);
  m(2, 2) = 0.0;
  const SpectralGrid sing(FreqGrid(8), std::vector<CMat>(8, m), SpectralKind::joint);
  try {
    conditional_spectrum(sing, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::conditioning);
    EXPECT_NE(std::string(e.what()).find("frequency"), std::string::npos);
  }
}

TEST(GridAcvf, InvertsFiniteLagSpectrum) {
  std::vector<Mat> lags{Mat::Identity(2, 2) * 2.0, Mat::Constant(2, 2, 0.3), Mat::Constant(2, 2, -0.1)};
  const SpectralGrid s = acvf_spectrum(AcvfSeq(lags), FreqGrid(64));
  const AcvfSeq back = grid_acvf(s, 4);
  for (int h = 0; h <= 2; ++h) EXPECT_LT((back[h] - lags[static_cast<std::size_t>(h)]).norm(), 1e-14);
  EXPECT_LT(back[3].norm() + back[4].norm(), 1e-14);
}

TEST(FlatTop, ConsistentForPaperVar1) {
  const VarModel m = paper_var1();
  const Index T = 100000;
  const MultiSeries x = simulate_var(m, T, 77);
  const TaperSpec taper = TaperSpec::for_length(T);
  const FreqGrid g(512);
  const SpectralGrid est = pd_truncate(flat_top_estimate(sample_acvf(x, 2 * taper.bandwidth), g, taper), taper.eps);
  const SpectralGrid truth = model_spectrum(m, g);
  double acc = 0.0;
  for (Index j = 0; j < g.size(); ++j) acc += (est[j] - truth[j]).norm() / truth[j].norm();
  EXPECT_LT(acc / static_cast<double>(g.size()), 0.10);
}

TEST(SpectralCsv, HeaderAndRows) {
  const SpectralGrid s(FreqGrid(8), std::vector<CMat>(8, CMat::Identity(2, 2)), SpectralKind::joint);
  std::stringstream out;
  write_spectral_csv(out, s);
  std::string header;
  std::getline(out, header);
  EXPECT_EQ(header, "j,lambda,re_11,im_11,re_12,im_12,re_21,im_21,re_22,im_22");
  int rows = 0;
  for (std::string line; std::getline(out, line);) ++rows;
  EXPECT_EQ(rows, 8);
}
