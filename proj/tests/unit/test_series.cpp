#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mapfilt/error.hpp"
#include "mapfilt/series.hpp"
#include "mapfilt/sim_models.hpp"
#include "oracles.hpp"

using namespace mapfilt;

namespace {

MultiSeries random_series(Index T, Index n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Mat v(T, n);
  for (Index t = 0; t < T; ++t)
    for (Index j = 0; j < n; ++j) v(t, j) = nd(gen);
  return MultiSeries(v);
}

MapFilter random_filter(Index n, int M, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  MapFilter f;
  f.halfwidth = M;
  for (int k = -M; k <= M; ++k) {
    Mat c(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) c(i, j) = nd(gen);
    f.coeffs.push_back(c);
  }
  return f;
}

}  // namespace

TEST(SampleAcvf, ConstantSeriesIsZero) {
  MultiSeries x(Mat::Constant(10, 2, 3.5));
  const AcvfSeq g = sample_acvf(x, 4);
  for (int h = 0; h <= 4; ++h) EXPECT_EQ(g[h].norm(), 0.0);
}

TEST(SampleAcvf, HandComputedTwoPoints) {
  Mat v(2, 1);
  v << 1.0, -1.0;
  const AcvfSeq g = sample_acvf(MultiSeries(v), 1);
  EXPECT_DOUBLE_EQ(g[0](0, 0), 1.0);
  EXPECT_DOUBLE_EQ(g[1](0, 0), -0.5);
}

TEST(SampleAcvf, LagAtLeastLengthRejected) {
  try {
    sample_acvf(random_series(5, 1, 1), 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_lag);
  }
}

TEST(SampleAcvf, MatchesLoopOracleAndNegativeLags) {
  const MultiSeries x = random_series(200, 3, 7);
  const AcvfSeq g = sample_acvf(x, 5);
  for (int h = 0; h <= 5; ++h)
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j) {
        EXPECT_NEAR(g[h](i, j), oracle::sample_cov(x.values.col(i), x.values.col(j), h), 1e-13);
        EXPECT_NEAR(g.at(-h)(i, j), oracle::sample_cov(x.values.col(j), x.values.col(i), h), 1e-13);
      }
}

TEST(SampleAcvf, CauchySchwarzBound) {
  const MultiSeries x = random_series(300, 3, 11);
  const AcvfSeq g = sample_acvf(x, 20);
  for (int h = 0; h <= 20; ++h)
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j)
        EXPECT_LE(std::abs(g[h](i, j)), std::sqrt(g[0](i, i) * g[0](j, j)) + 1e-12);
}

TEST(SampleAcvf, Var1LyapunovOracle) {
  const VarModel m = paper_var1();
  const MultiSeries x = simulate_var(m, 50000, 123);
  const Mat g0 = oracle::lyapunov(m.coeffs[0], m.noise_cov);
  const double rel = (sample_acvf(x, 1)[0] - g0).norm() / g0.norm();
  EXPECT_LT(rel, 0.05);
}

TEST(Difference, LinearTrendBecomesOnes) {
  Mat v(20, 1);
  for (Index t = 0; t < 20; ++t) v(t, 0) = static_cast<double>(t + 1);
  const auto [w, state] = difference(MultiSeries(v), DiffSpec{1, 0, 1});
  EXPECT_EQ(w.length(), 19);
  for (Index t = 0; t < 19; ++t) EXPECT_EQ(w.values(t, 0), 1.0);
}

TEST(Difference, PeriodicSignalVanishes) {
  Mat v(24, 2);
  const double pattern[4] = {1.0, -2.0, 0.5, 3.0};
  for (Index t = 0; t < 24; ++t) {
    v(t, 0) = pattern[t % 4];
    v(t, 1) = 10.0 * pattern[(t + 1) % 4];
  }
  const auto [w, state] = difference(MultiSeries(v), DiffSpec{0, 1, 4});
  EXPECT_EQ(w.length(), 20);
  EXPECT_EQ(w.values.norm(), 0.0);
  // integrating zeros with the periodic state restores the signal
  const MultiSeries back = integrate(MultiSeries(Mat::Zero(20, 2)), state, DiffSpec{0, 1, 4});
  EXPECT_EQ((back.values - v).norm(), 0.0);
}

TEST(Difference, RoundtripIsIdentity) {
  const DiffSpec specs[] = {{0, 0, 1}, {1, 0, 1}, {2, 0, 1}, {0, 1, 4}, {1, 1, 4}, {0, 2, 12}};
  for (const auto& spec : specs) {
    const MultiSeries x = random_series(104, 2, 5);
    const auto [w, state] = difference(x, spec);
    EXPECT_EQ(w.length(), 104 - spec.consumed());
    const MultiSeries back = integrate(w, state, spec);
    EXPECT_LT((back.values - x.values).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Difference, CumulativeSumFromFirstValue) {
  Mat v(5, 1);
  v << 2.0, 3.0, 1.0, 4.0, 4.5;
  const auto [w, state] = difference(MultiSeries(v), DiffSpec{1, 0, 1});
  Mat diffs(4, 1);
  diffs << 1.0, -2.0, 3.0, 0.5;
  EXPECT_EQ((w.values - diffs).norm(), 0.0);
  const MultiSeries back = integrate(MultiSeries(diffs), state, DiffSpec{1, 0, 1});
  EXPECT_EQ((back.values - v).norm(), 0.0);
}

TEST(Difference, TooShortRejected) {
  try {
    difference(random_series(4, 1, 1), DiffSpec{0, 1, 4});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_length);
  }
}

TEST(Integrate, MismatchedStateRejected) {
  const auto [w, state] = difference(random_series(20, 2, 3), DiffSpec{1, 0, 1});
  EXPECT_THROW(integrate(w, state, DiffSpec{0, 1, 4}), Error);
}

TEST(ForecastExtend, WhiteNoiseAppendsZeros) {
  const MultiSeries x = random_series(50, 2, 9);
  std::vector<Mat> lags{Mat::Identity(2, 2)};
  for (int h = 1; h <= 6; ++h) lags.push_back(Mat::Zero(2, 2));
  const Extension ext = forecast_extend(x, AcvfSeq(lags), 7);
  EXPECT_EQ(ext.series.length(), 64);
  EXPECT_EQ(ext.series.values.topRows(7).norm(), 0.0);
  EXPECT_EQ(ext.series.values.bottomRows(7).norm(), 0.0);
  EXPECT_EQ((ext.series.values.middleRows(7, 50) - x.values).norm(), 0.0);
}

TEST(ForecastExtend, Ar1ClosedFormPredictor) {
  // AR(1), phi = 0.5, unit innovations: Gamma(h) = phi^h / (1 - phi^2)
  std::vector<Mat> lags;
  for (int h = 0; h <= 4; ++h) lags.push_back(Mat::Constant(1, 1, std::pow(0.5, h) / 0.75));
  Mat v(3, 1);
  v << 4.0, -1.0, 2.0;
  const Extension ext = forecast_extend(MultiSeries(v), AcvfSeq(lags), 2);
  EXPECT_NEAR(ext.series.values(5, 0), 1.0, 1e-12);
  EXPECT_NEAR(ext.series.values(6, 0), 0.5, 1e-12);
  // backcasts of a reversible AR(1) mirror the forecasts from x_1
  EXPECT_NEAR(ext.series.values(1, 0), 2.0, 1e-12);
  EXPECT_NEAR(ext.series.values(0, 0), 1.0, 1e-12);
}

TEST(ForecastExtend, LengthIsTPlus2M) {
  const MultiSeries x = random_series(80, 3, 21);
  const AcvfSeq g = sample_acvf(x, 8);
  for (int M : {0, 1, 5, 13}) EXPECT_EQ(forecast_extend(x, g, M).series.length(), 80 + 2 * M);
}

TEST(ForecastExtend, SingularSystemFallsBack) {
  std::vector<Mat> lags{Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Zero(2, 2)};
  const Extension ext = forecast_extend(random_series(10, 2, 1), AcvfSeq(lags), 3, ExtendOptions{1});
  EXPECT_TRUE(ext.fallback);
  EXPECT_EQ(ext.series.values.topRows(3).norm(), 0.0);
}

TEST(ApplyFilter, IdentityAndShift) {
  const MultiSeries x = random_series(30, 2, 4);
  EXPECT_EQ((apply_filter(x, MapFilter::identity(2)).values - x.values).norm(), 0.0);

  MapFilter shift;
  shift.halfwidth = 1;
  shift.coeffs = {Mat::Zero(2, 2), Mat::Zero(2, 2), Mat::Identity(2, 2)};
  const MultiSeries y = apply_filter(x, shift);
  ASSERT_EQ(y.length(), 28);
  // central point t sits at x row t + 1; y_t = x_{t-1} is x row t
  EXPECT_EQ((y.values - x.values.topRows(28)).norm(), 0.0);
}

TEST(ApplyFilter, MatchesConvolutionOracle) {
  const MultiSeries x = random_series(60, 3, 17);
  const MapFilter f = random_filter(3, 4, 18);
  const MultiSeries y = apply_filter(x, f);
  const Mat ref = oracle::convolve(x.values, f.coeffs, 4);
  EXPECT_LT((y.values - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ApplyFilter, Linear) {
  const MultiSeries x = random_series(40, 2, 30);
  const MultiSeries z = random_series(40, 2, 31);
  const MapFilter f = random_filter(2, 3, 32);
  MultiSeries combo(2.5 * x.values - 0.75 * z.values);
  const Mat lhs = apply_filter(combo, f).values;
  const Mat rhs = 2.5 * apply_filter(x, f).values - 0.75 * apply_filter(z, f).values;
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ApplyFilter, InsufficientPaddingRejected) {
  const MultiSeries x = random_series(10, 2, 2);
  const MapFilter f = random_filter(2, 3, 3);
  try {
    apply_filter(x, f, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_length);
  }
}

TEST(MultiSeries, ValidateRejectsBadInput) {
  Mat v = Mat::Zero(3, 2);
  v(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(MultiSeries(v).validate(), Error);
  EXPECT_THROW(MultiSeries(Mat::Zero(3, 2), {"a", "a"}).validate(), Error);
}

TEST(SeriesCsv, RoundtripWithLabels) {
  MultiSeries x = random_series(6, 2, 8);
  x.names = {"Howard County, MD", "b"};
  x.time = {"1997-Q1", "1997-Q2", "1997-Q3", "1997-Q4", "1998-Q1", "1998-Q2"};
  std::stringstream buf;
  write_series_csv(buf, x);
  const MultiSeries back = read_series_csv(buf);
  EXPECT_EQ(back.names, x.names);
  EXPECT_EQ(back.time, x.time);
  EXPECT_EQ((back.values - x.values).norm(), 0.0);
}

TEST(SeriesCsv, IntegerIndexDropped) {
  std::stringstream buf("time,a\n1,0.5\n2,1.5\n");
  const MultiSeries x = read_series_csv(buf);
  EXPECT_TRUE(x.time.empty());
  EXPECT_EQ(x.values(1, 0), 1.5);
}

TEST(SeriesCsv, BadHeaderAndRows) {
  std::stringstream bad_header("date,a\n1,2\n");
  EXPECT_THROW(read_series_csv(bad_header), Error);
  std::stringstream ragged("time,a,b\n1,2\n");
  EXPECT_THROW(read_series_csv(ragged), Error);
  std::stringstream text("time,a\n1,abc\n");
  EXPECT_THROW(read_series_csv(text), Error);
}
