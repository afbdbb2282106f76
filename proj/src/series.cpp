#include "mapfilt/series.hpp"

#include <cmath>
#include <set>

#include "mapfilt/error.hpp"

namespace mapfilt {

std::vector<std::string> default_names(Index n, const std::string& prefix) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

MultiSeries::MultiSeries(Mat v, std::vector<std::string> channel_names)
    : values(std::move(v)), names(std::move(channel_names)) {
  if (names.empty()) names = default_names(values.cols());
}

void MultiSeries::validate() const {
  if (values.rows() < 1 || values.cols() < 1)
    throw Error(Errc::shape, "series must have T >= 1 rows and n >= 1 channels");
  if (static_cast<Index>(names.size()) != values.cols())
    throw Error(Errc::shape, "channel name count does not match series width");
  if (!values.allFinite()) throw Error(Errc::invalid_argument, "series contains non-finite values");
  std::set<std::string> seen(names.begin(), names.end());
  if (seen.size() != names.size()) throw Error(Errc::invalid_argument, "channel names must be unique");
  if (!time.empty() && static_cast<Index>(time.size()) != values.rows())
    throw Error(Errc::shape, "time label count does not match series length");
}

MultiSeries MultiSeries::channels(Index first, Index count) const {
  if (first < 0 || count < 1 || first + count > dims())
    throw Error(Errc::shape, "channel range out of bounds");
  MultiSeries out(values.middleCols(first, count),
                  std::vector<std::string>(names.begin() + first, names.begin() + first + count));
  out.period = period;
  out.time = time;
  return out;
}

AcvfSeq::AcvfSeq(std::vector<Mat> gamma) : gamma_(std::move(gamma)) {
  if (gamma_.empty()) throw Error(Errc::shape, "autocovariance sequence needs at least lag 0");
  const Index n = gamma_.front().rows();
  for (const auto& g : gamma_)
    if (g.rows() != n || g.cols() != n) throw Error(Errc::shape, "autocovariance lags must be square and equal-sized");
}

Mat AcvfSeq::at(int h) const {
  if (h >= 0) return gamma_.at(static_cast<std::size_t>(h));
  return gamma_.at(static_cast<std::size_t>(-h)).transpose();
}

AcvfSeq AcvfSeq::block(Index first, Index count) const {
  std::vector<Mat> out;
  out.reserve(gamma_.size());
  for (const auto& g : gamma_) out.push_back(g.block(first, first, count, count));
  return AcvfSeq(std::move(out));
}

AcvfSeq AcvfSeq::truncated(int maxlag) const {
  if (maxlag < 0 || maxlag > this->maxlag()) throw Error(Errc::invalid_lag, "truncation lag out of range");
  return AcvfSeq(std::vector<Mat>(gamma_.begin(), gamma_.begin() + maxlag + 1));
}

MapFilter MapFilter::identity(Index n) {
  MapFilter f;
  f.coeffs.push_back(Mat::Identity(n, n));
  return f;
}

AcvfSeq sample_acvf(const MultiSeries& x, int maxlag) {
  const Index T = x.length();
  if (maxlag < 0 || maxlag >= T)
    throw Error(Errc::invalid_lag, "lag count " + std::to_string(maxlag) + " must be in [0, T) with T = " + std::to_string(T));
  if (!x.values.allFinite()) throw Error(Errc::invalid_argument, "series contains non-finite values");
  const Mat centered = x.values.rowwise() - x.values.colwise().mean();
  std::vector<Mat> gamma;
  gamma.reserve(static_cast<std::size_t>(maxlag) + 1);
  for (int h = 0; h <= maxlag; ++h) {
    // Gamma(h) = (1/T) sum_t x_{t+h} x_t'
    Mat g = centered.bottomRows(T - h).transpose() * centered.topRows(T - h);
    gamma.push_back(g / static_cast<double>(T));
  }
  gamma[0] = 0.5 * (gamma[0] + gamma[0].transpose()).eval();
  return AcvfSeq(std::move(gamma));
}

void DiffSpec::validate() const {
  if (d < 0 || D < 0) throw Error(Errc::invalid_argument, "differencing orders must be nonnegative");
  if (s < 1) throw Error(Errc::invalid_argument, "seasonal period must be >= 1");
}

DiffState DiffState::channels(Index first, Index count) const {
  DiffState out;
  out.stage_lags = stage_lags;
  for (const auto& h : stage_heads) out.stage_heads.push_back(h.middleCols(first, count));
  return out;
}

namespace {

std::vector<int> stage_lags_for(const DiffSpec& spec) {
  std::vector<int> lags(static_cast<std::size_t>(spec.D), spec.s);
  lags.insert(lags.end(), static_cast<std::size_t>(spec.d), 1);
  return lags;
}

}  // namespace

std::pair<MultiSeries, DiffState> difference(const MultiSeries& x, const DiffSpec& spec) {
  spec.validate();
  if (x.length() <= spec.consumed())
    throw Error(Errc::invalid_length, "series of length " + std::to_string(x.length()) +
                                          " too short for differencing that consumes " +
                                          std::to_string(spec.consumed()) + " points");
  DiffState state;
  state.stage_lags = stage_lags_for(spec);
  Mat cur = x.values;
  for (int lag : state.stage_lags) {
    state.stage_heads.push_back(cur.topRows(lag));
    const Index len = cur.rows() - lag;
    cur = (cur.bottomRows(len) - cur.topRows(len)).eval();
  }
  MultiSeries out(std::move(cur), x.names);
  out.period = x.period;
  if (!x.time.empty()) out.time.assign(x.time.begin() + spec.consumed(), x.time.end());
  return {std::move(out), std::move(state)};
}

MultiSeries integrate(const MultiSeries& y, const DiffState& state, const DiffSpec& spec) {
  spec.validate();
  const auto lags = stage_lags_for(spec);
  if (state.stage_lags != lags || state.stage_heads.size() != lags.size())
    throw Error(Errc::shape, "differencing state does not match the differencing spec");
  for (std::size_t k = 0; k < lags.size(); ++k) {
    const auto& head = state.stage_heads[k];
    if (head.rows() != lags[k] || head.cols() != y.dims())
      throw Error(Errc::shape, "differencing state has the wrong shape for this series");
  }
  Mat cur = y.values;
  for (std::size_t k = lags.size(); k-- > 0;) {
    const int lag = lags[k];
    Mat up(cur.rows() + lag, cur.cols());
    up.topRows(lag) = state.stage_heads[k];
    for (Index t = lag; t < up.rows(); ++t) up.row(t) = cur.row(t - lag) + up.row(t - lag);
    cur = std::move(up);
  }
  MultiSeries out(std::move(cur), y.names);
  out.period = y.period;
  return out;
}

std::vector<Mat> yule_walker(const AcvfSeq& acvf, int order) {
  const Index n = acvf.dims();
  if (order < 1 || order > acvf.maxlag()) throw Error(Errc::invalid_lag, "Yule-Walker order must be in [1, L]");
  const Index p = order;
  // [A_1 ... A_p] G = [Gamma(1) ... Gamma(p)], G block (k, h) = Gamma(h - k).
  Mat G(n * p, n * p);
  Mat R(n, n * p);
  for (Index k = 0; k < p; ++k) {
    for (Index h = 0; h < p; ++h) G.block(k * n, h * n, n, n) = acvf.at(static_cast<int>(h - k));
    R.block(0, k * n, n, n) = acvf[static_cast<int>(k + 1)];
  }
  Eigen::LDLT<Mat> ldlt(G);
  const double scale = std::max(G.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-12 * scale)
    throw Error(Errc::conditioning, "Yule-Walker system is singular");
  const Mat At = ldlt.solve(R.transpose());
  std::vector<Mat> coeffs;
  for (Index k = 0; k < p; ++k) coeffs.push_back(At.block(k * n, 0, n, n).transpose());
  return coeffs;
}

namespace {

// Iterates the VAR recursion forward M steps starting from the newest rows
// of `history` (row 0 oldest).
Mat var_forecast(const std::vector<Mat>& coeffs, const Mat& history, int M) {
  const Index n = history.cols();
  const Index p = static_cast<Index>(coeffs.size());
  Mat buf(history.rows() + M, n);
  buf.topRows(history.rows()) = history;
  for (Index t = history.rows(); t < buf.rows(); ++t) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
    for (Index k = 1; k <= p && t - k >= 0; ++k) next += coeffs[static_cast<std::size_t>(k - 1)] * buf.row(t - k).transpose();
    buf.row(t) = next.transpose();
  }
  return buf.bottomRows(M);
}

}  // namespace

Extension forecast_extend(const MultiSeries& x, const AcvfSeq& acvf, int M, const ExtendOptions& opts) {
  if (M < 0) throw Error(Errc::invalid_argument, "extension length must be >= 0");
  if (acvf.dims() != x.dims()) throw Error(Errc::shape, "autocovariance dimension does not match series");
  const Index T = x.length();
  const Index n = x.dims();
  Extension ext;
  ext.series = MultiSeries(Mat::Zero(T + 2 * M, n), x.names);
  ext.series.period = x.period;
  ext.series.values.middleRows(M, T) = x.values;
  if (M == 0) return ext;

  int order = opts.order >= 0 ? opts.order : std::min(10, acvf.maxlag() / 2);
  order = std::min<int>(order, static_cast<int>(T));
  if (order < 1) return ext;  // white-noise predictor
  ext.order = order;

  std::vector<Mat> reversed_lags;
  for (const auto& g : acvf.lags()) reversed_lags.push_back(g.transpose());
  const AcvfSeq reversed(std::move(reversed_lags));

  try {
    const auto fwd = yule_walker(acvf, order);
    const auto bwd = yule_walker(reversed, order);
    ext.series.values.bottomRows(M) = var_forecast(fwd, x.values, M);
    const Mat flipped = x.values.colwise().reverse();
    ext.series.values.topRows(M) = var_forecast(bwd, flipped, M).colwise().reverse();
  } catch (const Error& e) {
    if (e.code() != Errc::conditioning) throw;
    ext.fallback = true;
    ext.series.values.topRows(M).setZero();
    ext.series.values.bottomRows(M).setZero();
  }
  return ext;
}

MultiSeries apply_filter(const MultiSeries& x_ext, const MapFilter& f, std::optional<Index> expected_length) {
  const int M = f.halfwidth;
  if (static_cast<Index>(f.coeffs.size()) != 2 * M + 1) throw Error(Errc::shape, "filter coefficient count must be 2M + 1");
  if (f.dims() != x_ext.dims()) throw Error(Errc::shape, "filter dimension does not match series");
  const Index T = x_ext.length() - 2 * M;
  if (T < 1 || (expected_length && T != *expected_length))
    throw Error(Errc::invalid_length, "extended series of length " + std::to_string(x_ext.length()) +
                                          " does not carry the " + std::to_string(M) +
                                          " points of padding per side the filter needs");
  Mat y = Mat::Zero(T, x_ext.dims());
  for (int k = -M; k <= M; ++k) {
    // y_t = sum_k Psi_k x_{t-k}; output row t sits at extended row t + M.
    y.noalias() += x_ext.values.middleRows(M - k, T) * f.at(k).transpose();
  }
  MultiSeries out(std::move(y), x_ext.names);
  out.period = x_ext.period;
  return out;
}

}  // namespace mapfilt
