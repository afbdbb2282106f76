#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mapfilt {

using Index = Eigen::Index;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

/// A length-T, n-channel real series; row t is the observation at time t.
struct MultiSeries {
  Mat values;
  std::vector<std::string> names;
  std::optional<int> period;
  /// Optional per-row time labels (ISO dates). Empty means integer index.
  std::vector<std::string> time;

  MultiSeries() = default;
  MultiSeries(Mat v, std::vector<std::string> channel_names = {});

  Index length() const { return values.rows(); }
  Index dims() const { return values.cols(); }

  /// Throws unless T >= 1, n >= 1, values finite and names unique.
  void validate() const;

  /// Channels [first, first + count) as a new series; time labels kept.
  MultiSeries channels(Index first, Index count) const;
};

std::vector<std::string> default_names(Index n, const std::string& prefix = "x");

/// Autocovariances Gamma(0..L). Gamma(-h) is never stored; at(-h) returns
/// Gamma(h)'.
class AcvfSeq {
 public:
  AcvfSeq() = default;
  explicit AcvfSeq(std::vector<Mat> gamma);

  Index dims() const { return gamma_.empty() ? 0 : gamma_.front().rows(); }
  int maxlag() const { return static_cast<int>(gamma_.size()) - 1; }

  Mat at(int h) const;
  const Mat& operator[](int h) const { return gamma_.at(static_cast<std::size_t>(h)); }
  const std::vector<Mat>& lags() const { return gamma_; }

  /// Lags 0..L of the sub-block for channels [first, first + count).
  AcvfSeq block(Index first, Index count) const;
  AcvfSeq truncated(int maxlag) const;

 private:
  std::vector<Mat> gamma_;
};

/// (1 - B)^d (1 - B^s)^D.
struct DiffSpec {
  int d = 0;
  int D = 0;
  int s = 1;

  int consumed() const { return d + D * s; }
  void validate() const;
};

/// Initial values consumed by each differencing stage, in application order.
/// Seasonal stages are applied first, then the nonseasonal ones.
struct DiffState {
  std::vector<int> stage_lags;
  std::vector<Mat> stage_heads;  // stage_heads[k] is stage_lags[k] x n

  Index dims() const { return stage_heads.empty() ? 0 : stage_heads.front().cols(); }
  DiffState channels(Index first, Index count) const;
};

/// Two-sided real matrix filter Psi_{-M..M}; coeffs[k + M] holds Psi_k.
struct MapFilter {
  std::vector<Mat> coeffs;
  int halfwidth = 0;
  double tail_norm = 0.0;

  Index dims() const { return coeffs.empty() ? 0 : coeffs.front().rows(); }
  const Mat& at(int k) const { return coeffs.at(static_cast<std::size_t>(k + halfwidth)); }
  static MapFilter identity(Index n);
};

/// Divisor-T sample autocovariances of the de-meaned series, lags 0..L.
AcvfSeq sample_acvf(const MultiSeries& x, int maxlag);

std::pair<MultiSeries, DiffState> difference(const MultiSeries& x, const DiffSpec& spec);

/// Exact left inverse of difference().
MultiSeries integrate(const MultiSeries& y, const DiffState& state, const DiffSpec& spec);

/// Yule-Walker VAR(p) fit: returns A_1..A_p with Gamma(h) = sum_k A_k Gamma(h-k)
/// for h = 1..p. Throws Errc::conditioning when the block Toeplitz system is
/// singular.
std::vector<Mat> yule_walker(const AcvfSeq& acvf, int order);

struct ExtendOptions {
  /// VAR order used for prediction; negative selects min(10, L/2).
  int order = -1;
};

struct Extension {
  MultiSeries series;
  int order = 0;
  bool fallback = false;  // predictor system singular, mean (zero) used
};

/// Pads x with M backcasts and M forecasts. The series is treated as zero
/// mean; forecasts come from the VAR fitted to `acvf`, backcasts from the
/// one fitted to the time-reversed autocovariances.
Extension forecast_extend(const MultiSeries& x, const AcvfSeq& acvf, int M,
                          const ExtendOptions& opts = {});

/// y_t = sum_{k=-M}^{M} Psi_k x_{t-k} over the central points of x_ext.
/// The output has x_ext.length() - 2M rows; when expected_length is given it
/// must match exactly.
MultiSeries apply_filter(const MultiSeries& x_ext, const MapFilter& f,
                         std::optional<Index> expected_length = std::nullopt);

// Series CSV: header `time,<name1>,...`, one row per time point.
MultiSeries read_series_csv(std::istream& in);
MultiSeries read_series_csv(const std::string& path);
void write_series_csv(std::ostream& out, const MultiSeries& x);
void write_series_csv(const std::string& path, const MultiSeries& x);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace mapfilt
