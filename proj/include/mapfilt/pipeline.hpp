#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mapfilt/allpass.hpp"
#include "mapfilt/factorize.hpp"
#include "mapfilt/privacy.hpp"
#include "mapfilt/series.hpp"
#include "mapfilt/sim_models.hpp"
#include "mapfilt/spectral.hpp"

namespace mapfilt {

/// Settings of one privatization run. JSON keys (all optional):
///
///   nx             int     leading channels that are sensitive (>= 1, < n)
///   diff           {d, D, s}
///   taper          {bandwidth, eps}; default l = ceil(T^{1/3}), eps = 1/T
///   grid           int     even, >= 8 (default 512)
///   r              int     cepstral order (default 1)
///   q              int     VMA order for the spectral factor (default 2 l,
///                          doubled while its truncation is not PD)
///   toeplitz_m     int     Bauer block Toeplitz size (0 = automatic)
///   restarts, max_iter, tol, free_params   optimizer settings
///   seed           uint
///   tail_tol       double  filter truncation tolerance (default 1e-8)
///   extend_order   int     forecast VAR order (-1 = min(10, L/2))
///   acf_lags       int     lags in the report tables and RUM (default 20)
///   record_timing  bool    add wall-clock runtime to the report
///
/// Unknown keys are rejected.
struct PipelineConfig {
  Index nx = 1;
  DiffSpec diff;
  std::optional<TaperSpec> taper;
  Index grid = 512;
  int r = 1;
  std::optional<int> q;
  int toeplitz_m = 0;
  int restarts = 8;
  int max_iter = 500;
  double tol = 1e-8;
  std::vector<Index> free_params;
  std::uint64_t seed = 0;
  double tail_tol = kDefaultTailTol;
  int extend_order = -1;
  int acf_lags = 20;
  bool record_timing = false;

  /// Throws Errc::invalid_argument for out-of-range fields; `channels` is
  /// the width of the input series.
  void validate(Index channels) const;
  OptOptions optimizer() const;
};

PipelineConfig parse_config_json(const std::string& text);
PipelineConfig load_config(const std::string& path);
std::string config_to_json(const PipelineConfig& c);

/// Everything the filter design stage produced.
struct FilterFit {
  MultiSeries w;           // differenced, de-meaned joint series
  Eigen::RowVectorXd mean; // removed mean of the differenced series
  DiffState state;
  TaperSpec taper;
  AcvfSeq acvf;
  SpectralGrid joint;
  VmaFactor factor;
  RootGrid roots;
  OptResult opt;
  SpectralGrid frf;
  MapFilter filter;
  double smap_error = 0.0;
};

struct PrivatizeResult {
  MultiSeries y;           // released series on the original scale, nx channels
  MultiSeries x_detrended;
  MultiSeries y_detrended;
  FilterFit fit;
  Extension extension;
  PrivacyReport report;
};

/// Differencing through the optimized filter, without applying it.
FilterFit fit_filter(const MultiSeries& xz, const PipelineConfig& cfg);

/// The full release pipeline: the first cfg.nx channels of xz are
/// privatized, the rest serve as auxiliary series. Errors are rethrown with
/// the failing stage name prefixed.
PrivatizeResult privatize(const MultiSeries& xz, const PipelineConfig& cfg);

struct EvaluateResult {
  double rum = 0.0;
  double nfd = 0.0;
  CorrelationTables x_corr;
  CorrelationTables y_corr;
};

EvaluateResult evaluate(const MultiSeries& x, const MultiSeries& y, int maxlag);
std::string evaluate_to_json(const EvaluateResult& e);

/// Replicate i is simulated with seed + i.
std::uint64_t replicate_seed(std::uint64_t seed, int rep);

/// Monte Carlo privatization study over `reps` simulated replicates.
struct StudySummary {
  std::vector<std::uint64_t> seeds;
  std::vector<double> privacy;
  std::vector<double> rum;
  std::vector<double> seconds;
  double min_privacy = 0.0;
  double max_privacy = 0.0;
  double mean_privacy = 0.0;
  double mean_rum = 0.0;
  double mean_seconds = 0.0;
};

StudySummary run_study(const ModelSpec& model, Index T, int reps, std::uint64_t seed, const PipelineConfig& cfg);
std::string study_to_json(const StudySummary& s, bool include_timing);

/// Long-format QWI export to one column per county.
///
/// Accepted columns (case-insensitive): a geography column named one of
/// `geography_label`, `geography`, `county`, `geo_name`; either `year` and
/// `quarter` columns or a single `period`/`time` column holding `1997-Q1`,
/// `1997Q1` or `1997 Q1`; and the measure column named exactly as requested.
struct QwiOptions {
  std::vector<std::string> counties;
  std::string measure;
  /// Inclusive quarter range as `YYYY-Qn`; empty means the observed span.
  std::string start;
  std::string end;
};

MultiSeries qwi_ingest(std::istream& in, const QwiOptions& opts);
MultiSeries qwi_ingest(const std::string& path, const QwiOptions& opts);

}  // namespace mapfilt
