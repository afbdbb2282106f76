#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mapfilt/allpass.hpp"
#include "mapfilt/factorize.hpp"
#include "mapfilt/series.hpp"
#include "mapfilt/spectral.hpp"

namespace mapfilt {

/// (1/N) sum_j s_j.
CMat grid_average(const SpectralGrid& s);
/// (1/N) sum_j s_j frf_j^*.
CMat grid_average(const SpectralGrid& s, const SpectralGrid& frf);

/// Real determinant of a nearly Hermitian matrix. Throws Errc::consistency
/// when the imaginary residue exceeds 1e-8 |det| plus a roundoff floor of
/// 64 eps times the Hadamard bound.
double hermitian_det(const CMat& m);

/// Everything the m-LIP criterion needs besides theta: the conditional
/// spectrum S_{X|Z} and the spectral roots of S_X on the same grid.
class CriterionContext {
 public:
  CriterionContext(SpectralGrid s_cond, RootGrid roots);

  const SpectralGrid& s_cond() const { return s_cond_; }
  const RootGrid& roots() const { return roots_; }
  const FreqGrid& grid() const { return s_cond_.grid; }
  Index dims() const { return s_cond_.dims(); }
  /// det <S_{X|Z}>.
  double denom() const { return denom_; }

  /// Psi_j S_j Psi_j^* factorizes as R_j U_j P_j U_j^* R_j^* with
  /// P_j = R_j^{-1} S_j R_j^{-*}, and S_j Psi_j^* = Q_j U_j^* R_j^* with
  /// Q_j = S_j R_j^{-*}.
  const std::vector<CMat>& sandwiched() const { return p_; }
  const std::vector<CMat>& cross() const { return q_; }

 private:
  SpectralGrid s_cond_;
  RootGrid roots_;
  double denom_ = 0.0;
  std::vector<CMat> p_;
  std::vector<CMat> q_;
};

inline constexpr double kRangeWindow = 1e-9;

/// 1 - det(A B^{-1} A^*) / det<S_{X|Z}> with A = <S_{X|Z} Psi^*> and
/// B = <Psi S_{X|Z} Psi^*>, Psi = map_frf(theta, roots).
double mlip(const CepstralParams& theta, const CriterionContext& ctx);

struct OptOptions {
  int restarts = 8;
  std::uint64_t seed = 0;
  int max_iter = 500;
  double tol = 1e-8;
  /// Indices of theta that are optimized; the rest stay at zero. Empty
  /// means all n_r entries are free.
  std::vector<Index> free_params;
};

struct OptResult {
  CepstralParams theta_opt;
  double privacy = 0.0;
  int restarts_used = 0;
  int iterations = 0;
  bool converged = false;
  double wall_time = 0.0;
  /// Privacy at each restart's random initial point and at its end point.
  std::vector<double> initial_privacy;
  std::vector<double> final_privacy;
};

/// Multi-start maximization of m-LIP over theta. Each restart draws its
/// free parameters from N(0, 1) and runs BFGS with central finite-difference
/// gradients. Deterministic for fixed (ctx, r, opts).
OptResult optimize(const CriterionContext& ctx, int r, const OptOptions& opts = {});

/// Normalized Frobenius discrepancy over lags -L..L of two raw lag lists
/// (lag 0..L each; negative lags by transposition).
double nfd(const std::vector<Mat>& gamma_x, const std::vector<Mat>& gamma_y);
double nfd(const AcvfSeq& acvf_x, const AcvfSeq& acvf_y);

/// 1 - nfd of the sample autocovariances up to lag L.
double rum(const MultiSeries& x, const MultiSeries& y, int maxlag);

/// Sample autocorrelations (lags 0..L) per channel and cross-correlations
/// corr(x_{i,t+h}, x_{j,t}) for i < j, h = -L..L.
struct CorrelationTables {
  int maxlag = 0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> acf;  // [channel][h]
  struct Cross {
    Index i = 0;
    Index j = 0;
    std::vector<double> values;  // h = -L..L
  };
  std::vector<Cross> ccf;
};

CorrelationTables correlations(const MultiSeries& x, int maxlag);

struct PrivacyReport {
  double privacy = 0.0;
  double rum = 0.0;
  double nfd = 0.0;
  double smap_error = 0.0;
  CepstralParams theta;
  int acf_lags = 0;
  std::vector<std::string> aux_names;
  CorrelationTables x_corr;
  CorrelationTables y_corr;
  std::optional<double> runtime;
  /// Extra scalar diagnostics added by the caller (stage settings, flags).
  std::map<std::string, double> diagnostics;
};

/// Assembles the m-LIP value, realized utility and S-MAP error of a run,
/// together with correlation tables of the (detrended) original x and
/// released y.
PrivacyReport privacy_report(const MultiSeries& x, const MultiSeries& z, const MultiSeries& y,
                             const CepstralParams& theta_opt, const CriterionContext& ctx, const SpectralGrid& s_x,
                             int acf_lags = 20);

std::string report_to_json(const PrivacyReport& r);

/// Columns: kind (acf|ccf), series, lag, original, released.
void write_correlation_csv(std::ostream& out, const CorrelationTables& x, const CorrelationTables& y);

}  // namespace mapfilt
