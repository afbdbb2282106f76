#pragma once

#include <string>
#include <vector>

#include "mapfilt/series.hpp"
#include "mapfilt/spectral.hpp"

namespace mapfilt {

/// Moving-average factor S(z) = Theta(z) Sigma Theta(z)^* with Theta_0 = I.
struct VmaFactor {
  std::vector<Mat> theta;  // Theta_0..Theta_q
  Mat sigma;
  int q = 0;
  int m = 0;  // block Toeplitz rows actually factorized
  /// sup_j ||Theta(z_j) Sigma Theta(z_j)^* - S(lambda_j)||_F on the check grid.
  double recon_error = 0.0;
  /// recon_error relative to max_j ||S(lambda_j)||_F.
  double recon_rel_error = 0.0;
  /// False when the relative reconstruction error exceeds the tolerance;
  /// a larger m usually helps.
  bool converged = true;

  Index dims() const { return sigma.rows(); }
};

struct BauerOptions {
  /// Block Toeplitz size; 0 selects 40 q capped at 2000 (at least 5 q).
  int m = 0;
  /// Grid used for the positivity precheck and the reconstruction error.
  Index check_grid = 512;
  double tol = 1e-6;
  /// Stop once successive Cholesky block rows agree to this relative level.
  double early_stop = 1e-15;
};

int default_toeplitz_size(int q);

/// Bauer's method on Gamma(0..q): modified Cholesky of the m-block Toeplitz
/// covariance, whose last block row converges to the VMA(q) coefficients.
/// Throws Errc::factorization when the truncated spectrum or the Toeplitz
/// matrix is not positive definite.
VmaFactor bauer_factorize(const AcvfSeq& acvf, int q, const BauerOptions& opts = {});

/// Per-frequency spectral roots S+(lambda) = Theta(e^{-i lambda}) Sigma^{1/2}
/// and their inverses.
struct RootGrid {
  FreqGrid grid;
  std::vector<CMat> roots;
  std::vector<CMat> inverses;
  double max_condition = 1.0;

  Index dims() const { return roots.empty() ? 0 : roots.front().rows(); }
};

inline constexpr double kMaxRootCondition = 1e10;

RootGrid spectral_root_grid(const VmaFactor& f, const FreqGrid& grid);

/// roots_j roots_j^* at every frequency.
SpectralGrid root_product(const RootGrid& r);

/// sum_k Theta_k z^k at z = e^{-i lambda}.
CMat ma_polynomial(const VmaFactor& f, double lambda);

/// Model JSON (`ar` empty, `ma` = Theta_1..Theta_q, `sigma`) plus diagnostics.
std::string factor_to_json(const VmaFactor& f);

}  // namespace mapfilt
