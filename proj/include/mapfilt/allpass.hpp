#pragma once

#include <string>
#include <vector>

#include "mapfilt/factorize.hpp"
#include "mapfilt/series.hpp"
#include "mapfilt/spectral.hpp"

namespace mapfilt {

/// Free parameters of a truncated cepstral series Omega(z) of order r.
///
/// Layout (fixed; optimizer restarts and serialized results rely on it):
/// the n(n-1)/2 strict-lower entries of Omega_0 in column-major order, then
/// Omega_1..Omega_r, each row-major. Omega_{-k} = -Omega_k' is implied.
class CepstralParams {
 public:
  CepstralParams() = default;
  CepstralParams(Index n, int r, Eigen::VectorXd theta);

  static Index count(Index n, int r) { return r * n * n + n * (n - 1) / 2; }
  static CepstralParams zeros(Index n, int r);

  Index dims() const { return n_; }
  int order() const { return r_; }
  Index size() const { return theta_.size(); }
  const Eigen::VectorXd& values() const { return theta_; }

 private:
  Index n_ = 0;
  int r_ = 0;
  Eigen::VectorXd theta_;
};

struct CepstralMatrices {
  Mat omega0;              // skew-symmetric
  std::vector<Mat> omega;  // Omega_1..Omega_r
};

CepstralMatrices unpack(const CepstralParams& theta);
CepstralParams pack(const CepstralMatrices& m);

/// Omega(z) = Omega_0 + sum_k (Omega_k z^k - Omega_k' z^{-k}), z = e^{-i lambda}.
/// Skew-Hermitian for every lambda.
CMat cepstral_at(const CepstralMatrices& m, double lambda);

/// exp(A) for skew-Hermitian A via the Hermitian eigendecomposition of iA;
/// the result is unitary to rounding.
CMat skew_hermitian_exp(const CMat& a);

/// U(lambda; theta) = exp(Omega(e^{-i lambda})).
CMat unitary_at(const CepstralParams& theta, double lambda);

/// Psi(lambda_j) = roots_j U(lambda_j; theta) inverses_j.
SpectralGrid map_frf(const CepstralParams& theta, const RootGrid& roots);

/// max_j ||Psi_j S_j Psi_j^* - S_j||_F / ||S_j||_F.
double verify_smap(const SpectralGrid& frf, const SpectralGrid& s);

inline constexpr double kDefaultTailTol = 1e-8;

/// Fourier inversion Psi_k = (1/N) sum_j e^{i lambda_j k} Psi(lambda_j),
/// truncated to the smallest halfwidth M with ||Psi_k||_F < tail_tol for all
/// |k| > M (capped at N/2 - 1).
MapFilter frf_to_coeffs(const SpectralGrid& frf, double tail_tol = kDefaultTailTol);

/// Largest imaginary entry seen during the last inversion is above this.
inline constexpr double kMaxImaginaryResidue = 1e-6;

/// sum_k Psi_k z^k at z = e^{-i lambda}.
CMat filter_response(const MapFilter& f, double lambda);

/// JSON with `halfwidth`, `coeffs` (row-major, k = -M..M), `smap_error`,
/// `theta`, `r`, `tail_norm`.
std::string filter_to_json(const MapFilter& f, double smap_error, const CepstralParams& theta);
MapFilter filter_from_json(const std::string& text);

}  // namespace mapfilt
