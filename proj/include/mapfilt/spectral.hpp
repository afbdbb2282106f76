#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mapfilt/series.hpp"

namespace mapfilt {

/// Frequencies lambda_j = -pi + 2 pi j / N, j = 0..N-1. The grid is closed
/// under negation: -lambda_j is lambda_{mirror(j)}.
class FreqGrid {
 public:
  explicit FreqGrid(Index N = 512);

  Index size() const { return N_; }
  double lambda(Index j) const;
  Index mirror(Index j) const { return (N_ - j) % N_; }
  bool operator==(const FreqGrid& other) const { return N_ == other.N_; }

 private:
  Index N_;
};

enum class SpectralKind { joint, marginal, conditional, root, frf };

/// Complex n x n matrices sampled on a FreqGrid.
struct SpectralGrid {
  FreqGrid grid;
  std::vector<CMat> mats;
  SpectralKind kind = SpectralKind::joint;

  SpectralGrid() = default;
  SpectralGrid(FreqGrid g, std::vector<CMat> m, SpectralKind k);

  Index dims() const { return mats.empty() ? 0 : mats.front().rows(); }
  const CMat& operator[](Index j) const { return mats[static_cast<std::size_t>(j)]; }

  /// Largest ||S_j - S_j^*||_F over the grid.
  double hermitian_residual() const;
  /// Largest ||S(-lambda) - conj(S(lambda))||_F over the grid.
  double conjugate_residual() const;
  /// Smallest eigenvalue of the Hermitian part over the grid.
  double min_eigenvalue() const;

  /// Diagonal sub-block [first, first + count) at every frequency.
  SpectralGrid block(Index first, Index count, SpectralKind k = SpectralKind::marginal) const;
};

/// Flat-top lag window: `bandwidth` is the half-width l of the flat region,
/// weights vanish beyond 2l. Truncation floor eps for eigenvalues.
struct TaperSpec {
  int bandwidth = 1;
  double eps = 1e-3;

  /// l = ceil(T^{1/3}), eps = 1/T.
  static TaperSpec for_length(Index T);
  void validate() const;
};

/// Trapezoidal flat-top kernel: 1 on |u| <= 1, 2 - |u| on 1 < |u| <= 2.
double flat_top_weight(double u);

SpectralGrid flat_top_estimate(const AcvfSeq& acvf, const FreqGrid& grid, const TaperSpec& taper);

/// Clamps each frequency's eigenvalues to [eps, inf).
SpectralGrid pd_truncate(const SpectralGrid& s, double eps);

/// Schur complement S_X - S_XZ S_Z^{-1} S_ZX of the leading nx block.
SpectralGrid conditional_spectrum(const SpectralGrid& joint, Index nx);

/// Gamma(h) = (1/N) sum_j e^{i lambda_j h} S(lambda_j), h = 0..maxlag (real part).
AcvfSeq grid_acvf(const SpectralGrid& s, int maxlag);

/// sum_{|h| <= L} Gamma(h) e^{-i lambda h} on the grid, no taper.
SpectralGrid acvf_spectrum(const AcvfSeq& acvf, const FreqGrid& grid);

/// Columns j, lambda, then re_kl, im_kl for each entry (row-major).
void write_spectral_csv(std::ostream& out, const SpectralGrid& s);

}  // namespace mapfilt
