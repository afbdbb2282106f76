#include "mapfilt/spectral.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>

#include "mapfilt/error.hpp"

namespace mapfilt {

using cd = std::complex<double>;

FreqGrid::FreqGrid(Index N) : N_(N) {
  if (N < 8 || N % 2 != 0) throw Error(Errc::invalid_argument, "frequency grid size must be even and >= 8");
}

double FreqGrid::lambda(Index j) const {
  return -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(N_);
}

SpectralGrid::SpectralGrid(FreqGrid g, std::vector<CMat> m, SpectralKind k)
    : grid(g), mats(std::move(m)), kind(k) {
  if (static_cast<Index>(mats.size()) != grid.size())
    throw Error(Errc::shape, "spectral grid needs one matrix per frequency");
}

double SpectralGrid::hermitian_residual() const {
  double worst = 0.0;
  for (const auto& s : mats) worst = std::max(worst, (s - s.adjoint()).norm());
  return worst;
}

double SpectralGrid::conjugate_residual() const {
  double worst = 0.0;
  for (Index j = 0; j < grid.size(); ++j) worst = std::max(worst, ((*this)[grid.mirror(j)] - (*this)[j].conjugate()).norm());
  return worst;
}

double SpectralGrid::min_eigenvalue() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& s : mats) {
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (s + s.adjoint()), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  return lo;
}

SpectralGrid SpectralGrid::block(Index first, Index count, SpectralKind k) const {
  if (first < 0 || count < 1 || first + count > dims()) throw Error(Errc::shape, "spectral block out of range");
  std::vector<CMat> out;
  out.reserve(mats.size());
  for (const auto& s : mats) out.push_back(s.block(first, first, count, count));
  return SpectralGrid(grid, std::move(out), k);
}

TaperSpec TaperSpec::for_length(Index T) {
  TaperSpec t;
  t.bandwidth = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(T)) - 1e-12));
  t.bandwidth = std::max(t.bandwidth, 1);
  t.eps = 1.0 / static_cast<double>(T);
  return t;
}

void TaperSpec::validate() const {
  if (bandwidth < 1) throw Error(Errc::invalid_argument, "taper bandwidth must be >= 1");
  if (!(eps > 0.0)) throw Error(Errc::invalid_argument, "truncation floor eps must be > 0");
}

double flat_top_weight(double u) {
  const double a = std::abs(u);
  if (a <= 1.0) return 1.0;
  if (a <= 2.0) return 2.0 - a;
  return 0.0;
}

namespace {

std::vector<CMat> lag_sum(const std::vector<Mat>& weighted, const FreqGrid& grid) {
  const int L = static_cast<int>(weighted.size()) - 1;
  std::vector<CMat> out;
  out.reserve(static_cast<std::size_t>(grid.size()));
  for (Index j = 0; j < grid.size(); ++j) {
    const double lam = grid.lambda(j);
    CMat s = weighted[0].cast<cd>();
    for (int h = 1; h <= L; ++h) {
      const cd z = std::polar(1.0, -lam * h);  // e^{-i lambda h}
      // Gamma(h) z^h + Gamma(-h) z^{-h} with Gamma(-h) = Gamma(h)'
      s += z * weighted[static_cast<std::size_t>(h)].cast<cd>() +
           std::conj(z) * weighted[static_cast<std::size_t>(h)].transpose().cast<cd>();
    }
    out.push_back(0.5 * (s + s.adjoint()));
  }
  return out;
}

}  // namespace

SpectralGrid flat_top_estimate(const AcvfSeq& acvf, const FreqGrid& grid, const TaperSpec& taper) {
  taper.validate();
  if (acvf.maxlag() < taper.bandwidth)
    throw Error(Errc::invalid_lag, "autocovariance lag count must be at least the taper bandwidth");
  const int L = std::min(acvf.maxlag(), 2 * taper.bandwidth);
  std::vector<Mat> weighted;
  for (int h = 0; h <= L; ++h)
    weighted.push_back(flat_top_weight(static_cast<double>(h) / taper.bandwidth) * acvf[h]);
  return SpectralGrid(grid, lag_sum(weighted, grid), SpectralKind::joint);
}

SpectralGrid acvf_spectrum(const AcvfSeq& acvf, const FreqGrid& grid) {
  return SpectralGrid(grid, lag_sum(acvf.lags(), grid), SpectralKind::joint);
}

SpectralGrid pd_truncate(const SpectralGrid& s, double eps) {
  if (!(eps > 0.0)) throw Error(Errc::invalid_argument, "truncation floor eps must be > 0");
  std::vector<CMat> out;
  out.reserve(s.mats.size());
  for (const auto& m : s.mats) {
    const CMat h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    if (es.eigenvalues().minCoeff() >= eps) {
      out.push_back(h);
      continue;
    }
    const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(eps);
    const CMat& V = es.eigenvectors();
    CMat r = V * clamped.cast<cd>().asDiagonal() * V.adjoint();
    out.push_back(0.5 * (r + r.adjoint()));
  }
  return SpectralGrid(s.grid, std::move(out), s.kind);
}

SpectralGrid conditional_spectrum(const SpectralGrid& joint, Index nx) {
  const Index n = joint.dims();
  if (nx < 1 || nx >= n) throw Error(Errc::invalid_argument, "sensitive block size must satisfy 1 <= nx < n");
  const Index nz = n - nx;
  std::vector<CMat> out;
  out.reserve(joint.mats.size());
  for (Index j = 0; j < joint.grid.size(); ++j) {
    const CMat& s = joint[j];
    const CMat sz = s.bottomRightCorner(nz, nz);
    Eigen::LLT<CMat> llt(0.5 * (sz + sz.adjoint()));
    if (llt.info() != Eigen::Success)
      throw Error(Errc::conditioning, "auxiliary block S_Z is singular at frequency index " + std::to_string(j));
    const CMat c = s.topLeftCorner(nx, nx) - s.topRightCorner(nx, nz) * llt.solve(s.bottomLeftCorner(nz, nx));
    out.push_back(0.5 * (c + c.adjoint()));
  }
  SpectralGrid cond(joint.grid, std::move(out), SpectralKind::conditional);
  if (!(cond.min_eigenvalue() > 0.0))
    throw Error(Errc::conditioning, "conditional spectrum is not positive definite; apply pd_truncate to the joint estimate");
  return cond;
}

AcvfSeq grid_acvf(const SpectralGrid& s, int maxlag) {
  const Index N = s.grid.size();
  if (maxlag < 0 || maxlag >= N / 2) throw Error(Errc::invalid_lag, "grid autocovariance lag must be < N/2");
  std::vector<Mat> gamma;
  for (int h = 0; h <= maxlag; ++h) {
    CMat acc = CMat::Zero(s.dims(), s.dims());
    for (Index j = 0; j < N; ++j) acc += std::polar(1.0, s.grid.lambda(j) * h) * s[j];
    gamma.push_back(acc.real() / static_cast<double>(N));
  }
  gamma[0] = 0.5 * (gamma[0] + gamma[0].transpose()).eval();
  return AcvfSeq(std::move(gamma));
}

void write_spectral_csv(std::ostream& out, const SpectralGrid& s) {
  const Index n = s.dims();
  out << "j,lambda";
  for (Index k = 0; k < n; ++k)
    for (Index l = 0; l < n; ++l) out << ",re_" << k + 1 << l + 1 << ",im_" << k + 1 << l + 1;
  out << '\n';
  for (Index j = 0; j < s.grid.size(); ++j) {
    out << j << ',' << format_double(s.grid.lambda(j));
    for (Index k = 0; k < n; ++k)
      for (Index l = 0; l < n; ++l) out << ',' << format_double(s[j](k, l).real()) << ',' << format_double(s[j](k, l).imag());
    out << '\n';
  }
}

}  // namespace mapfilt
