#include "mapfilt/allpass.hpp"

#include <cmath>
#include <complex>

#include <json.hpp>

#include "mapfilt/error.hpp"

namespace mapfilt {

using cd = std::complex<double>;

CepstralParams::CepstralParams(Index n, int r, Eigen::VectorXd theta) : n_(n), r_(r), theta_(std::move(theta)) {
  if (n < 1 || r < 0) throw Error(Errc::invalid_argument, "cepstral parameters need n >= 1 and r >= 0");
  if (theta_.size() != count(n, r))
    throw Error(Errc::shape, "cepstral parameter vector has length " + std::to_string(theta_.size()) + ", expected " +
                                 std::to_string(count(n, r)));
}

CepstralParams CepstralParams::zeros(Index n, int r) {
  return CepstralParams(n, r, Eigen::VectorXd::Zero(count(n, r)));
}

CepstralMatrices unpack(const CepstralParams& theta) {
  const Index n = theta.dims();
  const auto& v = theta.values();
  CepstralMatrices m;
  Mat lower = Mat::Zero(n, n);
  Index pos = 0;
  for (Index c = 0; c < n; ++c)
    for (Index r = c + 1; r < n; ++r) lower(r, c) = v(pos++);
  m.omega0 = lower - lower.transpose();
  for (int k = 0; k < theta.order(); ++k) {
    Mat om(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) om(r, c) = v(pos++);
    m.omega.push_back(std::move(om));
  }
  return m;
}

CepstralParams pack(const CepstralMatrices& m) {
  const Index n = m.omega0.rows();
  const int r = static_cast<int>(m.omega.size());
  Eigen::VectorXd v(CepstralParams::count(n, r));
  Index pos = 0;
  for (Index c = 0; c < n; ++c)
    for (Index row = c + 1; row < n; ++row) v(pos++) = m.omega0(row, c);
  for (const auto& om : m.omega) {
    if (om.rows() != n || om.cols() != n) throw Error(Errc::shape, "cepstral matrices must share one dimension");
    for (Index row = 0; row < n; ++row)
      for (Index c = 0; c < n; ++c) v(pos++) = om(row, c);
  }
  return CepstralParams(n, r, std::move(v));
}

CMat cepstral_at(const CepstralMatrices& m, double lambda) {
  CMat omega = m.omega0.cast<cd>();
  const cd z = std::polar(1.0, -lambda);
  cd zk = 1.0;
  for (const auto& om : m.omega) {
    zk *= z;
    omega += zk * om.cast<cd>() - std::conj(zk) * om.transpose().cast<cd>();
  }
  return omega;
}

CMat skew_hermitian_exp(const CMat& a) {
  // iA is Hermitian: iA = V diag(mu) V^*, so exp(A) = V diag(e^{-i mu}) V^*.
  const CMat h = cd(0.0, 1.0) * a;
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()));
  const auto& mu = es.eigenvalues();
  Eigen::VectorXcd phase(mu.size());
  for (Index i = 0; i < mu.size(); ++i) phase(i) = std::polar(1.0, -mu(i));
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

CMat unitary_at(const CepstralParams& theta, double lambda) {
  return skew_hermitian_exp(cepstral_at(unpack(theta), lambda));
}

SpectralGrid map_frf(const CepstralParams& theta, const RootGrid& roots) {
  if (theta.dims() != roots.dims()) throw Error(Errc::shape, "cepstral dimension does not match spectral roots");
  const auto mats = unpack(theta);
  std::vector<CMat> out;
  out.reserve(roots.roots.size());
  for (Index j = 0; j < roots.grid.size(); ++j) {
    const CMat u = skew_hermitian_exp(cepstral_at(mats, roots.grid.lambda(j)));
    out.push_back(roots.roots[static_cast<std::size_t>(j)] * u * roots.inverses[static_cast<std::size_t>(j)]);
  }
  return SpectralGrid(roots.grid, std::move(out), SpectralKind::frf);
}

double verify_smap(const SpectralGrid& frf, const SpectralGrid& s) {
  if (!(frf.grid == s.grid) || frf.dims() != s.dims()) throw Error(Errc::shape, "filter and spectrum grids differ");
  double worst = 0.0;
  for (Index j = 0; j < s.grid.size(); ++j) {
    const CMat diff = frf[j] * s[j] * frf[j].adjoint() - s[j];
    const double denom = s[j].norm();
    worst = std::max(worst, denom > 0.0 ? diff.norm() / denom : diff.norm());
  }
  return worst;
}

MapFilter frf_to_coeffs(const SpectralGrid& frf, double tail_tol) {
  const Index N = frf.grid.size();
  const Index n = frf.dims();
  const int half = static_cast<int>(N / 2);
  // k = -N/2+1 .. N/2
  std::vector<Mat> all;
  all.reserve(static_cast<std::size_t>(N));
  double max_imag = 0.0;
  for (int k = -half + 1; k <= half; ++k) {
    CMat acc = CMat::Zero(n, n);
    for (Index j = 0; j < N; ++j) acc += std::polar(1.0, frf.grid.lambda(j) * k) * frf[j];
    acc /= static_cast<double>(N);
    max_imag = std::max(max_imag, acc.imag().cwiseAbs().maxCoeff());
    all.push_back(acc.real());
  }
  if (max_imag > kMaxImaginaryResidue)
    throw Error(Errc::symmetry, "filter coefficients have imaginary residue " + std::to_string(max_imag) +
                                    "; the frequency response is not conjugate-symmetric");
  auto coeff = [&](int k) -> const Mat& { return all[static_cast<std::size_t>(k + half - 1)]; };

  const int cap = half - 1;
  int M = 0;
  for (int k = cap; k >= 1; --k) {
    if (coeff(k).norm() >= tail_tol || coeff(-k).norm() >= tail_tol) {
      M = k;
      break;
    }
  }
  MapFilter f;
  f.halfwidth = M;
  for (int k = -M; k <= M; ++k) f.coeffs.push_back(coeff(k));
  double tail = 0.0;
  for (int k = M + 1; k <= half; ++k) {
    tail = std::max(tail, coeff(k).norm());
    if (k < half) tail = std::max(tail, coeff(-k).norm());
  }
  f.tail_norm = tail;
  return f;
}

CMat filter_response(const MapFilter& f, double lambda) {
  CMat acc = CMat::Zero(f.dims(), f.dims());
  for (int k = -f.halfwidth; k <= f.halfwidth; ++k) acc += std::polar(1.0, -lambda * k) * f.at(k).cast<cd>();
  return acc;
}

std::string filter_to_json(const MapFilter& f, double smap_error, const CepstralParams& theta) {
  using nlohmann::json;
  json doc;
  doc["halfwidth"] = f.halfwidth;
  doc["tail_norm"] = f.tail_norm;
  doc["smap_error"] = smap_error;
  doc["r"] = theta.order();
  doc["theta"] = std::vector<double>(theta.values().data(), theta.values().data() + theta.size());
  json coeffs = json::array();
  for (const auto& c : f.coeffs) {
    json rows = json::array();
    for (Index r = 0; r < c.rows(); ++r) {
      json row = json::array();
      for (Index k = 0; k < c.cols(); ++k) row.push_back(c(r, k));
      rows.push_back(std::move(row));
    }
    coeffs.push_back(std::move(rows));
  }
  doc["coeffs"] = std::move(coeffs);
  return doc.dump(2);
}

MapFilter filter_from_json(const std::string& text) {
  using nlohmann::json;
  MapFilter f;
  try {
    const json doc = json::parse(text);
    f.halfwidth = doc.at("halfwidth").get<int>();
    f.tail_norm = doc.value("tail_norm", 0.0);
    for (const auto& c : doc.at("coeffs")) {
      const Index rows = static_cast<Index>(c.size());
      Mat m(rows, rows);
      for (Index r = 0; r < rows; ++r)
        for (Index k = 0; k < rows; ++k) m(r, k) = c.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(k)).get<double>();
      f.coeffs.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("invalid filter JSON: ") + e.what());
  }
  if (static_cast<int>(f.coeffs.size()) != 2 * f.halfwidth + 1)
    throw Error(Errc::parse, "filter JSON must hold 2 * halfwidth + 1 coefficient matrices");
  return f;
}

}  // namespace mapfilt
