#include "mapfilt/factorize.hpp"

#include <complex>
#include <deque>

#include <json.hpp>

#include "mapfilt/error.hpp"

namespace mapfilt {

using cd = std::complex<double>;

int default_toeplitz_size(int q) {
  const int m = std::min(40 * std::max(q, 1), 2000);
  return std::max(m, 5 * q);
}

namespace {

Mat spd_inverse(const Mat& d, int row) {
  Eigen::LLT<Mat> llt(d);
  if (llt.info() != Eigen::Success)
    throw Error(Errc::factorization, "block Toeplitz matrix is not positive definite (pivot block " + std::to_string(row) +
                                         "); apply pd_truncate to the spectral estimate");
  return llt.solve(Mat::Identity(d.rows(), d.cols()));
}

}  // namespace

VmaFactor bauer_factorize(const AcvfSeq& acvf, int q, const BauerOptions& opts) {
  if (q < 0 || q > acvf.maxlag()) throw Error(Errc::invalid_lag, "MA order q must lie in [0, L]");
  const Index n = acvf.dims();
  const int m = opts.m > 0 ? opts.m : default_toeplitz_size(q);
  if (m < 5 * q || m < 1) throw Error(Errc::invalid_argument, "Toeplitz size m must be >= 5 q");

  const AcvfSeq gamma = acvf.truncated(q);
  const FreqGrid check(opts.check_grid);
  const SpectralGrid target = acvf_spectrum(gamma, check);
  if (!(target.min_eigenvalue() > 0.0))
    throw Error(Errc::factorization, "truncated spectrum is not positive definite on the grid; apply pd_truncate first");

  // Banded block LDL': row i has blocks L[i][i-q..i-1]. Only the last q rows
  // are needed to continue, so they are kept in a sliding window.
  struct Row {
    std::vector<Mat> l;  // l[k] = L[i][i - q + k], k = 0..q-1 (zero-padded at the start)
    std::vector<Mat> ld;  // l[k] * D[i - q + k]
    Mat d;
    Mat d_inv;
  };
  std::deque<Row> window;
  const Mat zero = Mat::Zero(n, n);
  int rows_used = 0;
  for (int i = 0; i < m; ++i) {
    Row row;
    row.l.assign(static_cast<std::size_t>(q), zero);
    row.ld.assign(static_cast<std::size_t>(q), zero);
    // window[w] holds row i - window.size() + w.
    const int wsize = static_cast<int>(window.size());
    for (int j = std::max(0, i - q); j < i; ++j) {
      const Row& rj = window[static_cast<std::size_t>(wsize - (i - j))];
      Mat c = gamma[i - j];
      for (int k = std::max(0, i - q); k < j; ++k) {
        // L[i][k] D[k] L[j][k]'
        const Mat& lik_dk = row.ld[static_cast<std::size_t>(k - (i - q))];
        const Mat& ljk = rj.l[static_cast<std::size_t>(k - (j - q))];
        c.noalias() -= lik_dk * ljk.transpose();
      }
      const std::size_t slot = static_cast<std::size_t>(j - (i - q));
      row.l[slot] = c * rj.d_inv;
      row.ld[slot] = c;  // L[i][j] D[j] = c
    }
    row.d = gamma[0];
    for (std::size_t k = 0; k < row.l.size(); ++k) row.d.noalias() -= row.ld[k] * row.l[k].transpose();
    row.d = 0.5 * (row.d + row.d.transpose()).eval();
    row.d_inv = spd_inverse(row.d, i);

    bool settled = false;
    if (!window.empty() && i > q) {
      const Row& prev = window.back();
      double diff = (row.d - prev.d).norm();
      for (std::size_t k = 0; k < row.l.size(); ++k) diff += (row.l[k] - prev.l[k]).norm();
      settled = diff <= opts.early_stop * std::max(1.0, row.d.norm());
    }
    window.push_back(std::move(row));
    if (static_cast<int>(window.size()) > q + 1) window.pop_front();
    rows_used = i + 1;
    if (settled) break;
  }

  const Row& last = window.back();
  VmaFactor f;
  f.q = q;
  f.m = rows_used;
  f.sigma = last.d;
  f.theta.push_back(Mat::Identity(n, n));
  // Theta_k = L[m-1][m-1-k], stored at slot q - k.
  for (int k = 1; k <= q; ++k) f.theta.push_back(last.l[static_cast<std::size_t>(q - k)]);

  double worst = 0.0;
  double scale = 0.0;
  for (Index j = 0; j < check.size(); ++j) {
    const CMat th = ma_polynomial(f, check.lambda(j));
    const CMat recon = th * f.sigma.cast<cd>() * th.adjoint();
    worst = std::max(worst, (recon - target[j]).norm());
    scale = std::max(scale, target[j].norm());
  }
  f.recon_error = worst;
  f.recon_rel_error = scale > 0.0 ? worst / scale : worst;
  f.converged = f.recon_rel_error <= opts.tol;
  return f;
}

CMat ma_polynomial(const VmaFactor& f, double lambda) {
  const cd z = std::polar(1.0, -lambda);
  CMat acc = CMat::Zero(f.dims(), f.dims());
  cd zk = 1.0;
  for (const auto& th : f.theta) {
    acc += zk * th.cast<cd>();
    zk *= z;
  }
  return acc;
}

RootGrid spectral_root_grid(const VmaFactor& f, const FreqGrid& grid) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (f.sigma + f.sigma.transpose()));
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0))
    throw Error(Errc::noninvertible, "innovation covariance is not positive definite");
  const Mat sqrt_sigma = es.operatorSqrt();
  const CMat sqrt_c = sqrt_sigma.cast<cd>();
  // |Theta(z)| is bounded by sum_k |Theta_k|; a root far below that bound is
  // singular even when its condition number is not (the scalar case).
  double scale = 0.0;
  for (const auto& th : f.theta) scale += th.norm();
  scale *= sqrt_sigma.norm();

  RootGrid out{grid, {}, {}, 1.0};
  out.roots.reserve(static_cast<std::size_t>(grid.size()));
  out.inverses.reserve(static_cast<std::size_t>(grid.size()));
  for (Index j = 0; j < grid.size(); ++j) {
    const CMat root = ma_polynomial(f, grid.lambda(j)) * sqrt_c;
    Eigen::JacobiSVD<CMat> svd(root);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    const double cond = smin > 1.0 / kMaxRootCondition * scale ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!(cond <= kMaxRootCondition))
      throw Error(Errc::noninvertible, "spectral root is near singular at frequency index " + std::to_string(j) +
                                           " (condition number " + std::to_string(cond) + ")");
    out.max_condition = std::max(out.max_condition, cond);
    out.inverses.push_back(root.partialPivLu().inverse());
    out.roots.push_back(root);
  }
  return out;
}

SpectralGrid root_product(const RootGrid& r) {
  std::vector<CMat> out;
  out.reserve(r.roots.size());
  for (const auto& root : r.roots) {
    const CMat s = root * root.adjoint();
    out.push_back(0.5 * (s + s.adjoint()));
  }
  return SpectralGrid(r.grid, std::move(out), SpectralKind::marginal);
}

std::string factor_to_json(const VmaFactor& f) {
  using nlohmann::json;
  auto mat = [](const Mat& m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  json doc;
  doc["ar"] = json::array();
  doc["ma"] = json::array();
  for (std::size_t k = 1; k < f.theta.size(); ++k) doc["ma"].push_back(mat(f.theta[k]));
  doc["sigma"] = mat(f.sigma);
  doc["q"] = f.q;
  doc["m"] = f.m;
  doc["recon_error"] = f.recon_error;
  doc["converged"] = f.converged;
  return doc.dump(2);
}

}  // namespace mapfilt
