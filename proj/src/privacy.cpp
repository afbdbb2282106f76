#include "mapfilt/privacy.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "mapfilt/error.hpp"
#include "mapfilt/rng.hpp"

namespace mapfilt {

using cd = std::complex<double>;

CMat grid_average(const SpectralGrid& s) {
  CMat acc = CMat::Zero(s.dims(), s.dims());
  for (const auto& m : s.mats) acc += m;
  return acc / static_cast<double>(s.grid.size());
}

CMat grid_average(const SpectralGrid& s, const SpectralGrid& frf) {
  if (!(s.grid == frf.grid)) throw Error(Errc::shape, "grid_average needs matching frequency grids");
  if (frf.dims() != s.dims()) throw Error(Errc::shape, "grid_average needs matching dimensions");
  CMat acc = CMat::Zero(s.dims(), s.dims());
  for (Index j = 0; j < s.grid.size(); ++j) acc.noalias() += s[j] * frf[j].adjoint();
  return acc / static_cast<double>(s.grid.size());
}

double hermitian_det(const CMat& m) {
  const cd raw = m.determinant();
  // roundoff floor: eps times the Hadamard bound of m
  double bound = 1.0;
  for (Index i = 0; i < m.rows(); ++i) bound *= m.row(i).norm();
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * bound;
  if (std::abs(raw.imag()) > 1e-8 * std::abs(raw) + floor)
    throw Error(Errc::consistency, "determinant of a Hermitian matrix has a large imaginary part");
  return (0.5 * (m + m.adjoint())).determinant().real();
}

CriterionContext::CriterionContext(SpectralGrid s_cond, RootGrid roots)
    : s_cond_(std::move(s_cond)), roots_(std::move(roots)) {
  if (!(s_cond_.grid == roots_.grid)) throw Error(Errc::shape, "conditional spectrum and roots use different grids");
  if (s_cond_.dims() != roots_.dims()) throw Error(Errc::shape, "conditional spectrum and roots differ in dimension");
  if (!(s_cond_.min_eigenvalue() > 0.0)) throw Error(Errc::conditioning, "conditional spectrum is not positive definite");
  denom_ = hermitian_det(grid_average(s_cond_));
  if (!(denom_ > 0.0)) throw Error(Errc::conditioning, "det <S_{X|Z}> is not positive");
  p_.reserve(s_cond_.mats.size());
  q_.reserve(s_cond_.mats.size());
  for (Index j = 0; j < grid().size(); ++j) {
    const CMat& rinv = roots_.inverses[static_cast<std::size_t>(j)];
    const CMat q = s_cond_[j] * rinv.adjoint();
    const CMat p = rinv * q;
    p_.push_back(0.5 * (p + p.adjoint()));
    q_.push_back(q);
  }
}

double mlip(const CepstralParams& theta, const CriterionContext& ctx) {
  if (theta.dims() != ctx.dims()) throw Error(Errc::shape, "cepstral dimension does not match the criterion context");
  const Index n = ctx.dims();
  const auto mats = unpack(theta);
  const FreqGrid& grid = ctx.grid();
  CMat a = CMat::Zero(n, n);
  CMat b = CMat::Zero(n, n);
  for (Index j = 0; j < grid.size(); ++j) {
    const std::size_t k = static_cast<std::size_t>(j);
    const CMat& root = ctx.roots().roots[k];
    const CMat u = skew_hermitian_exp(cepstral_at(mats, grid.lambda(j)));
    const CMat ur = u.adjoint() * root.adjoint();  // U^* R^*
    a.noalias() += ctx.cross()[k] * ur;
    b.noalias() += ur.adjoint() * ctx.sandwiched()[k] * ur;
  }
  a /= static_cast<double>(grid.size());
  b /= static_cast<double>(grid.size());
  const CMat bh = 0.5 * (b + b.adjoint());
  Eigen::LLT<CMat> llt(bh);
  if (llt.info() != Eigen::Success) throw Error(Errc::conditioning, "released-series conditional variance is singular");
  const CMat gain = a * llt.solve(a.adjoint());
  const double value = 1.0 - hermitian_det(gain) / ctx.denom();
  if (value < -kRangeWindow || value > 1.0 + kRangeWindow)
    throw Error(Errc::consistency, "m-LIP value " + std::to_string(value) + " lies outside [0, 1]");
  return std::clamp(value, 0.0, 1.0);
}

namespace {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct LocalResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x(i)));
    probe(i) = x(i) + h;
    const double up = f(probe);
    probe(i) = x(i) - h;
    const double down = f(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

// BFGS on the inverse Hessian with Armijo backtracking.
LocalResult bfgs(const Objective& f, Eigen::VectorXd x, int max_iter, double tol) {
  const Index d = x.size();
  LocalResult res;
  double fx = f(x);
  Eigen::VectorXd g = fd_gradient(f, x);
  Mat H = Mat::Identity(d, d);
  bool scaled = false;
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    if (g.norm() < 1e-12) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd p = -H * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      H.setIdentity();
      p = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    double f_new = fx;
    Eigen::VectorXd x_new;
    bool accepted = false;
    while (step > 1e-12) {
      x_new = x + step * p;
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No descent along the search direction: stationary to FD accuracy.
      res.converged = g.norm() < 1e-6;
      break;
    }
    const Eigen::VectorXd g_new = fd_gradient(f, x_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double change = std::abs(fx - f_new);
    const double scale = std::max(std::abs(fx), tol);
    x = x_new;
    g = g_new;
    const double prev = fx;
    fx = f_new;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      if (!scaled) {
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Mat I = Mat::Identity(d, d);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    if (change <= tol * scale) {
      res.converged = true;
      break;
    }
    (void)prev;
  }
  res.x = std::move(x);
  res.f = fx;
  return res;
}

}  // namespace

OptResult optimize(const CriterionContext& ctx, int r, const OptOptions& opts) {
  if (r < 0) throw Error(Errc::invalid_argument, "cepstral order r must be >= 0");
  if (opts.restarts < 0 || opts.max_iter < 1 || !(opts.tol > 0.0))
    throw Error(Errc::invalid_argument, "optimizer options out of range");
  const auto start = std::chrono::steady_clock::now();
  const Index n = ctx.dims();
  const Index total = CepstralParams::count(n, r);
  std::vector<Index> free = opts.free_params;
  if (free.empty())
    for (Index i = 0; i < total; ++i) free.push_back(i);
  for (Index i : free)
    if (i < 0 || i >= total) throw Error(Errc::invalid_argument, "free parameter index out of range");

  OptResult out;
  out.theta_opt = CepstralParams::zeros(n, r);
  out.privacy = mlip(out.theta_opt, ctx);
  out.converged = true;
  if (total == 0 || opts.restarts == 0) {
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

  auto expand = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(total);
    for (std::size_t k = 0; k < free.size(); ++k) full(free[k]) = v(static_cast<Index>(k));
    return CepstralParams(n, r, std::move(full));
  };
  const Objective objective = [&](const Eigen::VectorXd& v) { return -mlip(expand(v), ctx); };

  bool have_best = false;
  double best = 0.0;
  for (int rs = 0; rs < opts.restarts; ++rs) {
    Rng rng = Rng::stream(opts.seed, static_cast<std::uint64_t>(rs));
    Eigen::VectorXd x0(static_cast<Index>(free.size()));
    for (Index i = 0; i < x0.size(); ++i) x0(i) = rng.normal();
    out.initial_privacy.push_back(-objective(x0));
    LocalResult local = bfgs(objective, x0, opts.max_iter, opts.tol);
    const double privacy = -local.f;
    out.final_privacy.push_back(privacy);
    out.iterations += local.iterations;
    ++out.restarts_used;
    if (!have_best || privacy > best) {
      have_best = true;
      best = privacy;
      out.theta_opt = expand(local.x);
      out.privacy = privacy;
      out.converged = local.converged;
    }
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double nfd(const std::vector<Mat>& gamma_x, const std::vector<Mat>& gamma_y) {
  if (gamma_x.size() != gamma_y.size() || gamma_x.empty()) throw Error(Errc::shape, "nfd needs equal, non-empty lag lists");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t h = 0; h < gamma_x.size(); ++h) {
    if (gamma_x[h].rows() != gamma_y[h].rows() || gamma_x[h].cols() != gamma_y[h].cols())
      throw Error(Errc::shape, "nfd needs equal matrix dimensions");
    // Lags h and -h contribute equally.
    const double w = h == 0 ? 1.0 : 2.0;
    num += w * (gamma_x[h] - gamma_y[h]).squaredNorm();
    const double s = gamma_x[h].norm() + gamma_y[h].norm();
    den += w * s * s;
  }
  if (!(den > 0.0)) throw Error(Errc::undefined_metric, "nfd is undefined when both autocovariance sequences vanish");
  return num / den;
}

double nfd(const AcvfSeq& acvf_x, const AcvfSeq& acvf_y) {
  if (acvf_x.dims() != acvf_y.dims() || acvf_x.maxlag() != acvf_y.maxlag())
    throw Error(Errc::shape, "nfd needs equal dimensions and lag counts");
  return nfd(acvf_x.lags(), acvf_y.lags());
}

double rum(const MultiSeries& x, const MultiSeries& y, int maxlag) {
  if (x.length() != y.length() || x.dims() != y.dims()) throw Error(Errc::shape, "rum needs series of equal shape");
  return 1.0 - nfd(sample_acvf(x, maxlag), sample_acvf(y, maxlag));
}

CorrelationTables correlations(const MultiSeries& x, int maxlag) {
  const AcvfSeq acvf = sample_acvf(x, maxlag);
  const Index n = x.dims();
  CorrelationTables t;
  t.maxlag = maxlag;
  t.names = x.names;
  Eigen::VectorXd sd = acvf[0].diagonal().cwiseMax(0.0).cwiseSqrt();
  auto corr = [&](Index i, Index j, int h) {
    const double denom = sd(i) * sd(j);
    return denom > 0.0 ? acvf.at(h)(i, j) / denom : 0.0;
  };
  for (Index i = 0; i < n; ++i) {
    std::vector<double> row;
    for (int h = 0; h <= maxlag; ++h) row.push_back(corr(i, i, h));
    t.acf.push_back(std::move(row));
  }
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      CorrelationTables::Cross c{i, j, {}};
      for (int h = -maxlag; h <= maxlag; ++h) c.values.push_back(corr(i, j, h));
      t.ccf.push_back(std::move(c));
    }
  return t;
}

PrivacyReport privacy_report(const MultiSeries& x, const MultiSeries& z, const MultiSeries& y,
                             const CepstralParams& theta_opt, const CriterionContext& ctx, const SpectralGrid& s_x,
                             int acf_lags) {
  PrivacyReport r;
  const int lags = static_cast<int>(std::min<Index>(acf_lags, x.length() - 1));
  r.privacy = mlip(theta_opt, ctx);
  r.nfd = nfd(sample_acvf(x, lags), sample_acvf(y, lags));
  r.rum = 1.0 - r.nfd;
  r.smap_error = verify_smap(map_frf(theta_opt, ctx.roots()), s_x);
  r.theta = theta_opt;
  r.acf_lags = lags;
  r.aux_names = z.names;
  r.x_corr = correlations(x, lags);
  r.y_corr = correlations(y, lags);
  return r;
}

namespace {

nlohmann::json tables_json(const CorrelationTables& t) {
  using nlohmann::json;
  json doc;
  doc["acf"] = json::object();
  for (std::size_t i = 0; i < t.acf.size(); ++i) doc["acf"][t.names[i]] = t.acf[i];
  doc["ccf"] = json::object();
  for (const auto& c : t.ccf)
    doc["ccf"][t.names[static_cast<std::size_t>(c.i)] + "|" + t.names[static_cast<std::size_t>(c.j)]] = c.values;
  return doc;
}

}  // namespace

std::string report_to_json(const PrivacyReport& r) {
  using nlohmann::json;
  json doc;
  doc["privacy"] = r.privacy;
  doc["rum"] = r.rum;
  doc["nfd"] = r.nfd;
  doc["smap_error"] = r.smap_error;
  doc["r"] = r.theta.order();
  doc["theta"] = std::vector<double>(r.theta.values().data(), r.theta.values().data() + r.theta.size());
  doc["acf_lags"] = r.acf_lags;
  doc["auxiliary"] = r.aux_names;
  doc["original"] = tables_json(r.x_corr);
  doc["released"] = tables_json(r.y_corr);
  for (const auto& [k, v] : r.diagnostics) doc["diagnostics"][k] = v;
  if (r.runtime) doc["runtime_s"] = *r.runtime;
  return doc.dump(2);
}

void write_correlation_csv(std::ostream& out, const CorrelationTables& x, const CorrelationTables& y) {
  out << "kind,series,lag,original,released\n";
  for (std::size_t i = 0; i < x.acf.size(); ++i)
    for (int h = 0; h <= x.maxlag; ++h)
      out << "acf," << x.names[i] << ',' << h << ',' << format_double(x.acf[i][static_cast<std::size_t>(h)]) << ','
          << format_double(y.acf[i][static_cast<std::size_t>(h)]) << '\n';
  for (std::size_t c = 0; c < x.ccf.size(); ++c) {
    const auto& cx = x.ccf[c];
    const std::string label = x.names[static_cast<std::size_t>(cx.i)] + "|" + x.names[static_cast<std::size_t>(cx.j)];
    for (int h = -x.maxlag; h <= x.maxlag; ++h) {
      const auto k = static_cast<std::size_t>(h + x.maxlag);
      out << "ccf," << label << ',' << h << ',' << format_double(cx.values[k]) << ',' << format_double(y.ccf[c].values[k])
          << '\n';
    }
  }
}

}  // namespace mapfilt
