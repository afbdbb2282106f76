#include "mapfilt/sim_models.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mapfilt/error.hpp"
#include "mapfilt/rng.hpp"

namespace mapfilt {

using cd = std::complex<double>;
using nlohmann::json;

namespace {

void require_spd(const Mat& s, const char* what) {
  if (s.rows() != s.cols() || s.rows() < 1) throw Error(Errc::shape, std::string(what) + " must be square");
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, s.cwiseAbs().maxCoeff()))
    throw Error(Errc::invalid_argument, std::string(what) + " must be symmetric");
  Eigen::LLT<Mat> llt(s);
  if (llt.info() != Eigen::Success) throw Error(Errc::invalid_argument, std::string(what) + " must be positive definite");
}

Mat noise_factor(const Mat& cov) { return Eigen::LLT<Mat>(cov).matrixL(); }

Eigen::VectorXd draw(Rng& rng, const Mat& chol) {
  Eigen::VectorXd e(chol.rows());
  for (Index i = 0; i < e.size(); ++i) e(i) = rng.normal();
  return chol * e;
}

void require_length(Index T, Index burnin) {
  if (T < 1) throw Error(Errc::invalid_length, "simulation length must be >= 1");
  if (burnin < 0) throw Error(Errc::invalid_argument, "burn-in must be >= 0");
}

}  // namespace

void VarModel::validate() const {
  require_spd(noise_cov, "noise covariance");
  for (const auto& a : coeffs)
    if (a.rows() != dims() || a.cols() != dims()) throw Error(Errc::shape, "AR coefficient dimension mismatch");
  if (!check_stationary(coeffs)) throw Error(Errc::stationarity, "VAR model is not stationary (companion spectral radius >= 1)");
}

void Varma11Model::validate() const {
  require_spd(noise_cov, "noise covariance");
  if (ar.rows() != dims() || ar.cols() != dims() || ma.rows() != dims() || ma.cols() != dims())
    throw Error(Errc::shape, "VARMA coefficient dimension mismatch");
  if (!check_stationary(std::span<const Mat>(&ar, 1)))
    throw Error(Errc::stationarity, "VARMA(1,1) AR matrix is not stationary");
}

void ArchSpec::validate() const {
  if (!(alpha0 > 0.0)) throw Error(Errc::invalid_argument, "ARCH alpha0 must be > 0");
  if (!(alpha1 >= 0.0 && alpha1 < 1.0))
    throw Error(Errc::stationarity, "ARCH alpha1 must lie in [0, 1) for a covariance-stationary innovation");
}

double companion_radius(std::span<const Mat> coeffs) {
  if (coeffs.empty()) return 0.0;
  const Index n = coeffs.front().rows();
  const Index p = static_cast<Index>(coeffs.size());
  Mat comp = Mat::Zero(n * p, n * p);
  for (Index k = 0; k < p; ++k) {
    const Mat& a = coeffs[static_cast<std::size_t>(k)];
    if (a.rows() != n || a.cols() != n) throw Error(Errc::shape, "AR coefficients must be square and equal-sized");
    comp.block(0, k * n, n, n) = a;
  }
  if (p > 1) comp.bottomLeftCorner(n * (p - 1), n * (p - 1)).setIdentity();
  Eigen::EigenSolver<Mat> es(comp, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool check_stationary(std::span<const Mat> coeffs) { return companion_radius(coeffs) < 1.0 - 1e-10; }

MultiSeries simulate_var(const VarModel& m, Index T, std::uint64_t seed, Index burnin) {
  m.validate();
  require_length(T, burnin);
  const Index n = m.dims();
  const Index p = static_cast<Index>(m.coeffs.size());
  const Mat chol = noise_factor(m.noise_cov);
  Rng rng(seed);
  const Index total = T + burnin;
  Mat w = Mat::Zero(total, n);
  for (Index t = 0; t < total; ++t) {
    Eigen::VectorXd next = draw(rng, chol);
    for (Index k = 1; k <= p && t - k >= 0; ++k) next += m.coeffs[static_cast<std::size_t>(k - 1)] * w.row(t - k).transpose();
    w.row(t) = next.transpose();
  }
  return MultiSeries(w.bottomRows(T), default_names(n));
}

MultiSeries simulate_varma11(const Varma11Model& m, Index T, std::uint64_t seed, Index burnin) {
  m.validate();
  require_length(T, burnin);
  const Index n = m.dims();
  const Mat chol = noise_factor(m.noise_cov);
  Rng rng(seed);
  const Index total = T + burnin;
  Mat w = Mat::Zero(total, n);
  Eigen::VectorXd prev_w = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd prev_e = Eigen::VectorXd::Zero(n);
  for (Index t = 0; t < total; ++t) {
    const Eigen::VectorXd e = draw(rng, chol);
    prev_w = m.ar * prev_w + e + m.ma * prev_e;
    prev_e = e;
    w.row(t) = prev_w.transpose();
  }
  return MultiSeries(w.bottomRows(T), default_names(n));
}

ArchSimulation simulate_var_arch(const Mat& a, const ArchSpec& arch, Index T, std::uint64_t seed, Index burnin) {
  arch.validate();
  require_length(T, burnin);
  if (a.rows() != a.cols() || a.rows() < 1) throw Error(Errc::shape, "VAR coefficient must be square");
  if (!check_stationary(std::span<const Mat>(&a, 1))) throw Error(Errc::stationarity, "VAR(1) coefficient is not stationary");
  const Index n = a.rows();
  Rng rng(seed);
  const Index total = T + burnin;
  Mat q = Mat::Zero(total, n);
  Eigen::VectorXd zeta1(total);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);
  double prev_z1 = 0.0;
  for (Index t = 0; t < total; ++t) {
    Eigen::VectorXd zeta(n);
    const double h = arch.alpha0 + arch.alpha1 * prev_z1 * prev_z1;
    zeta(0) = std::sqrt(h) * rng.normal();
    for (Index i = 1; i < n; ++i) zeta(i) = rng.normal();
    prev = a * prev + zeta;
    prev_z1 = zeta(0);
    q.row(t) = prev.transpose();
    zeta1(t) = zeta(0);
  }
  ArchSimulation out;
  out.x = MultiSeries(q.bottomRows(T), default_names(n, "q"));
  out.z = MultiSeries(Mat(zeta1.tail(T)), {"z1"});
  return out;
}

namespace {

SpectralGrid arma_spectrum(const std::vector<Mat>& ar, const Mat* ma, const Mat& sigma, const FreqGrid& grid) {
  const Index n = sigma.rows();
  std::vector<CMat> out;
  out.reserve(static_cast<std::size_t>(grid.size()));
  for (Index j = 0; j < grid.size(); ++j) {
    const cd z = std::polar(1.0, -grid.lambda(j));
    CMat phi = CMat::Identity(n, n);
    cd zk = 1.0;
    for (const auto& a : ar) {
      zk *= z;
      phi -= zk * a.cast<cd>();
    }
    CMat theta = CMat::Identity(n, n);
    if (ma) theta += z * ma->cast<cd>();
    Eigen::PartialPivLU<CMat> lu(phi);
    if (!(std::abs(lu.determinant()) > 1e-12))
      throw Error(Errc::conditioning, "AR polynomial is singular at frequency index " + std::to_string(j));
    const CMat psi = lu.solve(theta);
    const CMat s = psi * sigma.cast<cd>() * psi.adjoint();
    out.push_back(0.5 * (s + s.adjoint()));
  }
  return SpectralGrid(grid, std::move(out), SpectralKind::joint);
}

}  // namespace

SpectralGrid model_spectrum(const VarModel& m, const FreqGrid& grid) {
  m.validate();
  return arma_spectrum(m.coeffs, nullptr, m.noise_cov, grid);
}

SpectralGrid model_spectrum(const Varma11Model& m, const FreqGrid& grid) {
  m.validate();
  return arma_spectrum({m.ar}, &m.ma, m.noise_cov, grid);
}

VarModel ModelSpec::as_var() const {
  VarModel v{ar, sigma};
  return v;
}

Varma11Model ModelSpec::as_varma11() const {
  if (ar.size() != 1 || ma.size() != 1) throw Error(Errc::shape, "VARMA(1,1) needs exactly one `ar` and one `ma` matrix");
  return Varma11Model{ar[0], ma[0], sigma};
}

Index ModelSpec::dims() const {
  if (kind == Kind::var_arch) return ar.at(0).rows() + 1;
  return sigma.rows();
}

namespace {

Mat matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw Error(Errc::parse, "field `" + field + "` must be a non-empty array of rows");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j.at(0).size());
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw Error(Errc::parse, "field `" + field + "` has ragged rows");
    for (Index c = 0; c < cols; ++c) {
      const auto& v = row.at(static_cast<std::size_t>(c));
      if (!v.is_number()) throw Error(Errc::parse, "field `" + field + "` contains a non-numeric entry");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

// Accepts a single matrix or a list of matrices.
std::vector<Mat> matrices_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw Error(Errc::parse, "field `" + field + "` must be an array");
  if (j.empty()) return {};
  const bool single = j.at(0).is_array() && !j.at(0).empty() && j.at(0).at(0).is_number();
  if (single) return {matrix_from_json(j, field)};
  std::vector<Mat> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(matrix_from_json(j[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

ModelSpec parse_model_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::parse, "model document must be a JSON object");
  ModelSpec m;
  if (!doc.contains("ar")) throw Error(Errc::parse, "model is missing field `ar`");
  m.ar = matrices_from_json(doc["ar"], "ar");
  if (doc.contains("ma")) m.ma = matrices_from_json(doc["ma"], "ma");
  if (doc.contains("arch") && !doc["arch"].is_null()) {
    const auto& a = doc["arch"];
    if (!a.is_object() || !a.contains("alpha0") || !a.contains("alpha1"))
      throw Error(Errc::parse, "field `arch` must be an object with `alpha0` and `alpha1`");
    m.arch = ArchSpec{a["alpha0"].get<double>(), a["alpha1"].get<double>()};
  }
  if (doc.contains("names")) m.names = doc["names"].get<std::vector<std::string>>();
  if (doc.contains("nx")) m.nx = doc["nx"].get<Index>();

  if (m.arch) {
    m.kind = ModelSpec::Kind::var_arch;
    if (m.ar.size() != 1) throw Error(Errc::parse, "field `ar` must hold exactly one matrix for an ARCH design");
    m.arch->validate();
    if (!check_stationary(m.ar)) throw Error(Errc::stationarity, "field `ar`: VAR(1) coefficient is not stationary");
    return m;
  }
  if (!doc.contains("sigma")) throw Error(Errc::parse, "model is missing field `sigma`");
  m.sigma = matrix_from_json(doc["sigma"], "sigma");
  if (!m.ma.empty()) {
    m.kind = ModelSpec::Kind::varma11;
    m.as_varma11().validate();
  } else {
    m.kind = ModelSpec::Kind::var;
    m.as_var().validate();
  }
  return m;
}

ModelSpec load_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_json(ss.str());
}

std::string model_to_json(const ModelSpec& m) {
  json doc;
  doc["ar"] = json::array();
  for (const auto& a : m.ar) doc["ar"].push_back(matrix_to_json(a));
  doc["ma"] = json::array();
  for (const auto& a : m.ma) doc["ma"].push_back(matrix_to_json(a));
  if (m.sigma.size() > 0) doc["sigma"] = matrix_to_json(m.sigma);
  if (m.arch) doc["arch"] = {{"alpha0", m.arch->alpha0}, {"alpha1", m.arch->alpha1}};
  if (!m.names.empty()) doc["names"] = m.names;
  if (m.nx) doc["nx"] = *m.nx;
  return doc.dump(2);
}

MultiSeries simulate_model(const ModelSpec& m, Index T, std::uint64_t seed, Index burnin) {
  MultiSeries out;
  switch (m.kind) {
    case ModelSpec::Kind::var:
      out = simulate_var(m.as_var(), T, seed, burnin);
      break;
    case ModelSpec::Kind::varma11:
      out = simulate_varma11(m.as_varma11(), T, seed, burnin);
      break;
    case ModelSpec::Kind::var_arch: {
      auto sim = simulate_var_arch(m.ar.at(0), *m.arch, T, seed, burnin);
      Mat both(T, sim.x.dims() + 1);
      both << sim.x.values, sim.z.values;
      auto names = sim.x.names;
      names.push_back("z1");
      out = MultiSeries(std::move(both), std::move(names));
      break;
    }
  }
  if (!m.names.empty()) {
    if (static_cast<Index>(m.names.size()) != out.dims())
      throw Error(Errc::parse, "field `names` must list one name per simulated channel");
    out.names = m.names;
  }
  return out;
}

VarModel paper_var1() {
  Mat a(4, 4);
  a << 0.5, 0.1, 0.0, 0.0,
       0.2, 0.4, 0.1, 0.0,
       0.1, 0.2, 0.6, 0.2,
       0.0, 0.1, 0.2, 0.5;
  Mat s(4, 4);
  s << 1.0, 0.2, 0.1, 0.0,
       0.2, 1.0, 0.2, 0.1,
       0.1, 0.2, 1.0, 0.3,
       0.0, 0.1, 0.3, 1.0;
  return VarModel{{a}, s};
}

Varma11Model paper_varma11() {
  Mat phi(4, 4);
  phi << -0.00556, -0.6353, 0.2529, -0.0096,
         -0.2288, 0.3506, 0.2414, -0.02505,
         -0.23423, -1.33007, 0.517, -0.1978,
         0.1624, 0.5523, 0.4042, -0.1412;
  Mat theta = Mat::Zero(4, 4);
  theta(0, 0) = 0.6;
  theta(0, 1) = 0.2;
  theta(1, 1) = 0.3;
  Mat s = Mat::Zero(4, 4);
  s.diagonal() << 0.09, 0.03, 0.05, 0.07;
  return Varma11Model{phi, theta, s};
}

Mat paper_arch_var_coeff() { return paper_var1().coeffs[0].topLeftCorner(2, 2); }

ArchSpec paper_arch() { return ArchSpec{1.0, 0.5}; }

ModelSpec builtin_model(const std::string& name) {
  ModelSpec m;
  m.nx = 2;
  if (name == "var1") {
    const VarModel v = paper_var1();
    m.kind = ModelSpec::Kind::var;
    m.ar = v.coeffs;
    m.sigma = v.noise_cov;
  } else if (name == "varma11") {
    const Varma11Model v = paper_varma11();
    m.kind = ModelSpec::Kind::varma11;
    m.ar = {v.ar};
    m.ma = {v.ma};
    m.sigma = v.noise_cov;
  } else if (name == "var_arch") {
    m.kind = ModelSpec::Kind::var_arch;
    m.ar = {paper_arch_var_coeff()};
    m.arch = paper_arch();
  } else {
    throw Error(Errc::invalid_argument, "unknown builtin model '" + name + "' (expected var1, varma11 or var_arch)");
  }
  return m;
}

}  // namespace mapfilt
