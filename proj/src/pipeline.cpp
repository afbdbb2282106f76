#include "mapfilt/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "mapfilt/error.hpp"

namespace mapfilt {

using nlohmann::json;

void PipelineConfig::validate(Index channels) const {
  auto fail = [](const std::string& msg) { throw Error(Errc::invalid_argument, "config: " + msg); };
  if (nx < 1 || nx >= channels)
    fail(fmt::format("nx = {} must satisfy 1 <= nx < {} (the number of input channels)", nx, channels));
  diff.validate();
  if (taper) taper->validate();
  if (grid < 8 || grid % 2 != 0) fail("grid must be an even integer >= 8");
  if (r < 0) fail("r must be >= 0");
  if (q && (*q < 0 || *q >= grid / 2)) fail("q must lie in [0, grid / 2)");
  if (toeplitz_m < 0) fail("toeplitz_m must be >= 0");
  if (restarts < 0) fail("restarts must be >= 0");
  if (max_iter < 1) fail("max_iter must be >= 1");
  if (!(tol > 0.0)) fail("tol must be positive");
  if (!(tail_tol > 0.0)) fail("tail_tol must be positive");
  if (acf_lags < 0) fail("acf_lags must be >= 0");
  const Index total = CepstralParams::count(nx, r);
  for (Index i : free_params)
    if (i < 0 || i >= total) fail(fmt::format("free_params index {} outside [0, {})", i, total));
}

OptOptions PipelineConfig::optimizer() const {
  OptOptions o;
  o.restarts = restarts;
  o.seed = seed;
  o.max_iter = max_iter;
  o.tol = tol;
  o.free_params = free_params;
  return o;
}

PipelineConfig parse_config_json(const std::string& text) {
  static const std::set<std::string> known = {"nx",         "diff",     "taper",    "grid",        "r",
                                              "q",          "toeplitz_m", "restarts", "max_iter",  "tol",
                                              "free_params", "seed",    "tail_tol", "extend_order", "acf_lags",
                                              "record_timing"};
  PipelineConfig c;
  std::string field;
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw Error(Errc::parse, "config must be a JSON object");
    for (const auto& [key, value] : doc.items())
      if (!known.count(key)) throw Error(Errc::parse, "config: unknown key '" + key + "'");
    auto get = [&](const char* key, auto& out) {
      field = key;
      if (doc.contains(key)) out = doc.at(key).get<std::decay_t<decltype(out)>>();
    };
    get("nx", c.nx);
    if (doc.contains("diff")) {
      field = "diff";
      const auto& d = doc.at("diff");
      c.diff.d = d.value("d", 0);
      c.diff.D = d.value("D", 0);
      c.diff.s = d.value("s", 1);
    }
    if (doc.contains("taper")) {
      field = "taper";
      const auto& t = doc.at("taper");
      TaperSpec ts;
      ts.bandwidth = t.at("bandwidth").get<int>();
      ts.eps = t.at("eps").get<double>();
      c.taper = ts;
    }
    get("grid", c.grid);
    get("r", c.r);
    if (doc.contains("q")) {
      field = "q";
      c.q = doc.at("q").get<int>();
    }
    get("toeplitz_m", c.toeplitz_m);
    get("restarts", c.restarts);
    get("max_iter", c.max_iter);
    get("tol", c.tol);
    get("free_params", c.free_params);
    get("seed", c.seed);
    get("tail_tol", c.tail_tol);
    get("extend_order", c.extend_order);
    get("acf_lags", c.acf_lags);
    get("record_timing", c.record_timing);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, "config field '" + field + "': " + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

std::string config_to_json(const PipelineConfig& c) {
  json doc;
  doc["nx"] = c.nx;
  doc["diff"] = {{"d", c.diff.d}, {"D", c.diff.D}, {"s", c.diff.s}};
  if (c.taper) doc["taper"] = {{"bandwidth", c.taper->bandwidth}, {"eps", c.taper->eps}};
  doc["grid"] = c.grid;
  doc["r"] = c.r;
  if (c.q) doc["q"] = *c.q;
  doc["toeplitz_m"] = c.toeplitz_m;
  doc["restarts"] = c.restarts;
  doc["max_iter"] = c.max_iter;
  doc["tol"] = c.tol;
  doc["free_params"] = c.free_params;
  doc["seed"] = c.seed;
  doc["tail_tol"] = c.tail_tol;
  doc["extend_order"] = c.extend_order;
  doc["acf_lags"] = c.acf_lags;
  doc["record_timing"] = c.record_timing;
  return doc.dump(2);
}

namespace {

template <class F>
auto stage(const char* name, const char* hint, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("stage {}: {} (hint: {})", name, e.what(), hint));
  }
}

}  // namespace

FilterFit fit_filter(const MultiSeries& xz, const PipelineConfig& cfg) {
  xz.validate();
  cfg.validate(xz.dims());
  FilterFit fit;
  const Index nx = cfg.nx;

  auto [w, state] = stage("difference", "the series must be longer than d + D s", [&] { return difference(xz, cfg.diff); });
  fit.state = std::move(state);
  fit.mean = w.values.colwise().mean();
  w.values.rowwise() -= fit.mean;
  fit.w = std::move(w);
  const Index T = fit.w.length();

  fit.taper = cfg.taper ? *cfg.taper : TaperSpec::for_length(T);
  const int L = 2 * fit.taper.bandwidth;
  fit.acvf = stage("sample_acvf", "lower the taper bandwidth or supply a longer series",
                   [&] { return sample_acvf(fit.w, L); });

  const FreqGrid grid(cfg.grid);
  fit.joint = stage("spectral_estimate", "raise taper eps", [&] {
    return pd_truncate(flat_top_estimate(fit.acvf, grid, fit.taper), fit.taper.eps);
  });
  const SpectralGrid s_cond = stage("conditional_spectrum", "auxiliary channels may be collinear; drop redundant ones",
                                    [&] { return conditional_spectrum(fit.joint, nx); });

  // Eigenvalue flooring adds lags beyond L; without an explicit q, double it
  // until the lag-q truncation of S_X is positive definite again.
  const SpectralGrid s_x = fit.joint.block(0, nx);
  int q = cfg.q ? *cfg.q : L;
  if (!cfg.q)
    while (2 * q <= cfg.grid / 4 && !(acvf_spectrum(grid_acvf(s_x, q), grid).min_eigenvalue() > 0.0)) q *= 2;
  fit.factor = stage("bauer_factorize", "raise taper eps or toeplitz_m", [&] {
    BauerOptions bo;
    bo.m = cfg.toeplitz_m;
    bo.check_grid = cfg.grid;
    return bauer_factorize(grid_acvf(s_x, q), q, bo);
  });
  fit.roots = stage("spectral_root_grid", "the spectral factor is near singular; raise taper eps",
                    [&] { return spectral_root_grid(fit.factor, grid); });

  const CriterionContext ctx = stage("criterion", "the conditional spectrum is degenerate",
                                     [&] { return CriterionContext(s_cond, fit.roots); });
  fit.opt = stage("optimize", "try a different seed or fewer free parameters",
                  [&] { return optimize(ctx, cfg.r, cfg.optimizer()); });

  fit.frf = map_frf(fit.opt.theta_opt, fit.roots);
  fit.smap_error = verify_smap(fit.frf, root_product(fit.roots));
  fit.filter = stage("frf_to_coeffs", "raise grid or tail_tol", [&] { return frf_to_coeffs(fit.frf, cfg.tail_tol); });
  return fit;
}

PrivatizeResult privatize(const MultiSeries& xz, const PipelineConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  PrivatizeResult res;
  res.fit = fit_filter(xz, cfg);
  const FilterFit& fit = res.fit;
  const Index nx = cfg.nx;
  const Index T = fit.w.length();

  res.x_detrended = fit.w.channels(0, nx);
  const MultiSeries z = fit.w.channels(nx, fit.w.dims() - nx);
  ExtendOptions eo;
  eo.order = cfg.extend_order;
  res.extension = stage("forecast_extend", "set extend_order lower", [&] {
    return forecast_extend(res.x_detrended, fit.acvf.block(0, nx), fit.filter.halfwidth, eo);
  });
  res.y_detrended = stage("apply_filter", "internal length mismatch",
                          [&] { return apply_filter(res.extension.series, fit.filter, T); });
  res.y_detrended.names = res.x_detrended.names;
  res.y_detrended.time = res.x_detrended.time;

  MultiSeries shifted = res.y_detrended;
  shifted.values.rowwise() += fit.mean.head(nx);
  res.y = stage("integrate", "differencing state does not match the series",
                [&] { return integrate(shifted, fit.state.channels(0, nx), cfg.diff); });
  res.y.names = std::vector<std::string>(xz.names.begin(), xz.names.begin() + nx);
  res.y.time = xz.time;
  res.y.period = xz.period;

  res.report = stage("privacy_report", "internal error", [&] {
    const CriterionContext ctx(conditional_spectrum(fit.joint, nx), fit.roots);
    return privacy_report(res.x_detrended, z, res.y_detrended, fit.opt.theta_opt, ctx, root_product(fit.roots),
                          cfg.acf_lags);
  });
  auto& d = res.report.diagnostics;
  d["T_detrended"] = static_cast<double>(T);
  d["taper_bandwidth"] = fit.taper.bandwidth;
  d["taper_eps"] = fit.taper.eps;
  d["grid"] = static_cast<double>(cfg.grid);
  d["q"] = fit.factor.q;
  d["toeplitz_rows"] = fit.factor.m;
  d["factor_rel_error"] = fit.factor.recon_rel_error;
  d["root_max_condition"] = fit.roots.max_condition;
  d["restarts_used"] = fit.opt.restarts_used;
  d["iterations"] = fit.opt.iterations;
  d["converged"] = fit.opt.converged ? 1.0 : 0.0;
  d["halfwidth"] = fit.filter.halfwidth;
  d["tail_norm"] = fit.filter.tail_norm;
  d["extend_order"] = res.extension.order;
  d["extend_fallback"] = res.extension.fallback ? 1.0 : 0.0;
  if (cfg.record_timing)
    res.report.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

EvaluateResult evaluate(const MultiSeries& x, const MultiSeries& y, int maxlag) {
  if (x.length() != y.length() || x.dims() != y.dims())
    throw Error(Errc::shape, fmt::format("evaluate needs equal shapes, got {}x{} and {}x{}", x.length(), x.dims(),
                                         y.length(), y.dims()));
  EvaluateResult e;
  e.nfd = nfd(sample_acvf(x, maxlag), sample_acvf(y, maxlag));
  e.rum = 1.0 - e.nfd;
  e.x_corr = correlations(x, maxlag);
  e.y_corr = correlations(y, maxlag);
  return e;
}

std::string evaluate_to_json(const EvaluateResult& e) {
  json doc;
  doc["rum"] = e.rum;
  doc["nfd"] = e.nfd;
  doc["maxlag"] = e.x_corr.maxlag;
  auto tables = [](const CorrelationTables& t) {
    json out;
    for (std::size_t i = 0; i < t.acf.size(); ++i) out["acf"][t.names[i]] = t.acf[i];
    out["ccf"] = json::object();
    for (const auto& c : t.ccf)
      out["ccf"][t.names[static_cast<std::size_t>(c.i)] + "|" + t.names[static_cast<std::size_t>(c.j)]] = c.values;
    return out;
  };
  doc["original"] = tables(e.x_corr);
  doc["released"] = tables(e.y_corr);
  return doc.dump(2);
}

std::uint64_t replicate_seed(std::uint64_t seed, int rep) { return seed + static_cast<std::uint64_t>(rep); }

StudySummary run_study(const ModelSpec& model, Index T, int reps, std::uint64_t seed, const PipelineConfig& cfg) {
  if (reps < 1) throw Error(Errc::invalid_argument, "reps must be >= 1");
  StudySummary s;
  for (int i = 0; i < reps; ++i) {
    const std::uint64_t rs = replicate_seed(seed, i);
    const auto start = std::chrono::steady_clock::now();
    const MultiSeries xz = simulate_model(model, T, rs);
    PipelineConfig c = cfg;
    c.seed = rs;
    const PrivatizeResult res = privatize(xz, c);
    s.seeds.push_back(rs);
    s.privacy.push_back(res.report.privacy);
    s.rum.push_back(res.report.rum);
    s.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  auto mean = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
  };
  s.min_privacy = *std::min_element(s.privacy.begin(), s.privacy.end());
  s.max_privacy = *std::max_element(s.privacy.begin(), s.privacy.end());
  s.mean_privacy = mean(s.privacy);
  s.mean_rum = mean(s.rum);
  s.mean_seconds = mean(s.seconds);
  return s;
}

std::string study_to_json(const StudySummary& s, bool include_timing) {
  json doc;
  doc["reps"] = s.seeds.size();
  doc["seeds"] = s.seeds;
  doc["privacy"] = s.privacy;
  doc["rum"] = s.rum;
  doc["min_privacy"] = s.min_privacy;
  doc["max_privacy"] = s.max_privacy;
  doc["mean_privacy"] = s.mean_privacy;
  doc["mean_rum"] = s.mean_rum;
  if (include_timing) {
    doc["seconds"] = s.seconds;
    doc["mean_seconds"] = s.mean_seconds;
  }
  return doc.dump(2);
}

}  // namespace mapfilt
