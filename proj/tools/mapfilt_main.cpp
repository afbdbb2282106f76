// mapfilt: simulate, privatize, ingest and evaluate multivariate series.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "mapfilt/error.hpp"
#include "mapfilt/pipeline.hpp"
#include "mapfilt/sim_models.hpp"

namespace fs = std::filesystem;
using namespace mapfilt;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create directory " + dir.string() + ": " + ec.message());
}

ModelSpec resolve_model(const std::string& arg) {
  if (arg == "var1" || arg == "varma11" || arg == "var_arch") return builtin_model(arg);
  return load_model_json(arg);
}

struct Overrides {
  CLI::Option* nx = nullptr;
  CLI::Option* r = nullptr;
  CLI::Option* restarts = nullptr;
  CLI::Option* grid = nullptr;
  CLI::Option* seed = nullptr;
  Index nx_value = 1;
  int r_value = 1;
  int restarts_value = 8;
  Index grid_value = 512;
  std::uint64_t seed_value = 0;
  bool timing = false;

  void add(CLI::App* cmd) {
    nx = cmd->add_option("--nx", nx_value, "Number of leading sensitive channels");
    r = cmd->add_option("--r", r_value, "Cepstral order");
    restarts = cmd->add_option("--restarts", restarts_value, "Optimizer restarts (0 keeps the identity filter)");
    grid = cmd->add_option("--grid", grid_value, "Frequency grid size");
    seed = cmd->add_option("--seed", seed_value, "Random seed");
    cmd->add_flag("--timing", timing, "Record wall-clock runtime in the report");
  }

  void apply(PipelineConfig& c) const {
    if (nx->count()) c.nx = nx_value;
    if (r->count()) c.r = r_value;
    if (restarts->count()) c.restarts = restarts_value;
    if (grid->count()) c.grid = grid_value;
    if (seed->count()) c.seed = seed_value;
    if (timing) c.record_timing = true;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"S-MAP filter privatization of multivariate time series"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate replicates of a model (optionally privatize each)");
  std::string model_arg;
  Index sim_T = 2000;
  int reps = 1;
  std::string sim_config;
  std::string sim_out;
  bool study = false;
  Overrides sim_over;
  sim->add_option("--model", model_arg, "Model JSON file or builtin: var1, varma11, var_arch")->required();
  sim->add_option("-T,--length", sim_T, "Series length")->check(CLI::PositiveNumber);
  sim->add_option("--reps", reps, "Number of replicates")->check(CLI::PositiveNumber);
  sim->add_option("--config", sim_config, "Pipeline config used with --study");
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_flag("--study", study, "Privatize every replicate and write summary.json");
  sim_over.add(sim);

  // privatize
  auto* priv = app.add_subcommand("privatize", "Release a privatized copy of the sensitive channels");
  std::string priv_config;
  std::string priv_input;
  std::string priv_out;
  Overrides priv_over;
  priv->add_option("--config", priv_config, "Pipeline config JSON");
  priv->add_option("--input", priv_input, "Series CSV with sensitive channels first")->required();
  priv->add_option("--out", priv_out, "Output directory")->required();
  priv_over.add(priv);

  // qwi-ingest
  auto* qwi = app.add_subcommand("qwi-ingest", "Pivot a long-format QWI export into a series CSV");
  std::string qwi_input;
  std::string qwi_out;
  QwiOptions qwi_opts;
  qwi->add_option("--input", qwi_input, "QWI export CSV")->required();
  qwi->add_option("--counties", qwi_opts.counties, "County labels, in output column order")->required()->delimiter(';');
  qwi->add_option("--measure", qwi_opts.measure, "Measure column name")->required();
  qwi->add_option("--start", qwi_opts.start, "First quarter, e.g. 1997-Q1");
  qwi->add_option("--end", qwi_opts.end, "Last quarter, e.g. 2022-Q4");
  qwi->add_option("--out", qwi_out, "Output series CSV")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Compare autocovariances of an original and a released series");
  std::string eval_x;
  std::string eval_y;
  std::string eval_out;
  int eval_lags = 20;
  eval->add_option("--x", eval_x, "Original series CSV")->required();
  eval->add_option("--y", eval_y, "Released series CSV")->required();
  eval->add_option("--lags", eval_lags, "Largest lag")->check(CLI::NonNegativeNumber);
  eval->add_option("--out", eval_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) {
      const ModelSpec model = resolve_model(model_arg);
      const fs::path dir(sim_out);
      ensure_dir(dir);
      const std::uint64_t seed = sim_over.seed->count() ? sim_over.seed_value : 0;
      nlohmann::json manifest;
      manifest["model"] = nlohmann::json::parse(model_to_json(model));
      manifest["T"] = sim_T;
      manifest["reps"] = reps;
      manifest["seed"] = seed;
      manifest["files"] = nlohmann::json::array();
      for (int i = 0; i < reps; ++i) {
        const std::uint64_t rs = replicate_seed(seed, i);
        const std::string name = fmt::format("rep_{:03d}.csv", i);
        write_series_csv((dir / name).string(), simulate_model(model, sim_T, rs));
        manifest["files"].push_back({{"file", name}, {"seed", rs}});
      }
      write_text(dir / "manifest.json", manifest.dump(2));
      if (study) {
        PipelineConfig cfg = sim_config.empty() ? PipelineConfig{} : load_config(sim_config);
        if (model.nx && sim_config.empty()) cfg.nx = *model.nx;
        sim_over.apply(cfg);
        const StudySummary s = run_study(model, sim_T, reps, seed, cfg);
        write_text(dir / "summary.json", study_to_json(s, cfg.record_timing));
        std::cout << fmt::format("privacy min {:.4f} max {:.4f} mean {:.4f}; mean RUM {:.4f}\n", s.min_privacy,
                                 s.max_privacy, s.mean_privacy, s.mean_rum);
      }
    } else if (*priv) {
      PipelineConfig cfg = priv_config.empty() ? PipelineConfig{} : load_config(priv_config);
      priv_over.apply(cfg);
      const MultiSeries xz = read_series_csv(priv_input);
      const PrivatizeResult res = privatize(xz, cfg);
      const fs::path dir(priv_out);
      ensure_dir(dir);
      write_series_csv((dir / "released.csv").string(), res.y);
      write_text(dir / "report.json", report_to_json(res.report));
      write_text(dir / "filter.json", filter_to_json(res.fit.filter, res.fit.smap_error, res.fit.opt.theta_opt));
      std::ofstream corr(dir / "correlations.csv", std::ios::binary);
      write_correlation_csv(corr, res.report.x_corr, res.report.y_corr);
      std::cout << fmt::format("privacy {:.6f}  RUM {:.6f}  halfwidth {}\n", res.report.privacy, res.report.rum,
                               res.fit.filter.halfwidth);
    } else if (*qwi) {
      const MultiSeries x = qwi_ingest(qwi_input, qwi_opts);
      const fs::path out(qwi_out);
      if (out.has_parent_path()) ensure_dir(out.parent_path());
      write_series_csv(out.string(), x);
      std::cout << fmt::format("{} quarters x {} counties ({} .. {})\n", x.length(), x.dims(), x.time.front(),
                               x.time.back());
    } else if (*eval) {
      const MultiSeries x = read_series_csv(eval_x);
      const MultiSeries y = read_series_csv(eval_y);
      const EvaluateResult e = evaluate(x, y, eval_lags);
      const fs::path dir(eval_out);
      ensure_dir(dir);
      write_text(dir / "metrics.json", evaluate_to_json(e));
      std::ofstream corr(dir / "correlations.csv", std::ios::binary);
      write_correlation_csv(corr, e.x_corr, e.y_corr);
      std::cout << fmt::format("RUM {:.6f}  NFD {:.6f}\n", e.rum, e.nfd);
    }
  } catch (const Error& e) {
    std::cerr << "mapfilt: " << e.what() << '\n';
    return e.numerical() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "mapfilt: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
