#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mapfilt/series.hpp"
#include "mapfilt/spectral.hpp"

namespace mapfilt {

/// W_t = A_1 W_{t-1} + ... + A_p W_{t-p} + e_t, e_t ~ N(0, noise_cov).
struct VarModel {
  std::vector<Mat> coeffs;
  Mat noise_cov;

  Index dims() const { return noise_cov.rows(); }
  void validate() const;
};

/// W_t = ar W_{t-1} + e_t + ma e_{t-1}.
struct Varma11Model {
  Mat ar;
  Mat ma;
  Mat noise_cov;

  Index dims() const { return noise_cov.rows(); }
  void validate() const;
};

/// ARCH(1) variance h_t = alpha0 + alpha1 zeta_{t-1}^2.
struct ArchSpec {
  double alpha0 = 1.0;
  double alpha1 = 0.5;

  void validate() const;
};

/// Spectral radius of the VAR companion matrix.
double companion_radius(std::span<const Mat> coeffs);

/// True iff the companion spectral radius is below 1 - 1e-10.
bool check_stationary(std::span<const Mat> coeffs);

inline constexpr Index kDefaultBurnin = 500;

MultiSeries simulate_var(const VarModel& m, Index T, std::uint64_t seed, Index burnin = kDefaultBurnin);
MultiSeries simulate_varma11(const Varma11Model& m, Index T, std::uint64_t seed, Index burnin = kDefaultBurnin);

struct ArchSimulation {
  MultiSeries x;  // the VAR(1) output Q_t
  MultiSeries z;  // first innovation channel zeta_{t,1}
};

/// Q_t = a Q_{t-1} + zeta_t with zeta_{t,1} ARCH(1) and the remaining
/// innovation channels independent standard normal.
ArchSimulation simulate_var_arch(const Mat& a, const ArchSpec& arch, Index T, std::uint64_t seed,
                                 Index burnin = kDefaultBurnin);

SpectralGrid model_spectrum(const VarModel& m, const FreqGrid& grid);
SpectralGrid model_spectrum(const Varma11Model& m, const FreqGrid& grid);

/// Contents of a model JSON document (`ar`, `ma`, `sigma`, `arch`).
struct ModelSpec {
  enum class Kind { var, varma11, var_arch };
  Kind kind = Kind::var;
  std::vector<Mat> ar;
  std::vector<Mat> ma;
  Mat sigma;
  std::optional<ArchSpec> arch;
  std::vector<std::string> names;
  /// Number of leading channels treated as sensitive when privatizing.
  std::optional<Index> nx;

  VarModel as_var() const;
  Varma11Model as_varma11() const;
  Index dims() const;
};

ModelSpec parse_model_json(const std::string& text);
ModelSpec load_model_json(const std::string& path);
std::string model_to_json(const ModelSpec& m);

/// Simulates one replicate of any ModelSpec. var_arch output stacks the
/// VAR channels followed by the auxiliary innovation channel.
MultiSeries simulate_model(const ModelSpec& m, Index T, std::uint64_t seed, Index burnin = kDefaultBurnin);

// Designs used by the simulation study.
VarModel paper_var1();
Varma11Model paper_varma11();
Mat paper_arch_var_coeff();
ArchSpec paper_arch();

/// `var1`, `varma11` or `var_arch`: the designs above as ModelSpecs with
/// nx = 2.
ModelSpec builtin_model(const std::string& name);

}  // namespace mapfilt
