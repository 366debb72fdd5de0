#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dirgp/config.hpp"
#include "dirgp/io.hpp"
#include "dirgp/retval.hpp"
#include "dirgp/state.hpp"

namespace dirgp {

// Run-directory layout shared by the pipeline commands and the study driver.
// Every table carries the producing config hash in its meta line. Wall-clock
// quantities live only in timing.json and ess_summary.json; everything else
// is byte-reproducible for a fixed seed and config.

void save_draws(const std::filesystem::path& dir, const PosteriorDraws& draws,
                const std::string& config_hash);
PosteriorDraws load_draws(const std::filesystem::path& dir);

void write_return_distributions(const std::filesystem::path& dir,
                                const ReturnDistributions& dists, const std::string& mode,
                                const std::string& config_hash);
ReturnDistributions load_return_distributions(const std::filesystem::path& dir);

// Pointwise 2.5 / 50 / 97.5 percent bands of xi(theta) and sigma(theta)
// across the draws, on a one-degree grid.
Table curve_quantiles(const PosteriorDraws& draws, const BasisSpec& basis_xi,
                      const BasisSpec& basis_nu);

// Per-sector discrepancies of a model's return-value distribution from the
// truth's: KS, Cramer-von Mises, KL and the quoted percentile of both.
Table sector_metrics(const ReturnDistributions& truth, const ReturnDistributions& model,
                     const std::string& model_name, int kl_grid);

struct FitArtifacts {
  PosteriorDraws draws;
  std::optional<FitResult> point;  // penalised MLE path only
  std::optional<CvResult> cv;
  double total_hours = 0.0;
};

// The inference step alone: penalised MLE with CV and bootstrap, or one MCMC
// chain, per cfg.method.
FitArtifacts run_fit(const RunConfig& cfg, const PeaksSample& sample);
void write_fit_outputs(const RunConfig& cfg, const FitArtifacts& artifacts,
                       const std::filesystem::path& dir);

struct NamedDir {
  std::string name;
  std::filesystem::path dir;
};

void cmd_simulate(const RunConfig& cfg);
void cmd_fit(const RunConfig& cfg, const std::filesystem::path& sample_path);
// Model mode samples parameter states from a fitted run directory; truth
// mode uses the case curves directly. Both take the occurrence rate from the
// configured case.
void cmd_return_values(const RunConfig& cfg, const std::filesystem::path& fit_dir,
                       bool truth_mode);
void cmd_compare(const std::filesystem::path& truth_dir, const std::vector<NamedDir>& models,
                 const std::filesystem::path& out_dir, int kl_grid);
void cmd_ess(const std::filesystem::path& fit_dir, const std::filesystem::path& out_dir);

}  // namespace dirgp
