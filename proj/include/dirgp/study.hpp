#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dirgp/config.hpp"

namespace dirgp {

// One comparison-study grid: cases x bases x methods, each fitted to R
// independent sample realisations and scored against per-case truth return
// distributions.
struct StudyConfig {
  RunConfig base;  // shared sample / chain / fit / return-value settings

  std::vector<int> cases = {1, 2, 3};
  std::vector<BasisSpec> bases = {spline_basis(), constant_basis()};
  std::vector<std::string> methods = {"mmala", "mle"};
  int replicates = 5;
  int truth_replicates = 10000;  // truth reference ECDFs, built once per case
};

StudyConfig parse_study_config(const nlohmann::json& j, const CliOverrides& overrides);

// Short directory token for a basis ("constant", "spline", "fourier", "gp").
std::string basis_dir_name(const BasisSpec& spec);

// Runs the grid under base.out. Layout:
//   truth/case<k>/             truth return distributions
//   case<k>/samples/r<j>.csv   one realisation, shared across the grid row
//   case<k>/<basis>/<method>/r<j>/   fit outputs, retval/, metrics.csv
//   tables/                    aggregated long and box-summary tables
// A cell directory holding a `done` marker with the current study hash is
// skipped, so interrupted studies resume. Failures are isolated per cell and
// collected into tables/failures.csv.
void run_study(const StudyConfig& study);

}  // namespace dirgp
