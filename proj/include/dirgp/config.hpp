#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dirgp/basis.hpp"
#include "dirgp/cases.hpp"
#include "dirgp/mcmc.hpp"
#include "dirgp/mle.hpp"
#include "dirgp/retval.hpp"

namespace dirgp {

nlohmann::json load_json_file(const std::filesystem::path& path);

nlohmann::json basis_to_json(const BasisSpec& spec);
BasisSpec basis_from_json(const nlohmann::json& j);

// Built-in cases serialise as their number; mixture cases as the full
// definition, so custom truths round-trip through the config format.
nlohmann::json case_to_json(const CaseSpec& spec);
CaseSpec case_from_json(const nlohmann::json& j);

// Everything one pipeline invocation needs. Parsed from a config file with
// optional command-line overrides for seed, output directory and workers.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out;
  unsigned workers = 1;

  std::optional<CaseSpec> truth;       // required by simulate and truth-mode runs
  std::optional<int> fixed_n = 1000;   // nullopt: Poisson event count
  double period = 1.0;

  BasisSpec basis_xi = spline_basis();
  BasisSpec basis_nu = spline_basis();
  std::string method = "mmala";  // "mle" | "mh" | "mmala"

  ChainConfig chain;
  FitControls fit_controls;
  std::vector<double> lambda_grid = default_lambda_grid();
  int k_folds = 5;
  int m_bootstrap = 100;

  ReturnSimConfig retval;
  int kl_grid = 1000;

  // Canonical JSON (defaults materialised) and its hash; stamped on outputs.
  std::string canonical_json;
  std::string config_hash;
};

// Rebuild canonical_json and config_hash after programmatic edits; called by
// parse_run_config and by the study driver when it derives per-cell configs.
void canonicalise(RunConfig& cfg);

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
};

RunConfig parse_run_config(const nlohmann::json& j, const CliOverrides& overrides = {});

}  // namespace dirgp
