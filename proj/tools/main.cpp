#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dirgp/commands.hpp"
#include "dirgp/config.hpp"
#include "dirgp/errors.hpp"
#include "dirgp/study.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
  auto* c = cmd->add_option("--config", opts.config, "JSON configuration file");
  if (config_required) c->required();
  cmd->add_option("--seed", opts.seed, "random seed (overrides the config)");
  cmd->add_option("--out", opts.out, "output directory (overrides the config)");
  cmd->add_option("--workers", opts.workers, "worker threads, 0 = all cores");
}

nlohmann::json config_json(const CommonOpts& opts) {
  if (opts.config.empty()) return nlohmann::json::object();
  return dirgp::load_json_file(opts.config);
}

dirgp::CliOverrides overrides_of(const CommonOpts& opts) {
  dirgp::CliOverrides o;
  o.seed = opts.seed;
  o.out = opts.out;
  o.workers = opts.workers;
  return o;
}

dirgp::NamedDir parse_model_arg(const std::string& arg) {
  const std::size_t eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw dirgp::UsageError("--model expects NAME=DIR, got '" + arg + "'");
  }
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-stationary directional extreme value inference"};
  app.require_subcommand(1);

  CommonOpts sim_opts;
  auto* sim = app.add_subcommand("simulate", "draw a synthetic peaks sample from a case");
  add_common(sim, sim_opts, true);

  CommonOpts fit_opts;
  std::string fit_sample;
  auto* fit = app.add_subcommand("fit", "fit the model to a sample");
  add_common(fit, fit_opts, true);
  fit->add_option("--sample", fit_sample, "sample file from `simulate`")->required();

  CommonOpts rv_opts;
  std::string rv_fit_dir;
  bool rv_truth = false;
  auto* rv = app.add_subcommand("return-values",
                                "simulate return-value distributions per sector");
  add_common(rv, rv_opts, true);
  rv->add_option("--fit", rv_fit_dir, "fitted run directory (model mode)");
  rv->add_flag("--truth", rv_truth, "use the case curves instead of a fit");

  std::string cmp_truth;
  std::vector<std::string> cmp_models;
  std::string cmp_out;
  int cmp_kl_grid = 1000;
  auto* cmp = app.add_subcommand("compare",
                                 "score model return distributions against the truth");
  cmp->add_option("--truth", cmp_truth, "truth return-value directory")->required();
  cmp->add_option("--model", cmp_models, "model return-value directory as NAME=DIR")
      ->required();
  cmp->add_option("--out", cmp_out, "output directory")->required();
  cmp->add_option("--kl-grid", cmp_kl_grid, "grid size for the KL estimate");

  std::string ess_fit_dir;
  std::string ess_out;
  auto* ess = app.add_subcommand("ess", "effective sample sizes of a fitted run");
  ess->add_option("--fit", ess_fit_dir, "fitted run directory")->required();
  ess->add_option("--out", ess_out, "output directory")->required();

  CommonOpts study_opts;
  auto* study = app.add_subcommand("study", "run a case x basis x method comparison grid");
  add_common(study, study_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) {
      dirgp::cmd_simulate(dirgp::parse_run_config(config_json(sim_opts), overrides_of(sim_opts)));
    } else if (fit->parsed()) {
      dirgp::cmd_fit(dirgp::parse_run_config(config_json(fit_opts), overrides_of(fit_opts)),
                     fit_sample);
    } else if (rv->parsed()) {
      if (!rv_truth && rv_fit_dir.empty()) {
        throw dirgp::UsageError("return-values needs either --fit DIR or --truth");
      }
      if (rv_truth && !rv_fit_dir.empty()) {
        throw dirgp::UsageError("return-values takes --fit or --truth, not both");
      }
      dirgp::cmd_return_values(
          dirgp::parse_run_config(config_json(rv_opts), overrides_of(rv_opts)), rv_fit_dir,
          rv_truth);
    } else if (cmp->parsed()) {
      std::vector<dirgp::NamedDir> models;
      for (const std::string& m : cmp_models) models.push_back(parse_model_arg(m));
      dirgp::cmd_compare(cmp_truth, models, cmp_out, cmp_kl_grid);
    } else if (ess->parsed()) {
      dirgp::cmd_ess(ess_fit_dir, ess_out);
    } else if (study->parsed()) {
      dirgp::run_study(
          dirgp::parse_study_config(config_json(study_opts), overrides_of(study_opts)));
    }
  } catch (const dirgp::DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const dirgp::NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const dirgp::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    // UsageError and ContractError land here
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
