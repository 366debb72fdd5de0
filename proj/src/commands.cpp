#include "dirgp/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dirgp/errors.hpp"
#include "dirgp/mcmc.hpp"
#include "dirgp/metrics.hpp"
#include "dirgp/mle.hpp"

namespace dirgp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_json_file(const fs::path& path, const json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

int meta_int(const Table& t, const std::string& key, int fallback) {
  const auto it = t.meta.find(key);
  return it == t.meta.end() ? fallback : std::stoi(it->second);
}

std::int64_t meta_i64(const Table& t, const std::string& key) {
  const auto it = t.meta.find(key);
  return it == t.meta.end() ? 0 : std::stoll(it->second);
}

double meta_num(const Table& t, const std::string& key, double fallback) {
  const auto it = t.meta.find(key);
  return it == t.meta.end() ? fallback : parse_double(it->second);
}

// First observation at which the state leaves the support, for error
// messages; the likelihood itself only reports +infinity.
[[noreturn]] void report_infeasible_init(const Design& design, const CoefficientState& init) {
  const PointwiseParams p = curves_at_sample(design, init);
  for (Eigen::Index i = 0; i < design.sample.size(); ++i) {
    const double xi = p.xi[i];
    const double nu = p.nu[i];
    const bool ok = nu > 0.0 && 1.0 + xi > 0.0 &&
                    1.0 + xi * (1.0 + xi) * design.sample.sizes[i] / nu > 0.0;
    if (!ok) {
      throw NumericError("initial state infeasible at observation " + std::to_string(i) +
                         " (angle " + format_double(design.sample.angles_deg[i]) +
                         " deg, size " + format_double(design.sample.sizes[i]) + ")");
    }
  }
  throw NumericError("initial state has non-finite penalised likelihood");
}

}  // namespace

void save_draws(const fs::path& dir, const PosteriorDraws& draws,
                const std::string& config_hash) {
  if (draws.states.empty()) throw ContractError("save_draws: no states");
  ensure_dir(dir);
  const Eigen::Index p_xi = draws.states.front().beta_xi.size();
  const Eigen::Index p_nu = draws.states.front().beta_nu.size();
  const bool boot = draws.source == DrawsSource::Bootstrap;

  Table t;
  t.columns.push_back("draw");
  for (Eigen::Index j = 0; j < p_xi; ++j) t.columns.push_back("beta_xi_" + std::to_string(j));
  for (Eigen::Index j = 0; j < p_nu; ++j) t.columns.push_back("beta_nu_" + std::to_string(j));
  t.columns.push_back("lambda_xi");
  t.columns.push_back("lambda_nu");
  if (boot) t.columns.push_back("converged");

  t.rows.reserve(draws.states.size());
  for (std::size_t i = 0; i < draws.states.size(); ++i) {
    const CoefficientState& s = draws.states[i];
    if (s.beta_xi.size() != p_xi || s.beta_nu.size() != p_nu) {
      throw ContractError("save_draws: inconsistent coefficient lengths");
    }
    std::vector<std::string> row;
    row.reserve(t.columns.size());
    row.push_back(std::to_string(i));
    for (Eigen::Index j = 0; j < p_xi; ++j) row.push_back(format_double(s.beta_xi[j]));
    for (Eigen::Index j = 0; j < p_nu; ++j) row.push_back(format_double(s.beta_nu[j]));
    row.push_back(format_double(s.lambda_xi));
    row.push_back(format_double(s.lambda_nu));
    if (boot) {
      const bool ok = i < draws.replicate_converged.size() && draws.replicate_converged[i];
      row.push_back(ok ? "1" : "0");
    }
    t.rows.push_back(std::move(row));
  }

  t.meta["source"] = boot ? "bootstrap" : "mcmc";
  t.meta["config_hash"] = config_hash;
  if (!boot) {
    t.meta["n_iterations"] = std::to_string(draws.n_iterations);
    t.meta["burn_in"] = std::to_string(draws.burn_in);
    t.meta["proposals_xi"] = std::to_string(draws.proposals_xi);
    t.meta["accepts_xi"] = std::to_string(draws.accepts_xi);
    t.meta["proposals_nu"] = std::to_string(draws.proposals_nu);
    t.meta["accepts_nu"] = std::to_string(draws.accepts_nu);
    t.meta["final_step_xi"] = format_double(draws.final_step_xi);
    t.meta["final_step_nu"] = format_double(draws.final_step_nu);
  }
  write_table(dir / "draws.csv", t);
}

PosteriorDraws load_draws(const fs::path& dir) {
  const Table t = read_table(dir / "draws.csv");
  PosteriorDraws d;
  const auto src = t.meta.count("source") ? t.meta.at("source") : std::string("mcmc");
  if (src != "mcmc" && src != "bootstrap") throw IoError("draws.csv: unknown source " + src);
  d.source = src == "bootstrap" ? DrawsSource::Bootstrap : DrawsSource::Mcmc;

  Eigen::Index p_xi = 0;
  Eigen::Index p_nu = 0;
  for (const auto& c : t.columns) {
    if (c.rfind("beta_xi_", 0) == 0) ++p_xi;
    if (c.rfind("beta_nu_", 0) == 0) ++p_nu;
  }
  if (p_xi < 1 || p_nu < 1) throw IoError("draws.csv: no coefficient columns");

  std::vector<std::size_t> cols_xi(p_xi);
  std::vector<std::size_t> cols_nu(p_nu);
  for (Eigen::Index j = 0; j < p_xi; ++j) cols_xi[j] = t.col("beta_xi_" + std::to_string(j));
  for (Eigen::Index j = 0; j < p_nu; ++j) cols_nu[j] = t.col("beta_nu_" + std::to_string(j));
  const std::size_t col_lxi = t.col("lambda_xi");
  const std::size_t col_lnu = t.col("lambda_nu");
  const bool has_conv =
      std::find(t.columns.begin(), t.columns.end(), "converged") != t.columns.end();
  const std::size_t col_conv = has_conv ? t.col("converged") : 0;

  d.states.resize(t.rows.size());
  if (t.rows.empty()) throw IoError("draws.csv: no draws");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CoefficientState& s = d.states[i];
    s.beta_xi.resize(p_xi);
    s.beta_nu.resize(p_nu);
    for (Eigen::Index j = 0; j < p_xi; ++j) s.beta_xi[j] = t.num(i, cols_xi[j]);
    for (Eigen::Index j = 0; j < p_nu; ++j) s.beta_nu[j] = t.num(i, cols_nu[j]);
    s.lambda_xi = t.num(i, col_lxi);
    s.lambda_nu = t.num(i, col_lnu);
    if (has_conv) d.replicate_converged.push_back(t.num(i, col_conv) != 0.0 ? 1 : 0);
  }

  d.n_iterations = meta_int(t, "n_iterations", 0);
  d.burn_in = meta_int(t, "burn_in", 0);
  d.proposals_xi = meta_i64(t, "proposals_xi");
  d.accepts_xi = meta_i64(t, "accepts_xi");
  d.proposals_nu = meta_i64(t, "proposals_nu");
  d.accepts_nu = meta_i64(t, "accepts_nu");
  d.final_step_xi = meta_num(t, "final_step_xi", 0.0);
  d.final_step_nu = meta_num(t, "final_step_nu", 0.0);

  const fs::path timing = dir / "timing.json";
  if (fs::exists(timing)) {
    const json j = load_json_file(timing);
    if (j.contains("draws_hours")) d.elapsed_hours = j["draws_hours"].get<double>();
  }
  return d;
}

void write_return_distributions(const fs::path& dir, const ReturnDistributions& dists,
                                const std::string& mode, const std::string& config_hash) {
  if (dists.sectors.size() != static_cast<std::size_t>(kNumSectors)) {
    throw ContractError("write_return_distributions: expected 9 sectors");
  }
  ensure_dir(dir);
  Table pct;
  pct.columns = {"sector", "q", "value"};
  pct.meta["config_hash"] = config_hash;
  pct.meta["mode"] = mode;
  for (int s = 0; s < kNumSectors; ++s) {
    const EmpiricalDistribution& e = dists.sectors[s];
    Table t;
    t.columns = {"replicate", "value"};
    t.meta["sector"] = sector_name(s);
    t.meta["mode"] = mode;
    t.meta["config_hash"] = config_hash;
    t.rows.reserve(e.values.size());
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
      t.rows.push_back({std::to_string(i), format_double(e.values[i])});
    }
    write_table(dir / ("sector_" + sector_name(s) + ".csv"), t);
    pct.rows.push_back({sector_name(s), format_double(kReturnPercentile),
                        format_double(percentile(e.values, kReturnPercentile))});
  }
  write_table(dir / "percentiles.csv", pct);
}

ReturnDistributions load_return_distributions(const fs::path& dir) {
  ReturnDistributions dists;
  dists.sectors.resize(kNumSectors);
  for (int s = 0; s < kNumSectors; ++s) {
    const Table t = read_table(dir / ("sector_" + sector_name(s) + ".csv"));
    const std::size_t cv = t.col("value");
    EmpiricalDistribution& e = dists.sectors[s];
    e.sector = s;
    e.values.resize(static_cast<Eigen::Index>(t.rows.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      e.values[static_cast<Eigen::Index>(i)] = t.num(i, cv);
    }
  }
  return dists;
}

Table curve_quantiles(const PosteriorDraws& draws, const BasisSpec& basis_xi,
                      const BasisSpec& basis_nu) {
  if (draws.states.empty()) throw ContractError("curve_quantiles: no states");
  const auto m = static_cast<Eigen::Index>(draws.states.size());
  Eigen::VectorXd grid(360);
  for (int i = 0; i < 360; ++i) grid[i] = i;
  const Eigen::MatrixXd bx = evaluate_basis(basis_xi, grid);
  const Eigen::MatrixXd bn = evaluate_basis(basis_nu, grid);

  Eigen::MatrixXd coef_xi(bx.cols(), m);
  Eigen::MatrixXd coef_nu(bn.cols(), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const CoefficientState& s = draws.states[static_cast<std::size_t>(k)];
    if (s.beta_xi.size() != bx.cols() || s.beta_nu.size() != bn.cols()) {
      throw ContractError("curve_quantiles: draws do not match the bases");
    }
    coef_xi.col(k) = s.beta_xi;
    coef_nu.col(k) = s.beta_nu;
  }
  const Eigen::MatrixXd xi_vals = bx * coef_xi;  // 360 x m
  const Eigen::MatrixXd nu_vals = bn * coef_nu;
  const Eigen::MatrixXd sigma_vals =
      nu_vals.array() / (1.0 + xi_vals.array());  // per-draw, before quantiles

  Table t;
  t.columns = {"theta_deg", "xi_p025",    "xi_p500",    "xi_p975",
               "sigma_p025", "sigma_p500", "sigma_p975"};
  t.rows.reserve(360);
  for (int i = 0; i < 360; ++i) {
    const Eigen::VectorXd xr = xi_vals.row(i).transpose();
    const Eigen::VectorXd sr = sigma_vals.row(i).transpose();
    t.rows.push_back({format_double(grid[i]), format_double(percentile(xr, 0.025)),
                      format_double(percentile(xr, 0.5)), format_double(percentile(xr, 0.975)),
                      format_double(percentile(sr, 0.025)), format_double(percentile(sr, 0.5)),
                      format_double(percentile(sr, 0.975))});
  }
  return t;
}

Table sector_metrics(const ReturnDistributions& truth, const ReturnDistributions& model,
                     const std::string& model_name, int kl_grid) {
  Table t;
  t.columns = {"model", "sector",      "ks",         "cvm",
               "kl",    "q375_model",  "q375_truth", "q375_diff"};
  for (int s = 0; s < kNumSectors; ++s) {
    const Eigen::VectorXd& f0 = truth.sectors[s].values;
    const Eigen::VectorXd& f1 = model.sectors[s].values;
    const double qt = percentile(f0, kReturnPercentile);
    const double qm = percentile(f1, kReturnPercentile);
    t.rows.push_back({model_name, sector_name(s), format_double(ks_distance(f0, f1)),
                      format_double(cvm_distance(f0, f1)),
                      format_double(kl_divergence(f0, f1, kl_grid)), format_double(qm),
                      format_double(qt), format_double(qm - qt)});
  }
  return t;
}

FitArtifacts run_fit(const RunConfig& cfg, const PeaksSample& sample) {
  const auto start = std::chrono::steady_clock::now();
  const Design design = make_design(sample, cfg.basis_xi, cfg.basis_nu);
  FitArtifacts art;
  Rng root(cfg.seed);

  if (cfg.method == "mle") {
    art.cv = cross_validate(sample, cfg.basis_xi, cfg.basis_nu, cfg.lambda_grid, cfg.k_folds,
                            root.substream(1), cfg.fit_controls, cfg.workers);
    CoefficientState init = stationary_init(design);
    init.lambda_xi = art.cv->lambda_xi;
    init.lambda_nu = art.cv->lambda_nu;
    if (!std::isfinite(penalised_nll(design, init))) report_infeasible_init(design, init);
    art.point = irls_fit(design, init, cfg.fit_controls);
    art.draws = bootstrap(design, *art.point, cfg.m_bootstrap, root.substream(2),
                          cfg.fit_controls, cfg.workers);
  } else {
    ChainConfig chain = cfg.chain;
    chain.sampler = cfg.method == "mh" ? SamplerKind::MetropolisHastings : SamplerKind::Mmala;
    chain.seed = cfg.seed;
    art.draws = run_chain(design, chain);
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  art.total_hours = elapsed.count() / 3600.0;
  return art;
}

void write_fit_outputs(const RunConfig& cfg, const FitArtifacts& art, const fs::path& dir) {
  ensure_dir(dir);
  save_draws(dir, art.draws, cfg.config_hash);

  Table curves = curve_quantiles(art.draws, cfg.basis_xi, cfg.basis_nu);
  curves.meta["config_hash"] = cfg.config_hash;
  write_table(dir / "curves.csv", curves);

  if (art.cv) {
    Table cv;
    cv.columns = {"lambda_xi", "lambda_nu", "heldout_nll", "failed_folds"};
    cv.meta["config_hash"] = cfg.config_hash;
    cv.meta["selected_lambda_xi"] = format_double(art.cv->lambda_xi);
    cv.meta["selected_lambda_nu"] = format_double(art.cv->lambda_nu);
    for (const CvPoint& p : art.cv->surface) {
      cv.rows.push_back({format_double(p.lambda_xi), format_double(p.lambda_nu),
                         format_double(p.heldout_nll), std::to_string(p.failed_folds)});
    }
    write_table(dir / "cv_surface.csv", cv);
  }

  if (art.point) {
    Table pt;
    pt.columns = {"coefficient", "value"};
    pt.meta["config_hash"] = cfg.config_hash;
    pt.meta["lambda_xi"] = format_double(art.point->state.lambda_xi);
    pt.meta["lambda_nu"] = format_double(art.point->state.lambda_nu);
    pt.meta["nll"] = format_double(art.point->nll);
    pt.meta["penalised_nll"] = format_double(art.point->penalised_nll);
    pt.meta["converged"] = art.point->converged ? "1" : "0";
    pt.meta["iterations"] = std::to_string(art.point->iterations);
    const Eigen::VectorXd& bx = art.point->state.beta_xi;
    const Eigen::VectorXd& bn = art.point->state.beta_nu;
    for (Eigen::Index j = 0; j < bx.size(); ++j) {
      pt.rows.push_back({"beta_xi_" + std::to_string(j), format_double(bx[j])});
    }
    for (Eigen::Index j = 0; j < bn.size(); ++j) {
      pt.rows.push_back({"beta_nu_" + std::to_string(j), format_double(bn[j])});
    }
    write_table(dir / "point_fit.csv", pt);
  }

  const auto m = static_cast<Eigen::Index>(art.draws.states.size());
  json summary;
  summary["method"] = cfg.method;
  summary["config_hash"] = cfg.config_hash;
  summary["n_draws"] = m;
  if (art.draws.source == DrawsSource::Mcmc) {
    summary["accept_rate_xi"] =
        art.draws.proposals_xi > 0
            ? static_cast<double>(art.draws.accepts_xi) / art.draws.proposals_xi
            : 0.0;
    summary["accept_rate_nu"] =
        art.draws.proposals_nu > 0
            ? static_cast<double>(art.draws.accepts_nu) / art.draws.proposals_nu
            : 0.0;
    summary["final_step_xi"] = art.draws.final_step_xi;
    summary["final_step_nu"] = art.draws.final_step_nu;
    if (m >= 10) summary["min_ess"] = min_effective_sample_size(art.draws);
    Eigen::VectorXd lx(m);
    Eigen::VectorXd ln(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      lx[k] = art.draws.states[static_cast<std::size_t>(k)].lambda_xi;
      ln[k] = art.draws.states[static_cast<std::size_t>(k)].lambda_nu;
    }
    summary["lambda_xi_median"] = percentile(lx, 0.5);
    summary["lambda_nu_median"] = percentile(ln, 0.5);
  } else {
    summary["lambda_xi"] = art.point->state.lambda_xi;
    summary["lambda_nu"] = art.point->state.lambda_nu;
    summary["point_nll"] = art.point->nll;
    summary["point_penalised_nll"] = art.point->penalised_nll;
    summary["point_converged"] = art.point->converged;
    int ok = 0;
    for (const auto flag : art.draws.replicate_converged) ok += flag ? 1 : 0;
    summary["bootstrap_converged"] = ok;
  }
  write_json_file(dir / "summary.json", summary);

  json timing;
  timing["draws_hours"] = art.draws.elapsed_hours;
  timing["total_hours"] = art.total_hours;
  if (art.draws.source == DrawsSource::Bootstrap || m >= 10) {
    timing["ess_per_hour"] = ess_per_hour(art.draws);
  }
  write_json_file(dir / "timing.json", timing);

  write_text_atomic(dir / "config_echo.json", cfg.canonical_json + "\n");
}

void cmd_simulate(const RunConfig& cfg) {
  if (!cfg.truth) throw ContractError("simulate: config has no case");
  if (cfg.out.empty()) throw ContractError("simulate: no output directory");
  ensure_dir(cfg.out);
  Rng sample_rng = Rng(cfg.seed).substream(0);
  const PeaksSample sample = simulate_sample(*cfg.truth, sample_rng, cfg.fixed_n, cfg.period);
  save_sample(cfg.out / "sample.csv", sample, cfg.truth->label, cfg.seed, cfg.config_hash);

  Eigen::VectorXd grid(360);
  for (int i = 0; i < 360; ++i) grid[i] = i;
  const TruthCurves tc = truth_curves(*cfg.truth, grid);
  Table t;
  t.columns = {"theta_deg", "rate", "xi", "sigma"};
  t.meta["config_hash"] = cfg.config_hash;
  t.meta["case"] = cfg.truth->label;
  for (int i = 0; i < 360; ++i) {
    t.rows.push_back({format_double(grid[i]), format_double(tc.rate[i]),
                      format_double(tc.xi[i]), format_double(tc.sigma[i])});
  }
  write_table(cfg.out / "truth_curves.csv", t);
  write_text_atomic(cfg.out / "config_echo.json", cfg.canonical_json + "\n");
}

void cmd_fit(const RunConfig& cfg, const fs::path& sample_path) {
  if (cfg.out.empty()) throw ContractError("fit: no output directory");
  const SampleFile sf = load_sample(sample_path);
  const FitArtifacts art = run_fit(cfg, sf.sample);
  write_fit_outputs(cfg, art, cfg.out);
}

void cmd_return_values(const RunConfig& cfg, const fs::path& fit_dir, bool truth_mode) {
  if (!cfg.truth) throw ContractError("return-values: config has no case (occurrence rate)");
  if (cfg.out.empty()) throw ContractError("return-values: no output directory");
  ensure_dir(cfg.out);
  ReturnSimConfig rv = cfg.retval;
  rv.workers = cfg.workers;
  const Rng retval_rng = Rng(cfg.seed).substream(3);

  ReturnDistributions dists;
  std::string mode;
  if (truth_mode) {
    dists = simulate_return_distribution(*cfg.truth, rv, retval_rng);
    mode = "truth";
  } else {
    const PosteriorDraws draws = load_draws(fit_dir);
    const Eigen::Index p_xi = basis_row(cfg.basis_xi, 0.0).size();
    const Eigen::Index p_nu = basis_row(cfg.basis_nu, 0.0).size();
    if (draws.states.front().beta_xi.size() != p_xi ||
        draws.states.front().beta_nu.size() != p_nu) {
      throw ContractError("return-values: draws in " + fit_dir.string() +
                          " do not match the configured bases");
    }
    dists = simulate_return_distribution(draws, cfg.basis_xi, cfg.basis_nu, cfg.truth->rate,
                                         cfg.truth->expected_total, rv, retval_rng);
    mode = "model";
  }
  write_return_distributions(cfg.out, dists, mode, cfg.config_hash);

  json summary;
  summary["mode"] = mode;
  summary["factor"] = rv.factor;
  summary["replicates"] = rv.replicates;
  summary["infeasible_states"] = dists.infeasible_states;
  summary["config_hash"] = cfg.config_hash;
  write_json_file(cfg.out / "retval_summary.json", summary);
  write_text_atomic(cfg.out / "config_echo.json", cfg.canonical_json + "\n");
}

void cmd_compare(const fs::path& truth_dir, const std::vector<NamedDir>& models,
                 const fs::path& out_dir, int kl_grid) {
  if (models.empty()) throw ContractError("compare: no model directories given");
  ensure_dir(out_dir);
  const ReturnDistributions truth = load_return_distributions(truth_dir);

  Table stats;
  Table box;
  box.columns = {"source", "sector", "median", "q1", "q3", "p025", "p975", "count"};
  box.meta["kl_grid"] = std::to_string(kl_grid);
  const auto box_rows = [&box](const std::string& name, const ReturnDistributions& d) {
    for (int s = 0; s < kNumSectors; ++s) {
      const Eigen::VectorXd& v = d.sectors[s].values;
      box.rows.push_back({name, sector_name(s), format_double(percentile(v, 0.5)),
                          format_double(percentile(v, 0.25)), format_double(percentile(v, 0.75)),
                          format_double(percentile(v, 0.025)),
                          format_double(percentile(v, 0.975)), std::to_string(v.size())});
    }
  };
  box_rows("truth", truth);

  for (const NamedDir& model : models) {
    const ReturnDistributions dists = load_return_distributions(model.dir);
    Table part = sector_metrics(truth, dists, model.name, kl_grid);
    if (stats.columns.empty()) {
      stats.columns = part.columns;
      stats.meta["kl_grid"] = std::to_string(kl_grid);
    }
    for (auto& row : part.rows) stats.rows.push_back(std::move(row));
    box_rows(model.name, dists);
  }
  write_table(out_dir / "stats.csv", stats);
  write_table(out_dir / "box_whisker.csv", box);
}

void cmd_ess(const fs::path& fit_dir, const fs::path& out_dir) {
  ensure_dir(out_dir);
  const PosteriorDraws draws = load_draws(fit_dir);
  const auto m = static_cast<Eigen::Index>(draws.states.size());

  Table t;
  t.columns = {"scalar", "ess"};
  json summary;
  summary["source"] = draws.source == DrawsSource::Bootstrap ? "bootstrap" : "mcmc";
  summary["n_draws"] = m;

  if (draws.source == DrawsSource::Mcmc) {
    const Eigen::Index p_xi = draws.states.front().beta_xi.size();
    const Eigen::Index p_nu = draws.states.front().beta_nu.size();
    Eigen::VectorXd chain(m);
    double min_ess = std::numeric_limits<double>::infinity();
    const auto add = [&](const std::string& name, auto getter) {
      for (Eigen::Index k = 0; k < m; ++k) {
        chain[k] = getter(draws.states[static_cast<std::size_t>(k)]);
      }
      const double ess = effective_sample_size(chain);
      min_ess = std::min(min_ess, ess);
      t.rows.push_back({name, format_double(ess)});
    };
    for (Eigen::Index j = 0; j < p_xi; ++j) {
      add("beta_xi_" + std::to_string(j),
          [j](const CoefficientState& s) { return s.beta_xi[j]; });
    }
    for (Eigen::Index j = 0; j < p_nu; ++j) {
      add("beta_nu_" + std::to_string(j),
          [j](const CoefficientState& s) { return s.beta_nu[j]; });
    }
    add("lambda_xi", [](const CoefficientState& s) { return s.lambda_xi; });
    add("lambda_nu", [](const CoefficientState& s) { return s.lambda_nu; });
    summary["min_ess"] = min_ess;
  }
  if (draws.elapsed_hours > 0.0 &&
      (draws.source == DrawsSource::Bootstrap || m >= 10)) {
    summary["elapsed_hours"] = draws.elapsed_hours;
    summary["ess_per_hour"] = ess_per_hour(draws);
  }
  write_table(out_dir / "ess.csv", t);
  write_json_file(out_dir / "ess_summary.json", summary);
}

}  // namespace dirgp
