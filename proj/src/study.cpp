#include "dirgp/study.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dirgp/commands.hpp"
#include "dirgp/errors.hpp"
#include "dirgp/io.hpp"
#include "dirgp/metrics.hpp"

namespace dirgp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

int basis_kind_id(BasisKind kind) {
  switch (kind) {
    case BasisKind::Constant: return 0;
    case BasisKind::Spline: return 1;
    case BasisKind::Fourier: return 2;
    case BasisKind::GaussianProcess: return 3;
  }
  throw ContractError("unknown basis kind");
}

int method_id(const std::string& method) {
  if (method == "mle") return 0;
  if (method == "mh") return 1;
  if (method == "mmala") return 2;
  throw ContractError("study: unknown method '" + method + "'");
}

// Seeds hang off (case, realisation, basis kind, method), never off grid
// position, so any subset or reordering of the grid reproduces the same
// per-cell results.
std::uint64_t cell_seed(std::uint64_t root_seed, int case_number, int realisation,
                        const BasisSpec& basis, const std::string& method) {
  const int slot = 1 + basis_kind_id(basis.kind) * 3 + method_id(method);
  Rng r = Rng(root_seed)
              .substream(static_cast<std::uint64_t>(case_number))
              .substream(static_cast<std::uint64_t>(realisation))
              .substream(static_cast<std::uint64_t>(slot));
  return r.raw();
}

bool marker_matches(const fs::path& dir, const std::string& hash) {
  const fs::path marker = dir / "done";
  if (!fs::exists(marker)) return false;
  std::string text = read_text(marker);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text == hash;
}

void mark_done(const fs::path& dir, const std::string& hash) {
  write_text_atomic(dir / "done", hash + "\n");
}

std::string sample_identity(const StudyConfig& study, int case_number, int realisation) {
  json id;
  id["seed"] = study.base.seed;
  id["case"] = case_number;
  id["realisation"] = realisation;
  id["n"] = study.base.fixed_n ? json(*study.base.fixed_n) : json(nullptr);
  id["period"] = study.base.period;
  return hash_hex(id.dump());
}

double table_percentile(const std::vector<double>& values, double q) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return percentile(v, q);
}

}  // namespace

std::string basis_dir_name(const BasisSpec& spec) {
  switch (spec.kind) {
    case BasisKind::Constant: return "constant";
    case BasisKind::Spline: return "spline";
    case BasisKind::Fourier: return "fourier";
    case BasisKind::GaussianProcess: return "gp";
  }
  throw ContractError("unknown basis kind");
}

StudyConfig parse_study_config(const json& j, const CliOverrides& overrides) {
  StudyConfig study;
  study.base = parse_run_config(j, overrides);
  if (!j.is_object() || !j.contains("study") || j["study"].is_null()) return study;
  const json& st = j["study"];
  if (!st.is_object()) throw ContractError("config: study must be an object");

  if (st.contains("cases")) {
    if (!st["cases"].is_array() || st["cases"].empty()) {
      throw ContractError("config: study.cases must be a non-empty array");
    }
    study.cases.clear();
    for (const auto& c : st["cases"]) {
      if (!c.is_number_integer()) throw ContractError("config: study.cases entries are case numbers");
      study.cases.push_back(c.get<int>());
      builtin_case(study.cases.back());  // validates the number
    }
  }
  if (st.contains("bases")) {
    if (!st["bases"].is_array() || st["bases"].empty()) {
      throw ContractError("config: study.bases must be a non-empty array");
    }
    study.bases.clear();
    for (const auto& b : st["bases"]) study.bases.push_back(basis_from_json(b));
  }
  if (st.contains("methods")) {
    if (!st["methods"].is_array() || st["methods"].empty()) {
      throw ContractError("config: study.methods must be a non-empty array");
    }
    study.methods.clear();
    for (const auto& m : st["methods"]) {
      if (!m.is_string()) throw ContractError("config: study.methods entries are strings");
      study.methods.push_back(m.get<std::string>());
      method_id(study.methods.back());
    }
  }
  if (st.contains("replicates")) {
    if (!st["replicates"].is_number_integer() || st["replicates"].get<int>() < 1) {
      throw ContractError("config: study.replicates must be a positive integer");
    }
    study.replicates = st["replicates"].get<int>();
  }
  if (st.contains("truth_replicates")) {
    if (!st["truth_replicates"].is_number_integer() || st["truth_replicates"].get<int>() < 1) {
      throw ContractError("config: study.truth_replicates must be a positive integer");
    }
    study.truth_replicates = st["truth_replicates"].get<int>();
  }
  return study;
}

void run_study(const StudyConfig& study) {
  if (study.base.out.empty()) throw ContractError("study: no output directory");
  const fs::path root = study.base.out;
  ensure_dir(root);

  // Truth reference distributions, once per case, with their own replicate
  // budget to keep the reference ECDFs tight.
  std::map<int, ReturnDistributions> truths;
  for (const int c : study.cases) {
    const CaseSpec spec = builtin_case(c);
    const fs::path tdir = root / "truth" / ("case" + std::to_string(c));
    RunConfig tcfg = study.base;
    tcfg.truth = spec;
    tcfg.retval.replicates = study.truth_replicates;
    canonicalise(tcfg);
    if (!marker_matches(tdir, tcfg.config_hash)) {
      ReturnSimConfig rv = tcfg.retval;
      rv.workers = tcfg.workers;
      const Rng rng = Rng(study.base.seed)
                          .substream(static_cast<std::uint64_t>(c))
                          .substream(1000000);
      const ReturnDistributions dists = simulate_return_distribution(spec, rv, rng);
      write_return_distributions(tdir, dists, "truth", tcfg.config_hash);
      mark_done(tdir, tcfg.config_hash);
    }
    truths[c] = load_return_distributions(tdir);
  }

  Table failures;
  failures.columns = {"case", "basis", "method", "realisation", "error"};

  for (const int c : study.cases) {
    const CaseSpec spec = builtin_case(c);
    const fs::path case_dir = root / ("case" + std::to_string(c));
    for (int r = 0; r < study.replicates; ++r) {
      // One realisation of the data, shared by every basis and method so the
      // comparison sees identical samples.
      const fs::path sfile = case_dir / "samples" / ("r" + std::to_string(r) + ".csv");
      const std::string sample_hash = sample_identity(study, c, r);
      bool have_sample = false;
      if (fs::exists(sfile)) {
        have_sample = load_sample(sfile).config_hash == sample_hash;
      }
      if (!have_sample) {
        Rng srng = Rng(study.base.seed)
                       .substream(static_cast<std::uint64_t>(c))
                       .substream(static_cast<std::uint64_t>(r))
                       .substream(0);
        const PeaksSample sample =
            simulate_sample(spec, srng, study.base.fixed_n, study.base.period);
        ensure_dir(sfile.parent_path());
        save_sample(sfile, sample, spec.label, study.base.seed, sample_hash);
      }
      const SampleFile sf = load_sample(sfile);

      for (const BasisSpec& basis : study.bases) {
        for (const std::string& method : study.methods) {
          const fs::path cdir =
              case_dir / basis_dir_name(basis) / method / ("r" + std::to_string(r));
          RunConfig cfg = study.base;
          cfg.truth = spec;
          cfg.basis_xi = basis;
          cfg.basis_nu = basis;
          cfg.method = method;
          cfg.seed = cell_seed(study.base.seed, c, r, basis, method);
          canonicalise(cfg);
          if (marker_matches(cdir, cfg.config_hash)) continue;

          try {
            const FitArtifacts art = run_fit(cfg, sf.sample);
            write_fit_outputs(cfg, art, cdir);

            ReturnSimConfig rv = cfg.retval;
            rv.workers = cfg.workers;
            const ReturnDistributions dists = simulate_return_distribution(
                art.draws, basis, basis, spec.rate, spec.expected_total, rv,
                Rng(cfg.seed).substream(3));
            write_return_distributions(cdir / "retval", dists, "model", cfg.config_hash);

            Table metrics = sector_metrics(truths[c], dists, basis_dir_name(basis),
                                           cfg.kl_grid);
            metrics.meta["case"] = std::to_string(c);
            metrics.meta["method"] = method;
            metrics.meta["realisation"] = std::to_string(r);
            metrics.meta["config_hash"] = cfg.config_hash;
            write_table(cdir / "metrics.csv", metrics);
            mark_done(cdir, cfg.config_hash);
          } catch (const std::exception& e) {
            std::fprintf(stderr, "study: case %d %s %s r%d failed: %s\n", c,
                         basis_dir_name(basis).c_str(), method.c_str(), r, e.what());
            failures.rows.push_back({std::to_string(c), basis_dir_name(basis), method,
                                     std::to_string(r), e.what()});
          }
        }
      }
    }
  }

  // Aggregation re-reads cell outputs from disk, so resumed and fresh runs
  // produce identical tables.
  Table summary;
  summary.columns = {"case", "basis",      "method",     "realisation", "sector",   "ks",
                     "cvm",  "kl",         "q375_model", "q375_truth",  "q375_diff"};
  Table ess;
  ess.columns = {"case",     "basis",       "method",      "realisation",
                 "n_draws",  "min_ess",     "draws_hours", "ess_per_hour"};
  // (case, basis, method, sector, metric) -> values over realisations
  std::map<std::vector<std::string>, std::vector<double>> box_values;

  for (const int c : study.cases) {
    const fs::path case_dir = root / ("case" + std::to_string(c));
    for (const BasisSpec& basis : study.bases) {
      for (const std::string& method : study.methods) {
        for (int r = 0; r < study.replicates; ++r) {
          const fs::path cdir =
              case_dir / basis_dir_name(basis) / method / ("r" + std::to_string(r));
          if (!fs::exists(cdir / "metrics.csv")) continue;
          const Table metrics = read_table(cdir / "metrics.csv");
          const std::size_t col_sector = metrics.col("sector");
          for (std::size_t i = 0; i < metrics.rows.size(); ++i) {
            const std::string& sector = metrics.rows[i][col_sector];
            std::vector<std::string> row = {std::to_string(c), basis_dir_name(basis), method,
                                            std::to_string(r), sector};
            for (const char* name : {"ks", "cvm", "kl", "q375_model", "q375_truth",
                                     "q375_diff"}) {
              row.push_back(metrics.rows[i][metrics.col(name)]);
            }
            summary.rows.push_back(row);
            for (const char* name : {"ks", "cvm", "kl", "q375_diff"}) {
              box_values[{std::to_string(c), basis_dir_name(basis), method, sector, name}]
                  .push_back(metrics.num(i, metrics.col(name)));
            }
          }

          std::vector<std::string> erow = {std::to_string(c), basis_dir_name(basis), method,
                                           std::to_string(r)};
          const json js = load_json_file(cdir / "summary.json");
          erow.push_back(std::to_string(js.value("n_draws", 0)));
          erow.push_back(js.contains("min_ess")
                             ? format_double(js["min_ess"].get<double>())
                             : "nan");
          if (fs::exists(cdir / "timing.json")) {
            const json jt = load_json_file(cdir / "timing.json");
            erow.push_back(format_double(jt.value("draws_hours", 0.0)));
            erow.push_back(jt.contains("ess_per_hour")
                               ? format_double(jt["ess_per_hour"].get<double>())
                               : "nan");
          } else {
            erow.push_back("nan");
            erow.push_back("nan");
          }
          ess.rows.push_back(erow);
        }
      }
    }
  }

  Table box;
  box.columns = {"case", "basis", "method", "sector", "metric",
                 "median", "q1",  "q3",     "p025",   "p975",   "count"};
  for (const auto& [key, values] : box_values) {
    std::vector<std::string> row = key;
    row.push_back(format_double(table_percentile(values, 0.5)));
    row.push_back(format_double(table_percentile(values, 0.25)));
    row.push_back(format_double(table_percentile(values, 0.75)));
    row.push_back(format_double(table_percentile(values, 0.025)));
    row.push_back(format_double(table_percentile(values, 0.975)));
    row.push_back(std::to_string(values.size()));
    box.rows.push_back(row);
  }

  const fs::path tables = root / "tables";
  ensure_dir(tables);
  write_table(tables / "summary.csv", summary);
  write_table(tables / "metrics_box.csv", box);
  write_table(tables / "ess.csv", ess);
  write_table(tables / "failures.csv", failures);
}

}  // namespace dirgp
