// Comparison-study driver: grid layout on disk, resume semantics, seeding
// that is independent of grid position, failure isolation, and the
// aggregated tables. Grids here are small (one case, constant bases, two
// replicates) so the whole suite stays fast.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dirgp/errors.hpp"
#include "dirgp/io.hpp"
#include "dirgp/study.hpp"

namespace fs = std::filesystem;
using dirgp::CliOverrides;
using dirgp::StudyConfig;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path root = fs::temp_directory_path() / ("dirgp_study_" + tag);
  fs::remove_all(root);
  fs::create_directories(root);
  return root;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: " << path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// relative path -> bytes, for whole-tree comparisons
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    files[fs::relative(entry.path(), root).string()] = slurp(entry.path());
  }
  return files;
}

// files that differ between two snapshots, ignoring the named basenames
std::vector<std::string> snapshot_diff(const std::map<std::string, std::string>& a,
                                       const std::map<std::string, std::string>& b,
                                       const std::set<std::string>& skip) {
  std::vector<std::string> bad;
  std::set<std::string> rels;
  for (const auto& [rel, bytes] : a) rels.insert(rel);
  for (const auto& [rel, bytes] : b) rels.insert(rel);
  for (const std::string& rel : rels) {
    if (skip.count(fs::path(rel).filename().string())) continue;
    const auto ia = a.find(rel);
    const auto ib = b.find(rel);
    if (ia == a.end() || ib == b.end()) {
      bad.push_back(rel + " (missing on one side)");
    } else if (ia->second != ib->second) {
      bad.push_back(rel);
    }
  }
  return bad;
}

// Small but complete base configuration. The study overrides basis and
// method per cell, so the top-level choices only seed the parser.
json base_json(std::uint64_t seed) {
  json j;
  j["seed"] = seed;
  j["sample"] = {{"n", 60}};
  j["basis"] = "constant";
  j["mcmc"] = {{"n_iterations", 200}, {"burn_in", 50}};
  j["mle"] = {{"k_folds", 2},
              {"lambda_grid", json::array({1.0})},
              {"m_bootstrap", 4},
              {"max_iter", 500}};
  j["return_values"] = {{"factor", 5.0}, {"replicates", 60}};
  j["metrics"] = {{"kl_grid", 64}};
  j["study"] = {{"cases", json::array({1})},
                {"bases", json::array({"constant"})},
                {"methods", json::array({"mmala", "mle"})},
                {"replicates", 2},
                {"truth_replicates", 150}};
  return j;
}

StudyConfig study_for(const json& j, const fs::path& out) {
  CliOverrides o;
  o.out = out.string();
  return dirgp::parse_study_config(j, o);
}

}  // namespace

TEST_CASE("study configuration parses defaults and overrides") {
  json j;
  j["seed"] = 7;
  CliOverrides none;
  const StudyConfig defaults = dirgp::parse_study_config(j, none);
  CHECK(defaults.cases == std::vector<int>{1, 2, 3});
  REQUIRE(defaults.bases.size() == 2);
  CHECK(dirgp::basis_dir_name(defaults.bases[0]) == "spline");
  CHECK(dirgp::basis_dir_name(defaults.bases[1]) == "constant");
  CHECK(defaults.methods == std::vector<std::string>{"mmala", "mle"});
  CHECK(defaults.replicates == 5);
  CHECK(defaults.truth_replicates == 10000);

  j["study"] = {{"cases", json::array({2, 5})},
                {"bases", json::array({"fourier", "gp"})},
                {"methods", json::array({"mh"})},
                {"replicates", 3},
                {"truth_replicates", 40}};
  const StudyConfig tuned = dirgp::parse_study_config(j, none);
  CHECK(tuned.cases == std::vector<int>{2, 5});
  CHECK(dirgp::basis_dir_name(tuned.bases[0]) == "fourier");
  CHECK(dirgp::basis_dir_name(tuned.bases[1]) == "gp");
  CHECK(tuned.methods == std::vector<std::string>{"mh"});
  CHECK(tuned.replicates == 3);
  CHECK(tuned.truth_replicates == 40);

  json bad = j;
  bad["study"]["cases"] = json::array({9});  // no such case
  CHECK_THROWS_AS(dirgp::parse_study_config(bad, none), dirgp::ContractError);
  bad = j;
  bad["study"]["methods"] = json::array({"gradient_descent"});
  CHECK_THROWS_AS(dirgp::parse_study_config(bad, none), dirgp::ContractError);
  bad = j;
  bad["study"]["bases"] = json::array();
  CHECK_THROWS_AS(dirgp::parse_study_config(bad, none), dirgp::ContractError);
  bad = j;
  bad["study"]["replicates"] = 0;
  CHECK_THROWS_AS(dirgp::parse_study_config(bad, none), dirgp::ContractError);
}

TEST_CASE("study writes the documented layout, resumes, and rebuilds deleted cells") {
  const fs::path root = fresh_dir("grid");
  const StudyConfig study = study_for(base_json(4242), root);
  dirgp::run_study(study);

  // truth reference, once per case, with its own marker
  CHECK(fs::exists(root / "truth" / "case1" / "done"));
  const dirgp::Table truth_omni =
      dirgp::read_table(root / "truth" / "case1" / "sector_omni.csv");
  CHECK(truth_omni.rows.size() == 150);

  // one shared sample per realisation
  for (int r = 0; r < 2; ++r) {
    const dirgp::Table s = dirgp::read_table(root / "case1" / "samples" /
                                             ("r" + std::to_string(r) + ".csv"));
    CHECK(s.rows.size() == 60);
  }

  // every cell carries fit outputs, return values, metrics and a marker
  for (const std::string method : {"mmala", "mle"}) {
    for (int r = 0; r < 2; ++r) {
      const fs::path cell = root / "case1" / "constant" / method / ("r" + std::to_string(r));
      CAPTURE(cell.string());
      const dirgp::Table draws = dirgp::read_table(cell / "draws.csv");
      CHECK(draws.rows.size() == (method == "mmala" ? 150 : 4));
      CHECK(fs::exists(cell / "retval" / "sector_omni.csv"));
      CHECK(fs::exists(cell / "summary.json"));
      const dirgp::Table metrics = dirgp::read_table(cell / "metrics.csv");
      CHECK(metrics.rows.size() == 9);
      CHECK(metrics.meta.at("method") == method);
      CHECK(metrics.meta.at("realisation") == std::to_string(r));
      // the marker stores the cell's configuration hash
      std::string marker = slurp(cell / "done");
      while (!marker.empty() && marker.back() == '\n') marker.pop_back();
      CHECK(marker == metrics.meta.at("config_hash"));
    }
  }

  // aggregated tables: 4 cells x 9 sectors, 4 ess rows, no failures
  const dirgp::Table summary = dirgp::read_table(root / "tables" / "summary.csv");
  CHECK(summary.rows.size() == 36);
  const dirgp::Table ess = dirgp::read_table(root / "tables" / "ess.csv");
  CHECK(ess.rows.size() == 4);
  const dirgp::Table box = dirgp::read_table(root / "tables" / "metrics_box.csv");
  CHECK(box.rows.size() == 2 * 9 * 4);  // method x sector x metric
  for (const auto& row : box.rows) CHECK(row[box.col("count")] == "2");
  const dirgp::Table failures = dirgp::read_table(root / "tables" / "failures.csv");
  CHECK(failures.rows.empty());

  // bootstrap cells report no chain ess, sampler cells do
  for (const auto& row : ess.rows) {
    if (row[ess.col("method")] == "mle") {
      CHECK(row[ess.col("min_ess")] == "nan");
      CHECK(row[ess.col("n_draws")] == "4");
    } else {
      CHECK(row[ess.col("min_ess")] != "nan");
      CHECK(row[ess.col("n_draws")] == "150");
    }
  }

  // resuming over a complete study re-runs nothing and rewrites the same bytes
  const auto before = snapshot(root);
  dirgp::run_study(study);
  CHECK(snapshot_diff(before, snapshot(root), {}).empty());

  // a deleted cell is rebuilt in place with identical content; only wall
  // clock artefacts (timing.json and the ess table derived from it) may move
  const fs::path victim = root / "case1" / "constant" / "mmala" / "r1";
  fs::remove_all(victim);
  dirgp::run_study(study);
  const auto rebuilt = snapshot(root);
  CHECK(snapshot_diff(before, rebuilt, {"timing.json", "ess.csv"}).empty());
  CHECK(rebuilt.at("case1/constant/mmala/r1/draws.csv") ==
        before.at("case1/constant/mmala/r1/draws.csv"));
}

TEST_CASE("cell seeds follow identity, not grid position") {
  // The same (case, realisation, basis, method) cell must reproduce exactly
  // even when the surrounding grid changes shape.
  json wide = base_json(77);
  const fs::path root_wide = fresh_dir("wide");
  dirgp::run_study(study_for(wide, root_wide));

  json narrow = base_json(77);
  narrow["study"]["methods"] = json::array({"mle"});
  narrow["study"]["replicates"] = 1;
  const fs::path root_narrow = fresh_dir("narrow");
  dirgp::run_study(study_for(narrow, root_narrow));

  const fs::path cell = fs::path("case1") / "constant" / "mle" / "r0";
  CHECK(slurp(root_wide / cell / "draws.csv") == slurp(root_narrow / cell / "draws.csv"));
  CHECK(slurp(root_wide / cell / "metrics.csv") ==
        slurp(root_narrow / cell / "metrics.csv"));
  CHECK(slurp(root_wide / "case1" / "samples" / "r0.csv") ==
        slurp(root_narrow / "case1" / "samples" / "r0.csv"));
}

TEST_CASE("a failing cell is recorded without poisoning the rest of the grid") {
  json j = base_json(99);
  // more folds than observations only surfaces once cross validation sees
  // the sample, so every penalised likelihood cell fails while the sampler
  // cells keep working
  j["mle"]["k_folds"] = 61;
  const fs::path root = fresh_dir("failures");
  dirgp::run_study(study_for(j, root));

  const dirgp::Table failures = dirgp::read_table(root / "tables" / "failures.csv");
  REQUIRE(failures.rows.size() == 2);
  for (const auto& row : failures.rows) {
    CHECK(row[failures.col("case")] == "1");
    CHECK(row[failures.col("basis")] == "constant");
    CHECK(row[failures.col("method")] == "mle");
    CHECK_FALSE(row[failures.col("error")].empty());
  }
  // failed cells leave no done marker, finished cells do
  CHECK_FALSE(fs::exists(root / "case1" / "constant" / "mle" / "r0" / "done"));
  CHECK(fs::exists(root / "case1" / "constant" / "mmala" / "r0" / "done"));

  // aggregation covers only the cells that finished
  const dirgp::Table summary = dirgp::read_table(root / "tables" / "summary.csv");
  CHECK(summary.rows.size() == 18);  // 2 sampler cells x 9 sectors
  for (const auto& row : summary.rows) CHECK(row[summary.col("method")] == "mmala");
}
