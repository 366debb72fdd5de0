#include "dirgp/config.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "dirgp/errors.hpp"
#include "dirgp/io.hpp"

namespace dirgp {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw ContractError("config: " + what); }

const json* find(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double get_num(const json& j, const char* key, double fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number()) bad(std::string(key) + " must be a number");
  return v->get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) bad(std::string(key) + " must be an integer");
  return v->get<int>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_boolean()) bad(std::string(key) + " must be a boolean");
  return v->get<bool>();
}

std::string get_str(const json& j, const char* key, const std::string& fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_string()) bad(std::string(key) + " must be a string");
  return v->get<std::string>();
}

json mixture_to_json(const MixtureCurve& curve) {
  json components = json::array();
  for (const auto& c : curve.components) {
    components.push_back(
        {{"amplitude", c.amplitude}, {"centre_deg", c.centre_deg}, {"width_deg", c.width_deg}});
  }
  return {{"baseline", curve.baseline}, {"components", components}};
}

MixtureCurve mixture_from_json(const json& j) {
  MixtureCurve curve;
  curve.baseline = get_num(j, "baseline", 0.0);
  const json* comps = find(j, "components");
  if (!comps || !comps->is_array()) bad("mixture curve needs a components array");
  for (const auto& c : *comps) {
    MixtureComponent comp;
    comp.amplitude = get_num(c, "amplitude", 1.0);
    comp.centre_deg = get_num(c, "centre_deg", 0.0);
    comp.width_deg = get_num(c, "width_deg", 30.0);
    curve.components.push_back(comp);
  }
  curve.validate();
  return curve;
}

}  // namespace

json load_json_file(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ContractError("config: invalid JSON in " + path.string());
  return j;
}

json basis_to_json(const BasisSpec& spec) {
  switch (spec.kind) {
    case BasisKind::Constant:
      return {{"kind", "constant"}};
    case BasisKind::Spline:
      return {{"kind", "spline"},
              {"n_basis", spec.n_basis},
              {"spline_degree", spec.spline_degree},
              {"periodic_penalty", spec.periodic_penalty}};
    case BasisKind::Fourier:
      return {{"kind", "fourier"}, {"fourier_order", spec.fourier_order}};
    case BasisKind::GaussianProcess:
      return {{"kind", "gaussian_process"},
              {"n_basis", spec.n_basis},
              {"correlation_length", spec.correlation_length}};
  }
  bad("unknown basis kind");
}

BasisSpec basis_from_json(const json& j) {
  std::string kind;
  if (j.is_string()) {
    kind = j.get<std::string>();
  } else if (j.is_object()) {
    kind = get_str(j, "kind", "");
  } else {
    bad("basis must be a string or an object");
  }
  const json obj = j.is_object() ? j : json::object();
  if (kind == "constant") return constant_basis();
  if (kind == "spline") {
    return spline_basis(get_int(obj, "n_basis", 50), get_int(obj, "spline_degree", 3),
                        get_bool(obj, "periodic_penalty", true));
  }
  if (kind == "fourier") return fourier_basis(get_int(obj, "fourier_order", 25));
  if (kind == "gaussian_process" || kind == "gp") {
    return gp_basis(get_int(obj, "n_basis", 50), get_num(obj, "correlation_length", 0.6));
  }
  bad("unknown basis kind '" + kind + "'");
}

json case_to_json(const CaseSpec& spec) {
  if (spec.builtin_number > 0) return json(spec.builtin_number);
  if (!spec.mixture) bad("only built-in or mixture cases can be serialised");
  return {{"label", spec.label},
          {"expected_total", spec.expected_total},
          {"rate", mixture_to_json(spec.mixture->rate_shape)},
          {"shape", mixture_to_json(spec.mixture->shape)},
          {"scale", mixture_to_json(spec.mixture->scale)}};
}

CaseSpec case_from_json(const json& j) {
  if (j.is_number_integer()) return builtin_case(j.get<int>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.rfind("Case", 0) == 0) return builtin_case(std::stoi(s.substr(4)));
    bad("unknown case label '" + s + "'");
  }
  if (!j.is_object()) bad("case must be a number, a label or an object");
  const std::string label = get_str(j, "label", "custom");
  for (const char c : label) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
      bad("case label must be alphanumeric with - or _");
    }
  }
  MixtureDefinition def;
  const json* rate = find(j, "rate");
  const json* shape = find(j, "shape");
  const json* scale = find(j, "scale");
  if (!rate || !shape || !scale) bad("custom case needs rate, shape and scale mixtures");
  def.rate_shape = mixture_from_json(*rate);
  def.shape = mixture_from_json(*shape);
  def.scale = mixture_from_json(*scale);
  return case_from_mixtures(label, def, get_num(j, "expected_total", 1000.0));
}

RunConfig parse_run_config(const json& j, const CliOverrides& overrides) {
  if (!j.is_object()) bad("top level must be a JSON object");
  RunConfig cfg;

  if (overrides.seed) {
    cfg.seed = *overrides.seed;
  } else if (const json* seed = find(j, "seed")) {
    if (!seed->is_number_integer()) bad("seed must be an integer");
    cfg.seed = seed->get<std::uint64_t>();
  } else {
    bad("seed is required (config key 'seed' or --seed)");
  }

  cfg.out = overrides.out ? *overrides.out : get_str(j, "out", "");
  const int workers =
      overrides.workers ? static_cast<int>(*overrides.workers) : get_int(j, "workers", 1);
  if (workers < 0) bad("workers must be >= 0");
  cfg.workers = static_cast<unsigned>(workers);

  if (const json* c = find(j, "case")) cfg.truth = case_from_json(*c);

  if (const json* sample = find(j, "sample")) {
    if (!sample->is_object()) bad("sample must be an object");
    if (sample->contains("n")) {
      const auto& n = (*sample)["n"];
      if (n.is_null()) {
        cfg.fixed_n = std::nullopt;  // Poisson event count
      } else if (n.is_number_integer()) {
        cfg.fixed_n = n.get<int>();
        if (*cfg.fixed_n < 1) bad("sample.n must be >= 1");
      } else {
        bad("sample.n must be an integer or null");
      }
    }
    cfg.period = get_num(*sample, "period", 1.0);
    if (!(cfg.period > 0.0)) bad("sample.period must be positive");
  }

  if (const json* b = find(j, "basis_xi")) cfg.basis_xi = basis_from_json(*b);
  if (const json* b = find(j, "basis_nu")) cfg.basis_nu = basis_from_json(*b);
  if (const json* b = find(j, "basis")) {
    cfg.basis_xi = basis_from_json(*b);
    cfg.basis_nu = basis_from_json(*b);
  }

  cfg.method = get_str(j, "method", "mmala");
  if (cfg.method != "mle" && cfg.method != "mh" && cfg.method != "mmala") {
    bad("method must be one of mle, mh, mmala");
  }

  const json mcmc = find(j, "mcmc") ? *find(j, "mcmc") : json::object();
  cfg.chain.sampler =
      cfg.method == "mh" ? SamplerKind::MetropolisHastings : SamplerKind::Mmala;
  cfg.chain.n_iterations = get_int(mcmc, "n_iterations", 2500);
  cfg.chain.burn_in = get_int(mcmc, "burn_in", 500);
  cfg.chain.step_xi = get_num(mcmc, "step_xi", 0.1);
  cfg.chain.step_nu = get_num(mcmc, "step_nu", 0.1);
  cfg.chain.kappa = get_num(mcmc, "kappa", 1.0);
  cfg.chain.prior_a = get_num(mcmc, "prior_a", 1e-3);
  cfg.chain.prior_b = get_num(mcmc, "prior_b", 1e-3);
  cfg.chain.adapt_target = get_num(mcmc, "adapt_target", 0.25);
  cfg.chain.seed = cfg.seed;
  cfg.chain.validate();

  const json mle = find(j, "mle") ? *find(j, "mle") : json::object();
  cfg.fit_controls.tol = get_num(mle, "tol", 1e-8);
  cfg.fit_controls.max_iter = get_int(mle, "max_iter", 200);
  cfg.fit_controls.max_halvings = get_int(mle, "max_halvings", 30);
  cfg.k_folds = get_int(mle, "k_folds", 5);
  cfg.m_bootstrap = get_int(mle, "m_bootstrap", 100);
  if (cfg.k_folds < 2) bad("mle.k_folds must be >= 2");
  if (cfg.m_bootstrap < 1) bad("mle.m_bootstrap must be >= 1");
  if (const json* grid = find(mle, "lambda_grid")) {
    if (grid->is_array()) {
      cfg.lambda_grid.clear();
      for (const auto& v : *grid) {
        if (!v.is_number()) bad("lambda_grid entries must be numbers");
        cfg.lambda_grid.push_back(v.get<double>());
      }
      if (cfg.lambda_grid.empty()) bad("lambda_grid must not be empty");
    } else if (grid->is_object()) {
      const double lo = get_num(*grid, "min", 1e-3);
      const double hi = get_num(*grid, "max", 1e6);
      const int count = get_int(*grid, "count", 10);
      if (!(lo > 0.0) || !(hi >= lo) || count < 1) bad("invalid lambda_grid range");
      cfg.lambda_grid.clear();
      for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        cfg.lambda_grid.push_back(lo * std::pow(hi / lo, t));
      }
    } else {
      bad("lambda_grid must be an array or a {min, max, count} object");
    }
  }

  const json rv = find(j, "return_values") ? *find(j, "return_values") : json::object();
  cfg.retval.factor = get_num(rv, "factor", 10.0);
  cfg.retval.replicates = get_int(rv, "replicates", 1000);
  if (!(cfg.retval.factor > 0.0)) bad("return_values.factor must be positive");
  if (cfg.retval.replicates < 1) bad("return_values.replicates must be >= 1");
  cfg.retval.workers = cfg.workers;

  const json metrics = find(j, "metrics") ? *find(j, "metrics") : json::object();
  cfg.kl_grid = get_int(metrics, "kl_grid", 1000);
  if (cfg.kl_grid < 16) bad("metrics.kl_grid must be >= 16");

  canonicalise(cfg);
  return cfg;
}

void canonicalise(RunConfig& cfg) {
  // Canonical echo with every default materialised; key order is sorted by
  // the JSON library, so equal configurations hash equally.
  json canon;
  canon["seed"] = cfg.seed;
  canon["workers"] = cfg.workers;
  if (cfg.truth) canon["case"] = case_to_json(*cfg.truth);
  canon["sample"] = {{"period", cfg.period}};
  canon["sample"]["n"] = cfg.fixed_n ? json(*cfg.fixed_n) : json(nullptr);
  canon["basis_xi"] = basis_to_json(cfg.basis_xi);
  canon["basis_nu"] = basis_to_json(cfg.basis_nu);
  canon["method"] = cfg.method;
  canon["mcmc"] = {{"n_iterations", cfg.chain.n_iterations},
                   {"burn_in", cfg.chain.burn_in},
                   {"step_xi", cfg.chain.step_xi},
                   {"step_nu", cfg.chain.step_nu},
                   {"kappa", cfg.chain.kappa},
                   {"prior_a", cfg.chain.prior_a},
                   {"prior_b", cfg.chain.prior_b},
                   {"adapt_target", cfg.chain.adapt_target}};
  canon["mle"] = {{"tol", cfg.fit_controls.tol},
                  {"max_iter", cfg.fit_controls.max_iter},
                  {"max_halvings", cfg.fit_controls.max_halvings},
                  {"k_folds", cfg.k_folds},
                  {"m_bootstrap", cfg.m_bootstrap},
                  {"lambda_grid", cfg.lambda_grid}};
  canon["return_values"] = {{"factor", cfg.retval.factor},
                            {"replicates", cfg.retval.replicates}};
  canon["metrics"] = {{"kl_grid", cfg.kl_grid}};
  cfg.canonical_json = canon.dump(2);
  cfg.config_hash = hash_hex(cfg.canonical_json);
}

}  // namespace dirgp
