#include "ldp/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ldp/catalogue.hpp"
#include "ldp/csv.hpp"
#include "ldp/cumulant.hpp"
#include "ldp/errors.hpp"
#include "ldp/metric.hpp"
#include "ldp/ratefn.hpp"
#include "ldp/simulate.hpp"

namespace ldp {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError("config: " + where + ": " + what);
}

const json& need(const json& j, const std::string& where,
                 const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, "missing required key '" + key + "'");
  return *it;
}

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "must be an object");
}

void check_keys(const json& j, const std::string& where,
                const std::vector<std::string>& allowed) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      fail(where, "unknown key '" + item.key() + "'");
  }
}

double get_num(const json& j, const std::string& where, const std::string& key,
               double lo, double hi, double fallback, bool required,
               bool integral = false) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) fail(where, "missing required key '" + key + "'");
    return fallback;
  }
  if (!it->is_number()) fail(where, "'" + key + "' must be a number");
  double v = it->get<double>();
  if (!std::isfinite(v) || v < lo || v > hi)
    fail(where, "'" + key + "' out of range [" + format_double(lo) + ", " +
                    format_double(hi) + "]");
  if (integral && v != std::floor(v))
    fail(where, "'" + key + "' must be an integer");
  return v;
}

std::int64_t get_count(const json& j, const std::string& where,
                       const std::string& key, std::int64_t fallback,
                       bool required, std::int64_t hi = 100000000) {
  double v = get_num(j, where, key, 1.0, static_cast<double>(hi),
                     static_cast<double>(fallback), required, true);
  return static_cast<std::int64_t>(v);
}

std::vector<double> get_list(const json& j, const std::string& where,
                             const std::string& key, double lo, double hi,
                             std::vector<double> fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_array() || it->empty())
    fail(where, "'" + key + "' must be a nonempty array");
  std::vector<double> out;
  for (const auto& e : *it) {
    if (!e.is_number()) fail(where, "'" + key + "' must hold numbers");
    double v = e.get<double>();
    if (!std::isfinite(v) || v < lo || v > hi)
      fail(where, "'" + key + "' entry out of range");
    out.push_back(v);
  }
  return out;
}

void check_grid(const json& j, const std::string& where, double T, double dt) {
  if (dt > T + 1e-15) fail(where, "'dt' exceeds 'T'");
  double k = T / dt;
  if (std::abs(k - std::llround(k)) > 1e-12 * std::max(1.0, k))
    fail(where, "'dt' must divide 'T'");
  (void)j;
}

PhiSpec parse_phi(const json& j, const std::string& where,
                  const std::string& base_dir) {
  expect_object(j, where);
  check_keys(j, where, {"file", "target", "slope"});
  PhiSpec spec;
  bool has_file = j.contains("file");
  bool has_target = j.contains("target");
  if (has_file == has_target)
    fail(where, "give exactly one of 'file' or 'target'");
  if (has_file) {
    if (!j["file"].is_string()) fail(where, "'file' must be a string");
    spec.kind = PhiSpec::Kind::kFile;
    spec.file = j["file"].get<std::string>();
    fs::path p(spec.file);
    if (p.is_relative()) p = fs::path(base_dir) / p;
    spec.resolved_file = p.string();
    if (!fs::exists(p)) fail(where, "file not found: " + spec.resolved_file);
    if (j.contains("slope")) fail(where, "'slope' only applies to target=line");
    return spec;
  }
  if (!j["target"].is_string()) fail(where, "'target' must be a string");
  std::string t = j["target"].get<std::string>();
  if (t == "fluid") {
    spec.kind = PhiSpec::Kind::kFluid;
  } else if (t == "poisson-floor") {
    spec.kind = PhiSpec::Kind::kPoissonFloor;
  } else if (t == "line") {
    spec.kind = PhiSpec::Kind::kLine;
    spec.slope = get_num(j, where, "slope", -1e6, 1e6, 0.0, true);
    return spec;
  } else {
    fail(where, "unknown target '" + t + "'");
  }
  if (j.contains("slope")) fail(where, "'slope' only applies to target=line");
  return spec;
}

json phi_to_json(const PhiSpec& s) {
  switch (s.kind) {
    case PhiSpec::Kind::kFile:
      return json{{"file", s.file}};
    case PhiSpec::Kind::kFluid:
      return json{{"target", "fluid"}};
    case PhiSpec::Kind::kPoissonFloor:
      return json{{"target", "poisson-floor"}};
    case PhiSpec::Kind::kLine:
      return json{{"target", "line"}, {"slope", s.slope}};
  }
  return json();
}

// Finite numbers pass through; non-finite values become null (JSON has no
// inf/nan) and callers surface a flag alongside.
json num_or_null(double v) {
  if (std::isfinite(v)) return json(v);
  return json();
}

json config_to_json(const ExperimentConfig& cfg) {
  json model{{"name", cfg.model_name}};
  if (!cfg.model_params.empty()) model["params"] = cfg.model_params;
  if (cfg.has_x0) model["x0"] = cfg.x0;
  json j{{"command", cfg.command}, {"model", model}, {"seed", cfg.seed}};
  if (cfg.command == "rate") {
    j["rate"] = json{{"phi", phi_to_json(cfg.rate.phi)},
                     {"T", cfg.rate.T},
                     {"dt", cfg.rate.dt}};
  } else if (cfg.command == "fluid") {
    j["fluid"] = json{{"T", cfg.fluid.T}, {"dt", cfg.fluid.dt}};
  } else if (cfg.command == "simulate") {
    j["simulate"] = json{{"n", cfg.simulate.n},
                         {"T", cfg.simulate.T},
                         {"dt", cfg.simulate.dt},
                         {"paths", cfg.simulate.paths}};
  } else if (cfg.command == "estimate") {
    const auto& b = cfg.estimate;
    j["estimate"] = json{{"phi", phi_to_json(b.phi)},
                         {"n", b.n},
                         {"T", b.T},
                         {"dt", b.dt},
                         {"M", b.M},
                         {"delta", b.delta},
                         {"gamma", b.gamma},
                         {"lambda_cap", b.lambda_cap},
                         {"method", b.method}};
  } else if (cfg.command == "diagnose") {
    const auto& b = cfg.diagnose;
    j["diagnose"] = json{{"phi", phi_to_json(b.phi)},
                         {"T", b.T},
                         {"dt", b.dt},
                         {"n_list", b.n_list},
                         {"M", b.M},
                         {"c_grid", b.c_grid},
                         {"window_grid", b.window_grid},
                         {"eta", b.eta},
                         {"delta", b.delta},
                         {"gamma", b.gamma},
                         {"levels", b.levels}};
  } else if (cfg.command == "ldp-check") {
    const auto& b = cfg.ldp_check;
    json blk{{"phi", phi_to_json(b.phi)}, {"T", b.T},
             {"dt", b.dt},                {"n_list", b.n_list},
             {"M", b.M},                  {"delta", b.delta},
             {"gamma", b.gamma},          {"lambda_cap", b.lambda_cap}};
    if (b.crude_n > 0.0) blk["crude_n"] = b.crude_n;
    if (b.has_tube_rate) blk["tube_rate"] = b.tube_rate;
    j["ldp-check"] = blk;
  }
  return j;
}

void write_json_file(const fs::path& file, const json& j) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot open for writing: " + file.string());
  out << j.dump(2) << '\n';
  if (!out) throw ValidationError("write failed: " + file.string());
}

std::string dg_str(Degeneracy d) {
  switch (d) {
    case Degeneracy::kNondegenerate: return "nondegenerate";
    case Degeneracy::kDegenerate: return "degenerate";
    case Degeneracy::kIndeterminate: return "indeterminate";
  }
  return "?";
}

std::string bk_str(BoundKind b) {
  switch (b) {
    case BoundKind::kLog: return "log";
    case BoundKind::kLinear: return "linear";
    case BoundKind::kMixedPlus: return "mixed-plus";
    case BoundKind::kMixedMinus: return "mixed-minus";
    case BoundKind::kUnsupported: return "unsupported";
  }
  return "?";
}

json report_to_json(const EstimateReport& r) {
  return json{{"method", r.method},
              {"n", r.n},
              {"M", r.M},
              {"dt", r.dt},
              {"delta", r.delta},
              {"gamma", r.gamma},
              {"p_hat", r.p_hat},
              {"std_err", r.std_err},
              {"log_rate", num_or_null(r.log_rate)},
              {"zero_hits", r.p_hat == 0.0},
              {"target_rate", num_or_null(r.target_rate)},
              {"hit_fraction", r.hit_fraction},
              {"clamp_count", r.clamp_count},
              {"invalid_paths", r.invalid_paths},
              {"gamma_below_delta", r.gamma_below_delta}};
}

SimConfig make_sim_config(double n, double T, double dt, std::uint64_t seed,
                          double gamma, double lambda_cap, int threads) {
  SimConfig sc;
  sc.n = n;
  sc.T = T;
  sc.dt = dt;
  sc.seed = seed;
  sc.tube_gamma = gamma;
  sc.lambda_cap = lambda_cap;
  sc.threads = threads;
  sc.steps();  // validate
  return sc;
}

void run_rate(const ExperimentConfig& cfg, const CoefficientModel& m,
              const fs::path& out) {
  const auto& b = cfg.rate;
  Path phi = resolve_phi(b.phi, m, b.T, b.dt);
  RateResult r = rate_I(m, phi, b.T, cfg.threads);
  json res{{"command", "rate"},
           {"model", cfg.model_name},
           {"T", b.T},
           {"dt", b.dt},
           {"value", num_or_null(r.value)},
           {"refined_value", num_or_null(r.refined_value)},
           {"finite", r.finite},
           {"ac_check", r.ac_check},
           {"boundary_steps", r.boundary_steps},
           {"infinite_cell", r.infinite_cell}};
  write_json_file(out / "results.json", res);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < r.step_times.size(); ++i)
    rows.push_back({r.step_times[i], r.per_step_H[i]});
  write_table_csv((out / "per_step_H.csv").string(), {"time", "H"}, rows);
  write_path_csv((out / "phi.csv").string(), phi);
}

void run_fluid(const ExperimentConfig& cfg, const CoefficientModel& m,
               const fs::path& out) {
  const auto& b = cfg.fluid;
  Path y = fluid_limit(m, b.T, b.dt);
  double sup = 0.0;
  for (double v : y.values()) sup = std::max(sup, std::abs(v));
  json res{{"command", "fluid"},       {"model", cfg.model_name},
           {"T", b.T},                 {"dt", b.dt},
           {"end_value", y.values().back()}, {"sup_abs", sup}};
  write_json_file(out / "results.json", res);
  write_path_csv((out / "fluid.csv").string(), y);
}

void run_simulate(const ExperimentConfig& cfg, const CoefficientModel& m,
                  const fs::path& out) {
  const auto& b = cfg.simulate;
  SimConfig sc = make_sim_config(b.n, b.T, b.dt, cfg.seed, 1.0, 50.0,
                                 cfg.threads);
  double end_sum = 0.0, end_min = kInf, end_max = -kInf;
  json files = json::array();
  for (std::int64_t i = 0; i < b.paths; ++i) {
    Path p = simulate_path(m, sc, static_cast<std::uint64_t>(i));
    std::string name = "path_" + std::to_string(i) + ".csv";
    write_path_csv((out / name).string(), p);
    files.push_back(name);
    double e = p.values().back();
    end_sum += e;
    end_min = std::min(end_min, e);
    end_max = std::max(end_max, e);
  }
  json res{{"command", "simulate"},
           {"model", cfg.model_name},
           {"n", b.n},
           {"T", b.T},
           {"dt", b.dt},
           {"paths", b.paths},
           {"end_mean", end_sum / static_cast<double>(b.paths)},
           {"end_min", end_min},
           {"end_max", end_max},
           {"files", files}};
  write_json_file(out / "results.json", res);
}

void run_estimate(const ExperimentConfig& cfg, const CoefficientModel& m,
                  const fs::path& out) {
  const auto& b = cfg.estimate;
  Path phi = resolve_phi(b.phi, m, b.T, b.dt);
  SimConfig sc = make_sim_config(b.n, b.T, b.dt, cfg.seed, b.gamma,
                                 b.lambda_cap, cfg.threads);
  Method method = b.method == "crude" ? Method::kCrude : Method::kTilted;
  EstimateReport rep = estimate_tube_probability(m, phi, b.delta, sc, b.M,
                                                 method);
  json res = report_to_json(rep);
  res["command"] = "estimate";
  res["model"] = cfg.model_name;
  write_json_file(out / "results.json", res);
  write_path_csv((out / "phi.csv").string(), phi);
}

void run_diagnose(const ExperimentConfig& cfg, const CoefficientModel& m,
                  const fs::path& out) {
  const auto& b = cfg.diagnose;
  Path phi = resolve_phi(b.phi, m, b.T, b.dt);
  DegeneracyReport deg = classify_nondegeneracy(m, phi, b.T, b.delta, b.gamma);
  ConditionIVReport civ = check_condition_IV(m, phi, b.T, b.levels);
  SimConfig base = make_sim_config(b.n_list.front(), b.T, b.dt, cfg.seed, 1.0,
                                   50.0, cfg.threads);
  TightnessTables tabs = tightness_diagnostics(m, b.n_list, b.T, b.c_grid,
                                               b.window_grid, b.eta, b.M,
                                               base);
  auto emit_rows = [](const std::vector<TightnessRow>& rows) {
    std::vector<std::vector<double>> out_rows;
    for (const auto& r : rows)
      out_rows.push_back({r.n, r.x, r.zero_count ? 0.0 : r.stat, r.se,
                          r.zero_count ? 1.0 : 0.0});
    return out_rows;
  };
  write_table_csv((out / "tightness_sup.csv").string(),
                  {"n", "c", "stat", "se", "zero_count"},
                  emit_rows(tabs.sup_rows));
  write_table_csv((out / "tightness_increment.csv").string(),
                  {"n", "window", "stat", "se", "zero_count"},
                  emit_rows(tabs.increment_rows));

  json res{{"command", "diagnose"},
           {"model", cfg.model_name},
           {"degeneracy",
            json{{"diffusion", dg_str(deg.diffusion)},
                 {"f_plus", dg_str(deg.f_plus)},
                 {"f_minus", dg_str(deg.f_minus)},
                 {"bound_kind", bk_str(deg.bound_kind)},
                 {"poisson_type", deg.poisson_type},
                 {"delta", deg.delta},
                 {"gamma", deg.gamma}}},
           {"condition_iv",
            json{{"n_grid", civ.n_grid},
                 {"values", civ.values},
                 {"top_ratio", civ.top_ratio},
                 {"pass", civ.pass}}},
           {"tightness_files",
            json::array({"tightness_sup.csv", "tightness_increment.csv"})},
           {"sup_trend_ok", tabs.sup_trend_ok},
           {"increment_trend_ok", tabs.increment_trend_ok}};
  write_json_file(out / "results.json", res);
}

void run_ldp_check(const ExperimentConfig& cfg, const CoefficientModel& m,
                   const fs::path& out) {
  const auto& b = cfg.ldp_check;
  Path phi = resolve_phi(b.phi, m, b.T, b.dt);
  RateResult base_rate = rate_I(m, phi, b.T, cfg.threads);
  // Preferred target is the analytic tube infimum; without it the action of
  // the center path is used and flagged as a proxy (it upper-bounds the
  // infimum over the tube).
  double target = b.has_tube_rate ? b.tube_rate : base_rate.value;
  bool proxy = !b.has_tube_rate;

  json rows = json::array();
  std::vector<std::vector<double>> csv_rows;
  std::vector<double> ns, logps;
  double prev_gap = kInf;
  bool gaps_monotone = true;
  EstimateReport tilted_at_crude;
  bool have_tilted_at_crude = false;
  for (double n : b.n_list) {
    SimConfig sc = make_sim_config(n, b.T, b.dt, cfg.seed, b.gamma,
                                   b.lambda_cap, cfg.threads);
    EstimateReport rep = estimate_tube_probability(m, phi, b.delta, sc, b.M,
                                                   Method::kTilted);
    double gap = std::abs(-rep.log_rate - target);
    json row = report_to_json(rep);
    row["neg_log_rate"] = num_or_null(-rep.log_rate);
    row["target"] = target;
    row["gap"] = num_or_null(gap);
    rows.push_back(row);
    csv_rows.push_back({n, rep.p_hat, rep.log_rate, -rep.log_rate, target,
                        gap});
    if (rep.p_hat > 0.0) {
      ns.push_back(n);
      logps.push_back(std::log(rep.p_hat));
      if (std::isfinite(prev_gap) && gap > prev_gap + 1e-12)
        gaps_monotone = false;
      prev_gap = gap;
    }
    if (b.crude_n > 0.0 && n == b.crude_n) {
      tilted_at_crude = rep;
      have_tilted_at_crude = true;
    }
  }
  write_table_csv((out / "ldp_table.csv").string(),
                  {"n", "p_hat", "log_rate", "neg_log_rate", "target", "gap"},
                  csv_rows);

  // Least-squares slope of log p-hat against n; the LDP predicts -target.
  json regression;
  if (ns.size() >= 2) {
    double nbar = 0.0, lbar = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      nbar += ns[i];
      lbar += logps[i];
    }
    nbar /= static_cast<double>(ns.size());
    lbar /= static_cast<double>(ns.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      sxy += (ns[i] - nbar) * (logps[i] - lbar);
      sxx += (ns[i] - nbar) * (ns[i] - nbar);
    }
    double slope = sxy / sxx;
    regression = json{{"slope", slope},
                      {"slope_gap", std::abs(slope + target)},
                      {"points", ns.size()}};
  }

  json crude_block;
  if (b.crude_n > 0.0) {
    SimConfig sc = make_sim_config(b.crude_n, b.T, b.dt, cfg.seed, b.gamma,
                                   b.lambda_cap, cfg.threads);
    EstimateReport crude = estimate_tube_probability(m, phi, b.delta, sc, b.M,
                                                     Method::kCrude);
    if (!have_tilted_at_crude) {
      tilted_at_crude = estimate_tube_probability(m, phi, b.delta, sc, b.M,
                                                  Method::kTilted);
    }
    double comb = std::sqrt(crude.std_err * crude.std_err +
                            tilted_at_crude.std_err * tilted_at_crude.std_err);
    crude_block = json{
        {"crude", report_to_json(crude)},
        {"tilted", report_to_json(tilted_at_crude)},
        {"diff", crude.p_hat - tilted_at_crude.p_hat},
        {"combined_std_err", comb},
        {"agree_3se",
         std::abs(crude.p_hat - tilted_at_crude.p_hat) <= 3.0 * comb}};
  }

  json res{{"command", "ldp-check"},
           {"model", cfg.model_name},
           {"target_rate", target},
           {"target_is_proxy", proxy},
           {"center_rate", num_or_null(base_rate.value)},
           {"rows", rows},
           {"gap_nonincreasing", gaps_monotone},
           {"regression", regression},
           {"crude_check", crude_block}};
  write_json_file(out / "results.json", res);
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: not valid JSON: ") + e.what());
  }
  expect_object(j, "top level");

  ExperimentConfig cfg;
  const json& cj = need(j, "top level", "command");
  if (!cj.is_string()) fail("top level", "'command' must be a string");
  cfg.command = cj.get<std::string>();
  const std::vector<std::string> commands{"rate",     "fluid",    "simulate",
                                          "estimate", "diagnose", "ldp-check"};
  if (std::find(commands.begin(), commands.end(), cfg.command) ==
      commands.end())
    fail("top level", "unknown command '" + cfg.command + "'");
  check_keys(j, "top level",
             {"command", "model", "seed", "threads", cfg.command});

  const json& mj = need(j, "top level", "model");
  expect_object(mj, "model");
  check_keys(mj, "model", {"name", "params", "x0"});
  const json& nj = need(mj, "model", "name");
  if (!nj.is_string()) fail("model", "'name' must be a string");
  cfg.model_name = nj.get<std::string>();
  if (mj.contains("params")) {
    expect_object(mj["params"], "model.params");
    for (const auto& item : mj["params"].items()) {
      if (!item.value().is_number())
        fail("model.params", "'" + item.key() + "' must be a number");
      double v = item.value().get<double>();
      if (!std::isfinite(v))
        fail("model.params", "'" + item.key() + "' must be finite");
      cfg.model_params[item.key()] = v;
    }
  }
  if (mj.contains("x0")) {
    cfg.has_x0 = true;
    cfg.x0 = get_num(mj, "model", "x0", -1e9, 1e9, 0.0, true);
  }

  if (j.contains("seed")) {
    const json& sj = j["seed"];
    if (!sj.is_number_integer() ||
        (sj.is_number_integer() && !sj.is_number_unsigned() &&
         sj.get<std::int64_t>() < 0))
      fail("top level", "'seed' must be a nonnegative integer");
    cfg.seed = sj.get<std::uint64_t>();
  }
  cfg.threads = static_cast<int>(
      get_num(j, "top level", "threads", 0.0, 4096.0, 0.0, false, true));

  const json& bj = need(j, "top level", cfg.command);
  expect_object(bj, cfg.command);
  const std::string& w = cfg.command;

  if (cfg.command == "rate") {
    check_keys(bj, w, {"phi", "T", "dt"});
    cfg.rate.T = get_num(bj, w, "T", 1e-9, 1e6, 1.0, true);
    cfg.rate.dt = get_num(bj, w, "dt", 1e-9, cfg.rate.T, 1e-3, false);
    check_grid(bj, w, cfg.rate.T, cfg.rate.dt);
    cfg.rate.phi = parse_phi(need(bj, w, "phi"), w + ".phi", base_dir);
  } else if (cfg.command == "fluid") {
    check_keys(bj, w, {"T", "dt"});
    cfg.fluid.T = get_num(bj, w, "T", 1e-9, 1e6, 1.0, true);
    cfg.fluid.dt = get_num(bj, w, "dt", 1e-9, cfg.fluid.T, 1e-3, false);
    check_grid(bj, w, cfg.fluid.T, cfg.fluid.dt);
  } else if (cfg.command == "simulate") {
    check_keys(bj, w, {"n", "T", "dt", "paths"});
    cfg.simulate.n = get_num(bj, w, "n", 1.0, 1e9, 1.0, true, true);
    cfg.simulate.T = get_num(bj, w, "T", 1e-9, 1e6, 1.0, true);
    cfg.simulate.dt = get_num(bj, w, "dt", 1e-9, cfg.simulate.T, 1e-2, false);
    check_grid(bj, w, cfg.simulate.T, cfg.simulate.dt);
    cfg.simulate.paths = get_count(bj, w, "paths", 1, false, 100000);
  } else if (cfg.command == "estimate") {
    check_keys(bj, w,
               {"phi", "n", "T", "dt", "M", "delta", "gamma", "lambda_cap",
                "method"});
    auto& b = cfg.estimate;
    b.n = get_num(bj, w, "n", 1.0, 1e9, 1.0, true, true);
    b.T = get_num(bj, w, "T", 1e-9, 1e6, 1.0, true);
    b.dt = get_num(bj, w, "dt", 1e-9, b.T, 1e-2, false);
    check_grid(bj, w, b.T, b.dt);
    b.M = get_count(bj, w, "M", 1000, true);
    b.delta = get_num(bj, w, "delta", 1e-12, 1e9, 0.25, true);
    b.gamma = get_num(bj, w, "gamma", 1e-12, 1e9, 2.0 * b.delta, false);
    b.lambda_cap = get_num(bj, w, "lambda_cap", 1e-6, 1e6, 50.0, false);
    if (bj.contains("method")) {
      if (!bj["method"].is_string())
        fail(w, "'method' must be \"crude\" or \"tilted\"");
      b.method = bj["method"].get<std::string>();
      if (b.method != "crude" && b.method != "tilted")
        fail(w, "'method' must be \"crude\" or \"tilted\"");
    }
    b.phi = parse_phi(need(bj, w, "phi"), w + ".phi", base_dir);
  } else if (cfg.command == "diagnose") {
    check_keys(bj, w,
               {"phi", "T", "dt", "n_list", "M", "c_grid", "window_grid",
                "eta", "delta", "gamma", "levels"});
    auto& b = cfg.diagnose;
    b.T = get_num(bj, w, "T", 1e-9, 1e6, 1.0, false);
    b.dt = get_num(bj, w, "dt", 1e-9, b.T, 1e-2, false);
    check_grid(bj, w, b.T, b.dt);
    b.n_list = get_list(bj, w, "n_list", 1.0, 1e9, b.n_list);
    b.M = get_count(bj, w, "M", 200, false);
    b.c_grid = get_list(bj, w, "c_grid", 1e-12, 1e9, b.c_grid);
    b.window_grid = get_list(bj, w, "window_grid", 1e-12, 1e6, b.window_grid);
    b.eta = get_num(bj, w, "eta", 1e-12, 1e9, 0.5, false);
    b.delta = get_num(bj, w, "delta", 1e-12, 1e9, 0.25, false);
    b.gamma = get_num(bj, w, "gamma", 0.0, 1e9, 0.05, false);
    b.levels = get_list(bj, w, "levels", 1e-12, 1e12, b.levels);
    if (bj.contains("phi"))
      b.phi = parse_phi(bj["phi"], w + ".phi", base_dir);
  } else if (cfg.command == "ldp-check") {
    check_keys(bj, w,
               {"phi", "T", "dt", "n_list", "M", "delta", "gamma",
                "lambda_cap", "crude_n", "tube_rate"});
    auto& b = cfg.ldp_check;
    b.T = get_num(bj, w, "T", 1e-9, 1e6, 1.0, true);
    b.dt = get_num(bj, w, "dt", 1e-9, b.T, 1e-2, false);
    check_grid(bj, w, b.T, b.dt);
    b.n_list = get_list(bj, w, "n_list", 1.0, 1e9, b.n_list);
    b.M = get_count(bj, w, "M", 1000, true);
    b.delta = get_num(bj, w, "delta", 1e-12, 1e9, 0.25, true);
    b.gamma = get_num(bj, w, "gamma", 1e-12, 1e9, 2.0 * b.delta, false);
    b.lambda_cap = get_num(bj, w, "lambda_cap", 1e-6, 1e6, 50.0, false);
    b.crude_n = get_num(bj, w, "crude_n", 1.0, 1e9, 0.0, false, true);
    if (bj.contains("tube_rate")) {
      b.has_tube_rate = true;
      b.tube_rate = get_num(bj, w, "tube_rate", 0.0, 1e12, 0.0, true);
    }
    b.phi = parse_phi(need(bj, w, "phi"), w + ".phi", base_dir);
  }

  build_config_model(cfg);  // rejects unknown model names / params early
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open config: " + file);
  std::ostringstream ss;
  ss << in.rdbuf();
  fs::path dir = fs::path(file).parent_path();
  return parse_experiment_config(ss.str(),
                                 dir.empty() ? "." : dir.string());
}

CoefficientModel build_config_model(const ExperimentConfig& cfg) {
  double x0 = cfg.x0;
  if (!cfg.has_x0)
    x0 = (cfg.model_name == "ou" || cfg.model_name == "bm") ? 1.0 : 0.0;
  return make_catalogue_model(cfg.model_name, cfg.model_params, x0);
}

Path resolve_phi(const PhiSpec& spec, const CoefficientModel& m, double T,
                 double dt) {
  switch (spec.kind) {
    case PhiSpec::Kind::kFile: {
      Path p = load_path_csv(spec.resolved_file, Interp::kLinear);
      if (p.end_time() + 1e-12 < T)
        throw ValidationError("phi file ends at " +
                              format_double(p.end_time()) +
                              " before the horizon " + format_double(T));
      return p;
    }
    case PhiSpec::Kind::kFluid:
      return fluid_limit(m, T, dt);
    case PhiSpec::Kind::kPoissonFloor:
      return poisson_floor_path(m, T, dt);
    case PhiSpec::Kind::kLine: {
      auto steps = static_cast<std::size_t>(std::llround(T / dt));
      std::vector<double> ts(steps + 1), vs(steps + 1);
      for (std::size_t i = 0; i <= steps; ++i) {
        ts[i] = i == steps ? T : static_cast<double>(i) * dt;
        vs[i] = m.x0 + spec.slope * ts[i];
      }
      return Path(std::move(ts), std::move(vs), Interp::kLinear);
    }
  }
  throw ValidationError("unresolvable phi spec");
}

void run_experiment(const ExperimentConfig& cfg, const std::string& outdir) {
  CoefficientModel m = build_config_model(cfg);
  fs::path out(outdir);
  fs::create_directories(out);

  json config = config_to_json(cfg);
  std::string canonical = config.dump(2);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));
  json manifest{{"version", kLdpVersion},
                {"seed", cfg.seed},
                {"config_hash", hex},
                {"config", config}};
  write_json_file(out / "manifest.json", manifest);

  if (cfg.command == "rate") {
    run_rate(cfg, m, out);
  } else if (cfg.command == "fluid") {
    run_fluid(cfg, m, out);
  } else if (cfg.command == "simulate") {
    run_simulate(cfg, m, out);
  } else if (cfg.command == "estimate") {
    run_estimate(cfg, m, out);
  } else if (cfg.command == "diagnose") {
    run_diagnose(cfg, m, out);
  } else if (cfg.command == "ldp-check") {
    run_ldp_check(cfg, m, out);
  } else {
    throw ValidationError("unknown command: " + cfg.command);
  }
}

}  // namespace ldp
