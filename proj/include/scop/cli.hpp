#pragma once

/**
 * @file cli.hpp
 * @brief Run configuration (JSON in) and experiment drivers (CSV out) for the scop tool.
 *
 * Exit codes: 0 success, 2 configuration error, 3 numerical failure,
 * 4 verification tolerance exceeded. Column layouts are listed in docs/formats.md.
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "scop/error.hpp"
#include "scop/evolution.hpp"
#include "scop/ladder.hpp"
#include "scop/moment_flow.hpp"
#include "scop/orthopoly.hpp"
#include "scop/weight.hpp"

namespace scop::cli {

enum exit_code : int { exit_ok = 0, exit_config = 2, exit_numerical = 3, exit_verification = 4 };

struct WeightSpec {
  std::vector<double> alpha;
  std::vector<double> pieces;
  std::vector<std::vector<double>> trajectory;  ///< polynomial coefficients in t, one list per endpoint
  double reference_time = 0.0;
};

struct RunConfig {
  WeightSpec weight;
  int n = 5;
  int npts = default_quadrature_points;
  double t0 = 0.0;
  double t1 = 1.0;
  double rtol = 1e-9;
  double atol = 1e-12;
  int samples = 20;
  bool reproject = false;
  double verify_rtol = 1e-6;
  bool selfcheck = false;

  GeneralizedJacobiWeight make() const {
    return make_weight(weight.alpha, weight.pieces, EndpointTrajectory(weight.trajectory, weight.reference_time));
  }
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"coeffs", "ladder", "evolve", "moments", "verify", "selftest"};
  return names;
}

/// Shortest decimal string that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

using nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& path, const std::string& reason) {
  throw error(errc::config_error, path + ": " + reason);
}

inline double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) config_fail(path, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_fail(path, "must be finite");
  return v;
}

inline int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) config_fail(path, "must be an integer");
  return j.get<int>();
}

inline std::vector<double> get_list(const json& j, const std::string& path) {
  if (!j.is_array()) config_fail(path, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline void check_keys(const json& j, const std::string& path, const std::set<std::string>& known, bool strict,
                       std::vector<std::string>& warnings) {
  if (!j.is_object()) config_fail(path.empty() ? "<root>" : path, "must be an object");
  for (const auto& [key, value] : j.items()) {
    if (known.count(key)) continue;
    const std::string where = path.empty() ? key : path + "." + key;
    if (strict) config_fail(where, "unknown key");
    warnings.push_back("unknown key " + where + " ignored");
  }
}

}  // namespace detail

/// Checks every field independently of the command.
inline void validate(const RunConfig& c) {
  using detail::config_fail;
  const std::size_t m = c.weight.alpha.size();
  if (m < 2) config_fail("weight.alpha", "needs at least two endpoints");
  if (c.weight.pieces.size() != m - 1) config_fail("weight.pieces", "pieces must have length m-1");
  if (c.weight.trajectory.size() != m) config_fail("weight.trajectory", "trajectory must have length m");
  for (std::size_t k = 0; k < m; ++k) {
    if (c.weight.trajectory[k].empty())
      config_fail("weight.trajectory[" + std::to_string(k) + "]", "needs at least one coefficient");
  }
  if (c.n < 0) config_fail("n", "must be non-negative");
  if (c.npts < 1) config_fail("quad.npts", "must be positive");
  if (c.samples < 2) config_fail("evolve.samples", "must be at least 2");
  for (auto [v, name] : {std::pair{c.t0, "evolve.t0"}, {c.t1, "evolve.t1"}, {c.rtol, "evolve.rtol"},
                         {c.atol, "evolve.atol"}, {c.verify_rtol, "verify.rtol"}}) {
    if (!std::isfinite(v)) config_fail(name, "must be finite");
  }
  if (!(c.rtol > 0.0)) config_fail("evolve.rtol", "must be positive");
  if (!(c.atol >= 0.0)) config_fail("evolve.atol", "must be non-negative");
  if (!(c.verify_rtol > 0.0)) config_fail("verify.rtol", "must be positive");
  try {
    c.make();
  } catch (const error& e) {
    config_fail("weight", e.what());
  }
}

/// Extra rules for one command (the time span matters only for flows).
inline void validate_for(std::string_view command, const RunConfig& c) {
  validate(c);
  const bool flow = command == "evolve" || command == "verify" || command == "moments";
  if (flow && c.t1 == c.t0) detail::config_fail("evolve.t1", "must differ from evolve.t0");
  if ((command == "evolve" || command == "verify") && c.n < 1) detail::config_fail("n", "evolution needs n >= 1");
}

/**
 * @brief Parse and validate a JSON configuration.
 *
 * Unknown keys are rejected in strict mode and appended to `warnings` otherwise.
 */
inline RunConfig parse_config(std::string_view text, bool strict = false, std::vector<std::string>* warnings = nullptr) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    detail::config_fail("<document>", std::string("malformed JSON: ") + e.what());
  }
  std::vector<std::string> local;
  auto& warn = warnings ? *warnings : local;

  detail::check_keys(root, "", {"weight", "n", "quad", "evolve", "verify"}, strict, warn);
  RunConfig c;
  if (!root.contains("weight")) detail::config_fail("weight", "required");
  const auto& wj = root["weight"];
  detail::check_keys(wj, "weight", {"alpha", "pieces", "trajectory", "reference_time"}, strict, warn);
  for (const char* key : {"alpha", "pieces", "trajectory"}) {
    if (!wj.contains(key)) detail::config_fail(std::string("weight.") + key, "required");
  }
  c.weight.alpha = detail::get_list(wj["alpha"], "weight.alpha");
  c.weight.pieces = detail::get_list(wj["pieces"], "weight.pieces");
  const auto& tj = wj["trajectory"];
  if (!tj.is_array()) detail::config_fail("weight.trajectory", "must be an array");
  for (std::size_t k = 0; k < tj.size(); ++k) {
    const std::string path = "weight.trajectory[" + std::to_string(k) + "]";
    if (tj[k].is_number()) c.weight.trajectory.push_back({detail::get_number(tj[k], path)});
    else c.weight.trajectory.push_back(detail::get_list(tj[k], path));
  }
  if (wj.contains("reference_time"))
    c.weight.reference_time = detail::get_number(wj["reference_time"], "weight.reference_time");

  if (root.contains("n")) c.n = detail::get_int(root["n"], "n");
  if (root.contains("quad")) {
    const auto& q = root["quad"];
    detail::check_keys(q, "quad", {"npts"}, strict, warn);
    if (q.contains("npts")) c.npts = detail::get_int(q["npts"], "quad.npts");
  }
  if (root.contains("evolve")) {
    const auto& e = root["evolve"];
    detail::check_keys(e, "evolve", {"t0", "t1", "rtol", "atol", "samples", "reproject"}, strict, warn);
    if (e.contains("t0")) c.t0 = detail::get_number(e["t0"], "evolve.t0");
    if (e.contains("t1")) c.t1 = detail::get_number(e["t1"], "evolve.t1");
    if (e.contains("rtol")) c.rtol = detail::get_number(e["rtol"], "evolve.rtol");
    if (e.contains("atol")) c.atol = detail::get_number(e["atol"], "evolve.atol");
    if (e.contains("samples")) c.samples = detail::get_int(e["samples"], "evolve.samples");
    if (e.contains("reproject")) {
      if (!e["reproject"].is_boolean()) detail::config_fail("evolve.reproject", "must be a boolean");
      c.reproject = e["reproject"].get<bool>();
    }
  }
  if (root.contains("verify")) {
    const auto& v = root["verify"];
    detail::check_keys(v, "verify", {"rtol"}, strict, warn);
    if (v.contains("rtol")) c.verify_rtol = detail::get_number(v["rtol"], "verify.rtol");
  }
  validate(c);
  return c;
}

/// Fully resolved configuration in the input schema.
inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["weight"] = {{"alpha", c.weight.alpha},
                 {"pieces", c.weight.pieces},
                 {"trajectory", c.weight.trajectory},
                 {"reference_time", c.weight.reference_time}};
  j["n"] = c.n;
  j["quad"] = {{"npts", c.npts}};
  j["evolve"] = {{"t0", c.t0}, {"t1", c.t1}, {"rtol", c.rtol}, {"atol", c.atol}, {"samples", c.samples},
                 {"reproject", c.reproject}};
  j["verify"] = {{"rtol", c.verify_rtol}};
  return j;
}

/// Command-line overrides; a set field beats the configuration value.
struct Overrides {
  std::optional<int> n;
  std::optional<double> t0;
  std::optional<double> t1;
  std::optional<double> rtol;
  bool selfcheck = false;
};

inline RunConfig apply_overrides(RunConfig c, const Overrides& o) {
  if (o.n) c.n = *o.n;
  if (o.t0) c.t0 = *o.t0;
  if (o.t1) c.t1 = *o.t1;
  if (o.rtol) c.rtol = *o.rtol;
  c.selfcheck = c.selfcheck || o.selfcheck;
  return c;
}

namespace detail {

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void comment(const std::string& text) { os_ << "# " << text << '\n'; }

  void header(const std::vector<std::string>& cols) { row_strings(cols); }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << format_number(values[i]);
    os_ << '\n';
  }

  void row_strings(const std::vector<std::string>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << values[i];
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

inline std::vector<std::string> indexed(const std::string& stem, std::size_t m) {
  std::vector<std::string> out;
  for (std::size_t j = 1; j <= m; ++j) out.push_back(stem + "_" + std::to_string(j));
  return out;
}

inline void append(std::vector<std::string>& a, const std::vector<std::string>& b) { a.insert(a.end(), b.begin(), b.end()); }
inline void append(std::vector<double>& a, const std::vector<double>& b) { a.insert(a.end(), b.begin(), b.end()); }

// Largest relative difference of the recurrence table between npts and 2*npts.
inline double quadrature_selfcheck(const GeneralizedJacobiWeight& w, double t, int N, int npts) {
  const auto lo = stieltjes_procedure(w, t, N, npts);
  const auto hi = stieltjes_procedure(w, t, N, 2 * npts);
  const auto x = w.trajectory().positions(t);
  const double half = 0.5 * (x.back() - x.front());
  double worst = 0.0;
  for (int k = 1; k <= N; ++k) worst = std::max(worst, std::abs(lo.a[k] - hi.a[k]) / hi.a[k]);
  for (int k = 0; k < N; ++k) worst = std::max(worst, std::abs(lo.b[k] - hi.b[k]) / std::max(std::abs(hi.b[k]), half));
  return worst;
}

inline int run_coeffs(const RunConfig& c, const GeneralizedJacobiWeight& w, CsvWriter& csv) {
  const auto tab = stieltjes_procedure(w, c.t0, c.n + 1, c.npts);
  csv.header({"n", "a_n", "b_n", "gamma_n"});
  for (int k = 0; k <= c.n; ++k) csv.row({static_cast<double>(k), tab.a[k], tab.b[k], tab.gamma[k]});
  return exit_ok;
}

inline int run_ladder(const RunConfig& c, const GeneralizedJacobiWeight& w, CsvWriter& csv) {
  const auto tab = stieltjes_procedure(w, c.t0, c.n + 1, c.npts);
  const auto nd = node_data(w, c.t0);
  csv.header({"n", "j", "x_j", "Wprime_j", "Theta_n", "Omega_n", "Theta_prev", "res_theta_sum", "res_xtheta_sum",
              "res_omega_sum", "res_differential", "res_wronskian"});
  for (int k = 0; k <= c.n; ++k) {
    const auto v = ladder_init(w, tab, c.t0, k, c.npts);
    const auto r = ladder_checks(w, tab, v, c.t0, c.npts);
    for (std::size_t j = 0; j < w.m(); ++j) {
      csv.row({static_cast<double>(k), static_cast<double>(j + 1), nd.x[j], nd.wprime[j], v.theta[j], v.omega[j],
               v.theta_prev[j], r.theta_sum, r.xtheta_sum, r.omega_sum, r.differential, r.wronskian});
    }
  }
  return exit_ok;
}

inline EvolveOptions evolve_options(const RunConfig& c) {
  EvolveOptions o;
  o.rtol = c.rtol;
  o.atol = c.atol;
  o.samples = c.samples;
  o.npts = c.npts;
  o.reproject = c.reproject;
  return o;
}

inline int run_evolve(const RunConfig& c, const GeneralizedJacobiWeight& w, CsvWriter& csv) {
  const auto rep = evolve(w, c.n, c.t0, c.t1, evolve_options(c));
  const std::size_t m = w.m();
  std::vector<std::string> cols{"t", "a", "b", "gamma"};
  append(cols, indexed("theta", m));
  append(cols, indexed("theta_prev", m));
  append(cols, indexed("omega", m));
  append(cols, {"drift_theta_sum", "drift_theta_prev_sum", "drift_xtheta_sum", "drift_xtheta_prev_sum",
                "drift_omega_sum"});
  csv.comment("steps_accepted=" + std::to_string(rep.stats.accepted) +
              " steps_rejected=" + std::to_string(rep.stats.rejected) +
              " max_step_drift=" + format_number(rep.max_step_drift));
  csv.header(cols);
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const auto& s = rep.samples[i];
    const auto& d = rep.drift[i];
    std::vector<double> row{s.t, s.a, s.b, s.gamma};
    append(row, s.theta);
    append(row, s.theta_prev);
    append(row, s.omega);
    append(row, {d.theta, d.theta_prev, d.xtheta, d.xtheta_prev, d.omega});
    csv.row(row);
  }
  return exit_ok;
}

inline int run_moments(const RunConfig& c, const GeneralizedJacobiWeight& w, CsvWriter& csv) {
  MomentFlowOptions o;
  o.rtol = c.rtol;
  o.atol = c.atol;
  o.samples = c.samples;
  o.npts = c.npts;
  const auto rep = evolve_moments(w, c.n, c.t0, c.t1, o);
  std::vector<std::string> cols{"t"};
  append(cols, indexed("nu", w.m()));
  append(cols, {"mu_n", "gap"});
  csv.header(cols);
  for (const auto& s : rep.samples) {
    const auto id = check_mu_identity(w, c.n, s.t, c.npts);
    std::vector<double> row{s.t};
    append(row, s.nu);
    append(row, {id.mu_n, id.gap});
    csv.row(row);
  }
  return exit_ok;
}

inline int run_verify(const RunConfig& c, const GeneralizedJacobiWeight& w, CsvWriter& csv) {
  const auto rep = evolve(w, c.n, c.t0, c.t1, evolve_options(c));
  const auto rows = verify_against_direct(w, c.n, rep, c.npts);
  const std::size_t m = w.m();
  std::vector<std::string> cols{"t", "dev_a", "dev_b", "dev_gamma"};
  append(cols, indexed("dev_theta", m));
  append(cols, indexed("dev_theta_prev", m));
  append(cols, indexed("dev_omega", m));
  cols.push_back("max_dev");
  csv.header(cols);
  double worst = 0.0;
  for (const auto& r : rows) {
    std::vector<double> row{r.t, r.a, r.b, r.gamma};
    append(row, r.theta);
    append(row, r.theta_prev);
    append(row, r.omega);
    row.push_back(r.max());
    csv.row(row);
    worst = std::max(worst, r.max());
  }
  csv.comment("max_dev=" + format_number(worst) + " tolerance=" + format_number(c.verify_rtol));
  return worst <= c.verify_rtol ? exit_ok : exit_verification;
}

struct SelftestRow {
  std::string name;
  double value;
  double tolerance;
};

inline int run_selftest(const RunConfig& c, const GeneralizedJacobiWeight& w, CsvWriter& csv) {
  std::vector<SelftestRow> rows;
  const double t = c.t0;
  const int n = std::max(c.n, 1);
  const auto tab = stieltjes_procedure(w, t, n + 1, c.npts);

  {
    const auto measure = discretize(w, t, 2 * c.npts);
    double worst = 0.0;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= i; ++j) {
        const double ip = measure.integrate(
            [&](double u) { return eval_polynomial(tab, i, u).p * eval_polynomial(tab, j, u).p; });
        worst = std::max(worst, std::abs(ip - (i == j ? 1.0 : 0.0)));
      }
    rows.push_back({"orthonormality", worst, 1e-9});
  }
  {
    double worst = 0.0;
    for (int k = 1; k <= n; ++k) worst = std::max(worst, std::abs(tab.gamma[k - 1] - tab.a[k] * tab.gamma[k]) / tab.gamma[k - 1]);
    rows.push_back({"gamma_ratio", worst, 1e-12});
  }
  rows.push_back({"quadrature_doubling", quadrature_selfcheck(w, t, n + 1, c.npts), c.verify_rtol});

  if (w.all_exponents_positive()) {
    double sums = 0.0, diff = 0.0, wr = 0.0, ladder = 0.0;
    const auto nd = node_data(w, t);
    auto stepped = ladder_init(w, tab, t, 0, c.npts);
    for (int k = 0; k <= n; ++k) {
      const auto v = ladder_init(w, tab, t, k, c.npts);
      const auto r = ladder_checks(w, tab, v, t, c.npts);
      sums = std::max({sums, r.theta_sum, r.xtheta_sum, r.omega_sum});
      diff = std::max(diff, r.differential);
      wr = std::max(wr, r.wronskian);
      if (k > 0) {
        stepped = ladder_step(stepped, nd.x, tab.a[k - 1], tab.a[k], tab.b[k - 1]);
        double sc = 0.0;
        for (std::size_t j = 0; j < w.m(); ++j) sc = std::max({sc, std::abs(v.theta[j]), std::abs(v.omega[j])});
        for (std::size_t j = 0; j < w.m(); ++j)
          ladder = std::max({ladder, std::abs(stepped.theta[j] - v.theta[j]) / sc,
                             std::abs(stepped.omega[j] - v.omega[j]) / sc});
      }
    }
    rows.push_back({"residue_sums", sums, 1e-8});
    rows.push_back({"differential_relation", diff, 1e-7});
    rows.push_back({"wronskian", wr, 1e-8});
    rows.push_back({"ladder_step_vs_init", ladder, 1e-6});

    const auto rhs = evolution_rhs(direct_state(w, n, t, c.npts), nd).pack();
    std::vector<double> errs;
    for (double h : {1e-3, 5e-4}) {
      const auto p = direct_state(w, n, t + h, c.npts).pack();
      const auto q = direct_state(w, n, t - h, c.npts).pack();
      double e = 0.0;
      for (std::size_t i = 0; i < rhs.size(); ++i) e = std::max(e, std::abs((p[i] - q[i]) / (2 * h) - rhs[i]));
      errs.push_back(e);
    }
    // fixed endpoints make both differences vanish; report order 2 then
    const double order = errs[1] > 0.0 ? std::log2(errs[0] / errs[1]) : 2.0;
    rows.push_back({"rhs_fd_order", order, 1.9});
  }

  csv.header({"check", "value", "tolerance", "pass"});
  bool ok = true;
  for (const auto& r : rows) {
    const bool pass = r.name == "rhs_fd_order" ? r.value >= r.tolerance : r.value <= r.tolerance;
    ok = ok && pass;
    csv.row_strings({r.name, format_number(r.value), format_number(r.tolerance), pass ? "1" : "0"});
  }
  return ok ? exit_ok : exit_verification;
}

}  // namespace detail

/**
 * @brief Run one command and write CSV to `out`; diagnostics go to `err`.
 *
 * Library failures are caught and mapped to exit codes.
 */
inline int run_command(std::string_view command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
    err << "error: ConfigError: unknown command '" << command << "'\n";
    return exit_config;
  }
  try {
    validate_for(command, cfg);
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  }

  detail::CsvWriter csv(out);
  csv.comment("command: " + std::string(command));
  csv.comment("config: " + to_json(cfg).dump());
  try {
    const auto w = cfg.make();
    if (cfg.selfcheck) {
      const double diff = detail::quadrature_selfcheck(w, cfg.t0, cfg.n + 1, cfg.npts);
      csv.comment("selfcheck npts=" + std::to_string(cfg.npts) + " vs " + std::to_string(2 * cfg.npts) +
                  " max_rel_diff=" + format_number(diff));
      if (diff > cfg.verify_rtol) {
        err << "error: quadrature self-check failed: npts vs 2*npts differ by " << format_number(diff) << '\n';
        return exit_verification;
      }
    }
    if (command == "coeffs") return detail::run_coeffs(cfg, w, csv);
    if (command == "ladder") return detail::run_ladder(cfg, w, csv);
    if (command == "evolve") return detail::run_evolve(cfg, w, csv);
    if (command == "moments") return detail::run_moments(cfg, w, csv);
    if (command == "verify") return detail::run_verify(cfg, w, csv);
    return detail::run_selftest(cfg, w, csv);
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == errc::config_error ? exit_config : exit_numerical;
  }
}

}  // namespace scop::cli
