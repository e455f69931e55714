#include "rwrc/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "rwrc/homogenise.hpp"
#include "rwrc/json_io.hpp"
#include "rwrc/rng.hpp"
#include "rwrc/scaling.hpp"
#include "rwrc/spectrum.hpp"
#include "rwrc/varprob.hpp"
#include "rwrc/walker.hpp"

namespace rwrc::experiment {

namespace {

const json& need(const json& c, const std::string& key, const std::string& prefix = "") {
  if (!c.contains(key)) throw ConfigError(prefix + "/" + key, "missing required field");
  return c.at(key);
}

double need_number(const json& c, const std::string& key, const std::string& prefix = "") {
  const json& v = need(c, key, prefix);
  if (!v.is_number()) throw ConfigError(prefix + "/" + key, "expected a number");
  return v.get<double>();
}

std::int64_t need_integer(const json& c, const std::string& key,
                          const std::string& prefix = "") {
  const json& v = need(c, key, prefix);
  if (!v.is_number_integer()) throw ConfigError(prefix + "/" + key, "expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t need_seed(const json& c) {
  const json& v = need(c, "seed");
  if (!v.is_number_integer()) throw ConfigError("/seed", "expected an integer seed");
  return v.get<std::uint64_t>();
}

lattice::LatticeBox box_from_config(const json& c) {
  if (c.contains("cube")) {
    const json& q = c.at("cube");
    return lattice::cube_box(static_cast<int>(need_integer(q, "d", "/cube")),
                             need_integer(q, "n", "/cube"));
  }
  const json& b = need(c, "box");
  try {
    return io::box_from_json(b);
  } catch (const std::exception& e) {
    throw ConfigError("/box", e.what());
  }
}

conductance::Model model_from_config(const json& c) {
  try {
    return io::model_from_json(need(c, "model"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("/model", e.what());
  }
}

std::vector<double> number_list(const json& c, const std::string& key,
                                const std::string& prefix = "") {
  const json& v = need(c, key, prefix);
  if (!v.is_array() || v.empty()) throw ConfigError(prefix + "/" + key, "expected a list");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(prefix + "/" + key, "expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

varprob::ChiConfig chi_config(const json& c) {
  varprob::ChiConfig cfg;
  cfg.restarts = static_cast<int>(c.value("restarts", 4));
  cfg.max_iter = static_cast<int>(c.value("max_iter", 4000));
  cfg.smoothing_levels = static_cast<int>(c.value("smoothing_levels", 8));
  cfg.tol = c.value("tol", 1e-10);
  cfg.seed = c.value("seed", 0x5eedULL);
  return cfg;
}

json run_sample(const json& c) {
  const auto box = box_from_config(c);
  const auto model = model_from_config(c);
  const auto field = conductance::sample_field(box, model, need_seed(c));
  return json{{"field", io::field_to_json(field)}};
}

int config_threads(const json& c) {
  const int t = static_cast<int>(c.value("threads", 1));
  if (t < 1) throw ConfigError("/threads", "threads must be >= 1");
  return t;
}

json run_simulate(const json& c) {
  const auto box = box_from_config(c);
  const auto model = model_from_config(c);
  const auto field = conductance::sample_field(box, model, need_seed(c));
  const double horizon = need_number(c, "t");
  lattice::Coord start = walker::default_start(box);
  if (c.contains("start")) {
    const json& s = c.at("start");
    for (int i = 0; i < box.dim(); ++i) start[i] = s.at(i).get<std::int64_t>();
  }
  const auto sim = walker::simulate(field, start, horizon, c.value("stop_on_exit", true),
                                    rng::mix(need_seed(c), 0x51u));
  const auto density = walker::rescale_local_times(sim.local_times);
  json out{{"n_jumps", sim.trajectory.jumps.size()},
           {"exited", sim.trajectory.exited},
           {"total_local_time", sim.local_times.total()},
           {"density_integral", density.integral()}};
  if (sim.trajectory.exited) out["exit_time"] = sim.trajectory.exit_time;
  if (c.value("record_trajectory", false)) {
    json jumps = json::array();
    for (const auto& [tm, site] : sim.trajectory.jumps) {
      json row = json::array();
      row.push_back(tm);
      for (int i = 0; i < box.dim(); ++i) row.push_back(site[i]);
      jumps.push_back(std::move(row));
    }
    out["jumps"] = std::move(jumps);
  }
  return out;
}

json run_eigen(const json& c) {
  // a field file may be the bare serialization or a `sample` result document
  auto unwrap_field = [](const json& j) {
    if (j.contains("result") && j.at("result").contains("field"))
      return io::field_from_json(j.at("result").at("field"));
    return io::field_from_json(j);
  };
  conductance::ConductanceField field;
  if (c.contains("field_file")) {
    std::ifstream in(c.at("field_file").get<std::string>());
    if (!in) throw ConfigError("/field_file", "cannot open field file");
    json fj;
    in >> fj;
    field = unwrap_field(fj);
  } else if (c.contains("field")) {
    field = unwrap_field(c.at("field"));
  } else {
    field = conductance::sample_field(box_from_config(c), model_from_config(c), need_seed(c));
  }
  std::vector<double> V;
  if (c.contains("V"))
    V = conductance::site_cell_averages(io::scalar_field_from_json(c.at("V")), field.box());
  const auto res = spectrum::principal_eigen(
      spectrum::assemble(field, V, c.value("laplace_scale", 1.0)), c.value("tol", 1e-10));
  json out{{"value", res.value}, {"residual", res.residual}, {"iterations", res.iterations}};
  if (c.value("eigenvector", false)) out["vector"] = res.eigenvector;
  return out;
}

json run_chi_d(const json& c) {
  const auto box = box_from_config(c);
  double p;
  if (c.contains("p")) {
    p = need_number(c, "p");
  } else {
    const varprob::RegimeParams params(need_number(c, "eta"), c.value("D", 1.0));
    p = params.p();
  }
  const auto res = varprob::solve_chi_d(box, p, chi_config(c));
  json out{{"value", res.value},
           {"p", p},
           {"converged", res.converged},
           {"stationarity", res.stationarity},
           {"restarts_used", res.restarts_used},
           {"per_restart_values", res.per_restart_values}};
  if (c.value("minimizer", false)) out["minimizer"] = res.minimizer;
  if (c.contains("minimizer_out")) {
    std::ofstream mout(c.at("minimizer_out").get<std::string>(), std::ios::binary);
    if (!mout) throw std::runtime_error("cannot open minimizer output path");
    mout << json(res.minimizer).dump() << '\n';
  }
  return out;
}

json run_chi_c(const json& c) {
  const int d = static_cast<int>(need_integer(c, "d"));
  const auto G = io::domain_from_json(need(c, "G"), d);
  const varprob::RegimeParams params(need_number(c, "eta"), need_number(c, "D"));
  const auto levels = number_list(c, "levels");
  const auto res = varprob::solve_chi_c(d, G, params, levels, chi_config(c));
  json rows = json::array();
  for (const auto& l : res.levels)
    rows.push_back({{"alpha", l.alpha}, {"chi_d", l.chi_d}, {"scaled", l.scaled}});
  json out{{"levels", std::move(rows)},
           {"extrapolated", res.extrapolated},
           {"monotone", res.monotone},
           {"zero_infimum_regime", res.zero_infimum_regime}};
  if (!res.witness_curve.empty()) {
    json wit = json::array();
    for (const auto& [param, energy] : res.witness_curve)
      wit.push_back({{"parameter", param}, {"energy", energy}});
    out["witness_curve"] = std::move(wit);
  }
  return out;
}

json run_nonexit(const json& c) {
  const auto box = box_from_config(c);
  const auto model = model_from_config(c);
  const auto est = walker::nonexit_mc(model, box, need_number(c, "t"),
                                      static_cast<int>(need_integer(c, "n_env")),
                                      static_cast<int>(need_integer(c, "n_walks")),
                                      need_seed(c), config_threads(c));
  return json{{"estimate", est.estimate},
              {"ci", {est.ci_lo, est.ci_hi}},
              {"n_exit", est.n_exit},
              {"one_sided", est.one_sided},
              {"per_env_summary", est.per_env}};
}

json run_lifshitz(const json& c) {
  const auto box = box_from_config(c);
  const auto model_v = model_from_config(c);
  const auto* tail = std::get_if<conductance::TailModel>(&model_v);
  if (!tail) throw ConfigError("/model", "lifshitz requires a tail model");
  const auto eps = number_list(c, "eps_grid");
  double chi = std::numeric_limits<double>::quiet_NaN();
  if (c.contains("chi_d")) {
    if (c.at("chi_d").is_number()) {
      chi = c.at("chi_d").get<double>();
    } else {
      const varprob::RegimeParams params(tail->eta, tail->D);
      chi = varprob::solve_chi_d(box, params.p(), chi_config(c)).value;
    }
  }
  const auto table = spectrum::lifshitz_mc(*tail, box, eps,
                                           static_cast<int>(need_integer(c, "n_env")),
                                           need_seed(c), chi, config_threads(c));
  json rows = json::array();
  for (const auto& r : table.rows) {
    json row{{"eps", r.eps}, {"freq", r.freq}, {"ci", {r.ci_lo, r.ci_hi}}};
    if (!std::isnan(r.predictor_log)) row["predictor_log"] = r.predictor_log;
    rows.push_back(std::move(row));
  }
  json out{{"rows", std::move(rows)}};
  if (!std::isnan(chi)) out["chi_d"] = chi;
  if (c.value("keep_lambdas", false)) out["lambdas"] = table.lambdas;
  return out;
}

json run_homog(const json& c) {
  const auto model_v = model_from_config(c);
  const auto* ell = std::get_if<conductance::EllipticModel>(&model_v);
  if (!ell) throw ConfigError("/model", "homog requires an elliptic model");
  const int d = static_cast<int>(need_integer(c, "d"));
  const auto sizes = number_list(c, "sizes");
  conductance::ScalarField V = [](std::span<const double>) { return 0.0; };
  if (c.contains("V")) V = io::scalar_field_from_json(c.at("V"));
  const auto res = homogenise::spectral_convergence_experiment(
      *ell, V, d, static_cast<int>(c.value("jmax", 4)), sizes,
      static_cast<int>(need_integer(c, "n_env")), need_seed(c), config_threads(c));
  return json{{"sizes", res.sizes},
              {"lambda_by_size", res.lambda_by_size},
              {"lambda_reference", res.lambda_reference},
              {"eigenfunction_distance", res.eigenfunction_distance},
              {"c_eff", res.c_eff},
              {"c_eff_ci", {res.c_eff_ci_lo, res.c_eff_ci_hi}}};
}

json run_regime(const json& c) {
  const auto info = scaling::classify_regime(need_number(c, "eta"),
                                             static_cast<int>(need_integer(c, "d")));
  const char* name = info.regime == scaling::Regime::SpreadOut  ? "spread-out"
                     : info.regime == scaling::Regime::Critical ? "critical"
                                                                : "confined";
  json out{{"regime", name},
           {"d1_caveat", info.d1_caveat},
           {"chi_c_positive", info.chi_c_positive},
           {"chi_c_has_minimizer", info.chi_c_has_minimizer},
           {"chi_d_zd_positive", info.chi_d_zd_positive}};
  if (c.contains("t") && c.contains("alpha")) {
    const double t = need_number(c, "t");
    const double alpha = need_number(c, "alpha");
    const double eta = need_number(c, "eta");
    const int d = static_cast<int>(need_integer(c, "d"));
    out["beta"] = scaling::beta(t, alpha, eta, d).value;
    out["gamma"] = scaling::gamma(t, alpha, eta, d);
    const auto w = scaling::admissible_alpha(t, alpha, eta, d, info.regime,
                                             c.value("window_threshold", 0.1));
    out["alpha_window"] = json{{"lower_ratio", w.lower_ratio},
                               {"upper_ratio", w.upper_ratio},
                               {"pass", w.pass}};
  }
  return out;
}

json run_predict(const json& c) {
  const std::string mode = need(c, "mode").get<std::string>();
  const double eta = need_number(c, "eta");
  const int d = static_cast<int>(need_integer(c, "d"));
  if (mode == "nonexit") {
    scaling::ChiInput chi;
    if (c.contains("chi_c")) chi.chi_c = c.at("chi_c").get<double>();
    if (c.contains("chi_d_box")) chi.chi_d_box = c.at("chi_d_box").get<double>();
    if (c.contains("chi_d_zd")) chi.chi_d_zd = c.at("chi_d_zd").get<double>();
    try {
      const auto pred = scaling::nonexit_predictor(need_number(c, "t"), need_number(c, "alpha"),
                                                   eta, need_number(c, "D"), d, chi);
      return json{{"scale", pred.scale},
                  {"rate_upper", pred.rate_upper},
                  {"rate_lower", pred.rate_lower},
                  {"bracket", pred.bracket},
                  {"predicted_log_upper", pred.predicted_log_upper},
                  {"predicted_log_lower", pred.predicted_log_lower}};
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/chi_c", e.what());
    }
  }
  if (mode == "lifshitz") {
    try {
      const auto pred = scaling::lifshitz_predictor(eta, need_number(c, "D"),
                                                    need_number(c, "s"),
                                                    need_number(c, "chi_c"), d);
      return json{{"constant", pred.constant}, {"exponent", pred.exponent}};
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/s", e.what());
    }
  }
  throw ConfigError("/mode", "mode must be nonexit or lifshitz");
}

json run_compare_slopes(const json& c) {
  const json& pts = need(c, "points");
  if (!pts.is_array() || pts.size() < 3)
    throw ConfigError("/points", "need at least 3 [scale, log_est, se_log] rows");
  std::vector<SlopePoint> points;
  for (const auto& row : pts)
    points.push_back({row.at(0).get<double>(), row.at(1).get<double>(),
                      row.at(2).get<double>()});
  const auto fit = compare_slopes(points);
  return json{{"slope", fit.slope},
              {"ci", {fit.ci_lo, fit.ci_hi}},
              {"intercept", fit.intercept},
              {"ratio", fit.slope}};
}

void write_csv(const json& result, const std::string& kind, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open csv path " + path);
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  if (kind == "lifshitz") {
    out << "eps,freq,ci_lo,ci_hi,predictor_log\n";
    for (const auto& r : result.at("rows")) {
      out << num(r.at("eps").get<double>()) << ',' << num(r.at("freq").get<double>()) << ','
          << num(r.at("ci")[0].get<double>()) << ',' << num(r.at("ci")[1].get<double>()) << ','
          << (r.contains("predictor_log") ? num(r.at("predictor_log").get<double>()) : "")
          << '\n';
    }
  } else if (kind == "chi-c") {
    out << "alpha,chi_d,scaled\n";
    for (const auto& r : result.at("levels"))
      out << num(r.at("alpha").get<double>()) << ',' << num(r.at("chi_d").get<double>()) << ','
          << num(r.at("scaled").get<double>()) << '\n';
  } else if (kind == "homog") {
    out << "alpha";
    const auto& first = result.at("lambda_by_size")[0];
    for (std::size_t j = 0; j < first.size(); ++j) out << ",lambda_" << (j + 1);
    out << ",eigenfunction_distance\n";
    for (std::size_t s = 0; s < result.at("sizes").size(); ++s) {
      out << num(result.at("sizes")[s].get<double>());
      for (const auto& l : result.at("lambda_by_size")[s]) out << ',' << num(l.get<double>());
      out << ',' << num(result.at("eigenfunction_distance")[s].get<double>()) << '\n';
    }
  } else {
    throw std::runtime_error("no csv writer for kind " + kind);
  }
}

}  // namespace

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

SlopeFit compare_slopes(std::span<const SlopePoint> points) {
  if (points.size() < 3) throw std::invalid_argument("need at least 3 points");
  double W = 0.0, Wx = 0.0;
  for (const auto& p : points) {
    const double se = p.se_log > 0.0 ? p.se_log : 1e-12;
    const double w = 1.0 / (se * se);
    W += w;
    Wx += w * p.scale;
  }
  const double xbar = Wx / W;
  double Sxx = 0.0, Sxy = 0.0, Sy = 0.0;
  for (const auto& p : points) {
    const double se = p.se_log > 0.0 ? p.se_log : 1e-12;
    const double w = 1.0 / (se * se);
    Sxx += w * (p.scale - xbar) * (p.scale - xbar);
    Sxy += w * (p.scale - xbar) * p.log_est;
    Sy += w * p.log_est;
  }
  if (!(Sxx > 0.0)) throw std::invalid_argument("degenerate scale grid");
  SlopeFit fit;
  fit.slope = Sxy / Sxx;
  fit.intercept = Sy / W - fit.slope * xbar;
  const double se_slope = std::sqrt(1.0 / Sxx);
  fit.ci_lo = fit.slope - 1.96 * se_slope;
  fit.ci_hi = fit.slope + 1.96 * se_slope;
  return fit;
}

json run_config(const json& config) {
  if (!config.is_object()) throw ConfigError("", "config must be a JSON object");
  const std::string kind = need(config, "kind").get<std::string>();

  json result;
  if (kind == "sample") result = run_sample(config);
  else if (kind == "simulate") result = run_simulate(config);
  else if (kind == "eigen") result = run_eigen(config);
  else if (kind == "chi-d") result = run_chi_d(config);
  else if (kind == "chi-c") result = run_chi_c(config);
  else if (kind == "nonexit") result = run_nonexit(config);
  else if (kind == "lifshitz") result = run_lifshitz(config);
  else if (kind == "homog") result = run_homog(config);
  else if (kind == "regime") result = run_regime(config);
  else if (kind == "predict") result = run_predict(config);
  else if (kind == "compare-slopes") result = run_compare_slopes(config);
  else throw ConfigError("/kind", "unknown experiment kind: " + kind);

  json semantic = config;  // hash the experiment identity, not the I/O routing
  semantic.erase("out");
  semantic.erase("csv");
  semantic.erase("minimizer_out");
  semantic.erase("threads");
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a64(semantic.dump())));
  return json{{"kind", kind},
              {"version", kVersion},
              {"config_hash", hash},
              {"result", std::move(result)}};
}

int run_to_files(const json& config) {
  try {
    const json doc = run_config(config);
    if (config.contains("out")) {
      std::ofstream out(config.at("out").get<std::string>(), std::ios::binary);
      if (!out) throw std::runtime_error("cannot open output path");
      out << doc.dump(2) << '\n';
    } else {
      std::cout << doc.dump(2) << '\n';
    }
    if (config.contains("csv"))
      write_csv(doc.at("result"), config.at("kind").get<std::string>(),
                config.at("csv").get<std::string>());
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << json{{"error", e.what()}, {"path", e.path}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << '\n';
    return 1;
  }
}

}  // namespace rwrc::experiment
