// Command-line runner: every subcommand assembles an experiment config and
// hands it to the shared runner, so CLI runs and config-file runs produce
// identical documents.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rwrc/experiment.hpp"

namespace {

using nlohmann::json;

json parse_domain(const std::string& spec) {
  // "lo:hi,lo:hi,..." one pair per axis
  json out = json::array();
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--G expects lo:hi pairs");
    out.push_back({std::stod(part.substr(0, colon)), std::stod(part.substr(colon + 1))});
  }
  return out;
}

json parse_list(const std::string& spec) {
  json out = json::array();
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(std::stod(part));
  return out;
}

json parse_potential(const std::string& spec) {
  if (spec == "zero") return "zero";
  if (spec == "sum") return json{{"type", "coords_sum"}};
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string head = spec.substr(0, colon);
    if (head == "const")
      return json{{"type", "const"}, {"value", std::stod(spec.substr(colon + 1))}};
    if (head == "coord")
      return json{{"type", "coord"}, {"index", std::stoi(spec.substr(colon + 1))}};
  }
  throw CLI::ValidationError("--V expects zero | const:<v> | coord:<i> | sum");
}

struct GeometryFlags {
  int d = 1;
  double alpha = 0.0;
  std::string G;
  std::int64_t cube_n = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--d", d, "dimension");
    cmd->add_option("--alpha", alpha, "spatial scale");
    cmd->add_option("--G", G, "domain as lo:hi[,lo:hi...]");
    cmd->add_option("--cube-n", cube_n, "use the centered cube [-n,n]^d instead of alpha*G");
  }

  void fill(json& config) const {
    if (cube_n >= 0) {
      config["cube"] = json{{"d", d}, {"n", cube_n}};
    } else {
      config["box"] = json{{"d", d}, {"alpha", alpha}, {"G", parse_domain(G)}};
    }
  }
};

struct ModelFlags {
  std::string model = "tail";
  double eta = 1.0, D = 1.0, cap = 1.0;
  double lambda = 0.5, value = 1.0;
  std::string law = "uniform";
  double law_a = 0.0, law_b = 0.0, law_p = 0.5;

  void attach(CLI::App* cmd) {
    cmd->add_option("--model", model, "tail | elliptic | constant");
    cmd->add_option("--eta", eta, "tail exponent");
    cmd->add_option("--D", D, "tail constant");
    cmd->add_option("--cap", cap, "upper bound of tail conductances");
    cmd->add_option("--lambda", lambda, "ellipticity parameter");
    cmd->add_option("--law", law, "elliptic law: uniform | two-point | constant");
    cmd->add_option("--law-a", law_a, "first law value");
    cmd->add_option("--law-b", law_b, "second law value");
    cmd->add_option("--law-p", law_p, "two-point probability of the first value");
    cmd->add_option("--value", value, "constant conductance value");
  }

  json to_json() const {
    if (model == "tail") return json{{"type", "tail"}, {"eta", eta}, {"D", D}, {"cap", cap}};
    if (model == "constant") return json{{"type", "constant"}, {"value", value}};
    if (model == "elliptic") {
      json m{{"type", "elliptic"}, {"lambda", lambda}};
      if (law == "two-point")
        m["law"] = json{{"kind", "two_point"}, {"a", law_a}, {"b", law_b}, {"p", law_p}};
      else if (law == "constant")
        m["law"] = json{{"kind", "constant"}, {"a", law_a}};
      return m;
    }
    throw CLI::ValidationError("--model must be tail, elliptic or constant");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for random walks among random conductances"};
  app.require_subcommand(1);

  json config;
  std::string out_path, csv_path, config_path;

  int threads = 1;
  auto add_io = [&](CLI::App* cmd, bool with_csv = false) {
    cmd->add_option("--out", out_path, "output JSON path (stdout if omitted)");
    if (with_csv) cmd->add_option("--csv", csv_path, "also write a CSV table");
  };
  auto add_threads = [&](CLI::App* cmd) {
    cmd->add_option("--threads", threads, "worker threads for environment ensembles");
  };

  // run --config file.json
  auto* run = app.add_subcommand("run", "execute a JSON experiment config");
  run->add_option("--config", config_path, "config file")->required();

  // sample
  auto* sample = app.add_subcommand("sample", "draw a conductance field");
  GeometryFlags sample_geom;
  ModelFlags sample_model;
  std::uint64_t seed = 0;
  sample_geom.attach(sample);
  sample_model.attach(sample);
  sample->add_option("--seed", seed, "RNG seed")->required();
  add_io(sample);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run one walk and report local times");
  GeometryFlags sim_geom;
  ModelFlags sim_model;
  double sim_t = 1.0;
  bool sim_no_stop = false, sim_record = false;
  sim_geom.attach(simulate);
  sim_model.attach(simulate);
  simulate->add_option("--t", sim_t, "time horizon")->required();
  simulate->add_flag("--no-stop-on-exit", sim_no_stop, "continue after leaving the box");
  simulate->add_flag("--record-trajectory", sim_record, "include the jump list");
  simulate->add_option("--seed", seed, "RNG seed")->required();
  add_io(simulate);

  // eigen
  auto* eigen = app.add_subcommand("eigen", "principal Dirichlet eigenvalue of a field");
  std::string field_file, V_spec;
  double eigen_tol = 1e-10;
  eigen->add_option("--field", field_file, "field JSON file")->required();
  eigen->add_option("--V", V_spec, "potential: zero | const:<v> | coord:<i> | sum");
  eigen->add_option("--tol", eigen_tol, "residual tolerance");
  add_io(eigen);

  // chi-d
  auto* chid = app.add_subcommand("chi-d", "discrete characteristic value chi^d");
  GeometryFlags chid_geom;
  double chid_p = 0.0, chid_eta = 0.0;
  int restarts = 4;
  chid_geom.attach(chid);
  chid->add_option("--p", chid_p, "gradient exponent p in (0,2]");
  chid->add_option("--eta", chid_eta, "tail exponent (sets p = 2eta/(1+eta))");
  chid->add_option("--restarts", restarts, "multi-start count");
  std::string minimizer_out;
  chid->add_option("--minimizer-out", minimizer_out, "write the minimizer vector to a file");
  add_io(chid);

  // chi-c
  auto* chic = app.add_subcommand("chi-c", "scaled continuum limit of chi^d");
  int chic_d = 1;
  std::string chic_G = "0:1", chic_levels = "32,64,128,256";
  double chic_eta = 1.0, chic_D = 1.0;
  chic->add_option("--d", chic_d, "dimension");
  chic->add_option("--G", chic_G, "domain");
  chic->add_option("--eta", chic_eta, "tail exponent")->required();
  chic->add_option("--D", chic_D, "tail constant")->required();
  chic->add_option("--levels", chic_levels, "comma-separated alpha levels");
  add_io(chic, true);

  // nonexit
  auto* nonexit = app.add_subcommand("nonexit", "two-level MC non-exit probability");
  GeometryFlags ne_geom;
  ModelFlags ne_model;
  double ne_t = 1.0;
  int n_env = 64, n_walks = 64;
  ne_geom.attach(nonexit);
  ne_model.attach(nonexit);
  nonexit->add_option("--t", ne_t, "time horizon")->required();
  nonexit->add_option("--n-env", n_env, "environment replicas");
  nonexit->add_option("--n-walks", n_walks, "walks per environment");
  nonexit->add_option("--seed", seed, "RNG seed")->required();
  add_threads(nonexit);
  add_io(nonexit);

  // lifshitz
  auto* lifshitz = app.add_subcommand("lifshitz", "lower-tail frequencies of lambda^a(B)");
  GeometryFlags lif_geom;
  double lif_eta = 1.0, lif_D = 1.0, lif_cap = 1.0;
  std::string eps_grid = "0.8,1.0,1.25";
  int lif_env = 1000;
  bool lif_chi = false;
  lif_geom.attach(lifshitz);
  lifshitz->add_option("--eta", lif_eta, "tail exponent")->required();
  lifshitz->add_option("--D", lif_D, "tail constant")->required();
  lifshitz->add_option("--cap", lif_cap, "conductance cap");
  lifshitz->add_option("--eps-grid", eps_grid, "comma-separated thresholds");
  lifshitz->add_option("--n-env", lif_env, "environment replicas");
  lifshitz->add_flag("--predictor", lif_chi, "solve chi^d(B) and attach the tail predictor");
  lifshitz->add_option("--seed", seed, "RNG seed")->required();
  add_threads(lifshitz);
  add_io(lifshitz, true);

  // homog
  auto* homog = app.add_subcommand("homog", "spectral homogenisation experiment");
  ModelFlags homog_model;
  int homog_d = 1, jmax = 4, homog_env = 8;
  std::string sizes = "32,64,128", homog_V;
  homog_model.attach(homog);
  homog->add_option("--d", homog_d, "dimension");
  homog->add_option("--sizes", sizes, "comma-separated alpha levels");
  homog->add_option("--jmax", jmax, "number of eigenvalues");
  homog->add_option("--n-env", homog_env, "environment replicas");
  homog->add_option("--V", homog_V, "potential spec");
  homog->add_option("--seed", seed, "RNG seed")->required();
  add_threads(homog);
  add_io(homog, true);

  // regime
  auto* regime = app.add_subcommand("regime", "classify eta against d/2");
  double reg_eta = 1.0, reg_t = 0.0, reg_alpha = 0.0;
  int reg_d = 1;
  regime->add_option("--eta", reg_eta, "tail exponent")->required();
  regime->add_option("--d", reg_d, "dimension")->required();
  regime->add_option("--t", reg_t, "optional time for the scale diagnostics");
  regime->add_option("--alpha", reg_alpha, "optional scale for the window diagnostics");
  add_io(regime);

  // predict
  auto* predict = app.add_subcommand("predict", "closed-form asymptotic predictors");
  std::string mode = "nonexit";
  double pr_eta = 1.0, pr_D = 1.0, pr_t = 0.0, pr_alpha = 0.0, pr_s = 0.0;
  double pr_chi_c = -1.0, pr_chi_d_box = -1.0, pr_chi_d_zd = -1.0;
  int pr_d = 1;
  predict->add_option("--mode", mode, "nonexit | lifshitz")->required();
  predict->add_option("--eta", pr_eta)->required();
  predict->add_option("--D", pr_D)->required();
  predict->add_option("--d", pr_d)->required();
  predict->add_option("--t", pr_t);
  predict->add_option("--alpha", pr_alpha);
  predict->add_option("--s", pr_s);
  predict->add_option("--chi-c", pr_chi_c);
  predict->add_option("--chi-d-box", pr_chi_d_box);
  predict->add_option("--chi-d-zd", pr_chi_d_zd);
  add_io(predict);

  // compare-slopes
  auto* slopes = app.add_subcommand("compare-slopes", "fit MC log-estimates to a predictor");
  std::string points_file;
  slopes->add_option("--points", points_file,
                     "JSON file with [[scale, log_est, se_log], ...]")
      ->required();
  add_io(slopes);

  CLI11_PARSE(app, argc, argv);

  auto with_io = [&](json c) {
    if (!out_path.empty()) c["out"] = out_path;
    if (!csv_path.empty()) c["csv"] = csv_path;
    if (threads > 1) c["threads"] = threads;
    return c;
  };

  try {
    if (run->parsed()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << json{{"error", "cannot open config file"}, {"path", "/config"}}.dump()
                  << '\n';
        return 2;
      }
      json c;
      try {
        in >> c;
      } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}, {"path", ""}}.dump() << '\n';
        return 2;
      }
      return rwrc::experiment::run_to_files(c);
    }
    if (sample->parsed()) {
      json c{{"kind", "sample"}, {"seed", seed}, {"model", sample_model.to_json()}};
      sample_geom.fill(c);
      return rwrc::experiment::run_to_files(with_io(std::move(c)));
    }
    if (simulate->parsed()) {
      json c{{"kind", "simulate"}, {"seed", seed}, {"model", sim_model.to_json()},
             {"t", sim_t},         {"stop_on_exit", !sim_no_stop},
             {"record_trajectory", sim_record}};
      sim_geom.fill(c);
      return rwrc::experiment::run_to_files(with_io(std::move(c)));
    }
    if (eigen->parsed()) {
      json c{{"kind", "eigen"}, {"field_file", field_file}, {"tol", eigen_tol}};
      if (!V_spec.empty()) c["V"] = parse_potential(V_spec);
      return rwrc::experiment::run_to_files(with_io(std::move(c)));
    }
    if (chid->parsed()) {
      json c{{"kind", "chi-d"}, {"restarts", restarts}};
      if (chid_p > 0.0) c["p"] = chid_p;
      else if (chid_eta > 0.0) c["eta"] = chid_eta;
      else throw CLI::ValidationError("chi-d needs --p or --eta");
      if (!minimizer_out.empty()) c["minimizer_out"] = minimizer_out;
      chid_geom.fill(c);
      return rwrc::experiment::run_to_files(with_io(std::move(c)));
    }
    if (chic->parsed()) {
      json c{{"kind", "chi-c"}, {"d", chic_d},        {"G", parse_domain(chic_G)},
             {"eta", chic_eta}, {"D", chic_D},        {"levels", parse_list(chic_levels)}};
      return rwrc::experiment::run_to_files(with_io(std::move(c)));
    }
    if (nonexit->parsed()) {
      json c{{"kind", "nonexit"}, {"seed", seed},       {"model", ne_model.to_json()},
             {"t", ne_t},         {"n_env", n_env},     {"n_walks", n_walks}};
      ne_geom.fill(c);
      return rwrc::experiment::run_to_files(with_io(std::move(c)));
    }
    if (lifshitz->parsed()) {
      json c{{"kind", "lifshitz"},
             {"seed", seed},
             {"model", json{{"type", "tail"}, {"eta", lif_eta}, {"D", lif_D}, {"cap", lif_cap}}},
             {"eps_grid", parse_list(eps_grid)},
             {"n_env", lif_env}};
      if (lif_chi) c["chi_d"] = "auto";
      lif_geom.fill(c);
      return rwrc::experiment::run_to_files(with_io(std::move(c)));
    }
    if (homog->parsed()) {
      json c{{"kind", "homog"}, {"seed", seed},   {"model", homog_model.to_json()},
             {"d", homog_d},    {"jmax", jmax},   {"sizes", parse_list(sizes)},
             {"n_env", homog_env}};
      if (!homog_V.empty()) c["V"] = parse_potential(homog_V);
      return rwrc::experiment::run_to_files(with_io(std::move(c)));
    }
    if (regime->parsed()) {
      json c{{"kind", "regime"}, {"eta", reg_eta}, {"d", reg_d}};
      if (reg_t > 0.0 && reg_alpha > 0.0) {
        c["t"] = reg_t;
        c["alpha"] = reg_alpha;
      }
      return rwrc::experiment::run_to_files(with_io(std::move(c)));
    }
    if (predict->parsed()) {
      json c{{"kind", "predict"}, {"mode", mode}, {"eta", pr_eta}, {"D", pr_D}, {"d", pr_d}};
      if (pr_t > 0.0) c["t"] = pr_t;
      if (pr_alpha > 0.0) c["alpha"] = pr_alpha;
      if (pr_s > 0.0) c["s"] = pr_s;
      if (pr_chi_c >= 0.0) c["chi_c"] = pr_chi_c;
      if (pr_chi_d_box >= 0.0) c["chi_d_box"] = pr_chi_d_box;
      if (pr_chi_d_zd >= 0.0) c["chi_d_zd"] = pr_chi_d_zd;
      return rwrc::experiment::run_to_files(with_io(std::move(c)));
    }
    if (slopes->parsed()) {
      std::ifstream in(points_file);
      if (!in) {
        std::cerr << json{{"error", "cannot open points file"}, {"path", "/points"}}.dump()
                  << '\n';
        return 2;
      }
      json pts;
      in >> pts;
      return rwrc::experiment::run_to_files(
          with_io(json{{"kind", "compare-slopes"}, {"points", pts}}));
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << json{{"error", e.what()}}.dump() << '\n';
    return 2;
  }
  return 0;
}
