#include <doctest.h>

#include "rwrc/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rwrc/json_io.hpp"
#include "rwrc/spectrum.hpp"
#include "rwrc/varprob.hpp"
#include "rwrc/walker.hpp"

using namespace rwrc;
using namespace rwrc::experiment;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

json cube_config(int d, int n) { return json{{"d", d}, {"n", n}}; }

}  // namespace

TEST_CASE("field JSON round trip preserves every weight") {
  const auto box = lattice::build_box(2, 4.0, lattice::Domain::unit_cube(2));
  const auto field =
      conductance::sample_field(box, conductance::TailModel{1.0, 0.7, 1.0}, 99);
  const auto restored = io::field_from_json(io::field_to_json(field));
  field.weights().for_each([&](const lattice::Coord& z, int dir, double w) {
    CHECK(restored.weight(std::span<const std::int64_t>(z.data(), 2), dir) == w);
  });
}

TEST_CASE("identical configs produce byte-identical result documents") {
  const json config{{"kind", "nonexit"},
                    {"cube", cube_config(1, 2)},
                    {"model", {{"type", "tail"}, {"eta", 1.0}, {"D", 1.0}, {"cap", 1.0}}},
                    {"t", 0.5},
                    {"n_env", 32},
                    {"n_walks", 8},
                    {"seed", 4}};
  CHECK(run_config(config).dump() == run_config(config).dump());

  const auto tmp = std::filesystem::temp_directory_path();
  const auto p1 = tmp / "rwrc_det_1.json";
  const auto p2 = tmp / "rwrc_det_2.json";
  json c1 = config, c2 = config;
  c1["out"] = p1.string();
  c2["out"] = p2.string();
  REQUIRE(run_to_files(c1) == 0);
  REQUIRE(run_to_files(c2) == 0);
  CHECK(slurp(p1) == slurp(p2));
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("results embed the config hash and version") {
  const json config{{"kind", "regime"}, {"eta", 1.5}, {"d", 2}};
  const auto doc = run_config(config);
  CHECK(doc.at("version").get<std::string>() == kVersion);
  CHECK(doc.at("config_hash").get<std::string>().size() == 16);
  // hash changes with the config
  json other = config;
  other["eta"] = 2.0;
  CHECK(run_config(other).at("config_hash") != doc.at("config_hash"));
}

TEST_CASE("chi-d config for p=2 reproduces the eigen oracle") {
  const json config{{"kind", "chi-d"}, {"cube", cube_config(1, 8)}, {"p", 2.0}};
  const auto doc = run_config(config);
  const auto box = lattice::cube_box(1, 8);
  const double lam =
      spectrum::principal_eigen(spectrum::assemble(conductance::constant_field(box, 1.0)))
          .value;
  CHECK(doc.at("result").at("value").get<double>() == doctest::Approx(lam).epsilon(1e-6));
}

TEST_CASE("malformed configs exit with code 2 and a pointer to the offending field") {
  SUBCASE("missing seed") {
    const json config{{"kind", "sample"},
                      {"cube", cube_config(1, 2)},
                      {"model", {{"type", "tail"}, {"eta", 1.0}, {"D", 1.0}}}};
    CHECK(run_to_files(config) == 2);
    CHECK_THROWS_AS(run_config(config), ConfigError);
    try {
      run_config(config);
    } catch (const ConfigError& e) {
      CHECK(e.path == "/seed");
    }
  }
  SUBCASE("unknown kind") {
    try {
      run_config(json{{"kind", "nope"}});
      CHECK(false);
    } catch (const ConfigError& e) {
      CHECK(e.path == "/kind");
    }
  }
  SUBCASE("bad model nested field") {
    const json config{{"kind", "sample"},
                      {"cube", cube_config(1, 2)},
                      {"seed", 1},
                      {"model", {{"type", "warp"}}}};
    try {
      run_config(config);
      CHECK(false);
    } catch (const ConfigError& e) {
      CHECK(e.path == "/model");
    }
  }
}

TEST_CASE("slope comparison fits") {
  SUBCASE("synthetic data exactly on the predictor line") {
    std::vector<SlopePoint> pts;
    for (const double x : {-10.0, -20.0, -40.0, -80.0})
      pts.push_back({x, x, 0.05});
    const auto fit = compare_slopes(pts);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.intercept == doctest::Approx(0.0));
    // CI symmetric in log space
    CHECK(fit.ci_hi - fit.slope == doctest::Approx(fit.slope - fit.ci_lo).epsilon(1e-12));
  }
  SUBCASE("offsets do not disturb the slope (intercept absorbs prefactors)") {
    std::vector<SlopePoint> pts;
    for (const double x : {-5.0, -10.0, -20.0}) pts.push_back({x, 0.7 * x + 3.0, 0.1});
    const auto fit = compare_slopes(pts);
    CHECK(fit.slope == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-9));
  }
  SUBCASE("degenerate grids and short tables are rejected") {
    std::vector<SlopePoint> flat{{-1.0, -1.0, 0.1}, {-1.0, -1.1, 0.1}, {-1.0, -0.9, 0.1}};
    CHECK_THROWS_AS(compare_slopes(flat), std::invalid_argument);
    std::vector<SlopePoint> two{{-1.0, -1.0, 0.1}, {-2.0, -2.0, 0.1}};
    CHECK_THROWS_AS(compare_slopes(two), std::invalid_argument);
  }
  SUBCASE("via the config runner") {
    const json config{{"kind", "compare-slopes"},
                      {"points", {{-10.0, -10.0, 0.1}, {-20.0, -20.0, 0.1}, {-40.0, -40.0, 0.1}}}};
    const auto doc = run_config(config);
    CHECK(doc.at("result").at("ratio").get<double>() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("runner kinds produce their documented fields") {
  SUBCASE("sample -> field document") {
    const json config{{"kind", "sample"},
                      {"cube", cube_config(1, 3)},
                      {"seed", 8},
                      {"model", {{"type", "tail"}, {"eta", 1.0}, {"D", 1.0}}}};
    const auto doc = run_config(config);
    CHECK(doc.at("result").at("field").at("format") == "rwrc-field-v1");
    CHECK(doc.at("result").at("field").at("edges").size() == 8);  // 7 sites + 1 edge
  }
  SUBCASE("simulate -> local-time summary") {
    const json config{{"kind", "simulate"},
                      {"cube", cube_config(1, 30)},
                      {"seed", 8},
                      {"model", {{"type", "constant"}, {"value", 1.0}}},
                      {"t", 2.0}};
    const auto doc = run_config(config);
    CHECK(doc.at("result").at("total_local_time").get<double>() > 0.0);
  }
  SUBCASE("eigen on an inline field") {
    const auto box = lattice::cube_box(1, 2);
    const auto field = conductance::constant_field(box, 1.0);
    const json config{{"kind", "eigen"}, {"field", io::field_to_json(field)}};
    const auto doc = run_config(config);
    CHECK(doc.at("result").at("value").get<double>() > 0.0);
  }
  SUBCASE("lifshitz rows with predictor") {
    const json config{{"kind", "lifshitz"},
                      {"cube", cube_config(1, 0)},
                      {"model", {{"type", "tail"}, {"eta", 1.0}, {"D", 0.25}, {"cap", 1.0}}},
                      {"eps_grid", {0.8, 1.0}},
                      {"n_env", 50},
                      {"seed", 3},
                      {"chi_d", 2.0}};
    const auto doc = run_config(config);
    REQUIRE(doc.at("result").at("rows").size() == 2);
    CHECK(doc.at("result").at("rows")[0].contains("predictor_log"));
  }
  SUBCASE("predict lifshitz formula") {
    const json config{{"kind", "predict"}, {"mode", "lifshitz"}, {"eta", 1.0}, {"D", 1.0},
                      {"d", 1},           {"s", 0.1},           {"chi_c", 9.8696}};
    const auto doc = run_config(config);
    CHECK(doc.at("result").at("exponent").get<double>() == doctest::Approx(1.1));
  }
  SUBCASE("chi-c levels table") {
    const json config{{"kind", "chi-c"}, {"d", 1},   {"G", {{0.0, 1.0}}},
                      {"eta", 2.0},      {"D", 1.0}, {"levels", {8.0, 16.0}}};
    const auto doc = run_config(config);
    CHECK(doc.at("result").at("levels").size() == 2);
    CHECK_FALSE(doc.at("result").at("zero_infimum_regime").get<bool>());
  }
}

TEST_CASE("thread count does not change the result document") {
  const json base{{"kind", "nonexit"},
                  {"cube", cube_config(1, 3)},
                  {"model", {{"type", "tail"}, {"eta", 1.0}, {"D", 1.0}, {"cap", 1.0}}},
                  {"t", 0.4},
                  {"n_env", 48},
                  {"n_walks", 8},
                  {"seed", 21}};
  json threaded = base;
  threaded["threads"] = 4;
  CHECK(run_config(base).dump() == run_config(threaded).dump());

  const json lif{{"kind", "lifshitz"},
                 {"cube", cube_config(1, 0)},
                 {"model", {{"type", "tail"}, {"eta", 1.0}, {"D", 0.25}, {"cap", 1.0}}},
                 {"eps_grid", {0.8, 1.25}},
                 {"n_env", 64},
                 {"seed", 22}};
  json lif4 = lif;
  lif4["threads"] = 4;
  CHECK(run_config(lif).dump() == run_config(lif4).dump());
}

TEST_CASE("csv tables are written for tabular kinds") {
  const auto tmp = std::filesystem::temp_directory_path();
  const auto csv = tmp / "rwrc_test_levels.csv";
  const json config{{"kind", "chi-c"},   {"d", 1},
                    {"G", {{0.0, 1.0}}}, {"eta", 2.0},
                    {"D", 1.0},          {"levels", {8.0, 16.0, 32.0}},
                    {"csv", csv.string()}};
  REQUIRE(run_to_files(config) == 0);
  const std::string text = slurp(csv);
  CHECK(text.rfind("alpha,chi_d,scaled", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);  // header + 3 rows
  std::filesystem::remove(csv);
}

TEST_CASE("non-exit decay slope approaches the predicted rate from below") {
  // fixed 3-site box, eta = 1, D = 0.1: the measured slope of log <P(stay)>
  // against -K chi^d(B) sqrt(t) climbs toward 1 as the t-window grows
  const auto box = lattice::build_box(1, 4.0, lattice::Domain::unit_cube(1));
  const double chi = varprob::solve_chi_d(box, 1.0).value;
  const double K = varprob::RegimeParams(1.0, 0.1).K();
  const conductance::TailModel model{1.0, 0.1, 1.0};

  const std::vector<std::vector<double>> windows{
      {1, 2, 4, 8}, {4, 8, 16, 32}, {16, 32, 64, 128}};
  std::vector<double> ratios;
  for (const auto& w : windows) {
    std::vector<SlopePoint> pts;
    for (const double t : w) {
      const auto est = walker::nonexit_mc(model, box, t, 6000, 64, 1234, 4);
      REQUIRE(est.estimate > 1e-5);
      const double se_log = (est.ci_hi - est.ci_lo) / 2.0 / est.estimate / 1.96;
      pts.push_back({-K * chi * std::sqrt(t), std::log(est.estimate), se_log});
    }
    ratios.push_back(compare_slopes(pts).slope);
  }
  CHECK(ratios[1] > ratios[0]);
  CHECK(ratios[2] > ratios[1]);
  CHECK(ratios[2] > 0.7);   // deep window sits close below the predictor
  CHECK(ratios[2] < 1.05);  // and never overshoots it materially
}
