#include <doctest.h>

#include "rwrc/scaling.hpp"

#include <cmath>

#include "rwrc/rng.hpp"

using namespace rwrc::scaling;

TEST_CASE("beta and gamma closed forms") {
  const auto b = beta(1e6, 10.0, 1.0, 1);
  CHECK(b.value == doctest::Approx(std::sqrt(1000.0)).epsilon(1e-14));
  CHECK(b.in_window);
  // gamma = t/(alpha^2 beta) = beta^eta alpha^d
  const double g = gamma(1e6, 10.0, 1.0, 1);
  CHECK(g == doctest::Approx(std::sqrt(1000.0) * 10.0).epsilon(1e-12));
  CHECK(beta(10.0, 10.0, 1.0, 1).in_window == false);
}

TEST_CASE("gamma identity holds for random parameter tuples") {
  for (int k = 0; k < 10000; ++k) {
    rwrc::rng::Stream stream(31337, k);
    const double t = std::pow(10.0, 2.0 + 6.0 * stream.next_u01());
    const double alpha = 1.5 + 30.0 * stream.next_u01();
    const double eta = 0.25 + 3.0 * stream.next_u01();
    const int d = 1 + static_cast<int>(stream.next_u01() * 3);
    const double g = gamma(t, alpha, eta, d);  // throws if the two forms disagree
    const double direct = std::pow(t, eta / (1.0 + eta)) *
                          std::pow(alpha, (static_cast<double>(d) - 2.0 * eta) / (1.0 + eta));
    CHECK(std::abs(g - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("at eta = d/2 the gamma scale loses its alpha dependence") {
  const double g1 = gamma(1e8, 8.0, 1.0, 2);
  const double g2 = gamma(1e8, 32.0, 1.0, 2);
  CHECK(g1 == doctest::Approx(g2).epsilon(1e-12));
  CHECK(g1 == doctest::Approx(std::pow(1e8, 0.5)).epsilon(1e-12));
}

TEST_CASE("regime classification table") {
  CHECK(classify_regime(2.0, 2).regime == Regime::SpreadOut);
  CHECK(classify_regime(1.0, 2).regime == Regime::Critical);
  CHECK(classify_regime(0.5, 3).regime == Regime::Confined);
  CHECK(classify_regime(0.5, 3).chi_d_zd_positive);  // d > 1

  for (const int d : {1, 2, 3}) {
    for (double eta = 0.25; eta <= 3.01; eta += 0.25) {
      const auto info = classify_regime(eta, d);
      if (eta > 0.5 * d) {
        CHECK(info.regime == Regime::SpreadOut);
        CHECK(info.chi_c_positive);
        CHECK_FALSE(info.chi_d_zd_positive);
      } else if (eta == 0.5 * d) {
        CHECK(info.regime == Regime::Critical);
        CHECK(info.chi_d_zd_positive == (d > 1));
      } else {
        CHECK(info.regime == Regime::Confined);
        CHECK(info.chi_d_zd_positive == (d > 1));
      }
      CHECK(info.d1_caveat == (d == 1 && eta > 0.5 && eta < 1.0));
    }
  }
}

TEST_CASE("admissible alpha window diagnostics") {
  SUBCASE("comfortably inside the spread-out window") {
    const auto w = admissible_alpha(1e8, 10.0, 1.0, 1, Regime::SpreadOut);
    CHECK(w.upper_ratio == doctest::Approx(1000.0 * std::pow(std::log(1e8), 2.0) / 1e8)
                               .epsilon(1e-12));
    CHECK(w.upper_ratio < 0.01);
    CHECK(w.pass);
  }
  SUBCASE("alpha at the upper edge fails") {
    const double t = 1e8;
    const auto w = admissible_alpha(t, std::pow(t, 1.0 / 3.0), 1.0, 1, Regime::SpreadOut);
    CHECK_FALSE(w.pass_upper);
  }
  SUBCASE("alpha = 1 fails on the lower side") {
    const auto w = admissible_alpha(1e8, 1.0, 1.0, 1, Regime::SpreadOut);
    CHECK_FALSE(w.pass_lower);
  }
}

TEST_CASE("non-exit predictor assembles the regime-specific rates") {
  SUBCASE("spread-out: -gamma K chi_c") {
    ChiInput chi;
    chi.chi_c = 3.0;
    const auto pred = nonexit_predictor(1e6, 10.0, 1.0, 1.0, 1, chi);
    const double expect = -gamma(1e6, 10.0, 1.0, 1) * 2.0 * 3.0;  // K_{1,1} = 2
    CHECK(pred.predicted_log_upper == doctest::Approx(expect).epsilon(1e-12));
    CHECK_FALSE(pred.bracket);
  }
  SUBCASE("doubling t scales the prediction by 2^{eta/(1+eta)}") {
    ChiInput chi;
    chi.chi_c = 1.0;
    const auto p1 = nonexit_predictor(1e6, 10.0, 1.0, 1.0, 1, chi);
    const auto p2 = nonexit_predictor(2e6, 10.0, 1.0, 1.0, 1, chi);
    CHECK(p2.predicted_log_upper / p1.predicted_log_upper ==
          doctest::Approx(std::pow(2.0, 0.5)).epsilon(1e-12));
  }
  SUBCASE("confined bracket on the t^{eta/(1+eta)} scale") {
    ChiInput chi;
    chi.chi_d_box = 1.2;
    chi.chi_d_zd = 1.0;
    const auto pred = nonexit_predictor(1e6, 10.0, 0.5, 1.0, 3, chi);
    CHECK(pred.bracket);
    CHECK(pred.scale == doctest::Approx(std::pow(1e6, 0.5 / 1.5)).epsilon(1e-12));
    CHECK(pred.rate_lower < pred.rate_upper);  // -K 1.2 < -K 1.0
  }
  SUBCASE("critical: both sides coincide at chi^d(Z^d) and alpha drops out") {
    ChiInput chi;
    chi.chi_d_zd = 1.0;
    const auto a = nonexit_predictor(1e6, 10.0, 1.0, 1.0, 2, chi);
    const auto b = nonexit_predictor(1e6, 40.0, 1.0, 1.0, 2, chi);
    CHECK(a.predicted_log_upper == doctest::Approx(b.predicted_log_upper));
    CHECK(a.rate_lower == a.rate_upper);
  }
  SUBCASE("mismatched chi input is an error") {
    ChiInput chi;
    chi.chi_d_box = 1.0;
    CHECK_THROWS_AS(nonexit_predictor(1e6, 10.0, 2.0, 1.0, 1, chi), std::invalid_argument);
    ChiInput chi2;
    chi2.chi_c = 1.0;
    CHECK_THROWS_AS(nonexit_predictor(1e6, 10.0, 0.5, 1.0, 2, chi2), std::invalid_argument);
  }
}

TEST_CASE("lifshitz tail predictor") {
  const double pi2 = std::acos(-1.0) * std::acos(-1.0);
  SUBCASE("formula value at eta=1, chi_c=pi^2, s=0.1") {
    const auto pred = lifshitz_predictor(1.0, 1.0, 0.1, pi2, 1);
    const double expect =
        -pi2 * pi2 * std::pow(0.9, 0.9) * std::pow(1.1, 1.1);
    CHECK(pred.constant == doctest::Approx(expect).epsilon(1e-12));
    CHECK(pred.exponent == doctest::Approx(1.1));
  }
  SUBCASE("s -> 0 limit of the constant") {
    const auto pred = lifshitz_predictor(1.0, 1.0, 1e-9, pi2, 1);
    CHECK(pred.constant == doctest::Approx(-pi2 * pi2).epsilon(1e-6));
  }
  SUBCASE("continuous and monotone across the admissible s-interval") {
    const double s_max = std::abs(1.0 - 2.0) / 3.0;  // |d-2eta|/(d+2), d=1, eta=1
    double prev = lifshitz_predictor(1.0, 1.0, 1e-6, pi2, 1).constant;
    double max_jump = 0.0;
    for (int k = 1; k < 200; ++k) {
      const double s = s_max * k / 200.0;
      const double c = lifshitz_predictor(1.0, 1.0, s, pi2, 1).constant;
      max_jump = std::max(max_jump, std::abs(c - prev));
      CHECK(c <= prev + 1e-12);  // monotone nonincreasing along the sweep
      prev = c;
    }
    CHECK(max_jump < 0.05 * pi2 * pi2);  // no jumps on the dense grid
  }
  SUBCASE("s outside the interval is an error") {
    CHECK_THROWS_AS(lifshitz_predictor(1.0, 1.0, 0.5, pi2, 1), std::invalid_argument);
    CHECK_THROWS_AS(lifshitz_predictor(1.0, 1.0, -0.1, pi2, 1), std::invalid_argument);
    CHECK_THROWS_AS(lifshitz_predictor(0.4, 1.0, 0.1, pi2, 1), std::invalid_argument);
  }
}

TEST_CASE("the non-exit scale is decreasing in eta across the threshold") {
  // for eta > d/2 and admissible (t, alpha): gamma_t >> t^{eta*/(1+eta*)} at eta* = d/2
  const double t = 1e8;
  for (const int d : {1, 2}) {
    const double alpha = d == 1 ? 10.0 : 12.0;
    const double critical_scale = std::pow(t, (0.5 * d) / (1.0 + 0.5 * d));
    for (double eta = 0.5 * d + 0.1; eta <= 3.0; eta += 0.3) {
      REQUIRE(admissible_alpha(t, alpha, eta, d, Regime::SpreadOut).pass);
      CHECK(gamma(t, alpha, eta, d) > critical_scale);
    }
  }
}
