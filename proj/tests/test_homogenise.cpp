#include <doctest.h>

#include "rwrc/homogenise.hpp"

#include <cmath>

#include "oracles.hpp"
#include "rwrc/rng.hpp"
#include "rwrc/spectrum.hpp"

using namespace rwrc;
using namespace rwrc::homogenise;
using rwrc::conductance::constant_field;
using rwrc::conductance::EdgeValues;
using rwrc::conductance::EllipticModel;
using rwrc::conductance::sample_field;
using rwrc::lattice::Coord;
using rwrc::lattice::Domain;

namespace {
const double kPi = std::acos(-1.0);

std::vector<double> random_vector(std::int64_t n, std::uint64_t seed) {
  rng::Stream stream(seed, 0);
  std::vector<double> v(n);
  for (auto& x : v) x = stream.next_normal();
  return v;
}

EllipticModel constant_model(double c) {
  return EllipticModel{0.5, conductance::Law{conductance::Law::Kind::Constant, c, c, 0.5}};
}
}  // namespace

TEST_CASE("Kuhn interpolation: linear in d=1, hats for deltas, exact at lattice points") {
  SUBCASE("d=1 midpoint is the average of scaled endpoints") {
    const auto box = lattice::build_box(1, 4.0, Domain::unit_cube(1));
    std::vector<double> v{1.0, 3.0, 2.0};
    const auto f = kuhn_interpolate(v, box);
    const double y = 1.5 / 4.0;  // midpoint of cell [1,2]
    CHECK(f.evaluate(std::span<const double>(&y, 1)) ==
          doctest::Approx(2.0 * 2.0));  // alpha^{1/2} (v1+v2)/2 = 2 * 2
  }
  SUBCASE("delta source gives a hat with peak alpha^{d/2}") {
    const auto box = lattice::build_box(2, 4.0, Domain::unit_cube(2));
    std::vector<double> v(box.size(), 0.0);
    Coord z{2, 2};
    v[box.index(std::span<const std::int64_t>(z.data(), 2))] = 1.0;
    const auto f = kuhn_interpolate(v, box);
    const std::vector<double> peak{0.5, 0.5};
    CHECK(f.evaluate(peak) == doctest::Approx(4.0));  // alpha^{d/2} = 4
  }
  SUBCASE("lattice points reproduce alpha^{d/2} v exactly") {
    const auto box = lattice::build_box(2, 5.0, Domain::unit_cube(2));
    const auto v = random_vector(box.size(), 77);
    const auto f = kuhn_interpolate(v, box);
    for (std::int64_t k = 0; k < box.size(); ++k) {
      const Coord z = box.site(k);
      const auto y = box.embed(std::span<const std::int64_t>(z.data(), 2));
      CHECK(f.evaluate(y) ==
            doctest::Approx(std::pow(5.0, 1.0) * v[static_cast<std::size_t>(k)])
                .epsilon(1e-12));
    }
  }
  SUBCASE("gradient accessor is the forward-difference field") {
    const auto box = lattice::build_box(2, 4.0, Domain::unit_cube(2));
    const auto v = random_vector(box.size(), 12);
    const auto f = kuhn_interpolate(v, box);
    Coord z{1, 2};
    Coord zp{2, 2};
    const std::vector<double> y{(1.0 + 0.3) / 4.0, (2.0 + 0.8) / 4.0};
    const double expect =
        std::pow(4.0, 2.0) * (v[box.index(std::span<const std::int64_t>(zp.data(), 2))] -
                              v[box.index(std::span<const std::int64_t>(z.data(), 2))]);
    CHECK(f.gradient(y, 0) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("discrete and continuum energies of the interpolant coincide") {
  SUBCASE("random profile and vector on a 5-site path") {
    const auto box = lattice::build_box(1, 6.0, Domain::unit_cube(1));
    rng::Stream stream(5, 1);
    EdgeValues phi(box);
    phi.fill([&](const Coord&, int) { return 0.5 + stream.next_u01(); });
    const auto v = random_vector(box.size(), 3);
    const auto match = energy_match_check(v, phi, box);
    CHECK(match.residual <= 1e-12);
  }
  SUBCASE("d=2 random pairs") {
    const auto box = lattice::build_box(2, 8.0, Domain::unit_cube(2));
    for (int k = 0; k < 20; ++k) {
      rng::Stream stream(6, k);
      EdgeValues phi(box);
      phi.fill([&](const Coord&, int) { return 0.3 + 2.0 * stream.next_u01(); });
      const auto v = random_vector(box.size(), 100 + k);
      CHECK(energy_match_check(v, phi, box).residual <= 1e-10);
    }
  }
  SUBCASE("principal eigenfunction: both sides give the scaled Rayleigh numerator") {
    const auto box = lattice::build_box(1, 8.0, Domain::unit_cube(1));
    const auto phi = conductance::unscaled_profile(
        [](std::span<const double> y, int) { return 1.0 + 0.5 * y[0]; }, box);
    auto field = conductance::field_from_edge_values(box, phi);
    const auto eig = spectrum::principal_eigen(spectrum::assemble(field, {}, 64.0));
    const auto match = energy_match_check(eig.eigenvector, phi, box);
    CHECK(match.residual <= 1e-10);
    CHECK(match.discrete == doctest::Approx(eig.value).epsilon(1e-8));
  }
  SUBCASE("zero vector gives 0 = 0") {
    const auto box = lattice::build_box(1, 4.0, Domain::unit_cube(1));
    const auto phi = conductance::unscaled_profile(
        [](std::span<const double>, int) { return 1.0; }, box);
    std::vector<double> v(box.size(), 0.0);
    const auto match = energy_match_check(v, phi, box);
    CHECK(match.discrete == 0.0);
    CHECK(match.continuum == 0.0);
  }
}

TEST_CASE("interpolation correction is bounded by the weighted discrete energy") {
  SUBCASE("constant vector: correction lives near the boundary and obeys the bound") {
    const auto box = lattice::cube_box(2, 5);
    const auto phi = conductance::unscaled_profile(
        [](std::span<const double>, int) { return 1.0; },
        box);
    std::vector<double> v(box.size(), 0.3);
    const auto res = interpolation_residual(v, phi, box, 1.0);
    CHECK(res.holds);
    CHECK(res.lhs > 0.0);  // boundary cells do contribute
  }
  SUBCASE("random vectors on an 8x8 box") {
    const auto box = lattice::build_box(2, 9.0, Domain::unit_cube(2));
    const auto phi = conductance::unscaled_profile(
        [](std::span<const double> y, int dir) { return 0.8 + 0.4 * y[dir]; }, box);
    for (int k = 0; k < 10; ++k) {
      const auto v = random_vector(box.size(), 50 + k);
      const auto res = interpolation_residual(v, phi, box, 0.8);
      CHECK(res.holds);
    }
  }
  SUBCASE("smooth source: correction-to-energy ratio decays under refinement") {
    double prev_ratio = std::numeric_limits<double>::infinity();
    for (const double alpha : {8.0, 16.0, 32.0}) {
      const auto box = lattice::build_box(1, alpha, Domain::unit_cube(1));
      std::vector<double> v(box.size());
      for (std::int64_t k = 0; k < box.size(); ++k)
        v[k] = std::sin(kPi * static_cast<double>(box.site(k)[0]) / alpha);
      const auto phi = conductance::unscaled_profile(
          [](std::span<const double>, int) { return 1.0; }, box);
      const auto res = interpolation_residual(v, phi, box, 1.0);
      // correction is O(alpha^-2) relative to the scaled energy alpha^2 (phi dv, dv)
      const double ratio = res.lhs / (alpha * alpha * res.bound);
      CHECK(ratio < prev_ratio);
      prev_ratio = ratio;
    }
  }
  SUBCASE("m above the profile minimum is rejected") {
    const auto box = lattice::cube_box(1, 2);
    const auto phi = conductance::unscaled_profile(
        [](std::span<const double>, int) { return 0.5; }, box);
    std::vector<double> v(box.size(), 1.0);
    CHECK_THROWS_AS(interpolation_residual(v, phi, box, 0.7), std::invalid_argument);
  }
}

TEST_CASE("spectral convergence experiment on the unit interval") {
  const std::vector<double> sizes{16.0, 32.0, 64.0};
  SUBCASE("unit conductances: alpha^2 lambda_1 -> pi^2 and distances decrease") {
    const auto res = spectral_convergence_experiment(
        constant_model(1.0), [](std::span<const double>) { return 0.0; }, 1, 3, sizes, 2,
        11);
    REQUIRE(res.sizes.size() == 3);
    // last size within 0.5% of pi^2
    CHECK(std::abs(res.lambda_by_size[2][0] - kPi * kPi) / (kPi * kPi) < 5e-3);
    // eigenvalues ordered with a stable first gap
    for (std::size_t s = 0; s < res.sizes.size(); ++s) {
      CHECK(res.lambda_by_size[s][1] > res.lambda_by_size[s][0]);
      CHECK(res.lambda_by_size[s][1] - res.lambda_by_size[s][0] > 1.0);
    }
    // eigenfunction distances decrease with size
    CHECK(res.eigenfunction_distance[1] < res.eigenfunction_distance[0]);
    CHECK(res.eigenfunction_distance[2] < res.eigenfunction_distance[1]);
    // calibration: c_eff for a == 1 is 2
    CHECK(std::abs(res.c_eff - 2.0) < 0.01);
    // reference eigenvalues near (c_eff/2) j^2 pi^2
    CHECK(std::abs(res.lambda_reference[0] - kPi * kPi) / (kPi * kPi) < 5e-3);
  }
  SUBCASE("a constant potential shifts every eigenvalue exactly") {
    const auto base = spectral_convergence_experiment(
        constant_model(1.0), [](std::span<const double>) { return 0.0; }, 1, 2, sizes, 1, 11);
    const auto shifted = spectral_convergence_experiment(
        constant_model(1.0), [](std::span<const double>) { return 0.9; }, 1, 2, sizes, 1, 11);
    for (std::size_t s = 0; s < sizes.size(); ++s)
      for (int j = 0; j < 2; ++j)
        CHECK(shifted.lambda_by_size[s][j] ==
              doctest::Approx(base.lambda_by_size[s][j] + 0.9).epsilon(1e-8));
  }
}

TEST_CASE("effective conductivity estimates") {
  SUBCASE("constant environment: c_eff = 2c") {
    for (const double c : {1.0, 0.5}) {
      const std::vector<double> sizes{128.0};
      const auto est = estimate_c_eff(constant_model(c), 1, sizes, 1, 3);
      CHECK(std::abs(est.value - 2.0 * c) <= 2e-3 * c);
    }
  }
  SUBCASE("two-point law: fitted value near the harmonic-mean oracle") {
    const auto model = EllipticModel::two_point(0.5, 1.5);
    CHECK(harmonic_mean_c_eff(model) == doctest::Approx(1.5).epsilon(1e-14));
    const std::vector<double> sizes{128.0};
    const auto est = estimate_c_eff(model, 1, sizes, 16, 2025);
    CHECK(std::abs(est.value - 1.5) / 1.5 < 0.05);
    CHECK(est.ci_lo < est.value);
    CHECK(est.ci_hi > est.value);
  }
  SUBCASE("closed-form harmonic means") {
    CHECK(harmonic_mean_c_eff(constant_model(0.7)) == doctest::Approx(1.4));
    const auto uni = EllipticModel::uniform(0.5);
    CHECK(harmonic_mean_c_eff(uni) ==
          doctest::Approx(2.0 * 1.5 / std::log(4.0)).epsilon(1e-12));
  }
  SUBCASE("d=2 near-constant environment sits in the ellipticity bracket") {
    const auto model = EllipticModel::uniform(0.9);
    const double alpha = 24.0;
    const std::vector<double> sizes{alpha};
    const auto est = estimate_c_eff(model, 2, sizes, 4, 7);
    const auto box = lattice::build_box(2, alpha, Domain::unit_cube(2));
    const double unit =
        spectrum::principal_eigen(spectrum::assemble(constant_field(box, 1.0))).value;
    const double base = 2.0 * alpha * alpha * unit / (2.0 * kPi * kPi);
    CHECK(est.value >= 0.9 * base - 1e-9);
    CHECK(est.value <= base / 0.9 + 1e-9);
  }
  SUBCASE("no sizes is an error") {
    const std::vector<double> sizes;
    CHECK_THROWS_AS(estimate_c_eff(EllipticModel::uniform(0.5), 1, sizes, 1, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("monotone ellipticity bracket holds per sampled field") {
  const auto box = lattice::build_box(2, 10.0, Domain::unit_cube(2));
  const double unit =
      spectrum::principal_eigen(spectrum::assemble(constant_field(box, 1.0))).value;
  const double lambda = 0.6;
  for (int e = 0; e < 5; ++e) {
    const auto field = sample_field(box, EllipticModel::uniform(lambda), 40 + e);
    const double lam = spectrum::principal_eigen(spectrum::assemble(field)).value;
    CHECK(lam >= lambda * unit - 1e-12);
    CHECK(lam <= unit / lambda + 1e-12);
  }
}

TEST_CASE("principal eigenfunction stays positive at the origin-adjacent site") {
  for (const double alpha : {8.0, 16.0, 32.0}) {
    const auto box = lattice::build_box(1, alpha, Domain::unit_cube(1));
    const auto field = sample_field(box, EllipticModel::uniform(0.5), 9);
    const auto eig = spectrum::principal_eigen(spectrum::assemble(field));
    Coord z{1};
    CHECK(eig.eigenvector[box.index(std::span<const std::int64_t>(z.data(), 1))] > 0.0);
  }
}

TEST_CASE("quenched rate function") {
  const int N = 200;
  const auto f = varprob::GridFunction::from_function(
      Domain::unit_cube(1), N,
      [](std::span<const double> y) { return std::sqrt(2.0) * std::sin(kPi * y[0]); });
  SUBCASE("the grid minimizer has rate zero") {
    // the discretized sine is exactly the grid eigenvector, so the centered
    // rate vanishes up to round-off
    CHECK(std::abs(quenched_rate(f, 1.7)) <= 1e-8);
  }
  SUBCASE("doubling c_eff doubles the rate") {
    auto g = varprob::GridFunction::from_function(
        Domain::unit_cube(1), N, [](std::span<const double> y) {
          return y[0] < 0.5 ? 2.0 * y[0] : 2.0 * (1.0 - y[0]);
        });
    // normalize on the grid
    const double norm = g.l2_norm();
    for (auto& v : g.values) v /= norm;
    const double r1 = quenched_rate(g, 1.0);
    const double r2 = quenched_rate(g, 2.0);
    CHECK(r1 > 0.0);
    CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-12));
  }
  SUBCASE("non-normalized input is an error") {
    auto g = f;
    for (auto& v : g.values) v *= 1.1;
    CHECK_THROWS_AS(quenched_rate(g, 1.0), std::invalid_argument);
  }
}

TEST_CASE("spectral convergence experiment runs in d=2 with random environments") {
  const std::vector<double> sizes{6.0, 10.0};
  const auto res = spectral_convergence_experiment(
      EllipticModel::uniform(0.8), [](std::span<const double>) { return 0.0; }, 2, 2, sizes,
      2, 5);
  REQUIRE(res.lambda_by_size.size() == 2);
  for (const auto& lams : res.lambda_by_size) CHECK(lams[1] > lams[0]);
  // ellipticity bracket around the unit-conductance calibration, with slack
  // for the coarse sizes
  CHECK(res.c_eff > 2.0 * 0.8 * 0.8);
  CHECK(res.c_eff < 2.0 / (0.8 * 0.8));
  REQUIRE(res.lambda_reference.size() == 2);
  CHECK(res.lambda_reference[1] > res.lambda_reference[0]);
}
