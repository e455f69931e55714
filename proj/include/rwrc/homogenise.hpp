#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rwrc/conductance.hpp"
#include "rwrc/lattice.hpp"
#include "rwrc/varprob.hpp"

namespace rwrc::homogenise {

using conductance::EdgeValues;
using conductance::EllipticModel;
using conductance::ScalarField;
using lattice::Coord;
using lattice::LatticeBox;

// Piecewise-linear extension of alpha^{d/2} v over the Kuhn triangulation:
// each unit cell splits into d! simplices indexed by the descending order of
// the fractional coordinates (ties broken lexicographically). The gradient
// accessor returns the forward-difference field
// alpha^{1+d/2} [v(floor(alpha y)+e) - v(floor(alpha y))], constant per cell.
class InterpolatedFunction {
 public:
  InterpolatedFunction(LatticeBox box, std::vector<double> v);

  const LatticeBox& box() const { return box_; }
  const std::vector<double>& source() const { return v_; }

  double evaluate(std::span<const double> y) const;
  double gradient(std::span<const double> y, int dir) const;

  // Interpolation correction at x (lattice units): evaluate(x/alpha) minus
  // the step term alpha^{d/2} v(floor(x)).
  double correction(std::span<const double> x) const;

  double source_value(std::span<const std::int64_t> z) const;  // 0 outside the box

 private:
  LatticeBox box_;
  std::vector<double> v_;
};

InterpolatedFunction kuhn_interpolate(std::span<const double> v, const LatticeBox& box);

struct EnergyMatch {
  double discrete = 0.0;   // -alpha^2 (Delta^{phi_t} v, v)
  double continuum = 0.0;  // sum_e int phi_t(floor(alpha y), e) (d_e f_t)^2 dy
  double residual = 0.0;   // relative difference
};

EnergyMatch energy_match_check(std::span<const double> v, const EdgeValues& phi_t,
                               const LatticeBox& box);

struct InterpolationResidual {
  double lhs = 0.0;    // alpha^d || sum_i g_i(alpha .) ||_2^2, exact per-simplex integral
  double bound = 0.0;  // m^-1 sum_{z,e} phi_t(z,e) [v(z+e)-v(z)]^2
  bool holds = false;
};

InterpolationResidual interpolation_residual(std::span<const double> v, const EdgeValues& phi_t,
                                             const LatticeBox& box, double m);

struct HomogenisationResult {
  std::vector<double> sizes;
  std::vector<std::vector<double>> lambda_by_size;  // [size][j], environment means
  std::vector<double> lambda_reference;             // fine-grid -(c_eff/2)Lap + V values
  std::vector<double> eigenfunction_distance;       // per size; NaN when no analytic reference
  double c_eff = 0.0;
  double c_eff_ci_lo = 0.0;
  double c_eff_ci_hi = 0.0;
};

// Eigenvalues of -alpha^2 Delta^a + V_t on (0,1)^d across sizes with the same
// environments (edge hashing keys the environment globally), collated against
// the homogenized reference -(c_eff/2) Lap + V on a finer grid.
HomogenisationResult spectral_convergence_experiment(const EllipticModel& model,
                                                     const ScalarField& V, int d, int j_max,
                                                     std::span<const double> sizes, int n_env,
                                                     std::uint64_t seed, int threads = 1);

struct CEffEstimate {
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<double> per_size;  // mean estimate per size
};

// Fit c_eff from alpha^2 lambda_1 / lambda_1^{Dirichlet}((0,1)^d) with
// environment averaging, in the units calibrated by a == 1 => c_eff = 2
// (so alpha^2 lambda_1 -> (c_eff/2) d pi^2).
CEffEstimate estimate_c_eff(const EllipticModel& model, int d, std::span<const double> sizes,
                            int n_env, std::uint64_t seed, int threads = 1);

// Closed-form d=1 value 2 / E[1/a] in the same calibration.
double harmonic_mean_c_eff(const EllipticModel& model);

// c_eff (|grad f|^2 - inf over normalized grid functions); f must be grid
// l2-normalized on the unit cube. The infimum is the p=2 grid minimum.
double quenched_rate(const varprob::GridFunction& f, double c_eff);

}  // namespace rwrc::homogenise
