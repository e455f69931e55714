#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rwrc/conductance.hpp"
#include "rwrc/lattice.hpp"

namespace rwrc::walker {

using conductance::ConductanceField;
using conductance::Model;
using lattice::Coord;
using lattice::LatticeBox;

struct TrajectorySample {
  Coord start{};
  std::vector<std::pair<double, Coord>> jumps;  // (jump time, destination)
  double horizon = 0.0;
  bool exited = false;
  double exit_time = 0.0;
};

struct LocalTimeRecord {
  LatticeBox box;
  double horizon = 0.0;
  std::vector<double> in_box;                     // per dense site index
  std::vector<std::pair<Coord, double>> outside;  // visited after leaving the box
  bool exited = false;
  double exit_time = 0.0;

  double total() const;
};

struct SimulationResult {
  TrajectorySample trajectory;
  LocalTimeRecord local_times;
};

// Continuous-time walk: at y, wait Exponential(pi_y) with pi_y the sum of all
// 2d incident conductances (edges leaving the box included), jump to z' with
// probability a_{y,z'}/pi_y. With stop_on_exit the walk is killed at the
// first jump out of the box; otherwise it continues on Z^d, which requires a
// field with an attached sampling model.
SimulationResult simulate(const ConductanceField& field, const Coord& start, double horizon,
                          bool stop_on_exit, std::uint64_t seed);

// Piecewise-constant density L_t(x) = (alpha^d / t) ell_t(floor(alpha x)).
struct StepDensity {
  LatticeBox box;
  double horizon = 0.0;
  std::vector<double> values;  // per site index

  double evaluate(std::span<const double> y) const;
  double integral() const;  // cell-sum over the box
};

StepDensity rescale_local_times(const LocalTimeRecord& rec);

struct NonexitEstimate {
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::int64_t n_exit = 0;
  bool one_sided = false;          // no surviving walk at all
  std::vector<double> per_env;     // per-environment survival frequency
};

// Two-level Monte Carlo for <P_0^a(supp(ell_t) subset B)>: environment-level
// average of per-field survival frequencies, 95% CI on the environment level.
// Environments run on the worker pool; reduction order is fixed.
NonexitEstimate nonexit_mc(const Model& model, const LatticeBox& box, double horizon,
                           int n_env, int n_walks, std::uint64_t seed, int threads = 1);

// The origin when the box contains it, otherwise the central site.
Coord default_start(const LatticeBox& box);

struct FeynmanKacEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t n_exit = 0;
};

// E_0[exp{-(t/alpha^2) int_G V L_t} ; supp(ell_t) subset B] by Monte Carlo,
// the killed-walk counterpart of exp{t(Delta^a - alpha^-2 V_t)} applied to 1.
FeynmanKacEstimate feynman_kac_mc(const ConductanceField& field,
                                  const conductance::ScalarField& V, double horizon,
                                  double alpha, int n_walks, std::uint64_t seed);

}  // namespace rwrc::walker
