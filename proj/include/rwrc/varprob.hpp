#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "rwrc/lattice.hpp"

namespace rwrc::varprob {

using lattice::Coord;
using lattice::Domain;
using lattice::LatticeBox;

// Tail parameters with the derived gradient exponent p = 2 eta/(1+eta) and
// the rate-function constant K = (1+1/eta)(D eta)^{1/(1+eta)}.
struct RegimeParams {
  double eta = 1.0;
  double D = 1.0;

  RegimeParams(double eta_, double D_);
  double p() const;
  double K() const;
};

// All lattice edges touching the box, endpoints as dense indices (-1 = out).
struct EdgeList {
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  static EdgeList build(const LatticeBox& box);
};

// sum_e sum_z |g(z+e) - g(z)|^p with g = 0 outside the box.
double p_energy(const LatticeBox& box, std::span<const double> g, double p);

double rate_J_d(const LatticeBox& box, std::span<const double> g, const RegimeParams& params);

// Node values on a uniform tensor grid over the closure of G; n cells per
// axis, n+1 nodes including the boundary layer (zero there for Dirichlet
// test functions). Gradients are forward differences per cell.
struct GridFunction {
  Domain G;
  std::array<std::int64_t, lattice::kMaxDim> n{};  // cells per axis
  std::vector<double> values;                      // node-major

  static GridFunction from_function(
      const Domain& G, std::int64_t cells_per_axis,
      const std::function<double(std::span<const double>)>& f);

  double h(int i) const { return (G.hi[i] - G.lo[i]) / static_cast<double>(n[i]); }
  std::int64_t node_count() const;
  std::int64_t cell_count() const;
  double l2_norm() const;  // sqrt(prod(h) * sum_nodes f^2)
};

double rate_J_c(const GridFunction& f, const RegimeParams& params);

using Weight = std::function<double(std::span<const double>, int)>;  // phi(y, e)

// sum_e int_G phi(y,e) (d_e f)^2 dy on the grid (phi at the cell base node).
double rate_I_c_phi(const GridFunction& f, const Weight& phi);

struct VariationalResult {
  double value = 0.0;
  std::vector<double> minimizer;  // l2-normalized, on box sites
  int restarts_used = 0;
  std::vector<double> per_restart_values;
  int smoothing_level = 0;  // index of the last continuation level run
  bool converged = false;
  double stationarity = 0.0;  // Riemannian gradient norm at the reported point
};

struct ChiConfig {
  int restarts = 4;
  int max_iter = 4000;  // per smoothing level
  int smoothing_levels = 8;
  double tol = 1e-10;
  std::uint64_t seed = 0x5eedULL;
  bool use_p2_eigen_start = true;
};

// Characteristic p-energy minimum over l2-normalized g supported in the box,
// by projected gradient descent on the sphere with smoothing continuation
// (|x|^2 + mu^2)^{p/2} and deterministic multi-start. The reported value is
// the exact p-energy of the returned point, hence always a valid upper bound.
VariationalResult solve_chi_d(const LatticeBox& box, double p, const ChiConfig& cfg = {});

struct ChiCLevel {
  double alpha = 0.0;
  double chi_d = 0.0;
  double scaled = 0.0;  // alpha^{(2 eta - d)/(eta+1)} * chi_d
};

struct ChiCResult {
  std::vector<ChiCLevel> levels;
  double extrapolated = 0.0;
  bool monotone = false;
  bool zero_infimum_regime = false;  // eta <= d/2
  std::vector<std::pair<double, double>> witness_curve;  // (parameter, energy)
};

// Scaled discrete values s(alpha) on the given levels with Richardson-style
// extrapolation; for eta <= d/2 returns the zero-infimum marker plus the
// witness-family energy curve instead of an extrapolated limit.
ChiCResult solve_chi_c(int d, const Domain& G, const RegimeParams& params,
                       std::span<const double> levels, const ChiConfig& cfg = {});

struct WitnessResult {
  double l2_norm = 0.0;
  double energy = 0.0;
  bool boundary_case = false;  // d=1 exponent 3p/2-1 vanishes at p = 2/3
};

// d=1 family f_r(x) = A_r (eps0 - |x|)^r on (-eps0, eps0); energy decays
// like r^{3p/2 - 1} for p < 2/3.
WitnessResult witness_d1(double r, double eps0, double p, double grid_h);

// d>=2 family A_eps (|x|^-2gamma - eps^-2gamma)^{1/2} on |x| < eps,
// gamma in (d/4, d/2). The family is exactly self-similar, so its energy
// scales like eps^{(4d - 2pd - 4p)/4}, with zero exponent at the critical
// p = 2d/(d+2).
WitnessResult witness_dge2(double eps, double gamma, int d, double p, double grid_h);

// Exponent of the gamma-dependent analytic upper bound for the d>=2 family.
double witness_dge2_bound_exponent(double p, double gamma, int d);
// Exact self-similar scaling exponent of the family's energy.
double witness_dge2_scaling_exponent(double p, int d);

struct SobolevCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

using SparseVector = std::map<Coord, double>;

// sum g^{d/(d-1)} <= (sum_{z,e} |g(z+e)-g(z)|)^{d/(d-1)} for g >= 0 with
// finite support, d >= 2.
SobolevCheck discrete_sobolev_check(const SparseVector& g, int d);

struct CutoffRow {
  std::int64_t n = 0;
  double renorm = 0.0;
  double energy = 0.0;
};

// Energies of the renormalized cutoffs g_n(z) = g(z) xi(z/n), xi radial
// (1 inside |x| <= 1, linear to 0 on 1 < |x| < 2).
std::vector<CutoffRow> cutoff_convergence(const SparseVector& g, int d, double p,
                                          std::span<const std::int64_t> n_grid);

struct OptimalProfileResult {
  std::array<std::int64_t, lattice::kMaxDim> n{};  // cells per axis
  int d = 0;
  std::vector<double> values;  // cell-major, then direction
  double max_residual_uncapped = 0.0;
  double cap = 0.0;

  double at(std::int64_t cell, int dir) const;
};

// Per-cell minimizer phi = (D eta)^{1/(eta+1)} |d_e f|^{-2/(eta+1)} clamped
// to [1/M, M], with the pointwise identity residual
// | phi (d_e f)^2 + D phi^-eta - K |d_e f|^p | on uncapped cells.
OptimalProfileResult optimal_profile(const GridFunction& f, const RegimeParams& params,
                                     double cap);

}  // namespace rwrc::varprob
