#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "rwrc/conductance.hpp"
#include "rwrc/lattice.hpp"

namespace rwrc::spectrum {

using conductance::ConductanceField;
using conductance::TailModel;
using lattice::kMaxDim;
using lattice::LatticeBox;

// Matrix-free symmetric action of laplace_scale * (-Delta^a) + V on the box
// with zero boundary condition: edges leaving the box act as killing terms.
class DirichletOperator {
 public:
  DirichletOperator() = default;

  const LatticeBox& box() const { return box_; }
  std::int64_t size() const { return static_cast<std::int64_t>(diag_.size()); }
  double laplace_scale() const { return laplace_scale_; }
  const std::vector<double>& potential() const { return potential_; }
  const std::vector<double>& diagonal() const { return diag_; }

  void apply(std::span<const double> g, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> g) const;
  double quadratic_form(std::span<const double> g) const;

  // Upper bound on the spectrum (Gershgorin).
  double spectrum_upper_bound() const;

  friend DirichletOperator assemble(const ConductanceField& field,
                                    const std::vector<double>& V, double laplace_scale);

 private:
  LatticeBox box_;
  double laplace_scale_ = 1.0;
  std::vector<double> diag_;
  std::vector<double> potential_;
  std::array<std::vector<double>, kMaxDim> w_;        // weight of edge (z, z+e_i)
  std::array<std::vector<std::int64_t>, kMaxDim> nb_;  // index of z+e_i, or -1
};

// V may be empty (interpreted as zero) or one value per box site.
DirichletOperator assemble(const ConductanceField& field, const std::vector<double>& V = {},
                           double laplace_scale = 1.0);

struct SpectralResult {
  double value = 0.0;
  std::vector<double> eigenvector;  // l2-normalized, positive for the principal pair
  double residual = 0.0;
  int iterations = 0;
};

class EigenSolveError : public std::runtime_error {
 public:
  EigenSolveError(const std::string& what, SpectralResult best)
      : std::runtime_error(what), best_iterate(std::move(best)) {}
  SpectralResult best_iterate;
};

// Smallest eigenpair by shifted inverse power iteration with Jacobi-CG inner
// solves; deterministic all-ones start. tol is an absolute residual bound
// (floored at the round-off level of the operator norm).
SpectralResult principal_eigen(const DirichletOperator& op, double tol = 1e-10);

// First `count` eigenpairs from below, by rank-one spectral deflation.
std::vector<SpectralResult> lowest_eigenpairs(const DirichletOperator& op, int count,
                                              double tol = 1e-10);

// sum_e sum_z a(z,e) (g(z+e)-g(z))^2 with g = 0 outside the box.
double dirichlet_form(const ConductanceField& field, std::span<const double> g);

enum class ExpmMethod { Auto, Dense, Krylov };

// exp(-t * op) applied to g. Dense scaling-and-squaring for small boxes,
// Lanczos-Krylov with full reorthogonalization otherwise.
std::vector<double> semigroup_apply(const DirichletOperator& op, double t,
                                    std::span<const double> g,
                                    ExpmMethod method = ExpmMethod::Auto);

using ScalarField = std::function<double(std::span<const double>)>;

// V_t(z) = int_{[0,1]^d} V((z+y)/alpha) dy per box site (order-4 Gauss).
std::vector<double> discretize_potential(const ScalarField& V, const LatticeBox& box);

// Principal eigenvalue of -alpha^2 Delta^{phi_t} + V_t on the box.
double rescaled_eigen(const conductance::Profile& phi, const ScalarField& V,
                      const LatticeBox& box, double tol = 1e-10);

struct LifshitzRow {
  double eps = 0.0;
  double freq = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double predictor_log = 0.0;  // -D chi^d(B)^{eta+1} eps^-eta, if chi supplied
};

struct LifshitzTable {
  std::vector<LifshitzRow> rows;
  std::vector<double> lambdas;  // principal eigenvalue per environment
  double chi_d = 0.0;           // value used for the predictor (NaN if none)
};

// Empirical Pr(lambda^a(B) <= eps) over environments, with binomial CIs and
// the companion tail predictor when a chi^d(B) value is supplied.
LifshitzTable lifshitz_mc(const TailModel& model, const LatticeBox& box,
                          std::span<const double> eps_grid, int n_env, std::uint64_t seed,
                          double chi_d_value = std::numeric_limits<double>::quiet_NaN(),
                          int threads = 1);

}  // namespace rwrc::spectrum
