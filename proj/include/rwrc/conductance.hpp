#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "rwrc/lattice.hpp"

namespace rwrc::conductance {

using lattice::Coord;
using lattice::Domain;
using lattice::kMaxDim;
using lattice::LatticeBox;

// Lower-tail law log Pr(a <= eps) = -D eps^-eta, exactly, for eps < cap.
// Sampled as a = min((D/E)^{1/eta}, cap) with E ~ Exponential(1).
struct TailModel {
  double eta = 1.0;
  double D = 1.0;
  double cap = 1.0;
};

struct Law {
  enum class Kind { Uniform, TwoPoint, Constant };
  Kind kind = Kind::Uniform;
  double a = 0.0, b = 0.0;  // Uniform: [a,b]; TwoPoint: {a,b}; Constant: a
  double p = 0.5;           // TwoPoint: probability of a
};

// Uniformly elliptic i.i.d. conductances with values in [lambda, 1/lambda].
struct EllipticModel {
  double lambda = 0.5;
  Law law{Law::Kind::Uniform, 0.5, 2.0, 0.5};

  static EllipticModel uniform(double lambda);
  static EllipticModel two_point(double v1, double v2, double p = 0.5);
};

struct ConstantModel {
  double value = 1.0;
};

using Model = std::variant<std::monostate, TailModel, EllipticModel, ConstantModel>;

// Pure transforms, exposed so tests can force the underlying draws.
double tail_transform(double exponential_draw, const TailModel& m);
double elliptic_transform(double u01_draw, const EllipticModel& m);
double sample_edge_value(const Model& m, std::uint64_t seed,
                         std::span<const std::int64_t> z, int dir);

// Values attached to directed edges (z, z+e_dir) whose edge touches the box:
// for direction i the base site z ranges over coordinate intervals
// [lo_i - 1, hi_i] in coordinate i and [lo_j, hi_j] otherwise.
class EdgeValues {
 public:
  EdgeValues() = default;
  explicit EdgeValues(const LatticeBox& box);

  int dim() const { return d_; }
  bool covers(std::span<const std::int64_t> z, int dir) const;
  double at(std::span<const std::int64_t> z, int dir) const;
  double& at(std::span<const std::int64_t> z, int dir);
  std::int64_t edge_count() const;

  template <typename F>  // F(const Coord&, int dir, double value)
  void for_each(F&& f) const {
    for (int dir = 0; dir < d_; ++dir) {
      const auto& g = grids_[dir];
      Coord z{};
      for (int i = 0; i < d_; ++i) z[i] = g.lo[i];
      for (std::int64_t k = 0; k < g.count; ++k) {
        f(static_cast<const Coord&>(z), dir, g.v[static_cast<std::size_t>(k)]);
        for (int i = d_ - 1; i >= 0; --i) {
          if (++z[i] <= g.hi[i]) break;
          z[i] = g.lo[i];
        }
      }
    }
  }

  template <typename F>  // F(const Coord&, int dir) -> double
  void fill(F&& f) {
    for (int dir = 0; dir < d_; ++dir) {
      auto& g = grids_[dir];
      Coord z{};
      for (int i = 0; i < d_; ++i) z[i] = g.lo[i];
      for (std::int64_t k = 0; k < g.count; ++k) {
        g.v[static_cast<std::size_t>(k)] = f(static_cast<const Coord&>(z), dir);
        for (int i = d_ - 1; i >= 0; --i) {
          if (++z[i] <= g.hi[i]) break;
          z[i] = g.lo[i];
        }
      }
    }
  }

 private:
  struct DirGrid {
    std::array<std::int64_t, kMaxDim> lo{}, hi{}, stride{};
    std::int64_t count = 0;
    std::vector<double> v;
  };
  int d_ = 0;
  std::array<DirGrid, kMaxDim> grids_;
};

// One undirected positive weight per lattice edge, stored at the
// lexicographically smaller endpoint; edges with at least one endpoint in
// the box are materialized. When a sampling model is attached, weights of
// edges beyond the stored range are reproduced on demand from the same
// (seed, edge) hash, which extends the environment consistently to Z^d.
class ConductanceField {
 public:
  ConductanceField() = default;
  ConductanceField(LatticeBox box, EdgeValues weights, Model model, std::uint64_t seed);

  const LatticeBox& box() const { return box_; }
  const EdgeValues& weights() const { return weights_; }
  const Model& model() const { return model_; }
  std::uint64_t seed() const { return seed_; }

  double weight(std::span<const std::int64_t> z, int dir) const;
  // Total jump rate at z: sum of the 2d incident edge weights.
  double total_rate(std::span<const std::int64_t> z) const;

 private:
  LatticeBox box_;
  EdgeValues weights_;
  Model model_;
  std::uint64_t seed_ = 0;
};

// I.i.d. weights per (seed, edge); deterministic and box-independent.
ConductanceField sample_field(const LatticeBox& box, const Model& model, std::uint64_t seed);
ConductanceField constant_field(const LatticeBox& box, double value);
ConductanceField field_from_edge_values(const LatticeBox& box, EdgeValues weights);

// Evaluator for a_t(y,e) = beta * a(floor(alpha y), e), y in G.
// Owns a copy of the field so it can outlive the sampling call site.
class RescaledField {
 public:
  RescaledField(ConductanceField field, double beta);
  double beta() const { return beta_; }
  const ConductanceField& field() const { return field_; }
  double operator()(std::span<const double> y, int dir) const;

 private:
  ConductanceField field_;
  double beta_;
};

RescaledField rescaled_field(const ConductanceField& field, double beta);

// phi(y, e), continuous and positive for y in G per direction.
using Profile = std::function<double(std::span<const double>, int)>;

// Cell averages phi_t(z,e) = int_{[0,1]^d} phi((z+y)/alpha, e) dy on every
// edge touching the box, by order-4 tensor Gauss-Legendre. Evaluation points
// of straddling cells are clamped to the closure of G.
EdgeValues unscaled_profile(const Profile& phi, const LatticeBox& box);

using ScalarField = std::function<double(std::span<const double>)>;

// Cell averages of a scalar function, one value per box site (same
// quadrature and clamping convention as unscaled_profile).
std::vector<double> site_cell_averages(const ScalarField& f, const LatticeBox& box);

// sum_e int_G a_t(y,e)^-eta dy, summed cell-wise exactly (a_t is piecewise
// constant; straddling cells enter with their overlap volume).
double tail_functional(const RescaledField& at, double eta);

// True iff phi_t - delta <= beta * a <= phi_t on every stored edge.
bool profile_event_check(const ConductanceField& field, double beta,
                         const EdgeValues& phi_t, double delta);

// -D sum_e int_G phi(y,e)^-eta dy: the claimed liminf of
// log Pr(beta a close to phi_t) / (beta^eta alpha^d).
double profile_event_logprob_bound(const Profile& phi, const Domain& G, double eta, double D);

// Exact probability of the profile event for the tail sampler (product over
// stored edges of the per-edge CDF increment); companion to the bound above.
double profile_event_exact_logprob(const TailModel& m, double beta, const EdgeValues& phi_t,
                                   double delta);

}  // namespace rwrc::conductance
