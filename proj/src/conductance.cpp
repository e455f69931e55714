#include "rwrc/conductance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rwrc/quadrature.hpp"
#include "rwrc/rng.hpp"

namespace rwrc::conductance {

EllipticModel EllipticModel::uniform(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must be in (0,1)");
  return EllipticModel{lambda, Law{Law::Kind::Uniform, lambda, 1.0 / lambda, 0.5}};
}

EllipticModel EllipticModel::two_point(double v1, double v2, double p) {
  if (!(v1 > 0.0 && v2 > 0.0)) throw std::invalid_argument("two-point values must be positive");
  const double lo = std::min(v1, v2), hi = std::max(v1, v2);
  const double lambda = std::min(lo, 1.0 / hi);
  return EllipticModel{lambda, Law{Law::Kind::TwoPoint, v1, v2, p}};
}

double tail_transform(double exponential_draw, const TailModel& m) {
  if (!(m.eta > 0.0 && m.D > 0.0 && m.cap > 0.0))
    throw std::invalid_argument("tail model parameters must be positive");
  return std::min(std::pow(m.D / exponential_draw, 1.0 / m.eta), m.cap);
}

double elliptic_transform(double u, const EllipticModel& m) {
  switch (m.law.kind) {
    case Law::Kind::Uniform:
      return m.law.a + (m.law.b - m.law.a) * u;
    case Law::Kind::TwoPoint:
      return u < m.law.p ? m.law.a : m.law.b;
    case Law::Kind::Constant:
      return m.law.a;
  }
  throw std::logic_error("unreachable");
}

double sample_edge_value(const Model& m, std::uint64_t seed,
                         std::span<const std::int64_t> z, int dir) {
  const std::uint64_t h = rng::mix(seed, rng::edge_key(z, dir));
  if (const auto* tail = std::get_if<TailModel>(&m))
    return tail_transform(rng::exponential(h), *tail);
  if (const auto* ell = std::get_if<EllipticModel>(&m))
    return elliptic_transform(rng::u01(h), *ell);
  if (const auto* c = std::get_if<ConstantModel>(&m)) return c->value;
  throw std::invalid_argument("field has no sampling model attached");
}

EdgeValues::EdgeValues(const LatticeBox& box) : d_(box.dim()) {
  for (int dir = 0; dir < d_; ++dir) {
    auto& g = grids_[dir];
    g.count = 1;
    for (int i = 0; i < d_; ++i) {
      g.lo[i] = box.lo(i) - (i == dir ? 1 : 0);
      g.hi[i] = box.hi(i);
      g.count *= g.hi[i] - g.lo[i] + 1;
    }
    std::int64_t stride = 1;
    for (int i = d_ - 1; i >= 0; --i) {
      g.stride[i] = stride;
      stride *= g.hi[i] - g.lo[i] + 1;
    }
    g.v.assign(static_cast<std::size_t>(g.count), 0.0);
  }
}

bool EdgeValues::covers(std::span<const std::int64_t> z, int dir) const {
  if (dir < 0 || dir >= d_) return false;
  const auto& g = grids_[dir];
  for (int i = 0; i < d_; ++i)
    if (z[i] < g.lo[i] || z[i] > g.hi[i]) return false;
  return true;
}

double EdgeValues::at(std::span<const std::int64_t> z, int dir) const {
  const auto& g = grids_[dir];
  std::int64_t idx = 0;
  for (int i = 0; i < d_; ++i) idx += (z[i] - g.lo[i]) * g.stride[i];
  return g.v[static_cast<std::size_t>(idx)];
}

double& EdgeValues::at(std::span<const std::int64_t> z, int dir) {
  auto& g = grids_[dir];
  std::int64_t idx = 0;
  for (int i = 0; i < d_; ++i) idx += (z[i] - g.lo[i]) * g.stride[i];
  return g.v[static_cast<std::size_t>(idx)];
}

std::int64_t EdgeValues::edge_count() const {
  std::int64_t n = 0;
  for (int dir = 0; dir < d_; ++dir) n += grids_[dir].count;
  return n;
}

ConductanceField::ConductanceField(LatticeBox box, EdgeValues weights, Model model,
                                   std::uint64_t seed)
    : box_(std::move(box)), weights_(std::move(weights)), model_(std::move(model)), seed_(seed) {}

double ConductanceField::weight(std::span<const std::int64_t> z, int dir) const {
  if (weights_.covers(z, dir)) return weights_.at(z, dir);
  return sample_edge_value(model_, seed_, z, dir);
}

double ConductanceField::total_rate(std::span<const std::int64_t> z) const {
  const int d = box_.dim();
  Coord m{};
  for (int i = 0; i < d; ++i) m[i] = z[i];
  double rate = 0.0;
  for (int dir = 0; dir < d; ++dir) {
    rate += weight(z, dir);
    m[dir] -= 1;
    rate += weight(std::span<const std::int64_t>(m.data(), d), dir);
    m[dir] += 1;
  }
  return rate;
}

ConductanceField sample_field(const LatticeBox& box, const Model& model, std::uint64_t seed) {
  const int d = box.dim();
  EdgeValues out(box);
  out.fill([&](const Coord& z, int dir) {
    return sample_edge_value(model, seed, std::span<const std::int64_t>(z.data(), d), dir);
  });
  return ConductanceField(box, std::move(out), model, seed);
}

ConductanceField constant_field(const LatticeBox& box, double value) {
  if (!(value > 0.0)) throw std::invalid_argument("conductance must be positive");
  return sample_field(box, ConstantModel{value}, 0);
}

ConductanceField field_from_edge_values(const LatticeBox& box, EdgeValues weights) {
  bool positive = true;
  weights.for_each([&](const Coord&, int, double w) { positive = positive && w > 0.0; });
  if (!positive) throw std::invalid_argument("edge weights must be strictly positive");
  return ConductanceField(box, std::move(weights), std::monostate{}, 0);
}

RescaledField::RescaledField(ConductanceField field, double beta)
    : field_(std::move(field)), beta_(beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
}

double RescaledField::operator()(std::span<const double> y, int dir) const {
  const auto& box = field_.box();
  const auto& G = box.domain();
  Coord z{};
  for (int i = 0; i < box.dim(); ++i) {
    if (!(y[i] > G.lo[i] && y[i] < G.hi[i]))
      throw std::invalid_argument("evaluation point outside G");
    z[i] = static_cast<std::int64_t>(std::floor(box.alpha() * y[i]));
  }
  return beta_ * field_.weight(std::span<const std::int64_t>(z.data(), box.dim()), dir);
}

RescaledField rescaled_field(const ConductanceField& field, double beta) {
  return RescaledField(field, beta);
}

EdgeValues unscaled_profile(const Profile& phi, const LatticeBox& box) {
  const int d = box.dim();
  const auto& G = box.domain();
  std::array<double, kMaxDim> pt{};
  EdgeValues out(box);
  out.fill([&](const Coord& z, int dir) {
    return quadrature::cell_average(
        [&](std::span<const double> y) {
          for (int i = 0; i < d; ++i) pt[i] = std::clamp(y[i], G.lo[i], G.hi[i]);
          const double v = phi(std::span<const double>(pt.data(), d), dir);
          if (!(v > 0.0)) throw std::invalid_argument("profile must be strictly positive");
          return v;
        },
        std::span<const std::int64_t>(z.data(), d), box.alpha());
  });
  return out;
}

std::vector<double> site_cell_averages(const ScalarField& f, const LatticeBox& box) {
  const int d = box.dim();
  const auto& G = box.domain();
  std::vector<double> out(static_cast<std::size_t>(box.size()));
  std::array<double, kMaxDim> pt{};
  for (std::int64_t k = 0; k < box.size(); ++k) {
    const Coord z = box.site(k);
    out[static_cast<std::size_t>(k)] = quadrature::cell_average(
        [&](std::span<const double> y) {
          for (int i = 0; i < d; ++i) pt[i] = std::clamp(y[i], G.lo[i], G.hi[i]);
          return f(std::span<const double>(pt.data(), d));
        },
        std::span<const std::int64_t>(z.data(), d), box.alpha());
  }
  return out;
}

namespace {

// Ranges and overlap volumes of unit cells [z, z+1) against alpha*G.
struct CellCover {
  std::array<std::int64_t, kMaxDim> lo{}, hi{};
  const LatticeBox* box;

  explicit CellCover(const LatticeBox& b) : box(&b) {
    const auto& G = b.domain();
    for (int i = 0; i < b.dim(); ++i) {
      lo[i] = lattice::strict_int_above(b.alpha() * G.lo[i] - 1.0);
      hi[i] = lattice::strict_int_below(b.alpha() * G.hi[i]);
    }
  }

  double volume(std::span<const std::int64_t> z) const {
    const auto& G = box->domain();
    double vol = 1.0;
    for (int i = 0; i < box->dim(); ++i) {
      const double a = box->alpha() * G.lo[i];
      const double c = box->alpha() * G.hi[i];
      double seg = std::min(static_cast<double>(z[i]) + 1.0, c) -
                   std::max(static_cast<double>(z[i]), a);
      if (seg > 1.0 - 1e-9) seg = 1.0;  // snap full cells
      if (seg <= 1e-12) return 0.0;
      vol *= seg;
    }
    return vol;
  }
};

}  // namespace

double tail_functional(const RescaledField& at, double eta) {
  const auto& field = at.field();
  const auto& box = field.box();
  const int d = box.dim();
  const CellCover cover(box);
  const double cell_vol = std::pow(box.alpha(), -d);

  double total = 0.0;
  Coord z{};
  for (int i = 0; i < d; ++i) z[i] = cover.lo[i];
  while (true) {
    const auto zs = std::span<const std::int64_t>(z.data(), d);
    const double vol = cover.volume(zs) * cell_vol;
    if (vol > 0.0) {
      for (int dir = 0; dir < d; ++dir)
        total += vol * std::pow(at.beta() * field.weight(zs, dir), -eta);
    }
    int i = d - 1;
    for (; i >= 0; --i) {
      if (++z[i] <= cover.hi[i]) break;
      z[i] = cover.lo[i];
    }
    if (i < 0) break;
  }
  return total;
}

bool profile_event_check(const ConductanceField& field, double beta, const EdgeValues& phi_t,
                         double delta) {
  double min_phi = std::numeric_limits<double>::infinity();
  phi_t.for_each([&](const Coord&, int, double v) { min_phi = std::min(min_phi, v); });
  if (!(delta < min_phi)) throw std::invalid_argument("delta must be below min of profile");
  const int d = field.box().dim();
  bool ok = true;
  phi_t.for_each([&](const Coord& z, int dir, double phi) {
    const double v = beta * field.weight(std::span<const std::int64_t>(z.data(), d), dir);
    if (v > phi || v < phi - delta) ok = false;
  });
  return ok;
}

double profile_event_logprob_bound(const Profile& phi, const Domain& G, double eta, double D) {
  // composite order-4 Gauss-Legendre, 24 subintervals per axis
  const int d = G.d;
  const int n = d >= 3 ? 12 : 24;
  std::array<double, kMaxDim> h{};
  for (int i = 0; i < d; ++i) h[i] = (G.hi[i] - G.lo[i]) / n;

  double total = 0.0;
  std::array<int, kMaxDim> cell{};
  while (true) {
    // tensor GL nodes in this subcell
    std::array<std::size_t, kMaxDim> idx{};
    while (true) {
      double w = 1.0;
      std::array<double, kMaxDim> y{};
      for (int i = 0; i < d; ++i) {
        y[i] = G.lo[i] + (cell[i] + quadrature::kGaussNodes01[idx[i]]) * h[i];
        w *= quadrature::kGaussWeights01[idx[i]] * h[i];
      }
      for (int dir = 0; dir < d; ++dir)
        total += w * std::pow(phi(std::span<const double>(y.data(), d), dir), -eta);
      int i = 0;
      for (; i < d; ++i) {
        if (++idx[i] < quadrature::kGaussNodes01.size()) break;
        idx[i] = 0;
      }
      if (i == d) break;
    }
    int i = 0;
    for (; i < d; ++i) {
      if (++cell[i] < n) break;
      cell[i] = 0;
    }
    if (i == d) break;
  }
  return -D * total;
}

double profile_event_exact_logprob(const TailModel& m, double beta, const EdgeValues& phi_t,
                                   double delta) {
  double min_phi = std::numeric_limits<double>::infinity();
  phi_t.for_each([&](const Coord&, int, double v) { min_phi = std::min(min_phi, v); });
  if (!(delta < min_phi)) throw std::invalid_argument("delta must be below min of profile");
  double logp = 0.0;
  phi_t.for_each([&](const Coord&, int, double phi) {
    const double up = phi / beta;
    const double lo = (phi - delta) / beta;
    auto cdf = [&](double x) {
      if (x <= 0.0) return 0.0;
      if (x >= m.cap) return 1.0;
      return std::exp(-m.D * std::pow(x, -m.eta));
    };
    const double p = cdf(up) - cdf(lo);
    logp += std::log(std::max(p, 1e-300));
  });
  return logp;
}

}  // namespace rwrc::conductance
