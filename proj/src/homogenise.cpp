#include "rwrc/homogenise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rwrc/parallel.hpp"
#include "rwrc/rng.hpp"
#include "rwrc/spectrum.hpp"

namespace rwrc::homogenise {

namespace {

constexpr double kPi = 3.14159265358979323846;

// descending order of fractional parts, ties lexicographic
void simplex_order(std::span<const double> frac, int d, std::array<int, lattice::kMaxDim>& order) {
  for (int i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.begin() + d, [&](int a, int b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return a < b;
  });
}

}  // namespace

InterpolatedFunction::InterpolatedFunction(LatticeBox box, std::vector<double> v)
    : box_(std::move(box)), v_(std::move(v)) {
  if (static_cast<std::int64_t>(v_.size()) != box_.size())
    throw std::invalid_argument("vector size mismatch");
}

double InterpolatedFunction::source_value(std::span<const std::int64_t> z) const {
  return box_.contains(z) ? v_[static_cast<std::size_t>(box_.index(z))] : 0.0;
}

double InterpolatedFunction::correction(std::span<const double> x) const {
  const int d = box_.dim();
  Coord z{};
  std::array<double, lattice::kMaxDim> frac{};
  for (int i = 0; i < d; ++i) {
    z[i] = static_cast<std::int64_t>(std::floor(x[i]));
    frac[i] = x[i] - static_cast<double>(z[i]);
  }
  std::array<int, lattice::kMaxDim> order{};
  simplex_order(std::span<const double>(frac.data(), d), d, order);

  double acc = 0.0;
  Coord corner = z;
  double prev = source_value(std::span<const std::int64_t>(z.data(), d));
  for (int i = 0; i < d; ++i) {
    corner[order[i]] += 1;
    const double next = source_value(std::span<const std::int64_t>(corner.data(), d));
    acc += frac[order[i]] * (next - prev);
    prev = next;
  }
  return acc;
}

double InterpolatedFunction::evaluate(std::span<const double> y) const {
  const int d = box_.dim();
  const double scale = std::pow(box_.alpha(), 0.5 * d);
  std::array<double, lattice::kMaxDim> x{};
  Coord z{};
  for (int i = 0; i < d; ++i) {
    x[i] = box_.alpha() * y[i];
    z[i] = static_cast<std::int64_t>(std::floor(x[i]));
  }
  return scale * (source_value(std::span<const std::int64_t>(z.data(), d)) +
                  correction(std::span<const double>(x.data(), d)));
}

double InterpolatedFunction::gradient(std::span<const double> y, int dir) const {
  const int d = box_.dim();
  Coord z{};
  for (int i = 0; i < d; ++i) z[i] = static_cast<std::int64_t>(std::floor(box_.alpha() * y[i]));
  Coord zp = z;
  zp[dir] += 1;
  return std::pow(box_.alpha(), 1.0 + 0.5 * d) *
         (source_value(std::span<const std::int64_t>(zp.data(), d)) -
          source_value(std::span<const std::int64_t>(z.data(), d)));
}

InterpolatedFunction kuhn_interpolate(std::span<const double> v, const LatticeBox& box) {
  return InterpolatedFunction(box, std::vector<double>(v.begin(), v.end()));
}

EnergyMatch energy_match_check(std::span<const double> v, const EdgeValues& phi_t,
                               const LatticeBox& box) {
  const int d = box.dim();
  const double alpha = box.alpha();

  auto field = conductance::field_from_edge_values(box, phi_t);
  const auto op = spectrum::assemble(field, {}, alpha * alpha);
  EnergyMatch out;
  out.discrete = op.quadratic_form(v);

  const InterpolatedFunction f = kuhn_interpolate(v, box);
  const double cell_vol = std::pow(alpha, -d);
  std::array<double, lattice::kMaxDim> y{};
  double continuum = 0.0;
  phi_t.for_each([&](const Coord& z, int dir, double phi) {
    for (int i = 0; i < d; ++i) y[i] = (static_cast<double>(z[i]) + 0.5) / alpha;
    const double g = f.gradient(std::span<const double>(y.data(), d), dir);
    continuum += cell_vol * phi * g * g;
  });
  out.continuum = continuum;
  out.residual = std::abs(out.discrete - out.continuum) /
                 std::max({std::abs(out.discrete), std::abs(out.continuum), 1e-300});
  return out;
}

InterpolationResidual interpolation_residual(std::span<const double> v, const EdgeValues& phi_t,
                                             const LatticeBox& box, double m) {
  const int d = box.dim();
  double min_phi = std::numeric_limits<double>::infinity();
  phi_t.for_each([&](const Coord&, int, double w) { min_phi = std::min(min_phi, w); });
  if (!(m > 0.0) || m > min_phi * (1.0 + 1e-12))
    throw std::invalid_argument("m must be a positive lower bound of the profile");

  const InterpolatedFunction f = kuhn_interpolate(v, box);

  // exact integral of the piecewise-linear correction squared:
  // per simplex, int l^2 = vol * ((sum c)^2 + sum c^2) / ((d+1)(d+2))
  double lhs = 0.0;
  std::array<std::int64_t, lattice::kMaxDim> lo{}, hi{};
  for (int i = 0; i < d; ++i) {
    lo[i] = box.lo(i) - 1;
    hi[i] = box.hi(i);
  }
  double dfact = 1.0;
  for (int i = 2; i <= d; ++i) dfact *= i;
  const double simplex_vol = 1.0 / dfact;
  const double denom = static_cast<double>((d + 1) * (d + 2));

  Coord z{};
  for (int i = 0; i < d; ++i) z[i] = lo[i];
  std::array<int, lattice::kMaxDim> perm{};
  while (true) {
    const double base = f.source_value(std::span<const std::int64_t>(z.data(), d));
    // iterate all permutations of {0..d-1}
    for (int i = 0; i < d; ++i) perm[i] = i;
    do {
      double sum_c = 0.0, sum_c2 = 0.0;
      Coord corner = z;
      for (int i = 0; i < d; ++i) {
        corner[perm[i]] += 1;
        const double c =
            f.source_value(std::span<const std::int64_t>(corner.data(), d)) - base;
        sum_c += c;
        sum_c2 += c * c;
      }
      lhs += simplex_vol * (sum_c * sum_c + sum_c2) / denom;
    } while (std::next_permutation(perm.begin(), perm.begin() + d));

    int i = d - 1;
    for (; i >= 0; --i) {
      if (++z[i] <= hi[i]) break;
      z[i] = lo[i];
    }
    if (i < 0) break;
  }

  double energy = 0.0;
  phi_t.for_each([&](const Coord& zz, int dir, double phi) {
    Coord zp = zz;
    zp[dir] += 1;
    const double diff = f.source_value(std::span<const std::int64_t>(zp.data(), d)) -
                        f.source_value(std::span<const std::int64_t>(zz.data(), d));
    energy += phi * diff * diff;
  });

  InterpolationResidual out;
  out.lhs = lhs;
  out.bound = energy / m;
  out.holds = out.lhs <= out.bound * (1.0 + 1e-12);
  return out;
}

namespace {

struct MeanCi {
  double mean = 0.0, lo = 0.0, hi = 0.0;
};

MeanCi mean_ci(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0.0;
  for (const double x : xs) var += (x - mean) * (x - mean);
  var = xs.size() > 1 ? var / (n - 1.0) : 0.0;
  const double se = std::sqrt(var / n);
  return {mean, mean - 1.96 * se, mean + 1.96 * se};
}

}  // namespace

HomogenisationResult spectral_convergence_experiment(const EllipticModel& model,
                                                     const ScalarField& V, int d, int j_max,
                                                     std::span<const double> sizes, int n_env,
                                                     std::uint64_t seed, int threads) {
  if (sizes.empty() || n_env < 1 || j_max < 1)
    throw std::invalid_argument("need sizes, environments and j_max >= 1");
  const auto G = lattice::Domain::unit_cube(d);

  HomogenisationResult out;
  std::vector<double> ceff_samples;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const double alpha = sizes[si];
    const LatticeBox box = lattice::build_box(d, alpha, G);
    const auto Vt = conductance::site_cell_averages(V, box);
    double v_max = 0.0;
    for (const double x : Vt) v_max = std::max(v_max, std::abs(x));
    const bool zero_potential = v_max == 0.0;
    const double a2 = alpha * alpha;
    const double tol = 1e-9 * std::max(1.0, a2);

    std::vector<std::vector<double>> lam_env(static_cast<std::size_t>(n_env));
    std::vector<double> dist_env(static_cast<std::size_t>(n_env), 0.0);
    std::vector<double> ceff_env(static_cast<std::size_t>(n_env), 0.0);
    parallel::for_each_index(n_env, threads, [&](std::int64_t e) {
      // same env seed across sizes: the environment is shared, only the box grows
      const auto field = conductance::sample_field(box, model, rng::mix(seed, e));
      const auto eigs =
          spectrum::lowest_eigenpairs(spectrum::assemble(field, Vt, a2), j_max, tol);
      auto& lams = lam_env[static_cast<std::size_t>(e)];
      for (int j = 0; j < j_max; ++j) lams.push_back(eigs[static_cast<std::size_t>(j)].value);

      if (zero_potential) {
        // distance to alpha^{-d/2} v_1(z/(alpha+1)) with v_1 = prod sqrt(2) sin(pi x_i)
        const auto& v1 = eigs[0].eigenvector;
        double dist2 = 0.0;
        const double scale = std::pow(alpha, -0.5 * d);
        for (std::int64_t k = 0; k < box.size(); ++k) {
          const Coord z = box.site(k);
          double ref = scale;
          for (int i = 0; i < d; ++i)
            ref *= std::sqrt(2.0) *
                   std::sin(kPi * static_cast<double>(z[i]) / (alpha + 1.0));
          const double diff = v1[static_cast<std::size_t>(k)] - ref;
          dist2 += diff * diff;
        }
        dist_env[static_cast<std::size_t>(e)] = std::sqrt(dist2);
        if (si + 1 == sizes.size())
          ceff_env[static_cast<std::size_t>(e)] = 2.0 * eigs[0].value / (d * kPi * kPi);
      } else if (si + 1 == sizes.size()) {
        const auto base = spectrum::principal_eigen(spectrum::assemble(field, {}, a2), tol);
        ceff_env[static_cast<std::size_t>(e)] = 2.0 * base.value / (d * kPi * kPi);
      }
    });
    std::vector<double> lam_mean(static_cast<std::size_t>(j_max), 0.0);
    double dist_mean = 0.0;
    for (int e = 0; e < n_env; ++e) {
      for (int j = 0; j < j_max; ++j)
        lam_mean[static_cast<std::size_t>(j)] +=
            lam_env[static_cast<std::size_t>(e)][static_cast<std::size_t>(j)] / n_env;
      dist_mean += dist_env[static_cast<std::size_t>(e)] / n_env;
    }
    if (si + 1 == sizes.size())
      ceff_samples.assign(ceff_env.begin(), ceff_env.end());
    out.sizes.push_back(alpha);
    out.lambda_by_size.push_back(std::move(lam_mean));
    out.eigenfunction_distance.push_back(
        zero_potential ? dist_mean : std::numeric_limits<double>::quiet_NaN());
  }

  const auto ci = mean_ci(ceff_samples);
  out.c_eff = ci.mean;
  out.c_eff_ci_lo = ci.lo;
  out.c_eff_ci_hi = ci.hi;

  // homogenized reference on a finer grid with uniform conductance c_eff/2
  const double alpha_ref = 2.0 * *std::max_element(sizes.begin(), sizes.end());
  const LatticeBox ref_box = lattice::build_box(d, alpha_ref, G);
  const auto Vt_ref = conductance::site_cell_averages(V, ref_box);
  auto ref_field = conductance::constant_field(ref_box, 0.5 * out.c_eff);
  const auto ref_eigs = spectrum::lowest_eigenpairs(
      spectrum::assemble(ref_field, Vt_ref, alpha_ref * alpha_ref), j_max,
      1e-9 * alpha_ref * alpha_ref);
  for (const auto& r : ref_eigs) out.lambda_reference.push_back(r.value);
  return out;
}

CEffEstimate estimate_c_eff(const EllipticModel& model, int d, std::span<const double> sizes,
                            int n_env, std::uint64_t seed, int threads) {
  if (sizes.empty()) throw std::invalid_argument("insufficient sizes for the fit");
  if (n_env < 1) throw std::invalid_argument("n_env must be >= 1");
  const auto G = lattice::Domain::unit_cube(d);

  CEffEstimate out;
  std::vector<double> last;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const double alpha = sizes[si];
    const LatticeBox box = lattice::build_box(d, alpha, G);
    const double a2 = alpha * alpha;
    std::vector<double> samples(static_cast<std::size_t>(n_env), 0.0);
    parallel::for_each_index(n_env, threads, [&](std::int64_t e) {
      const auto field = conductance::sample_field(box, model, rng::mix(seed, e));
      const double lam =
          spectrum::principal_eigen(spectrum::assemble(field, {}, a2), 1e-9 * std::max(1.0, a2))
              .value;
      samples[static_cast<std::size_t>(e)] = 2.0 * lam / (d * kPi * kPi);
    });
    out.per_size.push_back(mean_ci(samples).mean);
    if (si + 1 == sizes.size()) last = std::move(samples);
  }
  const auto ci = mean_ci(last);
  out.value = ci.mean;
  out.ci_lo = ci.lo;
  out.ci_hi = ci.hi;
  return out;
}

double harmonic_mean_c_eff(const EllipticModel& model) {
  const auto& law = model.law;
  double mean_inv = 0.0;
  switch (law.kind) {
    case conductance::Law::Kind::Uniform:
      mean_inv = std::log(law.b / law.a) / (law.b - law.a);
      break;
    case conductance::Law::Kind::TwoPoint:
      mean_inv = law.p / law.a + (1.0 - law.p) / law.b;
      break;
    case conductance::Law::Kind::Constant:
      mean_inv = 1.0 / law.a;
      break;
  }
  return 2.0 / mean_inv;
}

double quenched_rate(const varprob::GridFunction& f, double c_eff) {
  const int d = f.G.d;
  for (int i = 0; i < d; ++i) {
    if (f.G.lo[i] != 0.0 || f.G.hi[i] != 1.0)
      throw std::invalid_argument("quenched rate is defined on the unit cube");
    if (f.n[i] != f.n[0]) throw std::invalid_argument("grid must be uniform");
  }
  if (std::abs(f.l2_norm() - 1.0) > 1e-8)
    throw std::invalid_argument("f must be l2-normalized on the grid");
  // zero Dirichlet boundary nodes
  {
    std::array<std::int64_t, lattice::kMaxDim> j{};
    const std::int64_t nodes = f.node_count();
    for (std::int64_t k = 0; k < nodes; ++k) {
      bool boundary = false;
      for (int i = 0; i < d; ++i) boundary = boundary || j[i] == 0 || j[i] == f.n[i];
      if (boundary && std::abs(f.values[static_cast<std::size_t>(k)]) > 1e-12)
        throw std::invalid_argument("f must vanish on the boundary nodes");
      for (int i = d - 1; i >= 0; --i) {
        if (++j[i] <= f.n[i]) break;
        j[i] = 0;
      }
    }
  }

  const double dirichlet = varprob::rate_I_c_phi(f, [](std::span<const double>, int) { return 1.0; });
  const double N = static_cast<double>(f.n[0]);
  const LatticeBox box = lattice::build_box(d, N, lattice::Domain::unit_cube(d));
  auto field = conductance::constant_field(box, 1.0);
  const double lam = spectrum::principal_eigen(spectrum::assemble(field), 1e-11).value;
  return c_eff * (dirichlet - N * N * lam);
}

}  // namespace rwrc::homogenise
