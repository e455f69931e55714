#include "rwrc/spectrum.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rwrc/parallel.hpp"
#include "rwrc/quadrature.hpp"
#include "rwrc/rng.hpp"

namespace rwrc::spectrum {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void normalize(std::vector<double>& v) {
  const double n = norm2(v);
  if (n > 0.0)
    for (double& x : v) x /= n;
}

}  // namespace

void DirichletOperator::apply(std::span<const double> g, std::span<double> out) const {
  const std::int64_t n = size();
  for (std::int64_t k = 0; k < n; ++k) out[k] = diag_[k] * g[k];
  const int d = box_.dim();
  for (int i = 0; i < d; ++i) {
    const auto& w = w_[i];
    const auto& nb = nb_[i];
    for (std::int64_t k = 0; k < n; ++k) {
      const std::int64_t j = nb[k];
      if (j >= 0) {
        const double c = laplace_scale_ * w[k];
        out[k] -= c * g[j];
        out[j] -= c * g[k];
      }
    }
  }
}

std::vector<double> DirichletOperator::apply(std::span<const double> g) const {
  std::vector<double> out(g.size());
  apply(g, out);
  return out;
}

double DirichletOperator::quadratic_form(std::span<const double> g) const {
  return dot(apply(g), g);
}

double DirichletOperator::spectrum_upper_bound() const {
  const std::int64_t n = size();
  std::vector<double> row(n, 0.0);
  const int d = box_.dim();
  for (int i = 0; i < d; ++i) {
    for (std::int64_t k = 0; k < n; ++k) {
      const std::int64_t j = nb_[i][k];
      if (j >= 0) {
        row[k] += laplace_scale_ * w_[i][k];
        row[j] += laplace_scale_ * w_[i][k];
      }
    }
  }
  double bound = -std::numeric_limits<double>::infinity();
  for (std::int64_t k = 0; k < n; ++k) bound = std::max(bound, diag_[k] + row[k]);
  return bound;
}

DirichletOperator assemble(const ConductanceField& field, const std::vector<double>& V,
                           double laplace_scale) {
  if (!(laplace_scale > 0.0)) throw std::invalid_argument("laplace_scale must be positive");
  const auto& box = field.box();
  const std::int64_t n = box.size();
  const int d = box.dim();
  if (!V.empty() && static_cast<std::int64_t>(V.size()) != n)
    throw std::invalid_argument("potential size mismatch");

  DirichletOperator op;
  op.box_ = box;
  op.laplace_scale_ = laplace_scale;
  op.potential_ = V.empty() ? std::vector<double>(n, 0.0) : V;
  for (const double v : op.potential_)
    if (!std::isfinite(v)) throw std::invalid_argument("potential must be finite");
  op.diag_.resize(n);
  for (int i = 0; i < d; ++i) {
    op.w_[i].resize(n);
    op.nb_[i].resize(n);
  }

  for (std::int64_t k = 0; k < n; ++k) {
    const lattice::Coord z = box.site(k);
    const auto zs = std::span<const std::int64_t>(z.data(), d);
    op.diag_[k] = laplace_scale * field.total_rate(zs) + op.potential_[k];
    lattice::Coord zp = z;
    for (int i = 0; i < d; ++i) {
      op.w_[i][k] = field.weight(zs, i);
      zp[i] += 1;
      const auto zps = std::span<const std::int64_t>(zp.data(), d);
      op.nb_[i][k] = box.contains(zps) ? box.index(zps) : -1;
      zp[i] -= 1;
    }
  }
  return op;
}

double dirichlet_form(const ConductanceField& field, std::span<const double> g) {
  const auto& box = field.box();
  const int d = box.dim();
  if (static_cast<std::int64_t>(g.size()) != box.size())
    throw std::invalid_argument("vector size mismatch");
  double total = 0.0;
  field.weights().for_each([&](const lattice::Coord& z, int dir, double w) {
    const auto zs = std::span<const std::int64_t>(z.data(), d);
    lattice::Coord zp = z;
    zp[dir] += 1;
    const auto zps = std::span<const std::int64_t>(zp.data(), d);
    const double ga = box.contains(zs) ? g[box.index(zs)] : 0.0;
    const double gb = box.contains(zps) ? g[box.index(zps)] : 0.0;
    const double diff = gb - ga;
    total += w * diff * diff;
  });
  return total;
}

namespace {

// Operator with rank-one spectral deflation: A + C sum_k v_k v_k^T.
struct WorkOperator {
  const DirichletOperator* base;
  const std::vector<std::vector<double>>* deflate = nullptr;
  double C = 0.0;
  std::vector<double> jacobi;  // diagonal of the deflated operator

  explicit WorkOperator(const DirichletOperator& op,
                        const std::vector<std::vector<double>>* vecs = nullptr, double c = 0.0)
      : base(&op), deflate(vecs), C(c) {
    jacobi.assign(op.diagonal().begin(), op.diagonal().end());
    if (deflate)
      for (const auto& v : *deflate)
        for (std::size_t k = 0; k < jacobi.size(); ++k) jacobi[k] += C * v[k] * v[k];
  }

  std::int64_t size() const { return base->size(); }

  void apply(std::span<const double> g, std::span<double> out) const {
    base->apply(g, out);
    if (deflate) {
      for (const auto& v : *deflate) {
        const double c = C * dot(v, g);
        for (std::size_t k = 0; k < v.size(); ++k) out[k] += c * v[k];
      }
    }
  }
};

// Jacobi-preconditioned CG for (A - sigma I) y = b. Returns false on
// non-positive curvature (shift crossed the spectrum).
bool shifted_cg(const WorkOperator& A, double sigma, std::span<const double> b,
                std::vector<double>& y, double rel_tol, int max_iter) {
  const std::int64_t n = A.size();
  y.assign(n, 0.0);
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> z(n), p(n), Ap(n);
  const double bnorm = norm2(r);
  if (bnorm == 0.0) return true;
  auto precond = [&](std::span<const double> in, std::span<double> out) {
    for (std::int64_t k = 0; k < n; ++k) {
      const double m = A.jacobi[k] - sigma;
      out[k] = in[k] / (m > 1e-300 ? m : 1.0);
    }
  };
  precond(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    A.apply(p, Ap);
    for (std::int64_t k = 0; k < n; ++k) Ap[k] -= sigma * p[k];
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) return false;
    const double a = rz / pAp;
    for (std::int64_t k = 0; k < n; ++k) {
      y[k] += a * p[k];
      r[k] -= a * Ap[k];
    }
    if (norm2(r) <= rel_tol * bnorm) return true;
    precond(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::int64_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  return true;  // inexact solve is fine for inverse iteration
}

SpectralResult smallest_eigen_impl(const WorkOperator& A, double lower_bound,
                                   double upper_bound, double tol) {
  const std::int64_t n = A.size();
  if (n == 0) throw std::invalid_argument("empty box");
  const double spread = std::max(upper_bound - lower_bound, 1e-30);
  // round-off floor: residuals below eps * ||A|| are noise
  const double floor_tol =
      64.0 * std::numeric_limits<double>::epsilon() *
      std::max({std::abs(upper_bound), std::abs(lower_bound), 1.0});
  const double target = std::max(tol, floor_tol);

  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> hx(n), y(n);
  A.apply(x, hx);
  double lambda = dot(hx, x);
  double res = 0.0;
  {
    double s = 0.0;
    for (std::int64_t k = 0; k < n; ++k) {
      const double r = hx[k] - lambda * x[k];
      s += r * r;
    }
    res = std::sqrt(s);
  }
  SpectralResult best{lambda, x, res, 0};

  // start just below the certified bound: a margin proportional to the full
  // spread would swamp small leading eigenvalues and stall the contraction
  double sigma = lower_bound - std::max(1e-12, 1e-9 * spread);
  const int cg_cap = static_cast<int>(std::clamp<std::int64_t>(2 * n + 100, 200, 4000));
  const int max_outer = 300;
  for (int it = 1; it <= max_outer; ++it) {
    if (!shifted_cg(A, sigma, x, y, 1e-10, cg_cap)) {
      sigma = 0.5 * (sigma + lower_bound) - 1e-6 * spread;  // retreat below the spectrum
      continue;
    }
    const double yn = norm2(y);
    if (!(yn > 0.0) || !std::isfinite(yn)) {
      sigma -= 0.1 * spread;
      continue;
    }
    for (std::int64_t k = 0; k < n; ++k) x[k] = y[k] / yn;
    A.apply(x, hx);
    lambda = dot(hx, x);
    double s = 0.0;
    for (std::int64_t k = 0; k < n; ++k) {
      const double r = hx[k] - lambda * x[k];
      s += r * r;
    }
    res = std::sqrt(s);
    if (res < best.residual || lambda < best.value - best.residual) {
      best.value = lambda;
      best.eigenvector = x;
      best.residual = res;
      best.iterations = it;
    }
    if (res <= target) {
      // principal eigenvector of an irreducible operator is signed; report positive
      double sum = std::accumulate(x.begin(), x.end(), 0.0);
      if (sum < 0.0)
        for (double& v : x) v = -v;
      normalize(x);
      return SpectralResult{lambda, std::move(x), res, it};
    }
    const double margin = std::max(5.0 * res, 1e-14 * std::max(1.0, std::abs(lambda)));
    sigma = std::max(sigma, lambda - margin);
  }
  throw EigenSolveError("principal eigenvalue iteration did not converge", best);
}

}  // namespace

SpectralResult principal_eigen(const DirichletOperator& op, double tol) {
  double lb = 0.0;
  for (const double v : op.potential()) lb = std::min(lb, v);
  WorkOperator A(op);
  return smallest_eigen_impl(A, lb, op.spectrum_upper_bound(), tol);
}

std::vector<SpectralResult> lowest_eigenpairs(const DirichletOperator& op, int count,
                                              double tol) {
  count = static_cast<int>(std::min<std::int64_t>(count, op.size()));
  double lb = 0.0;
  for (const double v : op.potential()) lb = std::min(lb, v);
  const double ub = op.spectrum_upper_bound();
  const double C = 2.0 * (ub - lb) + 1.0;

  std::vector<SpectralResult> out;
  std::vector<std::vector<double>> converged;
  for (int j = 0; j < count; ++j) {
    WorkOperator A(op, &converged, C);
    SpectralResult r = smallest_eigen_impl(A, lb, ub + C * j, tol);
    converged.push_back(r.eigenvector);
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

Eigen::MatrixXd dense_matrix(const DirichletOperator& op) {
  const std::int64_t n = op.size();
  Eigen::MatrixXd M(n, n);
  std::vector<double> e(n, 0.0), col(n);
  for (std::int64_t k = 0; k < n; ++k) {
    e[k] = 1.0;
    op.apply(e, col);
    for (std::int64_t r = 0; r < n; ++r) M(r, k) = col[r];
    e[k] = 0.0;
  }
  return M;
}

std::vector<double> expm_dense(const DirichletOperator& op, double t,
                               std::span<const double> g) {
  const std::int64_t n = op.size();
  Eigen::MatrixXd A = -t * dense_matrix(op);
  Eigen::MatrixXd E = A.exp();  // scaling-and-squaring Pade
  Eigen::VectorXd v(n);
  for (std::int64_t k = 0; k < n; ++k) v(k) = g[k];
  Eigen::VectorXd w = E * v;
  return std::vector<double>(w.data(), w.data() + n);
}

std::vector<double> expm_krylov(const DirichletOperator& op, double t,
                                std::span<const double> g) {
  const std::int64_t n = op.size();
  const double beta = norm2(g);
  std::vector<double> out(n, 0.0);
  if (beta == 0.0) return out;

  const int m_max = static_cast<int>(std::min<std::int64_t>(n, 120));
  std::vector<std::vector<double>> V;
  V.emplace_back(g.begin(), g.end());
  for (double& x : V[0]) x /= beta;
  std::vector<double> alpha, off;
  std::vector<double> w(n);

  std::vector<double> prev;
  for (int j = 0; j < m_max; ++j) {
    op.apply(V[j], w);
    alpha.push_back(dot(w, V[j]));
    // full reorthogonalization, two passes
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : V) {
        const double c = dot(w, v);
        for (std::int64_t k = 0; k < n; ++k) w[k] -= c * v[k];
      }
    const double b = norm2(w);
    const int m = j + 1;

    const bool check = (b < 1e-14) || m == m_max || (m >= 6 && m % 3 == 0);
    if (check) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) T(i, i) = alpha[i];
      for (int i = 0; i + 1 < m; ++i) {
        T(i, i + 1) = off[i];
        T(i + 1, i) = off[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      Eigen::VectorXd e1 = Eigen::VectorXd::Zero(m);
      e1(0) = 1.0;
      Eigen::VectorXd y =
          es.eigenvectors() * ((-t * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                               (es.eigenvectors().transpose() * e1));
      std::vector<double> cur(n, 0.0);
      for (int i = 0; i < m; ++i) {
        const double c = beta * y(i);
        for (std::int64_t k = 0; k < n; ++k) cur[k] += c * V[i][k];
      }
      if (b < 1e-14) return cur;  // happy breakdown: Krylov space is invariant
      if (!prev.empty()) {
        double diff = 0.0;
        for (std::int64_t k = 0; k < n; ++k) {
          const double d2 = cur[k] - prev[k];
          diff += d2 * d2;
        }
        if (std::sqrt(diff) <= 1e-11 * beta + 1e-13) return cur;
      }
      prev = std::move(cur);
      if (m == m_max) return prev;
    }
    off.push_back(b);
    auto& next = V.emplace_back(w);
    for (double& x : next) x /= b;
  }
  return prev;
}

}  // namespace

std::vector<double> semigroup_apply(const DirichletOperator& op, double t,
                                    std::span<const double> g, ExpmMethod method) {
  if (t < 0.0) throw std::invalid_argument("time must be nonnegative");
  if (static_cast<std::int64_t>(g.size()) != op.size())
    throw std::invalid_argument("vector size mismatch");
  if (t == 0.0) return std::vector<double>(g.begin(), g.end());
  if (method == ExpmMethod::Auto)
    method = op.size() <= 400 ? ExpmMethod::Dense : ExpmMethod::Krylov;
  return method == ExpmMethod::Dense ? expm_dense(op, t, g) : expm_krylov(op, t, g);
}

std::vector<double> discretize_potential(const ScalarField& V, const LatticeBox& box) {
  return conductance::site_cell_averages(V, box);
}

double rescaled_eigen(const conductance::Profile& phi, const ScalarField& V,
                      const LatticeBox& box, double tol) {
  auto phi_t = conductance::unscaled_profile(phi, box);
  auto field = conductance::field_from_edge_values(box, std::move(phi_t));
  auto Vt = discretize_potential(V, box);
  const double a2 = box.alpha() * box.alpha();
  return principal_eigen(assemble(field, Vt, a2), tol).value;
}

LifshitzTable lifshitz_mc(const TailModel& model, const LatticeBox& box,
                          std::span<const double> eps_grid, int n_env, std::uint64_t seed,
                          double chi_d_value, int threads) {
  if (n_env < 1) throw std::invalid_argument("n_env must be >= 1");
  LifshitzTable table;
  table.chi_d = chi_d_value;
  table.lambdas.assign(n_env, 0.0);
  parallel::for_each_index(n_env, threads, [&](std::int64_t e) {
    auto field = conductance::sample_field(box, model, rng::mix(seed, e));
    table.lambdas[static_cast<std::size_t>(e)] = principal_eigen(assemble(field), 1e-9).value;
  });
  for (const double eps : eps_grid) {
    std::int64_t hits = 0;
    for (const double l : table.lambdas)
      if (l <= eps) ++hits;
    LifshitzRow row;
    row.eps = eps;
    row.freq = static_cast<double>(hits) / n_env;
    const double se = std::sqrt(std::max(row.freq * (1.0 - row.freq), 0.0) / n_env);
    row.ci_lo = std::max(0.0, row.freq - 1.96 * se);
    row.ci_hi = std::min(1.0, row.freq + 1.96 * se);
    row.predictor_log = std::isnan(chi_d_value)
                            ? std::numeric_limits<double>::quiet_NaN()
                            : -model.D * std::pow(chi_d_value, model.eta + 1.0) *
                                  std::pow(eps, -model.eta);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace rwrc::spectrum
