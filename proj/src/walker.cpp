#include "rwrc/walker.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rwrc/parallel.hpp"
#include "rwrc/rng.hpp"

namespace rwrc::walker {

double LocalTimeRecord::total() const {
  double t = std::accumulate(in_box.begin(), in_box.end(), 0.0);
  for (const auto& [z, v] : outside) t += v;
  return t;
}

namespace {

// Per-site jump table for walks confined to the box: total rate and the 2d
// directed weights (order +e_1, -e_1, ..., +e_d, -e_d).
struct JumpTable {
  const LatticeBox* box;
  int d;
  std::vector<double> rate;
  std::vector<double> w;           // n * 2d
  std::vector<std::int64_t> dest;  // n * 2d, -1 if outside

  explicit JumpTable(const ConductanceField& field) {
    box = &field.box();
    d = box->dim();
    const std::int64_t n = box->size();
    rate.assign(n, 0.0);
    w.assign(n * 2 * d, 0.0);
    dest.assign(n * 2 * d, -1);
    for (std::int64_t k = 0; k < n; ++k) {
      Coord z = box->site(k);
      const auto zs = std::span<const std::int64_t>(z.data(), d);
      for (int i = 0; i < d; ++i) {
        const double wp = field.weight(zs, i);
        z[i] -= 1;
        const double wm = field.weight(std::span<const std::int64_t>(z.data(), d), i);
        z[i] += 1;
        w[k * 2 * d + 2 * i] = wp;
        w[k * 2 * d + 2 * i + 1] = wm;
        rate[k] += wp + wm;
        Coord zp = z;
        zp[i] += 1;
        auto zps = std::span<const std::int64_t>(zp.data(), d);
        dest[k * 2 * d + 2 * i] = box->contains(zps) ? box->index(zps) : -1;
        zp[i] -= 2;
        dest[k * 2 * d + 2 * i + 1] = box->contains(zps) ? box->index(zps) : -1;
      }
    }
  }
};

}  // namespace

SimulationResult simulate(const ConductanceField& field, const Coord& start, double horizon,
                          bool stop_on_exit, std::uint64_t seed) {
  const auto& box = field.box();
  const int d = box.dim();
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!box.contains(std::span<const std::int64_t>(start.data(), d)))
    throw std::invalid_argument("start site outside box");

  SimulationResult out;
  out.trajectory.start = start;
  out.trajectory.horizon = horizon;
  out.local_times.box = box;
  out.local_times.horizon = horizon;
  out.local_times.in_box.assign(static_cast<std::size_t>(box.size()), 0.0);
  std::vector<std::pair<Coord, double>> outside;

  rng::Stream stream(seed, 0x77a1u);
  Coord cur = start;
  double now = 0.0;
  bool left_box = false;

  auto accumulate = [&](const Coord& z, double dt) {
    const auto zs = std::span<const std::int64_t>(z.data(), d);
    if (box.contains(zs)) {
      out.local_times.in_box[static_cast<std::size_t>(box.index(zs))] += dt;
      return;
    }
    for (auto& [site, v] : outside)
      if (std::equal(site.begin(), site.begin() + d, z.begin())) {
        v += dt;
        return;
      }
    outside.emplace_back(z, dt);
  };

  while (true) {
    // total rate at cur: all 2d incident edges
    double pi = 0.0;
    double w2d[2 * lattice::kMaxDim];
    Coord m = cur;
    for (int i = 0; i < d; ++i) {
      w2d[2 * i] = field.weight(std::span<const std::int64_t>(cur.data(), d), i);
      m[i] -= 1;
      w2d[2 * i + 1] = field.weight(std::span<const std::int64_t>(m.data(), d), i);
      m[i] += 1;
      pi += w2d[2 * i] + w2d[2 * i + 1];
    }
    const double hold = stream.next_exponential() / pi;
    if (now + hold >= horizon) {
      accumulate(cur, horizon - now);
      break;
    }
    accumulate(cur, hold);
    now += hold;

    double u = stream.next_u01() * pi;
    int pick = 2 * d - 1;
    for (int j = 0; j < 2 * d; ++j) {
      if (u < w2d[j]) {
        pick = j;
        break;
      }
      u -= w2d[j];
    }
    Coord next = cur;
    next[pick / 2] += (pick % 2 == 0) ? 1 : -1;
    out.trajectory.jumps.emplace_back(now, next);
    const bool inside = box.contains(std::span<const std::int64_t>(next.data(), d));
    if (!inside && !left_box) {
      left_box = true;
      out.trajectory.exited = true;
      out.trajectory.exit_time = now;
      out.local_times.exited = true;
      out.local_times.exit_time = now;
      if (stop_on_exit) break;
    }
    cur = next;
  }
  out.local_times.outside = std::move(outside);
  return out;
}

double StepDensity::evaluate(std::span<const double> y) const {
  const int d = box.dim();
  Coord z{};
  for (int i = 0; i < d; ++i) z[i] = static_cast<std::int64_t>(std::floor(box.alpha() * y[i]));
  const auto zs = std::span<const std::int64_t>(z.data(), d);
  if (!box.contains(zs)) return 0.0;
  return values[static_cast<std::size_t>(box.index(zs))];
}

double StepDensity::integral() const {
  const double cell = std::pow(box.alpha(), -box.dim());
  return cell * std::accumulate(values.begin(), values.end(), 0.0);
}

StepDensity rescale_local_times(const LocalTimeRecord& rec) {
  StepDensity out;
  out.box = rec.box;
  out.horizon = rec.horizon;
  const double scale = std::pow(rec.box.alpha(), rec.box.dim()) / rec.horizon;
  out.values.resize(rec.in_box.size());
  for (std::size_t k = 0; k < rec.in_box.size(); ++k) out.values[k] = scale * rec.in_box[k];
  return out;
}

Coord default_start(const LatticeBox& box) {
  Coord z{};
  const int d = box.dim();
  bool ok = true;
  for (int i = 0; i < d; ++i) ok = ok && box.lo(i) <= 0 && box.hi(i) >= 0;
  if (ok) return z;
  for (int i = 0; i < d; ++i) z[i] = (box.lo(i) + box.hi(i)) / 2;
  return z;
}

namespace {

// Survival indicator and weighted local-time sum for one killed walk.
struct WalkOutcome {
  bool survived;
  double weighted_ell;  // sum_z ell(z) s(z) for a per-site weight s
};

WalkOutcome run_killed_walk(const JumpTable& table, std::int64_t start_idx, double horizon,
                            const std::vector<double>* site_weight, rng::Stream& stream) {
  const int two_d = 2 * table.d;
  std::int64_t cur = start_idx;
  double now = 0.0;
  double acc = 0.0;
  while (true) {
    const double pi = table.rate[cur];
    const double hold = stream.next_exponential() / pi;
    const double dt = std::min(hold, horizon - now);
    if (site_weight) acc += dt * (*site_weight)[static_cast<std::size_t>(cur)];
    now += hold;
    if (now >= horizon) return {true, acc};
    double u = stream.next_u01() * pi;
    int pick = two_d - 1;
    const double* w = &table.w[cur * two_d];
    for (int j = 0; j < two_d; ++j) {
      if (u < w[j]) {
        pick = j;
        break;
      }
      u -= w[j];
    }
    const std::int64_t next = table.dest[cur * two_d + pick];
    if (next < 0) return {false, acc};
    cur = next;
  }
}

}  // namespace

NonexitEstimate nonexit_mc(const Model& model, const LatticeBox& box, double horizon,
                           int n_env, int n_walks, std::uint64_t seed, int threads) {
  if (n_env < 1 || n_walks < 1) throw std::invalid_argument("n_env and n_walks must be >= 1");
  if (horizon < 0.0) throw std::invalid_argument("horizon must be nonnegative");

  NonexitEstimate out;
  out.per_env.assign(n_env, 0.0);
  const Coord start = default_start(box);
  const std::int64_t start_idx =
      box.index(std::span<const std::int64_t>(start.data(), box.dim()));

  parallel::for_each_index(n_env, threads, [&](std::int64_t e) {
    const auto field = conductance::sample_field(box, model, rng::mix(seed, e, 0xe27du));
    const JumpTable table(field);
    std::int64_t survived = 0;
    if (horizon == 0.0) {
      survived = n_walks;
    } else {
      for (int wk = 0; wk < n_walks; ++wk) {
        rng::Stream stream(rng::mix(seed, e, 0x9b1fu), static_cast<std::uint64_t>(wk));
        if (run_killed_walk(table, start_idx, horizon, nullptr, stream).survived)
          ++survived;
      }
    }
    out.per_env[static_cast<std::size_t>(e)] = static_cast<double>(survived) / n_walks;
  });
  for (const double p : out.per_env)
    out.n_exit += n_walks - static_cast<std::int64_t>(std::lround(p * n_walks));

  const double mean =
      std::accumulate(out.per_env.begin(), out.per_env.end(), 0.0) / n_env;
  double var = 0.0;
  for (const double p : out.per_env) var += (p - mean) * (p - mean);
  var = n_env > 1 ? var / (n_env - 1) : 0.0;
  const double se = std::sqrt(var / n_env);
  out.estimate = mean;
  if (mean == 0.0) {
    out.one_sided = true;
    out.ci_lo = 0.0;
    out.ci_hi = 3.0 / (static_cast<double>(n_env) * n_walks);  // rule of three
  } else {
    out.ci_lo = std::max(0.0, mean - 1.96 * se);
    out.ci_hi = std::min(1.0, mean + 1.96 * se);
  }
  return out;
}

FeynmanKacEstimate feynman_kac_mc(const ConductanceField& field,
                                  const conductance::ScalarField& V, double horizon,
                                  double alpha, int n_walks, std::uint64_t seed) {
  if (n_walks < 1) throw std::invalid_argument("n_walks must be >= 1");
  const auto& box = field.box();
  const auto Vt = conductance::site_cell_averages(V, box);
  const JumpTable table(field);
  const Coord start = default_start(box);
  const std::int64_t start_idx =
      box.index(std::span<const std::int64_t>(start.data(), box.dim()));
  const double inv_a2 = 1.0 / (alpha * alpha);

  double sum = 0.0, sumsq = 0.0;
  std::int64_t n_exit = 0;
  for (int wk = 0; wk < n_walks; ++wk) {
    rng::Stream stream(rng::mix(seed, 0x5ca1u), static_cast<std::uint64_t>(wk));
    const auto o = run_killed_walk(table, start_idx, horizon, &Vt, stream);
    const double x = o.survived ? std::exp(-inv_a2 * o.weighted_ell) : 0.0;
    if (!o.survived) ++n_exit;
    sum += x;
    sumsq += x * x;
  }
  FeynmanKacEstimate out;
  out.estimate = sum / n_walks;
  const double var = std::max(0.0, sumsq / n_walks - out.estimate * out.estimate);
  out.std_error = std::sqrt(var / n_walks);
  out.n_exit = n_exit;
  return out;
}

}  // namespace rwrc::walker
