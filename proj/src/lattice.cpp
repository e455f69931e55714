#include "rwrc/lattice.hpp"

#include <cmath>

namespace rwrc::lattice {

std::int64_t strict_int_above(double a) {
  const double r = std::round(a);
  if (std::abs(a - r) < 1e-9 * std::max(1.0, std::abs(a))) a = r;
  return static_cast<std::int64_t>(std::floor(a)) + 1;
}

std::int64_t strict_int_below(double b) {
  const double r = std::round(b);
  if (std::abs(b - r) < 1e-9 * std::max(1.0, std::abs(b))) b = r;
  return static_cast<std::int64_t>(std::ceil(b)) - 1;
}

Domain Domain::unit_cube(int d) {
  Domain g;
  g.d = d;
  for (int i = 0; i < d; ++i) {
    g.lo[i] = 0.0;
    g.hi[i] = 1.0;
  }
  return g;
}

Domain Domain::centered(int d, double half_width) {
  Domain g;
  g.d = d;
  for (int i = 0; i < d; ++i) {
    g.lo[i] = -half_width;
    g.hi[i] = half_width;
  }
  return g;
}

LatticeBox build_box(int d, double alpha, const Domain& G) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension out of range");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (G.d != d) throw std::invalid_argument("domain dimension mismatch");

  LatticeBox box;
  box.d_ = d;
  box.alpha_ = alpha;
  box.domain_ = G;
  box.size_ = 1;
  for (int i = 0; i < d; ++i) {
    if (!(G.lo[i] < G.hi[i]))
      throw std::invalid_argument("domain interval empty in coordinate " + std::to_string(i));
    box.lo_[i] = strict_int_above(alpha * G.lo[i]);
    box.hi_[i] = strict_int_below(alpha * G.hi[i]);
    if (box.lo_[i] > box.hi_[i])
      throw std::invalid_argument("degenerate box: no lattice point in coordinate " +
                                  std::to_string(i));
    box.size_ *= box.hi_[i] - box.lo_[i] + 1;
  }
  std::int64_t stride = 1;
  for (int i = d - 1; i >= 0; --i) {
    box.stride_[i] = stride;
    stride *= box.hi_[i] - box.lo_[i] + 1;
  }
  return box;
}

LatticeBox cube_box(int d, std::int64_t n) {
  return build_box(d, 1.0, Domain::centered(d, static_cast<double>(n) + 0.5));
}

std::vector<Coord> LatticeBox::sites() const {
  std::vector<Coord> out;
  out.reserve(static_cast<std::size_t>(size_));
  for (std::int64_t i = 0; i < size_; ++i) out.push_back(site(i));
  return out;
}

std::vector<NeighborEntry> LatticeBox::neighbors(std::span<const std::int64_t> z) const {
  if (!contains(z)) throw std::invalid_argument("site not in box");
  std::vector<NeighborEntry> out;
  out.reserve(2 * static_cast<std::size_t>(d_));
  for (int i = 0; i < d_; ++i) {
    for (int s : {+1, -1}) {
      NeighborEntry e;
      e.direction = s * (i + 1);
      for (int k = 0; k < d_; ++k) e.site[k] = z[k];
      e.site[i] += s;
      e.in_box = contains(std::span<const std::int64_t>(e.site.data(), d_));
      out.push_back(e);
    }
  }
  return out;
}

std::vector<double> LatticeBox::embed(std::span<const std::int64_t> z) const {
  if (!contains(z)) throw std::invalid_argument("site not in box");
  std::vector<double> y(d_);
  for (int i = 0; i < d_; ++i) y[i] = static_cast<double>(z[i]) / alpha_;
  return y;
}

}  // namespace rwrc::lattice
