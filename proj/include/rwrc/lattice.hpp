#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rwrc::lattice {

inline constexpr int kMaxDim = 6;

using Coord = std::array<std::int64_t, kMaxDim>;  // first d entries meaningful

// Open axis-aligned box in R^d.
struct Domain {
  int d = 0;
  std::array<double, kMaxDim> lo{};
  std::array<double, kMaxDim> hi{};

  static Domain unit_cube(int d);                    // (0,1)^d
  static Domain centered(int d, double half_width);  // (-w,w)^d
};

struct NeighborEntry {
  int direction = 0;  // +(i+1) for +e_i, -(i+1) for -e_i, i in [0,d)
  Coord site{};
  bool in_box = false;
};

// The lattice box alpha*G `intersect` Z^d for an open axis-aligned G.
// Such an intersection is a product of integer ranges, so site indexing is
// plain mixed-radix arithmetic. Immutable after construction.
class LatticeBox {
 public:
  LatticeBox() = default;

  int dim() const { return d_; }
  double alpha() const { return alpha_; }
  const Domain& domain() const { return domain_; }
  std::int64_t size() const { return size_; }
  std::int64_t lo(int i) const { return lo_[i]; }
  std::int64_t hi(int i) const { return hi_[i]; }

  bool contains(std::span<const std::int64_t> z) const {
    for (int i = 0; i < d_; ++i)
      if (z[i] < lo_[i] || z[i] > hi_[i]) return false;
    return true;
  }

  std::int64_t index(std::span<const std::int64_t> z) const {
    std::int64_t idx = 0;
    for (int i = 0; i < d_; ++i) idx += (z[i] - lo_[i]) * stride_[i];
    return idx;
  }

  Coord site(std::int64_t idx) const {
    Coord z{};
    for (int i = 0; i < d_; ++i) {
      z[i] = lo_[i] + idx / stride_[i];
      idx %= stride_[i];
    }
    return z;
  }

  std::vector<Coord> sites() const;

  // Exactly 2d entries, directions +e_1, -e_1, ..., +e_d, -e_d.
  std::vector<NeighborEntry> neighbors(std::span<const std::int64_t> z) const;

  // z / alpha as a point of R^d.
  std::vector<double> embed(std::span<const std::int64_t> z) const;

  friend LatticeBox build_box(int d, double alpha, const Domain& G);

 private:
  int d_ = 0;
  double alpha_ = 1.0;
  Domain domain_{};
  std::array<std::int64_t, kMaxDim> lo_{};
  std::array<std::int64_t, kMaxDim> hi_{};
  std::array<std::int64_t, kMaxDim> stride_{};
  std::int64_t size_ = 0;
};

// Sites are all z with z/alpha in G (strict componentwise inequalities,
// matching the open domain and the zero-outside convention).
// Throws std::invalid_argument("degenerate box...") when the set is empty.
LatticeBox build_box(int d, double alpha, const Domain& G);

// Q_n = [-n,n]^d `intersect` Z^d, realized as alpha=1, G=(-n-1/2, n+1/2)^d.
LatticeBox cube_box(int d, std::int64_t n);

// Strict integer bounds of an open interval, with near-integer snapping
// (tolerance 1e-9 relative) to keep alpha*G products stable.
std::int64_t strict_int_above(double a);
std::int64_t strict_int_below(double b);

}  // namespace rwrc::lattice
