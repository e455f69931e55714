#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rwrc::quadrature {

// 4-point Gauss-Legendre nodes/weights on [0,1]; exact for degree <= 7.
inline constexpr std::array<double, 4> kGaussNodes01 = {
    0.5 - 0.43056815579702628548 /* 0.8611363.../2 */,
    0.5 - 0.16999052179242812815 /* 0.3399810.../2 */,
    0.5 + 0.16999052179242812815,
    0.5 + 0.43056815579702628548,
};
inline constexpr std::array<double, 4> kGaussWeights01 = {
    0.17392742256872692869, 0.32607257743127307131,
    0.32607257743127307131, 0.17392742256872692869,
};

// Average of f over the unit cell [0,1]^d shifted by `corner` and scaled by
// 1/alpha: integral of f((corner+y)/alpha) dy over y in [0,1]^d.
// Tensor Gauss-Legendre of order 4 per axis.
template <typename F>
double cell_average(F&& f, std::span<const std::int64_t> corner, double alpha) {
  const std::size_t d = corner.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> point(d);
  double sum = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      point[i] = (static_cast<double>(corner[i]) + kGaussNodes01[idx[i]]) / alpha;
      w *= kGaussWeights01[idx[i]];
    }
    sum += w * f(std::span<const double>(point));
    std::size_t i = 0;
    for (; i < d; ++i) {
      if (++idx[i] < kGaussNodes01.size()) break;
      idx[i] = 0;
    }
    if (i == d) break;
  }
  return sum;
}

// Adaptive Simpson on [a,b]; plain utility for 1-d reference integrals.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 40);

}  // namespace rwrc::quadrature
