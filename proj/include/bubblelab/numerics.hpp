/// @file numerics.hpp
/// @brief Small numerical helpers shared across modules.
#pragma once

#include <span>
#include <vector>

namespace bubblelab {

/// Ordinary least squares y = intercept + slope x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Slope of log|y| against log x.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Richardson extrapolation of a second-order quantity from grids h and h/2.
inline double richardson_h2(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

double median(std::vector<double> v);

/// Running maximum over the series is at most factor times its median.
bool bounded_by_median(std::span<const double> v, double factor);

/// Gauss-Legendre nodes and weights on [a, b].
struct Quadrature1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature1D gauss_legendre(int n, double a, double b);

}  // namespace bubblelab
