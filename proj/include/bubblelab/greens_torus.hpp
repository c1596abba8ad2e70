/// @file greens_torus.hpp
/// @brief Green's function of the unit-area square torus and its regular part.
///
/// G solves -Lap G = 2 pi delta_0 - 2 pi with zero mean, i.e.
///   G(x) = sum_{k != 0} exp(2 pi i k.x) / (2 pi |k|^2).
/// Near the pole G(x) = -log|x| + J(x) with J smooth on |x| < 1. In translation
/// coordinates G_a(x, y) = G(x - y), so grad_y J_a(x, 0) = -grad J(x) for every a.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bubblelab/torus_geometry.hpp"
#include "bubblelab/types.hpp"

namespace bubblelab {

struct EwaldOptions {
  /// Heat-kernel splitting time; both sums decay like exp(-pi^2 r^2/s) and exp(-s k^2).
  double split = kPi;
  /// Terms are dropped once the Gaussian factor is below exp(-cutoff_exponent).
  double cutoff_exponent = 40.0;
};

/// Ewald-split evaluation of G, its derivatives, and of J = G + log|x|.
class EwaldGreens {
 public:
  explicit EwaldGreens(EwaldOptions options = {});

  /// Throws AtSingularity when x is a lattice point.
  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
  Eigen::Matrix2d hessian(const Vec2& x) const;

  /// J(x) = G(x) + log|x| for unwrapped x with |x| < 1; smooth through x = 0.
  double regular_value(const Vec2& x) const;
  Vec2 regular_gradient(const Vec2& x) const;
  Eigen::Matrix2d regular_hessian(const Vec2& x) const;

  int real_images() const { return real_images_; }
  int fourier_cutoff() const { return fourier_cutoff_; }
  const EwaldOptions& options() const { return options_; }

 private:
  // Sum over lattice translates except the one at offset `skip` (none if skip is false).
  template <class Term>
  void for_real_images(const Vec2& x, bool skip_origin, Term&& term) const;

  EwaldOptions options_;
  double kappa_;  // pi^2 / split
  double real_radius_;
  int real_images_;
  int fourier_cutoff_;
};

/// J(x) = c0 + (pi/2)|x|^2 + Re sum_m c_m z^{4m}, z = x1 + i x2, fitted from Ewald
/// samples on a circle. Valid (to ~1e-12) for |x| <= 0.75, which covers [-1/2,1/2)^2.
class RegularPartSeries {
 public:
  static RegularPartSeries fit(const EwaldGreens& ewald, int terms = 32, double radius = 0.75, int samples = 512);

  double value(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;

  const std::vector<double>& coefficients() const { return coeffs_; }
  double constant() const { return c0_; }

 private:
  double c0_ = 0.0;
  std::vector<double> coeffs_;  // c_1 .. c_M
};

/// Process-wide series with default Ewald options, built on first use.
const RegularPartSeries& regular_part();

/// G(wrap(x)); throws AtSingularity at the pole.
double greens_value(const Vec2& x);
/// grad G(wrap(x)); throws AtSingularity at the pole.
Vec2 greens_gradient(const Vec2& x);

/// grad_y J_a(x, 0) = -grad G(wrap x) - x/|x|^2, continuous through x = 0.
Vec2 grad_regular(const Vec2& x);
/// Same quantity at x = F_a(p), assembled from grad G(p - a) at the torus points
/// a and p (the series is used within 0.01 of the pole).
Vec2 grad_regular(const Vec2& a, const Vec2& p);

struct JConstantReport {
  double trace_limit;            // Richardson limit of the mixed-derivative trace
  double analytic;               // -2 pi / Area
  std::vector<double> probe_radii;
  std::vector<double> probe_traces;
  std::vector<double> extrapolated;  // successive Richardson limits
};

/// J = lim_{x->0} sum_i d_{y_i} d_{x_i} G_a(x, 0). Throws NonConvergent when the
/// Richardson limits drift by more than 1e-4 or disagree with the analytic value.
JConstantReport j_constant(const EwaldGreens& ewald = EwaldGreens());

/// G and grad G on every sample of a grid, in translation coordinates around a.
struct GreensTable {
  ToroidalGrid grid;
  Vec2 center;
  EwaldOptions options;
  std::vector<double> values;     // NaN at a sample coinciding with the pole
  std::vector<Vec2> gradients;    // NaN at the pole
  double j_constant;
  Vec2 grad_regular_zero;

  static GreensTable build(const ToroidalGrid& grid, const Vec2& center = Vec2::Zero(), EwaldOptions options = {});

  /// sum G h^2 over the samples (pole excluded).
  double sample_sum() const;

  void write_csv(std::ostream& os) const;
  /// JSON object with the scalar report.
  std::string summary_json() const;
};

}  // namespace bubblelab
