/// @file diagnostics.hpp
/// @brief Lojasiewicz-type ratios, distance to the bubble family, and decay-law fits.
///
/// The integrable S^2 target fixes the exponents gamma1 = 2, gamma2 = 1.
#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bubblelab/adapted_bubble.hpp"

namespace bubblelab {

inline constexpr double kGamma1 = 2.0;
inline constexpr double kGamma2 = 1.0;
/// A ratio series is "bounded" when its running maximum is at most this times its median.
inline constexpr double kBoundedFactor = 10.0;

/// 1 + |log x|^{1/2}.
double log_envelope(double x);

struct LojRatios {
  double scale;   // lambda^{-1} / (T (1 + |log T|^{1/2}))
  double energy;  // |E - E_inf| / (T (1 + |log T|^{1/2}))^{gamma1}
};

/// Requires tension_l2 > 0; returns NaNs otherwise.
LojRatios loj_ratios(double lambda, double tension_l2, double energy, double e_infinity = kSphereEnergy);

/// E_d / (|log E_d| T^2) per sample.
std::vector<double> ode_ratio_check(std::span<const double> energy_gap, std::span<const double> tension_l2);

struct DistResult {
  double dist;
  BubbleParams argmin;
  int evaluations;
};

struct DistOptions {
  int max_evaluations = 2000;
  double converged_size = 1e-4;  // simplex size that counts as convergence
  double final_size = 1e-6;      // keep refining down to this size within the budget
};

/// ||u - z(theta)||_{z(theta)} with theta = (a1, a2, log lambda, axis-angle).
/// Returns +inf outside the resolvable range lambda >= 2, lambda h <= 0.2.
double dist_objective(const ToroidalField3& u, const BubbleParams& theta);

/// Nelder-Mead over theta started at `seed`, restarted once from a perturbed
/// copy of the best point. Never returns a value worse than the seed's.
/// Throws NotConverged when the simplex does not shrink below 1e-4.
DistResult dist_to_Z(const ToroidalField3& u, const BubbleParams& seed, const DistOptions& options = {});

struct ModelFit {
  std::string model;                 // "exp_sqrt" or "power"
  std::vector<std::string> names;    // one per constant
  std::vector<double> constants;
  double r2_fit = 0.0;
  double r2_holdout = 0.0;
};

struct FitResult {
  std::string model;  // the selected one
  double rate = 0.0;  // c1 for exp_sqrt, the exponent of t for power
  double r2_holdout = 0.0;
  double t_lo = 0.0, t_hi = 0.0;  // fitting window
  ModelFit exp_sqrt;
  ModelFit power;
};

/// Fits log E_d = c0 - c1 sqrt t and log E_d = c0 + p log t (+ q log log t when
/// every t > 1) on the first 75 % of samples; R^2 is scored on the last 25 %.
/// Ties select exp_sqrt. Throws InsufficientData for fewer than 30 positive
/// samples or less than a decade of t.
FitResult fit_decay(std::span<const double> t, std::span<const double> energy_gap);

struct AwayCheck {
  double sup_deviation = 0.0;  // sup over |F_a(p)| >= r of |u - target|
  double l2_deviation = 0.0;   // L^2 norm of u - target over the same set
  double sup_ratio = 0.0;      // divided by E_d^alpha
  double l2_ratio = 0.0;
};

/// Throws std::invalid_argument unless alpha < 1/2 and r > 3/lambda.
AwayCheck away_convergence_check(const ToroidalField3& u, const Vec2& a, double lambda, double r, double alpha,
                                 double energy_gap, const Vec3& target);

/// Number of leading samples that form the resolvable window: a bubble is
/// detected with 2 <= lambda and lambda h <= 0.2, E - E_inf > 0 and T > 0.
std::size_t resolvable_window(std::span<const double> lambda, std::span<const double> energy,
                              std::span<const double> tension_l2, double h, double e_infinity = kSphereEnergy);

}  // namespace bubblelab
