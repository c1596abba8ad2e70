/// @file adapted_bubble.hpp
/// @brief Adapted bubbles z = z_lambda^{a, omega} on the torus and their energy expansion.
///
/// In translation coordinates x = F_a(p), with R the rotation and pi_lambda the
/// rescaled inverse stereographic projection,
///   inner(x) = R pi_lambda(x) + j(x),    j(x) = (2/lambda) R (gJ(x) - gJ(0), 0),
///   outer(x) = R p* + (2/lambda) R (x/|x|^2 + gJ(x) - gJ(0), 0),
/// where gJ(x) = grad_y J_a(x, 0). v = phi inner + (1 - phi) outer on |x| < r0 and
/// v = outer elsewhere; z = v/|v|.
#pragma once

#include <cstdint>

#include "bubblelab/sphere_maps.hpp"
#include "bubblelab/torus_geometry.hpp"
#include "bubblelab/types.hpp"

namespace bubblelab {

struct BubbleParams {
  double lambda = 10.0;
  Vec2 center = Vec2(0.5, 0.5);
  RotationParam rot;

  /// Throws std::invalid_argument when lambda < 2 or not finite.
  void validate() const;
};

/// phi(r): 1 on [0, r0/2], 0 on [r0, inf), quintic smoothstep in between.
double cutoff(double r);

/// The Green's correction j at coordinate point x (|x| < r0).
Vec3 j_field(const BubbleParams& params, const Vec2& x);

/// The unprojected glued map v at coordinate point x in [-1/2, 1/2)^2.
Vec3 bubble_v(const BubbleParams& params, const Vec2& x);
/// inner(x) - outer(x): the discrepancy glued across the annulus r0/2 < |x| < r0.
Vec3 seam_discrepancy(const BubbleParams& params, const Vec2& x);

/// Samples z on the grid. Throws std::invalid_argument if lambda h > 0.2 or
/// lambda < 2; BelowGuard if v leaves the tubular neighbourhood.
ToroidalField3 build_bubble(const BubbleParams& params, const ToroidalGrid& grid);
/// Same without the resolution check.
ToroidalField3 build_bubble_unchecked(const BubbleParams& params, const ToroidalGrid& grid);

/// The weight rho_z of the bubble.
WeightField bubble_weight(const BubbleParams& params, const ToroidalGrid& grid);

/// Discrete energy of z extrapolated from grids N and 2N (second-order Richardson).
double bubble_energy(const BubbleParams& params, int n);

/// E(z) - 4 pi, with E from bubble_energy.
double energy_gap(const BubbleParams& params, int n);

/// Central difference of bubble_energy in lambda with step 1e-3 lambda.
double dE_dlambda(const BubbleParams& params, int n);

/// Quadrature of j . Lap d_lambda(omega o pi_lambda) over the disc of radius r0/2,
/// with d_lambda Lap pi_lambda taken analytically.
double leading_term_integral(const BubbleParams& params, int n_radial = 400, int n_azimuth = 64);
/// Lap_x d_lambda pi_lambda(x), in closed form.
Vec3 dlambda_laplacian_stereographic(double lambda, const Vec2& x);
/// The leading term 4 pi |d omega(p*)|^2 J lambda^{-3} = -16 pi^2 lambda^{-3}.
double leading_term_model(double lambda);

/// max |z - R p*| over samples with |F_a(p)| >= iota.
double far_field_sup(const ToroidalField3& z, const BubbleParams& params);
/// max |v - outer| over samples in the gluing annulus; this is phi times the
/// seam discrepancy.
double seam_error_sup(const BubbleParams& params, const ToroidalGrid& grid);

/// Topological degree from signed solid angles of the two triangles per cell.
double discrete_degree(const ToroidalField3& u);

struct VariationReport {
  double scale = 0.0;            // ||lambda d_lambda z||_z
  Vec2 translation;              // ||lambda^{-1} d_{a_i} z||_z
  Vec3 rotation;                 // ||d_{r_k} z||_z, axis-angle directions
  double weight_l2 = 0.0;        // ||d_lambda rho_z||_{L^2}
  double weight_ratio = 0.0;     // ||d_lambda rho_z||_{L^2} / ||d_lambda z||_z
};

/// Finite-difference variations: lambda step 1e-3 lambda, center step h,
/// rotation step 1e-3.
VariationReport variation_scalings(const BubbleParams& params, const ToroidalGrid& grid);

/// lambda d_lambda z by central differences, made tangential along z.
ToroidalField3 scale_variation(const BubbleParams& params, const ToroidalGrid& grid);

/// A smooth random periodic field: six Fourier modes with |k_i| <= 3 and normal
/// coefficients. The same seed gives the same function on every grid.
ToroidalField3 random_smooth_field(const ToroidalGrid& grid, std::uint64_t seed);
/// random_smooth_field made tangential along u.
ToroidalField3 random_tangent_field(const ToroidalField3& u, std::uint64_t seed);

}  // namespace bubblelab
