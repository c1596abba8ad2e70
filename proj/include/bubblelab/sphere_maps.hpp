/// @file sphere_maps.hpp
/// @brief The round target S^2 in R^3: projection, tension, second variation,
/// rescaled inverse stereographic projection and the rotated identity maps.
#pragma once

#include <functional>

#include "bubblelab/torus_geometry.hpp"
#include "bubblelab/types.hpp"

namespace bubblelab {

/// Nearest-point projection is trusted only for |v| >= kProjectionGuard.
inline constexpr double kProjectionGuard = 0.1;
/// Per-sample tolerance for |v . u| when a field is required to be tangential.
inline constexpr double kTangentialTol = 1e-8;
/// Radius of the rotation family around the identity, |p* - R p*| <= sigma.
inline constexpr double kRotationSigma = 0.2;

/// Rotation given as an axis-angle vector (radians).
class RotationParam {
 public:
  RotationParam() = default;
  explicit RotationParam(const Vec3& axis_angle);

  const Vec3& axis_angle() const { return axis_angle_; }
  const Mat3& matrix() const { return matrix_; }

  /// |p* - R p*| <= sigma. Callers treat a miss as a warning.
  bool in_family(double sigma = kRotationSigma) const;

 private:
  Vec3 axis_angle_ = Vec3::Zero();
  Mat3 matrix_ = Mat3::Identity();
};

/// v/|v|; throws BelowGuard when |v| < 0.1.
Vec3 project_to_sphere(const Vec3& v);
/// Samplewise projection; the result is flagged on-sphere.
ToroidalField3 project_to_sphere(const ToroidalField3& v);

/// Byproducts of one tension sweep.
struct TensionStats {
  double energy = 0.0;  // E(u), as energy() computes it
  double l2 = 0.0;      // ||tau||_{L^2}
};

/// tau = Lap u + |grad u|^2 u. With the discrete |grad u|^2 of gradient_sq this
/// is orthogonal to u up to round-off whenever |u| = 1.
ToroidalField3 tension(const ToroidalField3& u, TensionStats* stats = nullptr);

/// d^2E(u)(v, w) = sum grad v . grad w - |grad u|^2 v . w.
/// Throws NotTangential when |v . u| or |w . u| exceeds 1e-8 at any sample.
double second_variation(const ToroidalField3& u, const ToroidalField3& v, const ToroidalField3& w);

/// Removes the component along u, samplewise.
ToroidalField3 tangential_part(const ToroidalField3& u, const ToroidalField3& w);

/// pi_lambda(x) = pi(lambda x) with pi the inverse stereographic projection from p*.
Vec3 stereographic(double lambda, const Vec2& x);
/// d/dlambda pi_lambda(x).
Vec3 stereographic_dlambda(double lambda, const Vec2& x);
/// |grad pi_lambda(x)| = 2 sqrt(2) lambda / (1 + lambda^2 |x|^2).
double stereographic_conformal_factor(double lambda, const Vec2& x);

/// omega(y) = R y.
Vec3 omega_eval(const RotationParam& rot, const Vec3& y);
/// d omega(p*) restricted to T_{p*}S^2 = span(e1, e2): the first two columns of R.
Mat32 d_omega_pstar(const RotationParam& rot);
/// alpha_omega = |d omega(p*)| / sqrt(2).
double alpha_omega(const RotationParam& rot);

/// Dirichlet energy of a map S^2 -> R^3, pulled back through pi to R^2 and
/// integrated with Gauss-Legendre in the polar angle and the trapezoid rule in
/// azimuth. Derivatives by central differences.
double sphere_energy(const std::function<Vec3(const Vec3&)>& map, int n_polar = 160, int n_azimuth = 64);

/// Energy of omega o pi_lambda over the coordinate disc of radius r.
double disc_energy(const RotationParam& rot, double lambda, double r, int n_radial = 160, int n_azimuth = 64);

}  // namespace bubblelab
