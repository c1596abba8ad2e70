#include "bubblelab/sphere_maps.hpp"

#include <cmath>

#include "bubblelab/errors.hpp"
#include "bubblelab/numerics.hpp"

namespace bubblelab {

RotationParam::RotationParam(const Vec3& axis_angle) : axis_angle_(axis_angle) {
  const double angle = axis_angle.norm();
  matrix_ = angle > 0.0 ? Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix() : Mat3::Identity();
}

bool RotationParam::in_family(double sigma) const {
  return (north_pole() - matrix_ * north_pole()).norm() <= sigma;
}

Vec3 project_to_sphere(const Vec3& v) {
  const double n = v.norm();
  if (!(n >= kProjectionGuard)) throw BelowGuard(n);
  return v / n;
}

ToroidalField3 project_to_sphere(const ToroidalField3& v) {
  ToroidalField3 out(v.grid());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = project_to_sphere(v[k]);
  out.set_on_sphere(true);
  return out;
}

ToroidalField3 tension(const ToroidalField3& u, TensionStats* stats) {
  const auto& g = u.grid();
  const int n = g.n();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  ToroidalField3 out(g);
  double energy_sum = 0.0, tau_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec3* row = &u[static_cast<std::size_t>(i) * n];
    const Vec3* up = &u[static_cast<std::size_t>(g.wrap(i - 1)) * n];
    const Vec3* dn = &u[static_cast<std::size_t>(g.wrap(i + 1)) * n];
    Vec3* o = &out[static_cast<std::size_t>(i) * n];
    double row_e = 0.0, row_t = 0.0;
    for (int j = 0; j < n; ++j) {
      const int jm = j == 0 ? n - 1 : j - 1;
      const int jp = j == n - 1 ? 0 : j + 1;
      const Vec3& c = row[j];
      const Vec3 d1 = dn[j] - c, d2 = c - up[j], d3 = row[jp] - c, d4 = c - row[jm];
      const double f1 = d1.squaredNorm(), f3 = d3.squaredNorm();
      const double grad_sq = 0.5 * (f1 + d2.squaredNorm() + f3 + d4.squaredNorm());
      o[j] = (d1 - d2 + d3 - d4 + grad_sq * c) * inv_h2;
      row_e += f1 + f3;
      row_t += o[j].squaredNorm();
    }
    energy_sum += row_e;
    tau_sum += row_t;
  }
  if (stats) {
    stats->energy = 0.5 * energy_sum;
    stats->l2 = std::sqrt(tau_sum * g.h() * g.h());
  }
  return out;
}

ToroidalField3 tangential_part(const ToroidalField3& u, const ToroidalField3& w) {
  ToroidalField3 out(w.grid());
  for (std::size_t k = 0; k < w.size(); ++k) out[k] = w[k] - w[k].dot(u[k]) * u[k];
  return out;
}

double second_variation(const ToroidalField3& u, const ToroidalField3& v, const ToroidalField3& w) {
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (std::abs(v[k].dot(u[k])) > kTangentialTol || std::abs(w[k].dot(u[k])) > kTangentialTol)
      throw NotTangential("second_variation: variation not tangential at sample " + std::to_string(k));
  }
  const ScalarField g2 = gradient_sq(u);
  const int n = u.grid().n();
  double potential = 0.0;
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    const std::size_t r = static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) row_sum += g2[r + j] * v[r + j].dot(w[r + j]);
    potential += row_sum;
  }
  const double h2 = u.grid().h() * u.grid().h();
  return dirichlet_inner(v, w) - potential * h2;
}

Vec3 stereographic(double lambda, const Vec2& x) {
  const double l2 = lambda * lambda * x.squaredNorm();
  const double inv = 1.0 / (1.0 + l2);
  return Vec3(2.0 * lambda * x.x() * inv, 2.0 * lambda * x.y() * inv, (l2 - 1.0) * inv);
}

Vec3 stereographic_dlambda(double lambda, const Vec2& x) {
  const double r2 = x.squaredNorm();
  const double l2 = lambda * lambda * r2;
  const double inv = 1.0 / (1.0 + l2);
  const double a = 2.0 * (1.0 - l2) * inv * inv;
  return Vec3(a * x.x(), a * x.y(), 4.0 * lambda * r2 * inv * inv);
}

double stereographic_conformal_factor(double lambda, const Vec2& x) {
  return 2.0 * std::sqrt(2.0) * lambda / (1.0 + lambda * lambda * x.squaredNorm());
}

Vec3 omega_eval(const RotationParam& rot, const Vec3& y) { return rot.matrix() * y; }

Mat32 d_omega_pstar(const RotationParam& rot) { return rot.matrix().leftCols<2>(); }

double alpha_omega(const RotationParam& rot) { return d_omega_pstar(rot).norm() / std::sqrt(2.0); }

namespace {

// 1/2 |grad f(x)|^2 by central differences with step delta.
template <class F>
double half_grad_sq(const F& f, const Vec2& x, double delta) {
  const Vec3 d1 = (f(Vec2(x.x() + delta, x.y())) - f(Vec2(x.x() - delta, x.y()))) / (2.0 * delta);
  const Vec3 d2 = (f(Vec2(x.x(), x.y() + delta)) - f(Vec2(x.x(), x.y() - delta))) / (2.0 * delta);
  return 0.5 * (d1.squaredNorm() + d2.squaredNorm());
}

}  // namespace

double sphere_energy(const std::function<Vec3(const Vec3&)>& map, int n_polar, int n_azimuth) {
  // r = tan(psi/2), psi in (0, pi): covers R^2 with a bounded integrand in psi.
  const auto quad = gauss_legendre(n_polar, 0.0, kPi);
  auto pulled = [&](const Vec2& x) { return map(stereographic(1.0, x)); };
  double total = 0.0;
  for (int a = 0; a < n_polar; ++a) {
    const double psi = quad.nodes[a];
    const double r = std::tan(0.5 * psi);
    const double dr_dpsi = 0.5 * (1.0 + r * r);
    const double delta = 1e-5 * dr_dpsi;
    double ring = 0.0;
    for (int b = 0; b < n_azimuth; ++b) {
      const double theta = 2.0 * kPi * b / n_azimuth;
      ring += half_grad_sq(pulled, Vec2(r * std::cos(theta), r * std::sin(theta)), delta);
    }
    total += quad.weights[a] * ring * (2.0 * kPi / n_azimuth) * r * dr_dpsi;
  }
  return total;
}

double disc_energy(const RotationParam& rot, double lambda, double r, int n_radial, int n_azimuth) {
  // s = atan(lambda rho) resolves the bubble core uniformly.
  const auto quad = gauss_legendre(n_radial, 0.0, std::atan(lambda * r));
  auto f = [&](const Vec2& x) { return omega_eval(rot, stereographic(lambda, x)); };
  double total = 0.0;
  for (int a = 0; a < n_radial; ++a) {
    const double t = std::tan(quad.nodes[a]);
    const double rho = t / lambda;
    const double drho = (1.0 + t * t) / lambda;
    const double delta = 1e-5 / lambda * (1.0 + t * t);
    double ring = 0.0;
    for (int b = 0; b < n_azimuth; ++b) {
      const double theta = 2.0 * kPi * b / n_azimuth;
      ring += half_grad_sq(f, Vec2(rho * std::cos(theta), rho * std::sin(theta)), delta);
    }
    total += quad.weights[a] * ring * (2.0 * kPi / n_azimuth) * rho * drho;
  }
  return total;
}

}  // namespace bubblelab
