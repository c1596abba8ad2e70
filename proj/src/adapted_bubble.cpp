#include "bubblelab/adapted_bubble.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "bubblelab/greens_torus.hpp"
#include "bubblelab/numerics.hpp"

namespace bubblelab {

namespace {

double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

// grad_y J_a(x, 0) without the wrap, for |x| <= 1/sqrt 2.
Vec2 grad_j(const Vec2& x) { return -regular_part().gradient(x); }

Vec3 lift(const Vec2& v) { return Vec3(v.x(), v.y(), 0.0); }

// Unrotated inner and outer expressions; the rotation is applied by the caller.
Vec3 inner_unrotated(double lambda, const Vec2& x, const Vec2& gj, const Vec2& gj0) {
  return stereographic(lambda, x) + (2.0 / lambda) * lift(gj - gj0);
}

Vec3 outer_unrotated(double lambda, const Vec2& x, const Vec2& gj, const Vec2& gj0) {
  const Vec2 gy = x / x.squaredNorm() + gj;
  return north_pole() + (2.0 / lambda) * lift(gy - gj0);
}

Vec3 v_unrotated(double lambda, const Vec2& x, const Vec2& gj0) {
  const Vec2 gj = grad_j(x);
  const double r = x.norm();
  if (r >= kR0) return outer_unrotated(lambda, x, gj, gj0);
  const double phi = cutoff(r);
  const Vec3 in = inner_unrotated(lambda, x, gj, gj0);
  if (phi == 1.0) return in;
  return phi * in + (1.0 - phi) * outer_unrotated(lambda, x, gj, gj0);
}

ToroidalField3 sample_bubble(const BubbleParams& params, const ToroidalGrid& grid) {
  const Mat3& rot = params.rot.matrix();
  const Vec2 gj0 = grad_j(Vec2::Zero());
  ToroidalField3 z(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 x = translate_coords(params.center, grid.point(k));
    z[k] = project_to_sphere(Vec3(rot * v_unrotated(params.lambda, x, gj0)));
  }
  z.set_on_sphere(true);
  return z;
}

void check_resolution(double lambda, const ToroidalGrid& grid) {
  if (lambda * grid.h() > kMaxLambdaH + 1e-12)
    throw std::invalid_argument("lambda h = " + std::to_string(lambda * grid.h()) + " exceeds 0.2");
}

}  // namespace

void BubbleParams::validate() const {
  if (!std::isfinite(lambda) || lambda < kLambdaMin)
    throw std::invalid_argument("lambda = " + std::to_string(lambda) + " is below the minimum scale 2");
}

double cutoff(double r) { return 1.0 - smoothstep5((r - 0.5 * kR0) / (0.5 * kR0)); }

Vec3 j_field(const BubbleParams& params, const Vec2& x) {
  return params.rot.matrix() * ((2.0 / params.lambda) * lift(grad_j(x) - grad_j(Vec2::Zero())));
}

Vec3 bubble_v(const BubbleParams& params, const Vec2& x) {
  return params.rot.matrix() * v_unrotated(params.lambda, x, grad_j(Vec2::Zero()));
}

Vec3 seam_discrepancy(const BubbleParams& params, const Vec2& x) {
  const Vec2 gj = grad_j(x), gj0 = grad_j(Vec2::Zero());
  return params.rot.matrix() *
         (inner_unrotated(params.lambda, x, gj, gj0) - outer_unrotated(params.lambda, x, gj, gj0));
}

ToroidalField3 build_bubble(const BubbleParams& params, const ToroidalGrid& grid) {
  params.validate();
  check_resolution(params.lambda, grid);
  return sample_bubble(params, grid);
}

ToroidalField3 build_bubble_unchecked(const BubbleParams& params, const ToroidalGrid& grid) {
  return sample_bubble(params, grid);
}

WeightField bubble_weight(const BubbleParams& params, const ToroidalGrid& grid) {
  return make_weight(grid, params.lambda, params.center);
}

double bubble_energy(const BubbleParams& params, int n) {
  params.validate();
  const ToroidalGrid coarse(n), fine(2 * n);
  check_resolution(params.lambda, coarse);
  return richardson_h2(energy(sample_bubble(params, coarse)), energy(sample_bubble(params, fine)));
}

double energy_gap(const BubbleParams& params, int n) { return bubble_energy(params, n) - kSphereEnergy; }

double dE_dlambda(const BubbleParams& params, int n) {
  const double step = 1e-3 * params.lambda;
  BubbleParams lo = params, hi = params;
  lo.lambda -= step;
  hi.lambda += step;
  return (bubble_energy(hi, n) - bubble_energy(lo, n)) / (2.0 * step);
}

Vec3 dlambda_laplacian_stereographic(double lambda, const Vec2& x) {
  const double l = lambda * lambda * x.squaredNorm();
  const double d4 = std::pow(1.0 + l, 4);
  const double a = -48.0 * lambda * lambda * (1.0 - l) / d4;
  return Vec3(a * x.x(), a * x.y(), 16.0 * lambda * (1.0 - 4.0 * l + l * l) / d4);
}

double leading_term_integral(const BubbleParams& params, int n_radial, int n_azimuth) {
  params.validate();
  const double radius = 0.5 * kR0;
  // r = radius t^2 clusters nodes toward the core.
  const auto quad = gauss_legendre(n_radial, 0.0, 1.0);
  const Mat3& rot = params.rot.matrix();
  double total = 0.0;
  for (int i = 0; i < n_radial; ++i) {
    const double t = quad.nodes[i];
    const double r = radius * t * t;
    const double dr = 2.0 * radius * t;
    double ring = 0.0;
    for (int k = 0; k < n_azimuth; ++k) {
      const double th = 2.0 * kPi * k / n_azimuth;
      const Vec2 x(r * std::cos(th), r * std::sin(th));
      const Vec3 lap = rot * dlambda_laplacian_stereographic(params.lambda, x);
      ring += j_field(params, x).dot(lap);
    }
    total += quad.weights[i] * ring * (2.0 * kPi / n_azimuth) * r * dr;
  }
  return total;
}

double leading_term_model(double lambda) {
  return 4.0 * kPi * 2.0 * (-2.0 * kPi) / (lambda * lambda * lambda);
}

double far_field_sup(const ToroidalField3& z, const BubbleParams& params) {
  const Vec3 target = params.rot.matrix() * north_pole();
  double sup = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (translate_coords(params.center, z.grid().point(k)).norm() < kIota) continue;
    sup = std::max(sup, (z[k] - target).norm());
  }
  return sup;
}

double seam_error_sup(const BubbleParams& params, const ToroidalGrid& grid) {
  double sup = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 x = translate_coords(params.center, grid.point(k));
    const double r = x.norm();
    if (r <= 0.5 * kR0 || r >= kR0) continue;
    sup = std::max(sup, cutoff(r) * seam_discrepancy(params, x).norm());
  }
  return sup;
}

namespace {

double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 2.0 * std::atan2(a.dot(b.cross(c)), 1.0 + a.dot(b) + b.dot(c) + c.dot(a));
}

}  // namespace

double discrete_degree(const ToroidalField3& u) {
  const int n = u.grid().n();
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec3& p00 = u.at(i, j);
      const Vec3& p10 = u.at(i + 1, j);
      const Vec3& p11 = u.at(i + 1, j + 1);
      const Vec3& p01 = u.at(i, j + 1);
      total += solid_angle(p00, p10, p11) + solid_angle(p00, p11, p01);
    }
  return total / (4.0 * kPi);
}

ToroidalField3 scale_variation(const BubbleParams& params, const ToroidalGrid& grid) {
  const double step = 1e-3 * params.lambda;
  BubbleParams lo = params, hi = params;
  lo.lambda -= step;
  hi.lambda += step;
  ToroidalField3 d = build_bubble_unchecked(hi, grid) - build_bubble_unchecked(lo, grid);
  d *= params.lambda / (2.0 * step);
  return tangential_part(build_bubble_unchecked(params, grid), d);
}

VariationReport variation_scalings(const BubbleParams& params, const ToroidalGrid& grid) {
  const ToroidalField3 z = build_bubble(params, grid);
  const WeightField rho = bubble_weight(params, grid);
  VariationReport rep;

  const ToroidalField3 dl = scale_variation(params, grid);
  rep.scale = weighted_norm(dl, rho);

  const double h = grid.h();
  for (int i = 0; i < 2; ++i) {
    BubbleParams lo = params, hi = params;
    lo.center[i] -= h;
    hi.center[i] += h;
    ToroidalField3 d = build_bubble_unchecked(hi, grid) - build_bubble_unchecked(lo, grid);
    d *= 1.0 / (2.0 * h * params.lambda);
    rep.translation[i] = weighted_norm(d, rho);
  }

  const double eps = 1e-3;
  for (int k = 0; k < 3; ++k) {
    Vec3 lo_aa = params.rot.axis_angle(), hi_aa = lo_aa;
    lo_aa[k] -= eps;
    hi_aa[k] += eps;
    BubbleParams lo = params, hi = params;
    lo.rot = RotationParam(lo_aa);
    hi.rot = RotationParam(hi_aa);
    ToroidalField3 d = build_bubble_unchecked(hi, grid) - build_bubble_unchecked(lo, grid);
    d *= 1.0 / (2.0 * eps);
    rep.rotation[k] = weighted_norm(d, rho);
  }

  const double step = 1e-3 * params.lambda;
  const WeightField lo = make_weight_unchecked(grid, params.lambda - step, params.center);
  const WeightField hi = make_weight_unchecked(grid, params.lambda + step, params.center);
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double d = (hi.rho[k] - lo.rho[k]) / (2.0 * step);
    acc += d * d;
  }
  rep.weight_l2 = std::sqrt(acc) * h;
  rep.weight_ratio = rep.weight_l2 / (rep.scale / params.lambda);
  return rep;
}

ToroidalField3 random_smooth_field(const ToroidalGrid& grid, std::uint64_t seed) {
  struct Mode {
    Vec3 coef;
    int k1, k2;
    double phase;
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> wave(-3, 3);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::vector<Mode> modes(6);
  for (auto& m : modes) {
    m.coef = Vec3(normal(rng), normal(rng), normal(rng));
    m.k1 = wave(rng);
    m.k2 = wave(rng);
    m.phase = phase(rng);
  }
  return ToroidalField3::from_function(grid, [&](const Vec2& p) {
    Vec3 w = Vec3::Zero();
    for (const auto& m : modes) w += m.coef * std::cos(2.0 * kPi * (m.k1 * p.x() + m.k2 * p.y()) + m.phase);
    return w;
  });
}

ToroidalField3 random_tangent_field(const ToroidalField3& u, std::uint64_t seed) {
  return tangential_part(u, random_smooth_field(u.grid(), seed));
}

}  // namespace bubblelab
