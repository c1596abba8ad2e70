#include <doctest.h>

#include <cmath>
#include <random>

#include "bubblelab/adapted_bubble.hpp"
#include "bubblelab/errors.hpp"
#include "bubblelab/sphere_maps.hpp"

using namespace bubblelab;

TEST_CASE("projection and its guard") {
  CHECK(project_to_sphere(Vec3(0, 3, 4)).isApprox(Vec3(0, 0.6, 0.8)));
  CHECK_THROWS_AS(project_to_sphere(Vec3(0.05, 0, 0)), BelowGuard);
  const ToroidalGrid g(16);
  const auto u = project_to_sphere(random_smooth_field(g, 2) + ToroidalField3(g, Vec3(0, 0, 10)));
  CHECK(u.on_sphere());
  CHECK(u.sphere_defect() <= 1e-15);
}

TEST_CASE("tension is tangential and its stats match the direct sums") {
  const ToroidalGrid g(48);
  const auto u = project_to_sphere(random_smooth_field(g, 7) + ToroidalField3(g, Vec3(0.5, 0, 0)));
  TensionStats st;
  const auto tau = tension(u, &st);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) worst = std::max(worst, std::abs(tau[k].dot(u[k])));
  CHECK(worst <= 1e-9);
  CHECK(st.energy == doctest::Approx(energy(u)).epsilon(1e-12));
  CHECK(st.l2 == doctest::Approx(l2_norm(tau)).epsilon(1e-12));
}

TEST_CASE("tension is minus the gradient of the energy") {
  const ToroidalGrid g(32);
  const auto u = project_to_sphere(random_smooth_field(g, 8) + ToroidalField3(g, Vec3(0, 0.7, 0)));
  const auto tau = tension(u);
  const auto v = random_tangent_field(u, 9);
  const double eps = 1e-5;
  const auto up = project_to_sphere(u + eps * v);
  const auto um = project_to_sphere(u - eps * v);
  const double de = (energy(up) - energy(um)) / (2 * eps);
  CHECK(de == doctest::Approx(-l2_inner(tau, v)).epsilon(1e-5));
}

TEST_CASE("second variation rejects normal directions") {
  const ToroidalGrid g(16);
  const auto u = project_to_sphere(random_smooth_field(g, 1) + ToroidalField3(g, Vec3(0, 0, 1)));
  const auto t = random_tangent_field(u, 2);
  CHECK_NOTHROW(second_variation(u, t, t));
  CHECK_THROWS_AS(second_variation(u, u, t), NotTangential);
}

TEST_CASE("stereographic map: sphere, pole, conformal factor and scale derivative") {
  const double lambda = 7.0;
  CHECK(stereographic(lambda, Vec2(0, 0)).isApprox(Vec3(0, 0, -1)));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-0.4, 0.4);
  for (int s = 0; s < 20; ++s) {
    const Vec2 x(d(rng), d(rng));
    CHECK(stereographic(lambda, x).norm() == doctest::Approx(1.0).epsilon(1e-14));
    const double e = 1e-6;
    const Vec3 d1 = (stereographic(lambda, x + Vec2(e, 0)) - stereographic(lambda, x - Vec2(e, 0))) / (2 * e);
    const Vec3 d2 = (stereographic(lambda, x + Vec2(0, e)) - stereographic(lambda, x - Vec2(0, e))) / (2 * e);
    const double fd = std::sqrt(d1.squaredNorm() + d2.squaredNorm());
    CHECK(stereographic_conformal_factor(lambda, x) == doctest::Approx(fd).epsilon(1e-7));
    CHECK(std::abs(d1.dot(d2)) <= 1e-6 * d1.squaredNorm());
    const Vec3 dl = (stereographic(lambda + e, x) - stereographic(lambda - e, x)) / (2 * e);
    CHECK((stereographic_dlambda(lambda, x) - dl).norm() <= 1e-7);
  }
}

TEST_CASE("rotations") {
  const RotationParam r(Vec3(0.1, -0.05, 0.3));
  CHECK((r.matrix().transpose() * r.matrix() - Mat3::Identity()).norm() <= 1e-14);
  CHECK(alpha_omega(r) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.in_family());
  CHECK_FALSE(RotationParam(Vec3(1.0, 0, 0)).in_family());
}

TEST_CASE("identity and rotations of S^2 carry energy 4 pi") {
  CHECK(sphere_energy([](const Vec3& y) { return y; }) == doctest::Approx(4 * kPi).epsilon(1e-6));
  // The antipodal map also has energy 4 pi; a constant has none.
  CHECK(sphere_energy([](const Vec3& y) { return Vec3(-y); }) == doctest::Approx(4 * kPi).epsilon(1e-6));
  CHECK(sphere_energy([](const Vec3&) { return Vec3(0, 0, 1); }) == doctest::Approx(0.0));
}

TEST_CASE("disc energy approaches 4 pi") {
  // Energy of pi_lambda on B_r is 4 pi lambda^2 r^2 / (1 + lambda^2 r^2).
  const double lambda = 30.0, r = 0.25;
  const double l2r2 = lambda * lambda * r * r;
  CHECK(disc_energy(RotationParam(), lambda, r) == doctest::Approx(4 * kPi * l2r2 / (1 + l2r2)).epsilon(1e-8));
}
