#include <doctest.h>

#include <cmath>

#include "bubblelab/adapted_bubble.hpp"
#include "bubblelab/bubble_scan.hpp"
#include "bubblelab/greens_torus.hpp"

using namespace bubblelab;

namespace {

const Vec3 kPole(0, 0, 1);

BubbleParams params(double lambda, Vec2 center = Vec2(0.5, 0.5), Vec3 rot = Vec3::Zero()) {
  BubbleParams p;
  p.lambda = lambda;
  p.center = center;
  p.rot = RotationParam(rot);
  return p;
}

}  // namespace

TEST_CASE("cutoff") {
  CHECK(cutoff(0.0) == 1.0);
  CHECK(cutoff(0.125) == 1.0);
  CHECK(cutoff(0.25) == 0.0);
  CHECK(cutoff(0.3) == 0.0);
  CHECK(cutoff(0.1875) == doctest::Approx(0.5));
  double prev = 1.0;
  for (double r = 0.125; r <= 0.25; r += 0.005) {
    CHECK(cutoff(r) <= prev + 1e-15);
    prev = cutoff(r);
  }
}

TEST_CASE("j vanishes at the center and is tangent at R p*") {
  const auto p = params(20, Vec2(0.3, 0.4), Vec3(0.05, 0.1, -0.02));
  CHECK(j_field(p, Vec2(0, 0)).norm() <= 1e-15);
  const Vec3 rp = p.rot.matrix() * kPole;
  for (const Vec2& x : {Vec2(0.05, 0.02), Vec2(-0.1, 0.15), Vec2(0.2, -0.01)}) {
    CHECK(std::abs(j_field(p, x).dot(rp)) <= 1e-15);
    const Vec2 g = grad_regular(x) - grad_regular(Vec2(0, 0));
    CHECK((j_field(p, x) - (2.0 / p.lambda) * p.rot.matrix() * Vec3(g.x(), g.y(), 0)).norm() <= 1e-15);
  }
}

TEST_CASE("stereographic expansion at infinity") {
  // pi_lambda(x) - p* - (2/lambda)(x/|x|^2, 0) = O((lambda |x|)^-2).
  const Vec2 x(0.15, 0.1);
  auto rem = [&](double lambda) {
    const Vec2 q = x / x.squaredNorm();
    return (stereographic(lambda, x) - kPole - (2.0 / lambda) * Vec3(q.x(), q.y(), 0)).norm();
  };
  CHECK(rem(40) / rem(80) == doctest::Approx(4.0).epsilon(0.02));
  CHECK(rem(80) / rem(160) == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("seam discrepancy decays like lambda^-2") {
  const ToroidalGrid g(512);
  const double s40 = seam_error_sup(params(40), g), s80 = seam_error_sup(params(80), g);
  CHECK(s40 / s80 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("closed-form scale derivative of the Laplacian") {
  const double lambda = 20.0, e = 1e-4;
  for (const Vec2& x : {Vec2(0.01, 0.02), Vec2(0.05, -0.03), Vec2(-0.08, 0.0)}) {
    auto f = [&](const Vec2& y) { return stereographic_dlambda(lambda, y); };
    const Vec3 fd = (f(x + Vec2(e, 0)) + f(x - Vec2(e, 0)) + f(x + Vec2(0, e)) + f(x - Vec2(0, e)) - 4 * f(x)) / (e * e);
    const Vec3 cf = dlambda_laplacian_stereographic(lambda, x);
    CHECK((cf - fd).norm() <= 1e-4 * cf.norm() + 1e-6);
  }
}

TEST_CASE("adapted bubble: on the sphere, degree one, resolution guard") {
  const ToroidalGrid g(128);
  const auto z = build_bubble(params(20, Vec2(0.25, 0.6), Vec3(0.1, 0, 0)), g);
  CHECK(z.on_sphere());
  CHECK(z.sphere_defect() <= 1e-12);
  CHECK(std::abs(discrete_degree(z)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(discrete_degree(ToroidalField3(g, kPole)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(build_bubble(params(26, Vec2(0.5, 0.5)), g), std::invalid_argument);
  CHECK_THROWS_AS(build_bubble(params(1.5, Vec2(0.5, 0.5)), g), std::invalid_argument);
  CHECK_THROWS_AS(params(1.9).validate(), std::invalid_argument);
}

TEST_CASE("bubble is translation covariant on the grid") {
  const ToroidalGrid g(64);
  const auto z0 = build_bubble(params(10, Vec2(0.5, 0.5)), g);
  const auto z1 = build_bubble(params(10, Vec2(0.5 + 3 * g.h(), 0.5 - 5 * g.h())), g);
  double err = 0.0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) err = std::max(err, (z1.at(i + 3, j - 5) - z0.at(i, j)).norm());
  CHECK(err <= 1e-12);
}

TEST_CASE("energy gap and its scale derivative at lambda = 20") {
  const auto p = params(20);
  const double model = 8 * kPi * kPi / 400.0;
  CHECK(energy_gap(p, 128) == doctest::Approx(model).epsilon(0.05));
  CHECK(dE_dlambda(p, 128) == doctest::Approx(-16 * kPi * kPi / 8000.0).epsilon(0.05));
}

TEST_CASE("leading term approaches the model with a lambda^-2 defect") {
  const auto r = [](double l) { return leading_term_integral(params(l)) / leading_term_model(l); };
  const double r80 = r(80), r160 = r(160), r320 = r(320);
  CHECK(r80 < r160);
  CHECK(r160 < r320);
  CHECK(r320 == doctest::Approx(1.0).epsilon(0.01));
  CHECK((1 - r160) / (1 - r320) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("far field decays like 1/lambda") {
  const ToroidalGrid g(512);
  const double f40 = far_field_sup(build_bubble(params(40), g), params(40));
  const double f80 = far_field_sup(build_bubble(params(80), g), params(80));
  CHECK(f40 / f80 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("random fields are grid independent and tangential on request") {
  const auto a = random_smooth_field(ToroidalGrid(16), 42);
  const auto b = random_smooth_field(ToroidalGrid(32), 42);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) CHECK((a.at(i, j) - b.at(2 * i, 2 * j)).norm() <= 1e-13);
  const auto z = build_bubble(params(5), ToroidalGrid(32));
  const auto t = random_tangent_field(z, 1);
  for (std::size_t k = 0; k < z.size(); ++k) CHECK(std::abs(t[k].dot(z[k])) <= 1e-13);
}

TEST_CASE("scale variation is tangential") {
  const auto p = params(10);
  const ToroidalGrid g(64);
  const auto z = build_bubble(p, g);
  const auto v = scale_variation(p, g);
  double worst = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) worst = std::max(worst, std::abs(v[k].dot(z[k])));
  CHECK(worst <= 1e-12);
}
