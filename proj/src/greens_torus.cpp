#include "bubblelab/greens_torus.hpp"

#include <gsl/gsl_sf_expint.h>

#include <cmath>
#include <complex>
#include <iomanip>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "bubblelab/errors.hpp"

namespace bubblelab {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

// Ein(q) = int_0^q (1 - e^{-t})/t dt = E1(q) + log q + gamma.
double ein(double q) {
  if (q < 0.5) {
    double term = q, sum = q;
    for (int k = 2; k < 40; ++k) {
      term *= -q / k;
      const double add = term / k;
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return gsl_sf_expint_E1(q) + std::log(q) + kEulerGamma;
}

// (1 - e^{-q})/q and its derivative, stable at q -> 0.
double phi1(double q) { return q < 1e-8 ? 1.0 - 0.5 * q : -std::expm1(-q) / q; }

double phi1_prime(double q) {
  if (q < 0.05) {
    // sum_{k>=1} k (-q)^{k-1} (-1) / (k+1)!
    double sum = 0.0, fact = 1.0, pw = 1.0;
    for (int k = 1; k < 12; ++k) {
      fact *= (k + 1);
      sum += (k % 2 ? -1.0 : 1.0) * k * pw / fact;
      pw *= q;
    }
    return sum;
  }
  return (std::exp(-q) * (q + 1.0) - 1.0) / (q * q);
}

Vec2 wrap_point(const Vec2& x) { return Vec2(wrap_centered(x.x()), wrap_centered(x.y())); }

}  // namespace

EwaldGreens::EwaldGreens(EwaldOptions options) : options_(options) {
  kappa_ = kPi * kPi / options_.split;
  real_radius_ = std::sqrt(options_.cutoff_exponent / kappa_);
  real_images_ = static_cast<int>(std::ceil(real_radius_ + 1.0));
  fourier_cutoff_ = static_cast<int>(std::ceil(std::sqrt(options_.cutoff_exponent / options_.split)));
}

template <class Term>
void EwaldGreens::for_real_images(const Vec2& x, bool skip_origin, Term&& term) const {
  const long lo1 = static_cast<long>(std::floor(-x.x() - real_radius_));
  const long hi1 = static_cast<long>(std::ceil(-x.x() + real_radius_));
  const long lo2 = static_cast<long>(std::floor(-x.y() - real_radius_));
  const long hi2 = static_cast<long>(std::ceil(-x.y() + real_radius_));
  const double r2max = real_radius_ * real_radius_;
  for (long n1 = lo1; n1 <= hi1; ++n1)
    for (long n2 = lo2; n2 <= hi2; ++n2) {
      if (skip_origin && n1 == 0 && n2 == 0) continue;
      const Vec2 y(x.x() + n1, x.y() + n2);
      const double r2 = y.squaredNorm();
      if (r2 > r2max) continue;
      term(y, r2);
    }
}

namespace {

// Fourier-space partial sums: cos-part, grad and Hessian contributions.
struct FourierParts {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
};

FourierParts fourier_sum(const Vec2& x, double split, int kmax) {
  std::vector<std::complex<double>> e1(2 * kmax + 1), e2(2 * kmax + 1);
  for (int k = -kmax; k <= kmax; ++k) {
    e1[k + kmax] = std::polar(1.0, 2.0 * kPi * k * x.x());
    e2[k + kmax] = std::polar(1.0, 2.0 * kPi * k * x.y());
  }
  FourierParts out;
  for (int k1 = -kmax; k1 <= kmax; ++k1)
    for (int k2 = -kmax; k2 <= kmax; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      const double kk = static_cast<double>(k1 * k1 + k2 * k2);
      const double weight = std::exp(-split * kk) / kk;
      const std::complex<double> ph = e1[k1 + kmax] * e2[k2 + kmax];
      out.value += weight * ph.real();
      out.grad -= Vec2(k1, k2) * (weight * ph.imag());
      out.hess -= (Eigen::Matrix2d() << k1 * k1, k1 * k2, k1 * k2, k2 * k2).finished() * (2.0 * kPi * weight * ph.real());
    }
  out.value /= 2.0 * kPi;
  return out;
}

}  // namespace

double EwaldGreens::value(const Vec2& x_in) const {
  const Vec2 x = wrap_point(x_in);
  if (x.squaredNorm() == 0.0) throw AtSingularity("Green's function evaluated at its pole");
  double real = 0.0;
  for_real_images(x, false, [&](const Vec2&, double r2) { real += 0.5 * gsl_sf_expint_E1(kappa_ * r2); });
  return real - options_.split / (2.0 * kPi) + fourier_sum(x, options_.split, fourier_cutoff_).value;
}

Vec2 EwaldGreens::gradient(const Vec2& x_in) const {
  const Vec2 x = wrap_point(x_in);
  if (x.squaredNorm() == 0.0) throw AtSingularity("Green's function gradient evaluated at its pole");
  Vec2 real = Vec2::Zero();
  for_real_images(x, false, [&](const Vec2& y, double r2) { real -= std::exp(-kappa_ * r2) / r2 * y; });
  return real + fourier_sum(x, options_.split, fourier_cutoff_).grad;
}

Eigen::Matrix2d EwaldGreens::hessian(const Vec2& x_in) const {
  const Vec2 x = wrap_point(x_in);
  if (x.squaredNorm() == 0.0) throw AtSingularity("Green's function Hessian evaluated at its pole");
  Eigen::Matrix2d real = Eigen::Matrix2d::Zero();
  for_real_images(x, false, [&](const Vec2& y, double r2) {
    const double e = std::exp(-kappa_ * r2);
    real += e * ((2.0 * kappa_ / r2 + 2.0 / (r2 * r2)) * (y * y.transpose()) - Eigen::Matrix2d::Identity() / r2);
  });
  return real + fourier_sum(x, options_.split, fourier_cutoff_).hess;
}

double EwaldGreens::regular_value(const Vec2& x) const {
  double real = 0.0;
  for_real_images(x, true, [&](const Vec2&, double r2) { real += 0.5 * gsl_sf_expint_E1(kappa_ * r2); });
  const double q = kappa_ * x.squaredNorm();
  const double origin = 0.5 * (ein(q) - kEulerGamma) - 0.5 * std::log(kappa_);
  return origin + real - options_.split / (2.0 * kPi) + fourier_sum(x, options_.split, fourier_cutoff_).value;
}

Vec2 EwaldGreens::regular_gradient(const Vec2& x) const {
  Vec2 real = Vec2::Zero();
  for_real_images(x, true, [&](const Vec2& y, double r2) { real -= std::exp(-kappa_ * r2) / r2 * y; });
  const double q = kappa_ * x.squaredNorm();
  return kappa_ * phi1(q) * x + real + fourier_sum(x, options_.split, fourier_cutoff_).grad;
}

Eigen::Matrix2d EwaldGreens::regular_hessian(const Vec2& x) const {
  Eigen::Matrix2d real = Eigen::Matrix2d::Zero();
  for_real_images(x, true, [&](const Vec2& y, double r2) {
    const double e = std::exp(-kappa_ * r2);
    real += e * ((2.0 * kappa_ / r2 + 2.0 / (r2 * r2)) * (y * y.transpose()) - Eigen::Matrix2d::Identity() / r2);
  });
  const double q = kappa_ * x.squaredNorm();
  const Eigen::Matrix2d origin =
      kappa_ * phi1(q) * Eigen::Matrix2d::Identity() + 2.0 * kappa_ * kappa_ * phi1_prime(q) * (x * x.transpose());
  return origin + real + fourier_sum(x, options_.split, fourier_cutoff_).hess;
}

RegularPartSeries RegularPartSeries::fit(const EwaldGreens& ewald, int terms, double radius, int samples) {
  RegularPartSeries s;
  s.coeffs_.assign(static_cast<std::size_t>(terms), 0.0);
  std::vector<double> harmonic(static_cast<std::size_t>(samples));
  for (int l = 0; l < samples; ++l) {
    const double th = 2.0 * kPi * l / samples;
    const Vec2 x(radius * std::cos(th), radius * std::sin(th));
    harmonic[l] = ewald.regular_value(x) - 0.5 * kPi * radius * radius;
  }
  double c0 = 0.0;
  for (double v : harmonic) c0 += v;
  s.c0_ = c0 / samples;
  for (int m = 1; m <= terms; ++m) {
    double acc = 0.0;
    for (int l = 0; l < samples; ++l) acc += harmonic[l] * std::cos(4.0 * m * 2.0 * kPi * l / samples);
    s.coeffs_[m - 1] = 2.0 * acc / samples / std::pow(radius, 4.0 * m);
  }
  return s;
}

double RegularPartSeries::value(const Vec2& x) const {
  const std::complex<double> z(x.x(), x.y());
  const std::complex<double> w = (z * z) * (z * z);
  std::complex<double> p = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) p = (p + *it) * w;
  return c0_ + 0.5 * kPi * x.squaredNorm() + p.real();
}

Vec2 RegularPartSeries::gradient(const Vec2& x) const {
  const std::complex<double> z(x.x(), x.y());
  const std::complex<double> z3 = z * z * z;
  const std::complex<double> w = z3 * z;
  // P'(w) = sum m c_m w^{m-1}; F'(z) = 4 z^3 P'(w).
  std::complex<double> dp = 0.0;
  const int m_max = static_cast<int>(coeffs_.size());
  for (int m = m_max; m >= 1; --m) dp = dp * w + static_cast<double>(m) * coeffs_[m - 1];
  const std::complex<double> fprime = 4.0 * z3 * dp;
  return kPi * x + Vec2(fprime.real(), -fprime.imag());
}

const RegularPartSeries& regular_part() {
  static const RegularPartSeries series = RegularPartSeries::fit(EwaldGreens());
  return series;
}

double greens_value(const Vec2& x) {
  static const EwaldGreens ewald;
  return ewald.value(x);
}

Vec2 greens_gradient(const Vec2& x) {
  static const EwaldGreens ewald;
  return ewald.gradient(x);
}

Vec2 grad_regular(const Vec2& x) { return -regular_part().gradient(wrap_point(x)); }

Vec2 grad_regular(const Vec2& a, const Vec2& p) {
  const Vec2 x = translate_coords(a, p);
  if (x.squaredNorm() < 1e-4) return grad_regular(x);
  return -greens_gradient(p - a) - x / x.squaredNorm();
}

JConstantReport j_constant(const EwaldGreens& ewald) {
  JConstantReport rep;
  rep.analytic = -2.0 * kPi;
  for (double t = 0.1; t > 0.005; t *= 0.5) {
    // Mixed derivatives of G(x - y) at y = 0: d_{y_i} d_{x_i} = -d_i d_i.
    const Eigen::Matrix2d hxx = ewald.hessian(Vec2(t, 0.0));
    rep.probe_radii.push_back(t);
    rep.probe_traces.push_back(-hxx.trace());
  }
  for (std::size_t k = 0; k + 1 < rep.probe_traces.size(); ++k)
    rep.extrapolated.push_back((4.0 * rep.probe_traces[k + 1] - rep.probe_traces[k]) / 3.0);
  rep.trace_limit = rep.extrapolated.back();
  for (std::size_t k = 0; k + 1 < rep.extrapolated.size(); ++k)
    if (std::abs(rep.extrapolated[k + 1] - rep.extrapolated[k]) > 1e-4)
      throw NonConvergent("trace limit drifts across probe scales");
  if (std::abs(rep.trace_limit - rep.analytic) > 1e-4)
    throw NonConvergent("trace limit disagrees with -2 pi / Area");
  return rep;
}

GreensTable GreensTable::build(const ToroidalGrid& grid, const Vec2& center, EwaldOptions options) {
  const EwaldGreens ewald(options);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  GreensTable t{grid, center, options, {}, {}, 0.0, Vec2::Zero()};
  t.values.resize(grid.size());
  t.gradients.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 x = translate_coords(center, grid.point(k));
    if (x.squaredNorm() == 0.0) {
      t.values[k] = nan;
      t.gradients[k] = Vec2(nan, nan);
      continue;
    }
    t.values[k] = ewald.value(x);
    t.gradients[k] = ewald.gradient(x);
  }
  t.j_constant = bubblelab::j_constant(ewald).trace_limit;
  t.grad_regular_zero = -ewald.regular_gradient(Vec2::Zero());
  return t;
}

double GreensTable::sample_sum() const {
  double total = 0.0;
  for (double v : values)
    if (std::isfinite(v)) total += v;
  return total * grid.h() * grid.h();
}

void GreensTable::write_csv(std::ostream& os) const {
  os << "x1,x2,G,dG1,dG2\n" << std::setprecision(17);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 x = translate_coords(center, grid.point(k));
    os << x.x() << ',' << x.y() << ',' << values[k] << ',' << gradients[k].x() << ',' << gradients[k].y() << '\n';
  }
}

std::string GreensTable::summary_json() const {
  nlohmann::json j;
  j["grid_n"] = grid.n();
  j["center"] = {center.x(), center.y()};
  j["ewald_split"] = options.split;
  j["j_constant"] = j_constant;
  j["j_constant_analytic"] = -2.0 * kPi;
  j["grad_regular_zero"] = {grad_regular_zero.x(), grad_regular_zero.y()};
  j["sample_sum"] = sample_sum();
  return j.dump(2);
}

}  // namespace bubblelab
