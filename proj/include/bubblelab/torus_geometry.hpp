/// @file torus_geometry.hpp
/// @brief Periodic grid calculus on the unit-area flat square torus.
///
/// Samples sit at p = (i h, j h), i, j = 0..N-1, h = 1/N, stored row-major with
/// i as the row index. All stencils are second order and periodic. The discrete
/// energy uses forward edge differences, so that the 5-point Laplacian is exactly
/// minus its gradient:  sum (Lap u) . v h^2 = - sum D+u . D+v h^2.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "bubblelab/types.hpp"

namespace bubblelab {

class ToroidalGrid {
 public:
  explicit ToroidalGrid(int n);

  int n() const { return n_; }
  double h() const { return 1.0 / static_cast<double>(n_); }
  std::size_t size() const { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }

  /// Wraps i, j into [0, N) and returns the row-major index.
  std::size_t index(long i, long j) const {
    return static_cast<std::size_t>(wrap(i)) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(wrap(j));
  }
  int wrap(long i) const {
    const long m = i % n_;
    return static_cast<int>(m < 0 ? m + n_ : m);
  }
  Vec2 point(long i, long j) const { return Vec2(wrap(i) * h(), wrap(j) * h()); }
  Vec2 point(std::size_t k) const {
    return Vec2(static_cast<double>(k / n_) * h(), static_cast<double>(k % n_) * h());
  }

  bool operator==(const ToroidalGrid& o) const { return n_ == o.n_; }

 private:
  int n_;
};

/// Scalar sample values on a grid.
struct ScalarField {
  ToroidalGrid grid;
  std::vector<double> values;

  explicit ScalarField(const ToroidalGrid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  double& operator[](std::size_t k) { return values[k]; }
  double operator[](std::size_t k) const { return values[k]; }
};

/// A map from the torus into R^3, sampled on a periodic grid.
class ToroidalField3 {
 public:
  explicit ToroidalField3(const ToroidalGrid& g, const Vec3& fill = Vec3::Zero())
      : grid_(g), values_(g.size(), fill) {}

  const ToroidalGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  Vec3& operator[](std::size_t k) { return values_[k]; }
  const Vec3& operator[](std::size_t k) const { return values_[k]; }
  Vec3& at(long i, long j) { return values_[grid_.index(i, j)]; }
  const Vec3& at(long i, long j) const { return values_[grid_.index(i, j)]; }

  std::vector<Vec3>& values() { return values_; }
  const std::vector<Vec3>& values() const { return values_; }

  /// Set by constructions that guarantee | |u| - 1 | <= 1e-12 per sample.
  bool on_sphere() const { return on_sphere_; }
  void set_on_sphere(bool flag) { on_sphere_ = flag; }

  bool all_finite() const;
  /// Largest | |u| - 1 | over samples.
  double sphere_defect() const;

  template <class F>
  static ToroidalField3 from_function(const ToroidalGrid& g, F&& f) {
    ToroidalField3 out(g);
    for (std::size_t k = 0; k < g.size(); ++k) out[k] = f(g.point(k));
    return out;
  }

  ToroidalField3& operator+=(const ToroidalField3& o);
  ToroidalField3& operator-=(const ToroidalField3& o);
  ToroidalField3& operator*=(double s);

 private:
  ToroidalGrid grid_;
  std::vector<Vec3> values_;
  bool on_sphere_ = false;
};

ToroidalField3 operator+(ToroidalField3 a, const ToroidalField3& b);
ToroidalField3 operator-(ToroidalField3 a, const ToroidalField3& b);
ToroidalField3 operator*(double s, ToroidalField3 a);

/// Bubble weight rho = lambda/(1+lambda^2|x|^2) inside the coordinate ball around a,
/// and the constant lambda/(1+lambda^2 r0^2) outside.
struct WeightField {
  ScalarField rho;
  double lambda;
  Vec2 center;
};

// --- differential operators -------------------------------------------------

ToroidalField3 laplacian(const ToroidalField3& u);

/// |grad u|^2 per sample: the mean of the forward and backward squared edge
/// differences in each direction, summed over components and directions.
ScalarField gradient_sq(const ToroidalField3& u);

/// E(u) = 1/2 sum |grad u|^2 h^2.
double energy(const ToroidalField3& u);

/// Sum over forward edges of D+v . D+w, times h^2.
double dirichlet_inner(const ToroidalField3& v, const ToroidalField3& w);

// --- quadrature ---------------------------------------------------------------

double integrate(const ScalarField& f);
double l2_inner(const ToroidalField3& v, const ToroidalField3& w);
double l2_norm(const ToroidalField3& v);
Vec3 mean(const ToroidalField3& v);

// --- translation coordinates ----------------------------------------------------

/// Representative of t in [-1/2, 1/2).
double wrap_centered(double t);
/// x = F_a(p) = wrap(p - a) in [-1/2, 1/2)^2.
Vec2 translate_coords(const Vec2& a, const Vec2& p);
/// p = F_a^{-1}(x) in [0, 1)^2.
Vec2 translate_coords_inverse(const Vec2& a, const Vec2& x);

// --- weighted norm ---------------------------------------------------------------

/// Throws std::invalid_argument when lambda h > 0.2 or lambda < 2.
WeightField make_weight(const ToroidalGrid& grid, double lambda, const Vec2& center);
/// Same without the resolution check; for finite-difference probes.
WeightField make_weight_unchecked(const ToroidalGrid& grid, double lambda, const Vec2& center);

double weighted_inner(const ToroidalField3& v, const ToroidalField3& w, const WeightField& rho);
double weighted_norm(const ToroidalField3& w, const WeightField& rho);

/// |mean w| / ((log lambda)^{1/2} ||w||_z).
double mean_value_ratio(const ToroidalField3& w, const WeightField& rho);

// --- serialization ------------------------------------------------------------------

/// Header: N as 64-bit little-endian integer; then N*N samples, row-major, three
/// little-endian 64-bit floats each.
void write_binary(std::ostream& os, const ToroidalField3& u);
ToroidalField3 read_binary(std::istream& is);
void write_binary_file(const std::string& path, const ToroidalField3& u);
ToroidalField3 read_binary_file(const std::string& path);

/// Debug dump: "i,j,u1,u2,u3" rows.
void write_csv(std::ostream& os, const ToroidalField3& u);

}  // namespace bubblelab
