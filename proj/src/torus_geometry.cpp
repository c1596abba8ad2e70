#include "bubblelab/torus_geometry.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace bubblelab {

ToroidalGrid::ToroidalGrid(int n) : n_(n) {
  if (n < 16) throw std::invalid_argument("grid resolution must be at least 16, got " + std::to_string(n));
}

bool ToroidalField3::all_finite() const {
  for (const auto& v : values_)
    if (!v.allFinite()) return false;
  return true;
}

double ToroidalField3::sphere_defect() const {
  double worst = 0.0;
  for (const auto& v : values_) worst = std::max(worst, std::abs(v.norm() - 1.0));
  return worst;
}

ToroidalField3& ToroidalField3::operator+=(const ToroidalField3& o) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  on_sphere_ = false;
  return *this;
}

ToroidalField3& ToroidalField3::operator-=(const ToroidalField3& o) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  on_sphere_ = false;
  return *this;
}

ToroidalField3& ToroidalField3::operator*=(double s) {
  for (auto& v : values_) v *= s;
  on_sphere_ = false;
  return *this;
}

ToroidalField3 operator+(ToroidalField3 a, const ToroidalField3& b) { return a += b; }
ToroidalField3 operator-(ToroidalField3 a, const ToroidalField3& b) { return a -= b; }
ToroidalField3 operator*(double s, ToroidalField3 a) { return a *= s; }

ToroidalField3 laplacian(const ToroidalField3& u) {
  const auto& g = u.grid();
  const int n = g.n();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  ToroidalField3 out(g);
  for (int i = 0; i < n; ++i) {
    const Vec3* row = &u[static_cast<std::size_t>(i) * n];
    const Vec3* up = &u[static_cast<std::size_t>(g.wrap(i - 1)) * n];
    const Vec3* dn = &u[static_cast<std::size_t>(g.wrap(i + 1)) * n];
    Vec3* o = &out[static_cast<std::size_t>(i) * n];
    for (int j = 0; j < n; ++j) {
      const int jm = j == 0 ? n - 1 : j - 1;
      const int jp = j == n - 1 ? 0 : j + 1;
      o[j] = (up[j] + dn[j] + row[jm] + row[jp] - 4.0 * row[j]) * inv_h2;
    }
  }
  return out;
}

ScalarField gradient_sq(const ToroidalField3& u) {
  const auto& g = u.grid();
  const int n = g.n();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  ScalarField out(g);
  for (int i = 0; i < n; ++i) {
    const Vec3* row = &u[static_cast<std::size_t>(i) * n];
    const Vec3* up = &u[static_cast<std::size_t>(g.wrap(i - 1)) * n];
    const Vec3* dn = &u[static_cast<std::size_t>(g.wrap(i + 1)) * n];
    double* o = &out.values[static_cast<std::size_t>(i) * n];
    for (int j = 0; j < n; ++j) {
      const int jm = j == 0 ? n - 1 : j - 1;
      const int jp = j == n - 1 ? 0 : j + 1;
      const Vec3& c = row[j];
      o[j] = 0.5 * ((dn[j] - c).squaredNorm() + (c - up[j]).squaredNorm() + (row[jp] - c).squaredNorm() +
                    (c - row[jm]).squaredNorm()) *
             inv_h2;
    }
  }
  return out;
}

double energy(const ToroidalField3& u) { return 0.5 * dirichlet_inner(u, u); }

double dirichlet_inner(const ToroidalField3& v, const ToroidalField3& w) {
  const auto& g = v.grid();
  const int n = g.n();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::size_t r = static_cast<std::size_t>(i) * n;
    const std::size_t rd = static_cast<std::size_t>(g.wrap(i + 1)) * n;
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const int jp = j == n - 1 ? 0 : j + 1;
      const Vec3 dv1 = v[rd + j] - v[r + j];
      const Vec3 dw1 = w[rd + j] - w[r + j];
      const Vec3 dv2 = v[r + jp] - v[r + j];
      const Vec3 dw2 = w[r + jp] - w[r + j];
      row_sum += dv1.dot(dw1) + dv2.dot(dw2);
    }
    total += row_sum;
  }
  // D+ carries 1/h per factor; the quadrature weight h^2 cancels both.
  return total;
}

double integrate(const ScalarField& f) {
  const int n = f.grid.n();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    const double* r = &f.values[static_cast<std::size_t>(i) * n];
    for (int j = 0; j < n; ++j) row_sum += r[j];
    total += row_sum;
  }
  return total * f.grid.h() * f.grid.h();
}

double l2_inner(const ToroidalField3& v, const ToroidalField3& w) {
  const int n = v.grid().n();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    const std::size_t r = static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) row_sum += v[r + j].dot(w[r + j]);
    total += row_sum;
  }
  return total * v.grid().h() * v.grid().h();
}

double l2_norm(const ToroidalField3& v) { return std::sqrt(l2_inner(v, v)); }

Vec3 mean(const ToroidalField3& v) {
  const int n = v.grid().n();
  Vec3 total = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    Vec3 row_sum = Vec3::Zero();
    const std::size_t r = static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) row_sum += v[r + j];
    total += row_sum;
  }
  return total / static_cast<double>(v.size());
}

double wrap_centered(double t) {
  double r = t - std::floor(t + 0.5);
  if (r >= 0.5) r -= 1.0;
  return r;
}

Vec2 translate_coords(const Vec2& a, const Vec2& p) {
  return Vec2(wrap_centered(p.x() - a.x()), wrap_centered(p.y() - a.y()));
}

Vec2 translate_coords_inverse(const Vec2& a, const Vec2& x) {
  auto unit = [](double t) {
    double r = t - std::floor(t);
    return r >= 1.0 ? 0.0 : r;
  };
  return Vec2(unit(a.x() + x.x()), unit(a.y() + x.y()));
}

WeightField make_weight_unchecked(const ToroidalGrid& grid, double lambda, const Vec2& center) {
  WeightField w{ScalarField(grid), lambda, center};
  const double outside = lambda / (1.0 + lambda * lambda * kR0 * kR0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 x = translate_coords(center, grid.point(k));
    const double r2 = x.squaredNorm();
    w.rho[k] = r2 < kR0 * kR0 ? lambda / (1.0 + lambda * lambda * r2) : outside;
  }
  return w;
}

WeightField make_weight(const ToroidalGrid& grid, double lambda, const Vec2& center) {
  if (lambda < kLambdaMin) throw std::invalid_argument("bubble scale must be at least 2");
  if (lambda * grid.h() > kMaxLambdaH + 1e-12)
    throw std::invalid_argument("bubble under-resolved: lambda*h = " + std::to_string(lambda * grid.h()));
  return make_weight_unchecked(grid, lambda, center);
}

double weighted_inner(const ToroidalField3& v, const ToroidalField3& w, const WeightField& rho) {
  const int n = v.grid().n();
  double weighted = 0.0;
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    const std::size_t r = static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double p = rho.rho[r + j];
      row_sum += p * p * v[r + j].dot(w[r + j]);
    }
    weighted += row_sum;
  }
  const double h2 = v.grid().h() * v.grid().h();
  return dirichlet_inner(v, w) + weighted * h2;
}

double weighted_norm(const ToroidalField3& w, const WeightField& rho) {
  return std::sqrt(std::max(0.0, weighted_inner(w, w, rho)));
}

double mean_value_ratio(const ToroidalField3& w, const WeightField& rho) {
  const double norm = weighted_norm(w, rho);
  if (norm <= 0.0) throw std::invalid_argument("mean_value_ratio needs a nonzero field");
  return mean(w).norm() / (std::sqrt(std::log(rho.lambda)) * norm);
}

namespace {

template <class T>
void put_le(std::ostream& os, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  os.write(reinterpret_cast<const char*>(&bits), 8);
}

template <class T>
T get_le(std::istream& is) {
  std::uint64_t bits = 0;
  is.read(reinterpret_cast<char*>(&bits), 8);
  if (!is) throw std::runtime_error("truncated field file");
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T value;
  std::memcpy(&value, &bits, 8);
  return value;
}

}  // namespace

void write_binary(std::ostream& os, const ToroidalField3& u) {
  put_le<std::int64_t>(os, u.grid().n());
  for (const auto& v : u.values())
    for (int c = 0; c < 3; ++c) put_le<double>(os, v[c]);
}

ToroidalField3 read_binary(std::istream& is) {
  const auto n = get_le<std::int64_t>(is);
  if (n < 16 || n > (1 << 15)) throw std::runtime_error("invalid grid size in field file: " + std::to_string(n));
  ToroidalField3 u{ToroidalGrid(static_cast<int>(n))};
  for (auto& v : u.values())
    for (int c = 0; c < 3; ++c) v[c] = get_le<double>(is);
  if (!u.all_finite()) throw std::runtime_error("field file contains non-finite values");
  u.set_on_sphere(u.sphere_defect() <= 1e-12);
  return u;
}

void write_binary_file(const std::string& path, const ToroidalField3& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_binary(os, u);
}

ToroidalField3 read_binary_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_binary(is);
}

void write_csv(std::ostream& os, const ToroidalField3& u) {
  const int n = u.grid().n();
  os << "i,j,u1,u2,u3\n" << std::setprecision(17);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec3& v = u.at(i, j);
      os << i << ',' << j << ',' << v[0] << ',' << v[1] << ',' << v[2] << '\n';
    }
}

}  // namespace bubblelab
