/// @file types.hpp
/// @brief Small vector aliases and the fixed geometric constants of the unit square torus.
#pragma once

#include <Eigen/Dense>
#include <numbers>

namespace bubblelab {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

inline constexpr double kPi = std::numbers::pi;

/// Half the injectivity radius (1/2) of the unit square torus.
inline constexpr double kIota = 0.25;
/// Coordinate-ball radius; equal to kIota on the flat torus.
inline constexpr double kR0 = kIota;

/// Energy of a degree-one harmonic sphere.
inline constexpr double kSphereEnergy = 4.0 * kPi;

/// Minimum bubble scale.
inline constexpr double kLambdaMin = 2.0;

/// A bubble must span at least five grid cells: lambda * h <= kMaxLambdaH.
inline constexpr double kMaxLambdaH = 0.2;

/// North pole p* = (0,0,1).
inline Vec3 north_pole() { return Vec3(0.0, 0.0, 1.0); }

}  // namespace bubblelab
