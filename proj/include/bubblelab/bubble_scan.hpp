/// @file bubble_scan.hpp
/// @brief Per-lambda measurements on adapted bubbles: energy, tension and pairing.
///
/// Grid quantities are extrapolated from a coarse grid N and a fine grid 2N; the
/// fine field is read at the coarse samples, so both grids see the same points.
#pragma once

#include <cstdint>
#include <vector>

#include "bubblelab/adapted_bubble.hpp"

namespace bubblelab {

/// ||tau(z)||_{L^2}, Richardson-combined samplewise from grids N and 2N.
double tension_l2(const BubbleParams& params, int n);

/// max over `count` random tangential w of |sum tau . w h^2| / ||w||_z.
double pairing_sup(const BubbleParams& params, int n, int count = 50, std::uint64_t seed = 1);

struct ScanRow {
  double lambda = 0.0;
  double energy = 0.0;
  double gap = 0.0;
  double dE_dlambda = 0.0;
  double leading_term = 0.0;
  double tension_l2 = 0.0;
  double pairing_sup = 0.0;
  double far_field_sup = 0.0;
};

struct ScanOptions {
  int grid_n = 512;       // coarse grid; the fine grid is 2N
  int pairing_count = 50;
  std::uint64_t seed = 1;
  Vec2 center = Vec2(0.5, 0.5);
  RotationParam rot;
};

ScanRow scan_point(double lambda, const ScanOptions& options);
std::vector<ScanRow> bubble_scan(const std::vector<double>& lambdas, const ScanOptions& options);

/// Log-log fits of a scan with the tolerances each is held to.
struct ScanFit {
  double gap_slope = 0.0;
  double gap_prefactor = 0.0;       // mean of gap lambda^2 / (8 pi^2)
  double far_field_slope = 0.0;
  double tension_slope = 0.0;
  double pairing_slope = 0.0;       // of pairing / (log lambda)^{1/2}
  double leading_residual_slope = 0.0;
  bool gap_ok = false;
  bool far_field_ok = false;
  bool tension_ok = false;
  bool pairing_ok = false;
  bool leading_ok = false;
  bool all_ok() const { return gap_ok && far_field_ok && tension_ok && pairing_ok && leading_ok; }
};

ScanFit fit_scan(const std::vector<ScanRow>& rows);

}  // namespace bubblelab
