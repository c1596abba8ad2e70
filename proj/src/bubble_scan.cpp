#include "bubblelab/bubble_scan.hpp"

#include <cmath>
#include <stdexcept>

#include "bubblelab/numerics.hpp"

namespace bubblelab {

namespace {

// Fine-grid field read at the coarse samples (2i, 2j).
ToroidalField3 restrict_to(const ToroidalField3& fine, const ToroidalGrid& coarse) {
  ToroidalField3 out(coarse);
  for (int i = 0; i < coarse.n(); ++i)
    for (int j = 0; j < coarse.n(); ++j) out.at(i, j) = fine.at(2 * i, 2 * j);
  return out;
}

double pairing(const ToroidalField3& tau, const ToroidalField3& w) { return l2_inner(tau, w); }

struct GridPair {
  ToroidalField3 z_coarse, z_fine;
};

GridPair build_pair(const BubbleParams& params, int n) {
  const ToroidalGrid coarse(n), fine(2 * n);
  return {build_bubble(params, coarse), build_bubble_unchecked(params, fine)};
}

double tension_l2_of(const GridPair& g) {
  const ToroidalField3 tc = tension(g.z_coarse);
  const ToroidalField3 tf = restrict_to(tension(g.z_fine), g.z_coarse.grid());
  ToroidalField3 t = (4.0 / 3.0) * tf;
  t -= (1.0 / 3.0) * tc;
  return l2_norm(t);
}

double pairing_sup_of(const BubbleParams& params, const GridPair& g, int count, std::uint64_t seed) {
  const ToroidalField3 tc = tension(g.z_coarse);
  const ToroidalField3 tf = tension(g.z_fine);
  const WeightField rho = bubble_weight(params, g.z_coarse.grid());
  double sup = 0.0;
  for (int k = 0; k < count; ++k) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
    const ToroidalField3 wc = random_tangent_field(g.z_coarse, s);
    const ToroidalField3 wf = random_tangent_field(g.z_fine, s);
    const double p = richardson_h2(pairing(tc, wc), pairing(tf, wf));
    sup = std::max(sup, std::abs(p) / weighted_norm(wc, rho));
  }
  return sup;
}

}  // namespace

double tension_l2(const BubbleParams& params, int n) { return tension_l2_of(build_pair(params, n)); }

double pairing_sup(const BubbleParams& params, int n, int count, std::uint64_t seed) {
  return pairing_sup_of(params, build_pair(params, n), count, seed);
}

ScanRow scan_point(double lambda, const ScanOptions& options) {
  BubbleParams params{lambda, options.center, options.rot};
  params.validate();
  const GridPair g = build_pair(params, options.grid_n);
  ScanRow row;
  row.lambda = lambda;
  row.energy = richardson_h2(energy(g.z_coarse), energy(g.z_fine));
  row.gap = row.energy - kSphereEnergy;
  row.dE_dlambda = dE_dlambda(params, options.grid_n);
  row.leading_term = leading_term_integral(params);
  row.tension_l2 = tension_l2_of(g);
  row.pairing_sup = pairing_sup_of(params, g, options.pairing_count, options.seed);
  row.far_field_sup = far_field_sup(g.z_coarse, params);
  return row;
}

std::vector<ScanRow> bubble_scan(const std::vector<double>& lambdas, const ScanOptions& options) {
  std::vector<ScanRow> rows;
  rows.reserve(lambdas.size());
  for (double l : lambdas) rows.push_back(scan_point(l, options));
  return rows;
}

ScanFit fit_scan(const std::vector<ScanRow>& rows) {
  if (rows.size() < 2) throw std::invalid_argument("fit_scan needs at least two lambdas");
  std::vector<double> lam, gap, far, ten, pair, resid;
  double pref = 0.0;
  for (const auto& r : rows) {
    lam.push_back(r.lambda);
    gap.push_back(r.gap);
    far.push_back(r.far_field_sup);
    ten.push_back(r.tension_l2);
    pair.push_back(r.pairing_sup / std::sqrt(std::log(r.lambda)));
    resid.push_back(r.leading_term - leading_term_model(r.lambda));
    pref += r.gap * r.lambda * r.lambda / (8.0 * kPi * kPi);
  }
  ScanFit f;
  f.gap_slope = fit_loglog(lam, gap).slope;
  f.gap_prefactor = pref / static_cast<double>(rows.size());
  f.far_field_slope = fit_loglog(lam, far).slope;
  f.tension_slope = fit_loglog(lam, ten).slope;
  f.pairing_slope = fit_loglog(lam, pair).slope;
  f.leading_residual_slope = fit_loglog(lam, resid).slope;
  f.gap_ok = std::abs(f.gap_slope + 2.0) <= 0.1 && std::abs(f.gap_prefactor - 1.0) <= 0.05;
  f.far_field_ok = std::abs(f.far_field_slope + 1.0) <= 0.1;
  f.tension_ok = std::abs(f.tension_slope + 1.0) <= 0.15;
  f.pairing_ok = std::abs(f.pairing_slope + 2.0) <= 0.3;
  f.leading_ok = std::abs(f.leading_residual_slope + 4.0) <= 0.5;
  return f;
}

}  // namespace bubblelab
