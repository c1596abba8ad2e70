// Acceptance suite: one line per criterion, "criterion <id> PASS|FAIL|SKIP <name>: <measurements>".
// Usage: acceptance_suite [id ... | all]. Exit status is 1 when any run criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bubblelab/adapted_bubble.hpp"
#include "bubblelab/bubble_scan.hpp"
#include "bubblelab/cli_io.hpp"
#include "bubblelab/diagnostics.hpp"
#include "bubblelab/errors.hpp"
#include "bubblelab/flow_engine.hpp"
#include "bubblelab/greens_torus.hpp"
#include "bubblelab/numerics.hpp"

using namespace bubblelab;

namespace {

// Tolerances, all fixed here.
constexpr double kJTol = 1e-4;
constexpr double kGradJTol = 1e-6;
constexpr double kGradJSpread = 1e-8;
constexpr double kSphereEnergyTol = 1e-3;
constexpr double kGapSlopeTol = 0.1;
constexpr double kGapPrefactorTol = 0.05;
constexpr double kDEdLambdaTol = 0.05;
constexpr double kLeadingTol = 0.05;
constexpr double kLeadingSlopeTol = 0.5;
constexpr double kTensionSlopeTol = 0.15;
constexpr double kPairingSlopeTol = 0.3;
constexpr double kVariationBand = 5.0;
constexpr double kWeightSlopeTol = 0.2;
constexpr double kDissipationTol = 0.05;
constexpr double kDissipationRefine = 0.5;
constexpr double kDetectScaleFactor = 1.2;
constexpr double kDetectCenterCells = 2.0;
constexpr double kEnvelopeFactor = 1.5;
constexpr double kPerturbation = 1e-2;
constexpr double kRecoveryDistFactor = 1.5;
constexpr double kRecoveryLambdaTol = 0.01;
constexpr double kQuantumTol = 0.15;
constexpr double kExpRateTol = 0.01;
constexpr double kPowerRateTol = 0.05;

const std::vector<double> kLambdaSet = {20, 28, 40, 56, 80};
const std::vector<double> kLambdaTriple = {20, 40, 80};

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

BubbleParams bubble(double lambda, Vec2 center = Vec2(0.5, 0.5), Vec3 rot = Vec3::Zero()) {
  BubbleParams p;
  p.lambda = lambda;
  p.center = center;
  p.rot = RotationParam(rot);
  return p;
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) { return fit_loglog(x, y).slope; }

// --- 1 ---------------------------------------------------------------------------

Outcome green_constants() {
  const EwaldGreens ew;
  const JConstantReport rep = j_constant(ew);
  // Fourier differentiation of the regular part at the pole.
  const double grad0 = ew.regular_gradient(Vec2(0, 0)).norm();
  // Assembled from grad G(p - a) at torus points: the odd part cancels in the
  // symmetric mean, which is grad_y J_a(0,0); the value at a fixed x must not move with a.
  const Vec2 x(0.05, 0.03);
  double worst0 = grad0, spread = 0.0;
  const Vec2 ref = grad_regular(x);
  for (const Vec2& a : {Vec2(0.0, 0.0), Vec2(0.5, 0.5), Vec2(0.13, 0.77), Vec2(0.91, 0.02), Vec2(0.333, 0.6)}) {
    const Vec2 gp = grad_regular(a, translate_coords_inverse(a, x));
    const Vec2 gm = grad_regular(a, translate_coords_inverse(a, -x));
    worst0 = std::max(worst0, (0.5 * (gp + gm)).norm());
    spread = std::max(spread, (gp - ref).norm());
  }
  const double jerr = std::abs(rep.trace_limit + 2 * kPi);
  const bool ok = jerr <= kJTol && worst0 <= kGradJTol && spread <= kGradJSpread;
  return {ok ? Verdict::Pass : Verdict::Fail,
          "J=" + num(rep.trace_limit) + " |J+2pi|=" + num(jerr) + " (tol " + num(kJTol) + ") max|grad_y J_a(0,0)|=" +
              num(worst0) + " (tol " + num(kGradJTol) + ") a-spread=" + num(spread) + " (tol " + num(kGradJSpread) + ")"};
}

// --- 2 ---------------------------------------------------------------------------

Outcome sphere_energy_check() {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  std::string vals;
  for (int i = 0; i < 5; ++i) {
    const RotationParam r(Vec3(nd(rng), nd(rng), nd(rng)));
    const double e = sphere_energy([&](const Vec3& y) { return omega_eval(r, y); });
    worst = std::max(worst, std::abs(e - 4 * kPi));
    vals += (i ? "," : "") + num(e);
  }
  return {worst <= kSphereEnergyTol ? Verdict::Pass : Verdict::Fail,
          "E=[" + vals + "] max|E-4pi|=" + num(worst) + " (tol " + num(kSphereEnergyTol) + ")"};
}

// --- 3 ---------------------------------------------------------------------------

Outcome energy_gap_law() {
  const int n = 512;
  std::vector<double> gaps, pref;
  for (double l : kLambdaSet) {
    gaps.push_back(energy_gap(bubble(l), n));
    pref.push_back(gaps.back() * l * l / (8 * kPi * kPi));
  }
  const double slope = log_slope(kLambdaSet, gaps);
  double mean_pref = 0.0;
  for (double p : pref) mean_pref += p / pref.size();
  bool ok = std::abs(slope + 2) <= kGapSlopeTol && std::abs(mean_pref - 1) <= kGapPrefactorTol;
  std::string d = "slope=" + num(slope) + " (-2 +- " + num(kGapSlopeTol) + ") prefactor/8pi^2=" + num(mean_pref) +
                  " (1 +- " + num(kGapPrefactorTol) + ")";
  for (double l : {20.0, 40.0}) {
    const double r = dE_dlambda(bubble(l), n) / (-16 * kPi * kPi / (l * l * l));
    ok = ok && std::abs(r - 1) <= kDEdLambdaTol;
    d += " dE/dlambda/model@" + num(l) + "=" + num(r);
  }
  return {ok ? Verdict::Pass : Verdict::Fail, d + " (1 +- " + num(kDEdLambdaTol) + ")"};
}

// --- 4 ---------------------------------------------------------------------------

Outcome leading_term() {
  const double r40 = leading_term_integral(bubble(40)) / leading_term_model(40);
  std::vector<double> resid;
  for (double l : kLambdaSet) resid.push_back(leading_term_integral(bubble(l)) - leading_term_model(l));
  const double slope = log_slope(kLambdaSet, resid);
  const bool ok = std::abs(r40 - 1) <= kLeadingTol && std::abs(slope + 4) <= kLeadingSlopeTol;
  return {ok ? Verdict::Pass : Verdict::Fail, "ratio@40=" + num(r40) + " (1 +- " + num(kLeadingTol) +
                                                   ") residual slope=" + num(slope) + " (-4 +- " +
                                                   num(kLeadingSlopeTol) + ")"};
}

// --- 5 ---------------------------------------------------------------------------

Outcome tension_scalings() {
  const int n = 512;
  std::vector<double> tl, pr;
  for (double l : kLambdaTriple) {
    tl.push_back(tension_l2(bubble(l), n));
    pr.push_back(pairing_sup(bubble(l), n, 50, 1) / std::sqrt(std::log(l)));
  }
  const double ts = log_slope(kLambdaTriple, tl), ps = log_slope(kLambdaTriple, pr);
  const bool ok = std::abs(ts + 1) <= kTensionSlopeTol && std::abs(ps + 2) <= kPairingSlopeTol;
  return {ok ? Verdict::Pass : Verdict::Fail, "tension slope=" + num(ts) + " (-1 +- " + num(kTensionSlopeTol) +
                                                   ") pairing slope=" + num(ps) + " (-2 +- " +
                                                   num(kPairingSlopeTol) + ")"};
}

// --- 6 ---------------------------------------------------------------------------

Outcome variation_scalings_check() {
  const ToroidalGrid g(512);
  std::vector<std::vector<double>> cols(6);
  std::vector<double> wl;
  for (double l : kLambdaTriple) {
    const VariationReport r = variation_scalings(bubble(l), g);
    const double v[6] = {r.scale, r.translation.x(), r.translation.y(), r.rotation.x(), r.rotation.y(), r.rotation.z()};
    for (int k = 0; k < 6; ++k) cols[k].push_back(v[k]);
    wl.push_back(r.weight_l2);
  }
  double band = 0.0;
  for (const auto& c : cols) {
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    band = std::max(band, *hi / *lo);
  }
  const double ws = log_slope(kLambdaTriple, wl);
  const bool ok = band <= kVariationBand && std::abs(ws + 1) <= kWeightSlopeTol;
  return {ok ? Verdict::Pass : Verdict::Fail, "worst max/min of the normalized norms=" + num(band) + " (<= " +
                                                   num(kVariationBand) + ") weight slope=" + num(ws) + " (-1 +- " +
                                                   num(kWeightSlopeTol) + ")"};
}

// --- 7 ---------------------------------------------------------------------------

double dissipation_residual(int n) {
  const ToroidalGrid g(n);
  const auto u = project_to_sphere(0.15 * random_smooth_field(g, 7) + ToroidalField3(g, Vec3(0, 0, 1)));
  const FlowState s0 = FlowState::from_field(u);
  const double dt = 0.2 * g.h() * g.h();
  const FlowState s1 = step(s0, dt, s0.energy);
  const double t2 = s0.tension_l2 * s0.tension_l2;
  return std::abs((s1.energy - s0.energy) / dt + t2) / t2;
}

Outcome dissipation() {
  const double r256 = dissipation_residual(256), r512 = dissipation_residual(512);
  const bool ok = r256 <= kDissipationTol && r512 <= kDissipationRefine * r256;
  return {ok ? Verdict::Pass : Verdict::Fail, "residual N=256: " + num(r256) + " (<= " + num(kDissipationTol) +
                                                   ") N=512: " + num(r512) + " (<= " + num(kDissipationRefine) +
                                                   " x N=256)"};
}

// --- 8 ---------------------------------------------------------------------------

Outcome detection() {
  const ToroidalGrid g(512);
  const Vec2 a(0.43, 0.58);
  const auto z = build_bubble(bubble(20, a), g);
  const BubbleDetection d = detect_bubble(z);
  const double factor = std::max(d.lambda / 20.0, 20.0 / d.lambda);
  const double off = translate_coords(a, d.center).norm() / g.h();

  ToroidalField3 shifted(g);
  const int di = 37, dj = -101;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) shifted.at(i + di, j + dj) = z.at(i, j);
  const BubbleDetection s = detect_bubble(shifted);
  const Vec2 expect = translate_coords_inverse(Vec2(0, 0), d.center + Vec2(di * g.h(), dj * g.h()));
  const double moved = translate_coords(expect, s.center).norm();
  const bool equivariant = s.lambda == d.lambda && moved <= 1e-12;
  const bool ok = factor <= kDetectScaleFactor && off <= kDetectCenterCells && equivariant;
  return {ok ? Verdict::Pass : Verdict::Fail,
          "lambda=" + num(d.lambda) + " factor=" + num(factor) + " (<= " + num(kDetectScaleFactor) +
              ") center offset=" + num(off) + "h (<= " + num(kDetectCenterCells) + "h) shift: dlambda=" +
              num(s.lambda - d.lambda) + " dcenter=" + num(moved)};
}

// --- 9 ---------------------------------------------------------------------------

CsvTable as_table(const std::vector<DiagnosticsRecord>& records) {
  std::stringstream ss;
  write_series(ss, records);
  return read_csv(ss);
}

Outcome trajectory_stability() {
  FlowConfig c;
  c.grid_n = 256;
  c.sample_every = 200;
  c.t_end = 1.0;
  c.dist_every = 25;
  c.stop_lambda_h = kMaxLambdaH;
  c.init.kind = InitSpec::Kind::Bubble;
  c.init.bubble = bubble(5);
  const FlowResult res = run(c);
  {
    std::ofstream out("criterion9_flow.csv");
    write_series(out, res.records);
  }
  const nlohmann::json v = loj_check_flow(as_table(res.records), LojCheckOptions{c.grid_n, kSphereEnergy});
  const auto& crit = v["criteria"];
  bool ok = true;
  std::string d = "window samples=" + v["window"]["samples"].dump() + " t_hi=" + num(v["window"]["t_hi"]) +
                  " lambda_hi=" + num(v["window"]["lambda_hi"]);
  for (const char* key : {"ratio_scale_bounded", "ratio_energy_bounded", "ode_ratio_bounded"}) {
    const auto& e = crit[key];
    const bool pass = e["pass"].get<bool>();
    ok = ok && pass;
    d += std::string(" ") + key + ": max/median=" +
         (e.contains("max") ? num(e["max"].get<double>() / e["median"].get<double>()) : std::string("n/a"));
  }
  if (crit["ode_ratio_bounded"].contains("energy_gap_at_max"))
    d += " (ODE ratio max at E_d=" + num(crit["ode_ratio_bounded"]["energy_gap_at_max"]) + ")";
  if (v.contains("info")) {
    const auto& s = v["info"]["ode_ratio_gap_below_1_over_e"];
    if (s.contains("max"))
      d += " [info: ODE ratio over E_d <= 1/e: max/median=" + num(s["max"].get<double>() / s["median"].get<double>()) +
           " over " + s["samples"].dump() + " samples]";
  }
  if (crit.contains("dist_envelope")) {
    const auto& e = crit["dist_envelope"];
    ok = ok && e["pass"].get<bool>();
    d += " dist/envelope max/median=" + num(e["max"].get<double>() / e["median"].get<double>()) + " over " +
         e["samples"].dump() + " samples (<= " + num(kEnvelopeFactor) + ")";
  } else {
    ok = false;
    d += " dist envelope: fewer than two dist_z samples in the window";
  }
  d += " (ratios <= " + num(kBoundedFactor) + " x median)";
  return {ok ? Verdict::Pass : Verdict::Fail, d};
}

// --- 10 --------------------------------------------------------------------------

Outcome perturbation_recovery() {
  const ToroidalGrid g(256);
  const BubbleParams p = bubble(20, Vec2(0.47, 0.52), Vec3(0.05, -0.04, 0.1));
  const auto z = build_bubble(p, g);
  auto v = random_tangent_field(z, 11);
  v *= 1.0 / weighted_norm(v, bubble_weight(p, g));
  const auto u = project_to_sphere(z + kPerturbation * v);
  BubbleParams seed = p;
  seed.lambda *= 1.05;
  seed.center += Vec2(0.5 * g.h(), -0.5 * g.h());
  seed.rot = RotationParam();
  try {
    const DistResult r = dist_to_Z(u, seed);
    const double lerr = std::abs(r.argmin.lambda / p.lambda - 1);
    const bool ok = r.dist <= kRecoveryDistFactor * kPerturbation && lerr <= kRecoveryLambdaTol;
    return {ok ? Verdict::Pass : Verdict::Fail, "dist=" + num(r.dist) + " (<= " +
                                                     num(kRecoveryDistFactor * kPerturbation) +
                                                     ") lambda rel. error=" + num(lerr) + " (<= " +
                                                     num(kRecoveryLambdaTol) + ") evaluations=" +
                                                     std::to_string(r.evaluations)};
  } catch (const NotConverged& e) {
    return {Verdict::Fail, std::string("dist_to_Z did not converge: ") + e.what()};
  }
}

// --- 11 --------------------------------------------------------------------------

Outcome energy_quantization() {
  FlowConfig c;
  c.grid_n = 512;
  c.sample_every = 50;
  c.t_end = 0.05;
  c.init.kind = InitSpec::Kind::Bubble;
  // The largest resolvable scale on this grid: lambda h = 0.195.
  c.init.bubble = bubble(0.195 * c.grid_n);
  const FlowResult res = run(c);
  const double t_final = res.final_state ? res.final_state->t : 0.0;
  if (res.events.empty())
    return {Verdict::Skip, "no singular event before T_end=" + num(c.t_end) + " (t_final=" + num(t_final) + ")"};
  const SingularEvent& e = res.events.front();
  if (!e.closed)
    return {Verdict::Fail, "event opened at t=" + num(e.t_pre) + " but no post-event sample before t=" + num(t_final)};
  const double q = e.drop() / (4 * kPi);
  const bool ok = std::abs(q - 1) <= kQuantumTol;
  return {ok ? Verdict::Pass : Verdict::Fail, "t_pre=" + num(e.t_pre) + " lambda_pre=" + num(e.lambda_pre) +
                                                   " E_pre=" + num(e.energy_pre) + " t_post=" + num(e.t_post) +
                                                   " E_post=" + num(e.energy_post) + " drop/4pi=" + num(q) +
                                                   " (1 +- " + num(kQuantumTol) + ")"};
}

// --- 12 --------------------------------------------------------------------------

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return t;
}

Outcome decay_fits() {
  const auto t1 = log_spaced(1, 400, 200);
  std::vector<double> e1(t1.size());
  for (std::size_t i = 0; i < t1.size(); ++i) e1[i] = std::exp(-0.3 * std::sqrt(t1[i]));
  const FitResult f1 = fit_decay(t1, e1);
  const auto t2 = log_spaced(2, 2000, 200);
  std::vector<double> e2(t2.size());
  for (std::size_t i = 0; i < t2.size(); ++i) e2[i] = std::pow(t2[i], -2.0) * std::log(t2[i]);
  const FitResult f2 = fit_decay(t2, e2);
  const bool ok1 = f1.model == "exp_sqrt" && std::abs(f1.rate / 0.3 - 1) <= kExpRateTol;
  const bool ok2 = f2.model == "power" && std::abs(f2.rate / -2.0 - 1) <= kPowerRateTol;
  std::string d = "synthetic exp: " + f1.model + " c1=" + num(f1.rate) + " (0.3 +- 1%) synthetic power: " + f2.model +
                  " p=" + num(f2.rate) + " (-2 +- 5%)";

  // A real trajectory, reported only.
  FlowConfig c;
  c.grid_n = 128;
  c.sample_every = 25;
  c.t_end = 1.0;
  c.init.kind = InitSpec::Kind::Bubble;
  c.init.bubble = bubble(5);
  const FlowResult res = run(c);
  std::vector<double> t, ed, lam, en, tw;
  for (const auto& r : res.records) {
    lam.push_back(r.lambda);
    en.push_back(r.energy);
    tw.push_back(r.tension_l2);
  }
  const std::size_t n = resolvable_window(lam, en, tw, 1.0 / c.grid_n);
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back(res.records[i].t);
    ed.push_back(res.records[i].energy - kSphereEnergy);
  }
  d += "; trajectory N=128 from lambda=5, " + std::to_string(n) + " window samples: ";
  try {
    const FitResult f = fit_decay(t, ed);
    d += "model=" + f.model + " rate=" + num(f.rate) + " holdout R^2=" + num(f.r2_holdout);
  } catch (const InsufficientData& e) {
    d += std::string("not fitted (") + e.what() + ")";
  }
  return {ok1 && ok2 ? Verdict::Pass : Verdict::Fail, d};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

const std::vector<Criterion> kCriteria = {
    {1, "green-constants", green_constants},
    {2, "sphere-energy", sphere_energy_check},
    {3, "energy-gap-law", energy_gap_law},
    {4, "leading-term-integral", leading_term},
    {5, "tension-scalings", tension_scalings},
    {6, "variation-scalings", variation_scalings_check},
    {7, "flow-dissipation", dissipation},
    {8, "bubble-detection", detection},
    {9, "trajectory-stability", trajectory_stability},
    {10, "perturbation-recovery", perturbation_recovery},
    {11, "energy-quantization", energy_quantization},
    {12, "decay-law-fitting", decay_fits},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "all") {
      ids.clear();
      for (const auto& c : kCriteria) ids.push_back(c.id);
      break;
    }
    ids.push_back(std::stoi(a));
  }
  if (ids.empty())
    for (const auto& c : kCriteria) ids.push_back(c.id);

  bool failed = false;
  for (int id : ids) {
    if (id < 1 || id > static_cast<int>(kCriteria.size())) {
      std::cerr << "unknown criterion " << id << '\n';
      return 2;
    }
    const Criterion& c = kCriteria[id - 1];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {Verdict::Fail, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
    std::cout << "criterion " << c.id << ' ' << tag << ' ' << c.name << ": " << o.detail << " [" << num(secs) << " s]"
              << std::endl;
    failed = failed || o.verdict == Verdict::Fail;
  }
  return failed ? 1 : 0;
}
