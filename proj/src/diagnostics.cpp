#include "bubblelab/diagnostics.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "bubblelab/errors.hpp"

namespace bubblelab {

double log_envelope(double x) { return 1.0 + std::sqrt(std::abs(std::log(x))); }

LojRatios loj_ratios(double lambda, double tension_l2, double energy, double e_infinity) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!(tension_l2 > 0.0)) return {nan, nan};
  const double env = tension_l2 * log_envelope(tension_l2);
  return {1.0 / (lambda * env), std::abs(energy - e_infinity) / std::pow(env, kGamma1)};
}

std::vector<double> ode_ratio_check(std::span<const double> energy_gap, std::span<const double> tension_l2) {
  if (energy_gap.size() != tension_l2.size()) throw std::invalid_argument("ode_ratio_check: length mismatch");
  std::vector<double> out(energy_gap.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double ed = energy_gap[i];
    out[i] = std::pow(ed, 2.0 / kGamma1) / (std::abs(std::log(ed)) * tension_l2[i] * tension_l2[i]);
  }
  return out;
}

// --- distance to the bubble family --------------------------------------------------

namespace {

BubbleParams from_theta(const gsl_vector* x) {
  BubbleParams p;
  p.center = Vec2(gsl_vector_get(x, 0), gsl_vector_get(x, 1));
  p.lambda = std::exp(gsl_vector_get(x, 2));
  p.rot = RotationParam(Vec3(gsl_vector_get(x, 3), gsl_vector_get(x, 4), gsl_vector_get(x, 5)));
  return p;
}

struct Objective {
  const ToroidalField3* u;
  int evaluations = 0;
};

// nmsimplex2 rejects non-finite values; outside the resolvable range the
// objective is replaced by a finite wall above any attainable distance.
constexpr double kWall = 1e30;

double objective_cb(const gsl_vector* x, void* data) {
  auto* obj = static_cast<Objective*>(data);
  ++obj->evaluations;
  const double v = dist_objective(*obj->u, from_theta(x));
  return std::isfinite(v) ? v : kWall;
}

struct Minimizer {
  gsl_multimin_fminimizer* s;
  explicit Minimizer(std::size_t n) : s(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n)) {}
  ~Minimizer() { gsl_multimin_fminimizer_free(s); }
};

struct GslVector {
  gsl_vector* v;
  explicit GslVector(std::size_t n) : v(gsl_vector_alloc(n)) {}
  ~GslVector() { gsl_vector_free(v); }
};

// Report GSL failures through return codes while a descent runs.
struct QuietGsl {
  gsl_error_handler_t* previous = gsl_set_error_handler_off();
  ~QuietGsl() { gsl_set_error_handler(previous); }
};

struct Descent {
  BubbleParams best;
  double value;
  bool converged;
};

Descent descend(Objective& obj, const BubbleParams& start, double scale_step, int budget, const DistOptions& opt) {
  const std::size_t n = 6;
  GslVector x(n), step(n);
  gsl_vector_set(x.v, 0, start.center.x());
  gsl_vector_set(x.v, 1, start.center.y());
  gsl_vector_set(x.v, 2, std::log(start.lambda));
  for (int k = 0; k < 3; ++k) gsl_vector_set(x.v, 3 + k, start.rot.axis_angle()[k]);
  const double da = scale_step / start.lambda;
  gsl_vector_set(step.v, 0, da);
  gsl_vector_set(step.v, 1, da);
  gsl_vector_set(step.v, 2, scale_step);
  for (int k = 0; k < 3; ++k) gsl_vector_set(step.v, 3 + k, scale_step);

  gsl_multimin_function f{&objective_cb, n, &obj};
  Minimizer m(n);
  if (gsl_multimin_fminimizer_set(m.s, &f, x.v, step.v) != GSL_SUCCESS) return {start, kWall, false};
  bool converged = false;
  const int stop_at = obj.evaluations + budget;
  while (obj.evaluations < stop_at) {
    if (gsl_multimin_fminimizer_iterate(m.s) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(m.s);
    if (size < opt.converged_size) converged = true;
    if (size < opt.final_size) break;
  }
  return {from_theta(gsl_multimin_fminimizer_x(m.s)), gsl_multimin_fminimizer_minimum(m.s), converged};
}

}  // namespace

double dist_objective(const ToroidalField3& u, const BubbleParams& theta) {
  const double inf = std::numeric_limits<double>::infinity();
  if (!std::isfinite(theta.lambda) || theta.lambda < kLambdaMin) return inf;
  if (theta.lambda * u.grid().h() > kMaxLambdaH) return inf;
  BubbleParams p = theta;
  p.center = Vec2(p.center.x() - std::floor(p.center.x()), p.center.y() - std::floor(p.center.y()));
  ToroidalField3 diff = u;
  try {
    diff -= build_bubble_unchecked(p, u.grid());
  } catch (const BelowGuard&) {
    return inf;
  }
  return weighted_norm(diff, make_weight_unchecked(u.grid(), p.lambda, p.center));
}

DistResult dist_to_Z(const ToroidalField3& u, const BubbleParams& seed, const DistOptions& options) {
  QuietGsl quiet;
  Objective obj{&u};
  const double seed_value = dist_objective(u, seed);
  ++obj.evaluations;

  const int first_budget = options.max_evaluations / 2;
  Descent first = descend(obj, seed, 0.1, first_budget, options);

  // Restart from a perturbed copy of the best point with a fresh simplex.
  BubbleParams restart = first.best;
  restart.center += Vec2(0.05, -0.05) / restart.lambda;
  restart.lambda *= 1.02;
  Descent second = descend(obj, restart, 0.05, options.max_evaluations - obj.evaluations, options);

  if (!first.converged && !second.converged)
    throw NotConverged("simplex did not shrink below " + std::to_string(options.converged_size) + " in " +
                       std::to_string(obj.evaluations) + " evaluations");

  DistResult out{seed_value, seed, obj.evaluations};
  for (const Descent* d : {&first, &second})
    if (d->value < out.dist) {
      out.dist = d->value;
      out.argmin = d->best;
    }
  out.argmin.center =
      Vec2(out.argmin.center.x() - std::floor(out.argmin.center.x()), out.argmin.center.y() - std::floor(out.argmin.center.y()));
  return out;
}

// --- decay fits ------------------------------------------------------------------------

namespace {

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& pred) {
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  const double ss_res = (y - pred).squaredNorm();
  return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
}

// Least squares on the first n_fit rows, scored on the rest.
ModelFit fit_model(const std::string& name, const std::vector<std::string>& names, const Eigen::MatrixXd& design,
                   const Eigen::VectorXd& y, Eigen::Index n_fit) {
  const Eigen::Index n_hold = y.size() - n_fit;
  const Eigen::MatrixXd a = design.topRows(n_fit);
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(y.head(n_fit));
  ModelFit m;
  m.model = name;
  m.names = names;
  m.constants.assign(coef.data(), coef.data() + coef.size());
  m.r2_fit = r_squared(y.head(n_fit), a * coef);
  m.r2_holdout = r_squared(y.tail(n_hold), design.bottomRows(n_hold) * coef);
  return m;
}

}  // namespace

FitResult fit_decay(std::span<const double> t, std::span<const double> energy_gap) {
  if (t.size() != energy_gap.size()) throw std::invalid_argument("fit_decay: length mismatch");
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (energy_gap[i] > 0.0 && t[i] > 0.0 && std::isfinite(energy_gap[i])) {
      ts.push_back(t[i]);
      ys.push_back(std::log(energy_gap[i]));
    }
  if (ts.size() < 30) throw InsufficientData("fit_decay needs at least 30 samples with E_d > 0");
  const double t_min = *std::min_element(ts.begin(), ts.end());
  const double t_max = *std::max_element(ts.begin(), ts.end());
  if (t_max < 10.0 * t_min) throw InsufficientData("fit_decay needs samples over at least a decade of t");

  const Eigen::Index n = static_cast<Eigen::Index>(ts.size());
  const Eigen::Index n_fit = (3 * n) / 4;
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);

  Eigen::MatrixXd de(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) de.row(i) << 1.0, std::sqrt(ts[i]);
  ModelFit ex = fit_model("exp_sqrt", {"c0", "c1"}, de, y, n_fit);
  ex.constants[1] = -ex.constants[1];

  const bool with_loglog = t_min > 1.0;
  Eigen::MatrixXd dp(n, with_loglog ? 3 : 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lt = std::log(ts[i]);
    if (with_loglog)
      dp.row(i) << 1.0, lt, std::log(lt);
    else
      dp.row(i) << 1.0, lt;
  }
  ModelFit pw = with_loglog ? fit_model("power", {"c0", "p", "q"}, dp, y, n_fit)
                            : fit_model("power", {"c0", "p"}, dp, y, n_fit);

  FitResult r;
  r.exp_sqrt = ex;
  r.power = pw;
  r.t_lo = ts.front();
  r.t_hi = ts[static_cast<std::size_t>(n_fit - 1)];
  if (pw.r2_holdout > ex.r2_holdout) {
    r.model = "power";
    r.rate = pw.constants[1];
    r.r2_holdout = pw.r2_holdout;
  } else {
    r.model = "exp_sqrt";
    r.rate = ex.constants[1];
    r.r2_holdout = ex.r2_holdout;
  }
  return r;
}

AwayCheck away_convergence_check(const ToroidalField3& u, const Vec2& a, double lambda, double r, double alpha,
                                 double energy_gap, const Vec3& target) {
  if (!(alpha < (kGamma1 - 1.0) / kGamma1)) throw std::invalid_argument("away check needs alpha < 1/2");
  if (!(r > 3.0 / lambda)) throw std::invalid_argument("away check needs r > 3/lambda");
  AwayCheck c;
  double acc = 0.0;
  const auto& g = u.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (translate_coords(a, g.point(k)).norm() < r) continue;
    const double d = (u[k] - target).norm();
    c.sup_deviation = std::max(c.sup_deviation, d);
    acc += d * d;
  }
  c.l2_deviation = std::sqrt(acc) * g.h();
  const double denom = std::pow(energy_gap, alpha);
  c.sup_ratio = c.sup_deviation / denom;
  c.l2_ratio = c.l2_deviation / denom;
  return c;
}

std::size_t resolvable_window(std::span<const double> lambda, std::span<const double> energy,
                              std::span<const double> tension_l2, double h, double e_infinity) {
  std::size_t n = 0;
  while (n < lambda.size()) {
    const double l = lambda[n];
    const bool ok = std::isfinite(l) && l >= kLambdaMin && l * h <= kMaxLambdaH && energy[n] - e_infinity > 0.0 &&
                    tension_l2[n] > 0.0;
    if (!ok) break;
    ++n;
  }
  return n;
}

}  // namespace bubblelab
