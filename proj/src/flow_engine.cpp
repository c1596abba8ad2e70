#include "bubblelab/flow_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bubblelab/diagnostics.hpp"
#include "bubblelab/errors.hpp"
#include "bubblelab/sphere_maps.hpp"

namespace bubblelab {

FlowState FlowState::from_field(ToroidalField3 u, double t) {
  TensionStats st;
  ToroidalField3 tau = tension(u, &st);
  return FlowState{t, std::move(u), std::move(tau), st.energy, st.l2, 0, 0.0};
}

namespace {

// out = project(u + s k), samplewise.
void advance(const ToroidalField3& u, const ToroidalField3& k, double s, ToroidalField3& out) {
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = project_to_sphere(Vec3(u[i] + s * k[i]));
  out.set_on_sphere(true);
}

}  // namespace

FlowState step(const FlowState& state, double dt, double reference_energy) {
  const double h = state.u.grid().h();
  if (!(dt > 0.0) || dt > kMaxLambdaH * h * h * (1.0 + 1e-12))
    throw std::invalid_argument("time step exceeds the diffusive bound 0.2 h^2");
  ToroidalField3 stage(state.u.grid());
  advance(state.u, state.tau, dt, stage);
  const ToroidalField3 k2 = tension(stage);
  for (std::size_t i = 0; i < stage.size(); ++i)
    stage[i] = project_to_sphere(Vec3(state.u[i] + 0.5 * dt * (state.tau[i] + k2[i])));
  stage.set_on_sphere(true);

  FlowState next = FlowState::from_field(std::move(stage), state.t + dt);
  if (next.energy > state.energy + 1e-8 * reference_energy) throw EnergyIncreased(state.energy, next.energy);
  next.steps = state.steps + 1;
  next.dt = dt;
  return next;
}

// --- bubble detection ------------------------------------------------------------------

namespace {

constexpr double kHalfSphereEnergy = 0.5 * kSphereEnergy;

std::vector<double> cell_energies(const ToroidalField3& u) {
  const ScalarField g2 = gradient_sq(u);
  const double w = 0.5 * u.grid().h() * u.grid().h();
  std::vector<double> e(g2.values.size());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = w * g2[k];
  return e;
}

double ball_energy_cells(const std::vector<double>& e, const ToroidalGrid& g, int ci, int cj, double r) {
  const double h = g.h();
  const int m = static_cast<int>(std::ceil(r / h)) + 1;
  double total = 0.0;
  for (int di = -m; di <= m; ++di) {
    double row = 0.0;
    const std::size_t base = static_cast<std::size_t>(g.wrap(ci + di)) * static_cast<std::size_t>(g.n());
    for (int dj = -m; dj <= m; ++dj) {
      const double d = h * std::sqrt(static_cast<double>(di * di + dj * dj));
      const double w = std::clamp((r - d) / h + 0.5, 0.0, 1.0);
      if (w > 0.0) row += w * e[base + static_cast<std::size_t>(g.wrap(cj + dj))];
    }
    total += row;
  }
  return total;
}

// Bisection for E(B_r) = 2 pi to relative tolerance 1e-3 in r.
double solve_radius(const std::vector<double>& e, const ToroidalGrid& g, int ci, int cj) {
  double lo = 0.0, hi = 0.5;
  if (ball_energy_cells(e, g, ci, cj, hi) < kHalfSphereEnergy)
    throw NoBubble("no coordinate ball holds half the sphere energy");
  for (int it = 0; it < 80 && hi - lo > 1e-3 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ball_energy_cells(e, g, ci, cj, mid) >= kHalfSphereEnergy ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Center with the largest crisp-inclusion ball energy at radius r; lowest index wins ties.
std::size_t argmax_center(const std::vector<double>& e, const ToroidalGrid& g, double r) {
  const int n = g.n();
  const double h = g.h();
  // prefix[i][j] = sum of row i over columns < j, on a doubled row for wrapping.
  std::vector<double> prefix(static_cast<std::size_t>(n) * (2 * n + 1));
  for (int i = 0; i < n; ++i) {
    double* p = &prefix[static_cast<std::size_t>(i) * (2 * n + 1)];
    p[0] = 0.0;
    for (int j = 0; j < 2 * n; ++j) p[j + 1] = p[j] + e[static_cast<std::size_t>(i) * n + (j % n)];
  }
  const int m = std::min(static_cast<int>(std::floor(r / h)), n / 2 - 1);
  std::vector<int> half(2 * m + 1);
  for (int di = -m; di <= m; ++di) {
    const double s = r * r - (di * h) * (di * h);
    half[di + m] = std::min(s > 0.0 ? static_cast<int>(std::floor(std::sqrt(s) / h + 1e-12)) : 0, n / 2 - 1);
  }
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double total = 0.0;
      for (int di = -m; di <= m; ++di) {
        const int w = half[di + m];
        const double* p = &prefix[static_cast<std::size_t>(g.wrap(i + di)) * (2 * n + 1)];
        const int lo = j - w + n;  // in [0, 2n)
        total += p[lo + 2 * w + 1] - p[lo];
      }
      if (total > best_val) {
        best_val = total;
        best = static_cast<std::size_t>(i) * n + j;
      }
    }
  return best;
}

}  // namespace

double ball_energy(const ToroidalField3& u, const Vec2& a, double r) {
  const auto& g = u.grid();
  const double h = g.h();
  const std::vector<double> e = cell_energies(u);
  double total = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double d = translate_coords(a, g.point(k)).norm();
    total += std::clamp((r - d) / h + 0.5, 0.0, 1.0) * e[k];
  }
  return total;
}

BubbleDetection detect_bubble(const ToroidalField3& u) {
  const auto& g = u.grid();
  const std::vector<double> e = cell_energies(u);
  double total = 0.0;
  for (double v : e) total += v;
  if (total < kHalfSphereEnergy) throw NoBubble("total energy below half the sphere energy");

  std::size_t center = static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
  const int n = g.n();
  double r = 0.0;
  for (int it = 0; it < 12; ++it) {
    r = solve_radius(e, g, static_cast<int>(center / n), static_cast<int>(center % n));
    const std::size_t next = argmax_center(e, g, r);
    if (next == center) break;
    center = next;
  }
  const int ci = static_cast<int>(center / n), cj = static_cast<int>(center % n);
  r = solve_radius(e, g, ci, cj);
  const Vec2 a = g.point(center);
  if (r < 3.0 * g.h()) throw Unresolved(r, a.x(), a.y());
  return {a, 1.0 / r, r, ball_energy_cells(e, g, ci, cj, r)};
}

// --- run loop -----------------------------------------------------------------------------

ToroidalField3 initial_field(const FlowConfig& config) {
  const ToroidalGrid grid(config.grid_n);
  switch (config.init.kind) {
    case InitSpec::Kind::Constant: {
      ToroidalField3 u(grid, north_pole());
      u.set_on_sphere(true);
      return u;
    }
    case InitSpec::Kind::Bubble:
      return build_bubble(config.init.bubble, grid);
    case InitSpec::Kind::File: {
      ToroidalField3 u = read_binary_file(config.init.path);
      if (u.grid().n() != config.grid_n) throw std::invalid_argument("initial field grid does not match grid_n");
      if (!u.all_finite()) throw std::invalid_argument("initial field has non-finite samples");
      return project_to_sphere(u);
    }
  }
  throw std::logic_error("unknown init kind");
}

namespace {

void add_tag(std::string& tags, const std::string& tag) {
  if (!tags.empty()) tags += ';';
  tags += tag;
}

struct Tracker {
  const FlowConfig& config;
  FlowResult& result;
  std::optional<DiagnosticsRecord> last_resolved;
  bool event_open = false;
  int record_count = 0;
  bool stop = false;

  DiagnosticsRecord record(const FlowState& s) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    DiagnosticsRecord rec;
    rec.t = s.t;
    rec.energy = s.energy;
    rec.tension_l2 = s.tension_l2;
    rec.lambda = rec.a1 = rec.a2 = rec.ratio_scale = rec.ratio_energy = rec.dist_z = nan;
    bool resolved = false, no_bubble = false;
    try {
      const BubbleDetection d = detect_bubble(s.u);
      rec.lambda = d.lambda;
      rec.a1 = d.center.x();
      rec.a2 = d.center.y();
      const LojRatios lr = loj_ratios(d.lambda, s.tension_l2, s.energy, config.e_infinity);
      rec.ratio_scale = lr.scale;
      rec.ratio_energy = lr.energy;
      resolved = true;
      if (config.stop_lambda_h > 0.0 && d.lambda * s.u.grid().h() > config.stop_lambda_h) stop = true;
    } catch (const Unresolved& ex) {
      rec.a1 = ex.a1();
      rec.a2 = ex.a2();
      add_tag(rec.events, "unresolved");
    } catch (const NoBubble&) {
      no_bubble = true;
      add_tag(rec.events, "no_bubble");
    }

    // dist_z only inside the resolvable window.
    if (resolved && config.dist_every > 0 && record_count % config.dist_every == 0 &&
        rec.lambda * s.u.grid().h() <= kMaxLambdaH && rec.lambda >= kLambdaMin && s.energy > config.e_infinity) {
      BubbleParams seed{rec.lambda, Vec2(rec.a1, rec.a2), {}};
      if (config.init.kind == InitSpec::Kind::Bubble) seed.rot = config.init.bubble.rot;
      try {
        rec.dist_z = dist_to_Z(s.u, seed).dist;
      } catch (const NotConverged&) {
        add_tag(rec.events, "dist_not_converged");
      }
    }

    if (resolved && !event_open) {
      last_resolved = rec;
    } else if (!resolved && last_resolved && !event_open) {
      const auto& p = *last_resolved;
      result.events.push_back(SingularEvent{p.t, p.energy, p.tension_l2, p.lambda});
      event_open = true;
      add_tag(rec.events, "singular_event_open");
    }
    if (event_open && no_bubble && s.tension_l2 <= result.events.back().tension_pre) {
      auto& ev = result.events.back();
      ev.t_post = s.t;
      ev.energy_post = s.energy;
      ev.tension_post = s.tension_l2;
      ev.closed = true;
      event_open = false;
      last_resolved.reset();
      add_tag(rec.events, "singular_event_closed");
      if (config.stop_after_event) stop = true;
    }
    ++record_count;
    return rec;
  }
};

}  // namespace

FlowResult run(const FlowConfig& config, const std::function<void(const DiagnosticsRecord&)>& sink) {
  FlowResult result;
  FlowState state = FlowState::from_field(initial_field(config));
  const double h = state.u.grid().h();
  const double dt_max = config.dt_safety * h * h;
  const double e0 = state.energy;
  Tracker tracker{config, result, std::nullopt};

  auto emit = [&](const FlowState& s) {
    result.records.push_back(tracker.record(s));
    result.max_sphere_defect = std::max(result.max_sphere_defect, s.u.sphere_defect());
    if (sink) sink(result.records.back());
  };
  emit(state);

  double dt = dt_max;
  int clean = 0;
  while (state.t < config.t_end && !tracker.stop && (config.max_steps == 0 || state.steps < config.max_steps)) {
    double dt_try = std::min(dt, config.t_end - state.t);
    std::optional<FlowState> next;
    while (!next) {
      try {
        next = step(state, dt_try, e0);
      } catch (const EnergyIncreased&) {
        ++result.rejected_steps;
        clean = 0;
        dt_try *= 0.5;
        if (dt_try < 1e-6 * dt_max) throw;
      } catch (const BelowGuard&) {
        DiagnosticsRecord rec = result.records.back();
        add_tag(rec.events, "below_guard");
        rec.t = state.t;
        result.records.push_back(rec);
        if (sink) sink(rec);
        result.final_state = std::move(state);
        return result;
      }
    }
    if (next->energy > state.energy) result.energy_monotone = false;
    dt = dt_try;
    if (++clean >= 50) {
      dt = std::min(dt * 1.1, dt_max);
      clean = 0;
    }
    state = std::move(*next);
    const bool at_end = state.t >= config.t_end || (config.max_steps != 0 && state.steps >= config.max_steps);
    if (state.steps % config.sample_every == 0 || at_end) emit(state);
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace bubblelab
