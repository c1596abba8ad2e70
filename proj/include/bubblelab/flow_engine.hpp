/// @file flow_engine.hpp
/// @brief Harmonic map flow d_t u = tau(u) on the torus grid, bubble detection and
/// the per-sample bookkeeping of a run.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bubblelab/adapted_bubble.hpp"
#include "bubblelab/torus_geometry.hpp"

namespace bubblelab {

struct FlowState {
  double t;
  ToroidalField3 u;
  ToroidalField3 tau;
  double energy;
  double tension_l2;
  long steps;
  double dt;  // last accepted step

  /// Projects nothing; u must already lie on the sphere. Fills the caches.
  static FlowState from_field(ToroidalField3 u, double t = 0.0);
};

/// Heun step followed by samplewise projection. Throws EnergyIncreased when
/// E(t + dt) > E(t) + 1e-8 reference_energy, and BelowGuard from the projection.
/// Throws std::invalid_argument when dt > 0.2 h^2.
FlowState step(const FlowState& state, double dt, double reference_energy);

struct BubbleDetection {
  Vec2 center;
  double lambda;
  double radius;
  double core_energy;  // energy in the ball of the solved radius
};

/// Half-cell corrected energy of u in the coordinate ball B_r(a).
double ball_energy(const ToroidalField3& u, const Vec2& a, double r);

/// a maximizes the ball energy at the solved radius, r solves E(B_r(a)) = 2 pi.
/// Throws NoBubble when E(u) < 2 pi or no ball of radius < 1/2 holds 2 pi, and
/// Unresolved when r < 3h.
BubbleDetection detect_bubble(const ToroidalField3& u);

/// Initial data for a run.
struct InitSpec {
  enum class Kind { Constant, Bubble, File };
  Kind kind = Kind::Constant;
  BubbleParams bubble;
  std::string path;
};

struct FlowConfig {
  int grid_n = 256;
  double dt_safety = 0.2;     // dt = dt_safety h^2
  double t_end = 1.0;
  int sample_every = 100;     // steps between records
  InitSpec init;
  double e_infinity = kSphereEnergy;
  int dist_every = 0;         // compute dist_z on every k-th record; 0 = never
  long max_steps = 0;         // 0 = unlimited
  bool stop_after_event = true;
  double stop_lambda_h = 0.0;  // stop once a detected lambda h exceeds this; 0 = never
};

/// One row of the flow series.
struct DiagnosticsRecord {
  double t = 0.0;
  double energy = 0.0;
  double tension_l2 = 0.0;
  double lambda = 0.0;  // NaN when no bubble is resolved
  double a1 = 0.0, a2 = 0.0;
  double ratio_scale = 0.0;
  double ratio_energy = 0.0;
  double dist_z = 0.0;  // NaN when not computed
  std::string events;   // ';'-separated tags, empty when none
};

/// Energies bracketing the loss of a resolved bubble.
struct SingularEvent {
  double t_pre, energy_pre, tension_pre, lambda_pre;
  double t_post = 0.0, energy_post = 0.0, tension_post = 0.0;
  bool closed = false;  // a post sample was found
  double drop() const { return energy_pre - energy_post; }
};

struct FlowResult {
  std::vector<DiagnosticsRecord> records;
  std::vector<SingularEvent> events;
  std::optional<FlowState> final_state;
  long rejected_steps = 0;
  bool energy_monotone = true;
  double max_sphere_defect = 0.0;
};

ToroidalField3 initial_field(const FlowConfig& config);

/// Runs to t_end (or max_steps). `sink`, when set, receives each record as it is made.
FlowResult run(const FlowConfig& config, const std::function<void(const DiagnosticsRecord&)>& sink = {});

}  // namespace bubblelab
