#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tvmpc/planner.hpp"
#include "tvmpc/sim.hpp"

namespace tvmpc {

/// One experiment: gait and controller parameters plus the disturbance,
/// noise and model-error settings. Defaults reproduce the nominal
/// diagonal-walk setup.
struct ScenarioConfig {
  std::string name{"custom"};

  double step_width{0.1};
  double step_length{0.2};
  double t_ss{1.5};
  double t_ds{0.5};
  double foot_length{0.075};
  double z_c0{1.0};
  double a_ss{0.0135};
  double a_ds{0.00135};
  double delta_z_c{0.0};
  double sample_time{0.02};
  int np{50};
  int nc{2};
  int steps{5};

  double stair_rise{0.0};
  double noise_bound{0.0};
  double noise_sigma{0.0};
  std::vector<Disturbance> pushes;
  double plant_height_offset{0.0};
  std::uint64_t seed{1};

  double mass{100.0};
  double gravity{9.81};
  double rho{1e-6};
  double jerk_limit{1.5};
  double rate_limit{0.1};
  double compliance_margin{0.02};
  double reach_x{0.4};
  double reach_y_inner{0.05};
  double reach_y_outer{0.3};
  double slack_weight{1e6};
  int slack_hard_window{15};
  double terminal_weight{100.0};
  int qp_max_iter{200};
  double kf_q_pos{1e-8};
  double kf_q_vel{1e-6};
  double kf_q_acc{1e-4};
  double kf_r{1e-4};
};

/// One control cycle of the closed loop; the CSV columns follow this order.
struct TraceRow {
  double time{0};
  double zmp_ref[2]{};
  double zmp_true[2]{};
  double zmp_meas[2]{};
  double com_pos[2]{};
  double com_vel[2]{};
  double com_acc[2]{};
  double dcm[2]{};
  double jerk[2]{};
  double z_ref{0};
  int qp_status{0};  // 0 optimal, 1 slack engaged, 2 not optimal
  int step_index{0};
  double adj_land[2]{};
};

/// Per-row context kept out of the CSV: active bounds, grounded feet and
/// the nominal landing for the row's step.
struct RowAux {
  double lo[2]{};
  double hi[2]{};
  Eigen::Vector2d support_center{0, 0};
  Eigen::Vector2d other_center{0, 0};
  bool two_feet{true};
  double dcm_support_dist{0};
  Eigen::Vector2d nominal_landing{0, 0};
};

struct Trace {
  std::vector<TraceRow> rows;
  std::vector<RowAux> aux;
};

struct Metrics {
  double max_ref_dev[2]{0, 0};
  int hard_violations{0};
  int slack_activations{0};
  double max_dcm_dist{0};
  bool completed{false};
  std::string diagnostic;
};

struct ScenarioResult {
  Trace trace;
  Metrics metrics;
};

/// Runs the closed loop: measure, filter update, control step, plant step,
/// filter predict, clock advance. Deterministic for a given config and seed.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// The five study families with their parameter variants.
std::vector<ScenarioConfig> builtin_scenarios();

/// Builtin lookup by name; nullptr when absent.
const ScenarioConfig* find_scenario(const std::vector<ScenarioConfig>& set,
                                    const std::string& name);

/// Writes the trace as CSV: header plus one row per cycle, floats at nine
/// significant digits.
void emit_csv(const Trace& trace, const std::string& path);

/// Reads a flat key = value config file ('#' starts a comment; the `push`
/// key takes "fx fy start duration" and may repeat).
ScenarioConfig load_config(const std::string& path);

/// Applies one "key=value" override to an existing config.
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

}  // namespace tvmpc
